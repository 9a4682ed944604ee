use crate::error::{Error, Result};
use crate::net::TrainConfig;

/// First and second moment estimates for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], config: &TrainConfig) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != grads.len() || state.v.len() != grads.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let config = TrainConfig::default();
        let mut state = AdamState::new(3);
        state.m = vec![0.1, -0.2, 0.0];
        state.v = vec![0.01, 0.04, 0.0];
        state.t = 0;
        let mut fresh = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 3.0];
        adam_step(&mut fresh, &mut p, &[0.0; 3], &config).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);

        let before = state.clone();
        adam_step(&mut state, &mut p, &[0.0; 3], &config).unwrap();
        for i in 0..3 {
            assert!(state.m[i].abs() <= before.m[i].abs());
            assert!(state.v[i] <= before.v[i]);
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let config = TrainConfig {
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let mut state = AdamState::new(3);
        let mut p = vec![0.0; 3];
        adam_step(&mut state, &mut p, &[3.0, -0.002, 250.0], &config).unwrap();
        assert!((p[0] + 0.01).abs() < 1e-8);
        assert!((p[1] - 0.01).abs() < 1e-7);
        assert!((p[2] + 0.01).abs() < 1e-8);
    }

    #[test]
    fn quadratic_descends_monotonically() {
        // Reference trajectory from an independent scalar simulation of Adam on f(w) = w^2 / 2.
        let config = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::default()
        };
        let mut state = AdamState::new(1);
        let mut w = [1.0];
        let mut trajectory = Vec::new();
        for _ in 0..100 {
            let g = [w[0]];
            adam_step(&mut state, &mut w, &g, &config).unwrap();
            trajectory.push(w[0]);
        }
        assert!((trajectory[0] - 0.900000001).abs() < 1e-12);
        assert!((trajectory[4] - 0.507963661927221).abs() < 1e-12);
        assert!((trajectory[99] - 0.0029366750032917173).abs() < 1e-12);

        // Monotone descent until |w| drops below 0.5, and it ends there.
        let mut prev = 1.0f64;
        for &x in trajectory.iter().take_while(|x| x.abs() >= 0.5) {
            assert!(x.abs() < prev);
            prev = x.abs();
        }
        assert!(trajectory[5].abs() < 0.5);
        assert!(trajectory[99].abs() < 0.5);
    }

    #[test]
    fn shape_mismatch() {
        let mut state = AdamState::new(2);
        let mut p = vec![0.0; 3];
        assert!(matches!(
            adam_step(&mut state, &mut p, &[0.0; 3], &TrainConfig::default()),
            Err(Error::Shape(_))
        ));
    }
}
