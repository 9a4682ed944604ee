"""Smoke test for the lstar_py extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/py/Cargo.toml`.
"""

import math

import lstar_py as ls


def main():
    lstar = ls.Activation("lstar:0.25")
    assert lstar(-2.0) == -0.5
    assert lstar.derivative(0.0) == 1.0
    assert lstar.left_derivative(0.0) == 0.25
    assert lstar.piecewise(-2.0) == (0.0, -0.5)
    assert lstar.kind == "lstar" and lstar.params == [("alpha", 0.25)]
    assert str(lstar) == "lstar:0.25"
    assert ls.Activation("prelu:0.2").trainable

    swish = ls.Activation("swish:1")
    assert math.isclose(ls.lipschitz(swish, lo=-10.0, hi=0.0), 0.5, abs_tol=1e-3)
    tanhmix = ls.Activation("tanhmix:0.1:0.15")
    assert math.isclose(ls.lipschitz(tanhmix), 0.25, abs_tol=1e-3)
    assert ls.lipschitz(lstar, secant_pairs=2000, seed=1) <= 0.25 + 1e-12

    try:
        ls.Activation("lstar:-1")
    except ValueError:
        pass
    else:
        raise AssertionError("negative slope accepted")

    data = ls.Dataset.generate("fg:c=0.5,k=3,dims=4,n=20,seed=1")
    assert len(data) == 60 and data.n_dims == 4 and data.class_counts() == [20, 20, 20]
    sep = ls.class_separation(data)
    assert sep.c >= 0.95 * 0.5 and sep.recommended_l == sep.c / 2
    assert data.to_csv().startswith("label,f0,f1,f2,f3\n")

    result = ls.train("moons:sigma=0.1,n=50", ls.Activation("prelu:0.1"), widths=[8, 8], epochs=20, lr=0.01, seed=3)
    assert len(result.loss_curve) == 20 and result.test_accuracy > 0.7
    assert all(a is not None and a >= 0 for a in result.learned_af_params[:2])

    rows = ls.sweep("fg:c=0.4,n=20", slopes=[0.0, 0.1], seeds=[1, 2], widths=[8], epochs=3)
    assert [r.param for r in rows] == [0.0, 0.1] and all(r.seeds == [1, 2] for r in rows)
    again = ls.sweep("fg:c=0.4,n=20", slopes=[0.0, 0.1], seeds=[1, 2], widths=[8], epochs=3)
    assert [r.accuracies for r in rows] == [r.accuracies for r in again]

    left, right = ls.matched("fg:c=0.5,n=10", seeds=[1], widths=[8], epochs=2)
    assert left.label == "lstar:0.25" and right.label == "tanhmix:0.1:0.15"

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
