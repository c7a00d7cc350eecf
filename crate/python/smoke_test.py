"""Smoke test for the spinbound Python bindings.

Build and install the extension first:

    maturin build --release -m crates/py/Cargo.toml -o target/wheels
    pip install target/wheels/spinbound_py-*.whl

then run ``python python/smoke_test.py``.
"""

import math

import spinbound_py as sb


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    singlet = sb.DensityOperator.singlet()
    assert close(singlet.concurrence(), 1.0)
    assert close(singlet.singlet_fraction, 1.0)

    mixed = sb.DensityOperator.maximally_mixed()
    assert close(mixed.concurrence(), 0.0)
    assert close(mixed.singlet_fraction, 0.25)

    for f in (0.3, 0.5, 0.75, 1.0):
        w = sb.DensityOperator.werner(f)
        assert close(w.concurrence(), max(0.0, 2 * f - 1), 1e-8), f

    # round trip through the JSON state format and the coupled basis
    w = sb.DensityOperator.werner(0.75)
    again = sb.DensityOperator.from_json(w.to_json("coupled"))
    assert close(again.concurrence(), 0.5)
    rebuilt = sb.DensityOperator(w.matrix("coupled"), basis="coupled")
    assert close(rebuilt.singlet_fraction, 0.75)

    # witness: certified, not certified, unphysical
    v = sb.witness(0.85, [0.0])
    assert v.entangled_certified and close(v.min_concurrence, 0.7)
    v = sb.witness(0.4, [0.0, 0.0, 0.3])
    assert not v.entangled_certified and v.min_concurrence == 0.0
    try:
        sb.witness(0.9, [0.0, 0.0, 0.5])
    except ValueError:
        pass
    else:
        raise AssertionError("unphysical observables accepted")
    assert close(sb.singlet_bound(0.6), 0.32)
    assert close(sb.min_concurrence_bound(0.85, 0.0), 0.7)
    assert close(sb.contour_min_ps(0.5, 0.0), 0.75)
    assert close(sb.min_concurrence_bound(sb.contour_min_ps(0.5, 0.3), 0.3), 0.5)

    # spun states: closed form agrees with the generic evaluation
    s = sb.SpunState(0.6, 0.0, 0.4, 0.3)
    assert close(s.concurrence(), 0.6 - math.sqrt(0.07), 1e-12)
    assert close(s.to_density().concurrence(), s.concurrence(), 1e-8)
    s = sb.SpunState(0.5, 0.3, 0.2, 0.1, eta=0.8, phi=1.1)
    rho = s.to_density()
    assert close(rho.twirl().concurrence(), s.concurrence(), 1e-8)
    assert close(rho.twirl(numeric=16).concurrence(), s.concurrence(), 1e-8)
    back = rho.spun_parameters()
    assert close(back.p_s, 0.5) and close(back.eta, 0.8)

    # the bound holds on sampled states and the supremum sits on it
    for m_abs, p_s, c, certified in sb.sample("ginibre", 2016, 500):
        if certified:
            assert c >= sb.min_concurrence_bound(p_s, min(m_abs, 1.0)) - 1e-9
    for m in (0.0, 0.4, 0.8):
        assert abs(sb.supremum_check(m) - sb.singlet_bound(m)) < 1e-4

    state = sb.sample_state("spun", 7, 3)
    assert 0.0 <= state.concurrence() <= 1.0
    print("spinbound_py smoke test passed")


if __name__ == "__main__":
    main()
