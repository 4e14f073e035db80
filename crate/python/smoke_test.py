"""Smoke test for the renorm_py extension module.

Build with `maturin develop -m crates/python/Cargo.toml` (or copy
target/release/librenorm_py.so to renorm_py.so next to this script) and run
`python python/smoke_test.py`.
"""

import math

import renorm_py as rp

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def main():
    s = rp.ChebSeries.fit(math.sin, 0.0, 1.0, 30)
    assert abs(s(0.3) - math.sin(0.3)) < 1e-13
    assert abs(s.derivative()(0.3) - math.cos(0.3)) < 1e-11
    assert rp.ChebSeries.from_json(s.to_json()).coeffs == s.coeffs

    p = rp.CommutingPair.translation(0.4)
    assert p.height() == 2
    q, step = p.renormalize()
    assert abs(-q.a - 0.5) < 1e-15 and step["height"] == 2
    assert abs(rp.dist_c0(p, q) - 0.1) < 1e-14

    assert abs(rp.rigid_rotation_number(0.25) - 0.25) < 1e-12
    assert rp.cf_expand(GOLDEN, 5) == [1, 1, 1, 1, 1]

    omega, bisections = rp.tune_omega(0.0, "(1)")
    assert bisections <= 60
    assert abs(rp.rotation_number(omega, 0.0) - GOLDEN) < 1e-10
    pair = rp.extract_pair(omega, 0.0)
    assert pair.validate()["valid"]
    pairs, steps, stop = rp.renorm_orbit(pair, 6)
    assert stop == "completed" and [s["height"] for s in steps] == [1] * 6
    print("eta_k(0):", " ".join(f"{z.a:.6f}" for z in pairs))

    try:
        rp.tune_omega(0.0, "1,2")
    except rp.RenormError as e:
        assert "RationalTargetError" in str(e)
    else:
        raise AssertionError("rational target accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
