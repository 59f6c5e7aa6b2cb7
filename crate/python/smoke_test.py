"""Smoke test for the stacool Python module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/stacool-*.whl
"""

import math

import stacool


def main() -> None:
    assert set(stacool.FAMILIES) == {"gaussian", "sin4", "invsqrt", "vitanov"}

    p = stacool.Protocol("gaussian", 16.0)
    t0, t1 = p.window
    mid = 0.5 * (t0 + t1)
    j, g2 = p.couplings(mid)
    assert 0.0 <= j <= 0.1 and 0.0 <= g2 <= 0.1
    assert 0.0 <= p.theta(mid) <= math.pi / 2
    assert p.theta_dot(mid) <= 0.0
    assert abs(p.max_theta_dot() - 0.1) < 1e-9
    try:
        p.couplings(t1 + 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-window time accepted")

    cfg = stacool.Config.parse("protocol=gaussian mode=sta T=16\n")
    assert cfg == stacool.Config.parse(cfg.serialize())
    assert cfg.mode == "sta" and cfg.warnings == []
    try:
        stacool.Config.parse("protocol=gaussian mode=sta T=8 strict=true\n")
    except stacool.ConfigError:
        pass
    else:
        raise AssertionError("strict drive bound not enforced")

    assert "gaussian-stirap" in stacool.presets()
    out = stacool.run(stacool.Config.preset("gaussian-sta"), drives=True)
    s = out["summary"]
    assert len(out["t"]) == len(out["Pb"]) == 2000
    assert 0.17 < s["pb_final"] < 0.29, s["pb_final"]
    assert isinstance(out["drives"]["omega2"][0], complex)

    base = stacool.Config.preset("gaussian-sta-dissipative")
    deltas = stacool.detunings(-0.02, 0.02, 5)
    sw = stacool.sweep([base], deltas, workers=2)
    pb_min = sw["series"][base.label]["pb_min"]
    assert min(range(5), key=pb_min.__getitem__) == 2
    single = stacool.run(base.with_delta(deltas[4]))["summary"]["pb_min"]
    assert single == pb_min[4]

    print(stacool.check(cfg), end="")
    print(f"smoke test ok (stacool {stacool.__version__})")


if __name__ == "__main__":
    main()
