"""Smoke test for the qpmrdc extension module."""

import math

import qpmrdc


def main():
    d = qpmrdc.design()
    assert 15.3 < d["period_um"] < 16.1, d
    print(f"period {d['period_um']:.4f} um, N_D {d['num_domains']}")

    g = qpmrdc.Grating(7.85, 2550, 0.04)
    print(g)
    eta = g.spectrum([0.0, 1.0, 100.5], seed=1)
    assert all(0.0 <= v <= 1.0 for v in eta), eta

    ideal = qpmrdc.Grating(7.85, 2550, 0.0).spectrum([0.0, 1.0])
    assert abs(ideal[0] - 1.0) < 1e-12
    assert abs(ideal[1] - 4.0 / math.pi**2) < 1e-12

    ens = g.ensemble([100.5, 200.5], trials=200, seed=2)
    for m, s, a in zip(ens["mean"], ens["std_error"], ens["analytic"]):
        assert abs(m - a) < 4.0 * s, (m, s, a)

    b = qpmrdc.sigma_bound_from_floor(1e-6, 2550)
    assert abs(b - 0.0227) < 5e-4, b
    back = qpmrdc.sigma_bound_from_floor(qpmrdc.pedestal_level(0.05, 2550), 2550)
    assert abs(back - 0.05) < 1e-12

    nsd = qpmrdc.nsd(0.02)
    assert 2e4 < nsd < 3.1e4, nsd
    print(f"NSD {nsd / 1e3:.1f} kHz/nm")

    wl, eff = qpmrdc.synthesize(qpmrdc.Grating.designed(), seed=3)
    assert len(wl) == 2301
    report = qpmrdc.analyze(wl, eff, qpmrdc.Grating.designed())
    print(f"sigma_bar bound {report['sigma_bound']:.4f}")
    assert report["sigma_bound"] <= 0.03

    rows = qpmrdc.converter_table()
    assert [round(r["generated_mhz_nm"], 1) for r in rows] == [0.5, 4.2, 16.7, 89.3]

    try:
        qpmrdc.Grating(7.85, 2550, 0.7)
    except ValueError as e:
        print(f"rejected: {e}")
    else:
        raise AssertionError("sigma_bar 0.7 accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
