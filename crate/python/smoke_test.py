"""Quick end-to-end check of the pass_robust extension module."""

import math

import pass_robust as pr


def main() -> None:
    config = pr.ScenarioConfig(
        'trials = 3\nseed = 7\n[activation]\nmode = "continuous"\nsamples = 1000\n'
    )
    config.validate()
    assert config.trials == 3 and config.seed == 7
    assert pr.ScenarioConfig(config.to_toml()).to_toml() == config.to_toml()

    row = pr.run_scenario(config)
    assert row["trials"] == 3
    assert row["pass_lossy_wc_ar"] <= row["pass_lossy_perfect_ar"]
    assert row["baseline_wc_ar"] <= row["baseline_perfect_ar"]
    assert math.isnan(row["nonoutage_ar"])
    # axis_value is NaN for a plain run, so compare the printed form.
    assert repr(pr.run_scenario(config)) == repr(row)

    rows = pr.run_sweep(config, "pt_dbm", [-10.0, 0.0, 10.0])
    assert [r["axis_value"] for r in rows] == [-10.0, 0.0, 10.0]
    assert all(a["pass_lossy_wc_ar"] <= b["pass_lossy_wc_ar"] for a, b in zip(rows, rows[1:]))

    sol = pr.optimize(config, [20.0, 1.0, 0.0], seed=3)
    seq = [v for _, w, p in sol.trace for v in (w, p) if v is not None]
    assert all(b >= a - 1e-9 for a, b in zip(seq, seq[1:]))
    assert len(sol.w) == 4 and len(sol.layout) == 4
    assert sol.worst_case_ar <= sol.perfect_ar

    h = [complex(0.3, 0.1), complex(-0.2, 0.4)]
    g = [[complex(0.7, 0.0)], [complex(0.0, 0.5)]]
    out = pr.solve_baseband(h, g, 0.05, 1.0)
    assert abs(sum(abs(x) ** 2 for x in out["w"]) - 1.0) < 1e-9
    wc = pr.worst_case_amplitude(h, g, out["w"], 0.05)
    err, value = pr.adversarial_error(h, g, out["w"], 0.05)
    assert abs(value - wc) < 1e-12
    assert math.sqrt(sum(abs(x) ** 2 for x in err)) <= 0.05 * (1 + 1e-12)

    assert abs(pr.delta_from_probabilistic(1.0, 1 - math.exp(-1)) - 1.0) < 1e-12
    try:
        pr.delta_from_probabilistic(1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("rho = 1 must be rejected")

    report = pr.validate("exclusion")
    assert report["passed"], report
    print(f"pass_robust {pr.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
