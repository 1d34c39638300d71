import time

from oracles import run_oracles


def test_oracle_battery_passes_under_a_minute():
    started = time.time()
    reports = run_oracles()
    elapsed = time.time() - started
    for r in reports:
        print(f"\noracle {r.name}: cases={r.cases} max_deviation={r.max_deviation:.3e} "
              f"{'PASS' if r.passed else 'FAIL'}")
    assert elapsed < 60.0, f"oracle battery took {elapsed:.1f}s"
    failed = [r.name for r in reports if not r.passed]
    assert not failed, f"oracles failed: {failed}"
    assert {r.name for r in reports} == {
        "otsu_exhaustive_scan",
        "gradient_finite_difference",
        "gmm_loglik_monotone",
        "kmeans_inertia_monotone",
        "friedman_closed_form",
    }
