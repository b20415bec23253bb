"""Acceptance criteria, one test and one summary line each.

Tolerances and runtime limits are pinned as module constants. Criteria that
need data absent from the data root report SKIP with the reason.
"""

import time

import numpy as np
import pytest

import oracles
from conftest import have
from mdscat import config, pipeline
from mdscat.classify import smo
from mdscat.dtcwt import forward_1d, forward_2d, inverse_1d, inverse_2d
from mdscat.scattering import ScatterConfig, log_transform, multi_resolution_scatter, region_l2, scatter_transform
from test_classify import brute_force_dual, random_problem

PR_TOL, PR_SECONDS = 1e-10, 5.0
SVM_ORACLE_TOL, ORACLE_SECONDS = 1e-4, 30.0
SHIFT_RATIO, SHIFT_SECONDS = 0.5, 60.0
USPS_BAND, USPS_SECONDS = (2.0, 3.6), 30 * 60.0
TREND_SECONDS = 10 * 60.0
GLASS_BAND, GLASS_SECONDS = (20.0, 32.0), 120.0
YEAST_BAND, YEAST_SECONDS = (32.0, 40.0), 300.0
ISOLET_MAX, ISOLET_SECONDS = 7.0, 30 * 60.0


def verdict(ok):
    return "PASS" if ok else "FAIL"


def test_c1_perfect_reconstruction(acceptance_line):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n, depth = int(rng.integers(32, 257)), int(rng.integers(1, 5))
        x = rng.standard_normal(n)
        worst = max(worst, np.abs(inverse_1d(forward_1d(x, depth)) - x).max() / np.abs(x).max())
    for _ in range(60):
        h, w, depth = int(rng.integers(16, 65)), int(rng.integers(16, 65)), int(rng.integers(1, 5))
        x = rng.standard_normal((h, w))
        worst = max(worst, np.abs(inverse_2d(forward_2d(x, depth)) - x).max() / np.abs(x).max())
    secs = time.perf_counter() - start
    ok = worst < PR_TOL and secs < PR_SECONDS
    acceptance_line(f"C1 perfect reconstruction: {verdict(ok)}  max rel Linf {worst:.2e} (< {PR_TOL:g}), "
                    f"200 1D + 60 2D cases, {secs:.2f} s (< {PR_SECONDS:g} s)")
    assert ok


def test_c2_oracle_equivalence(acceptance_line):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        h, w = int(rng.integers(1, 17)), int(rng.integers(1, 17))
        r = (int(rng.choice([1, 2, 4])), int(rng.choice([1, 2, 4])))
        if r[0] // 2 > h or r[1] // 2 > w:
            r = (1, 1)
        z = rng.standard_normal((h, w)) + 1j * rng.standard_normal((h, w))
        mismatches += not np.array_equal(region_l2(z, r), oracles.region_l2_loops(z, r))
    gap = 0.0
    for seed in range(50):
        K, y, C = random_problem(1000 + seed)
        gap = max(gap, abs(smo(K, y, C).objective(K, y) - brute_force_dual(K, y, C)))
    secs = time.perf_counter() - start
    ok = mismatches == 0 and gap < SVM_ORACLE_TOL and secs < ORACLE_SECONDS
    acceptance_line(f"C2 oracle equivalence: {verdict(ok)}  region_l2 mismatches {mismatches}/200 (exact), "
                    f"SVM dual gap {gap:.1e} over 50 problems (< {SVM_ORACLE_TOL:g}, default tol), "
                    f"{secs:.1f} s (< {ORACLE_SECONDS:g} s)")
    assert ok


def _shift_statistics(imgs, regions=(1, 2, 4)):
    """Mean relative feature distance / mean relative pixel distance, per region size.

    Shifts are 1-pixel circular, averaged over the horizontal and vertical direction.
    """
    def rel(a, b):
        a, b = a.reshape(len(a), -1), b.reshape(len(b), -1)
        return (np.linalg.norm(a - b, axis=1) / np.linalg.norm(a, axis=1)).mean()

    out = []
    for r in regions:
        cfg = ScatterConfig(J=3, region=(r, r), log_enabled=False)
        feats = scatter_transform(imgs, cfg).values
        ratio = 0.0
        for axis in (1, 2):
            shifted = np.roll(imgs, 1, axis=axis)
            ratio += rel(feats, scatter_transform(shifted, cfg).values) / rel(imgs, shifted) / 2
        out.append(ratio)
    return out


def test_c3_translation_invariance(acceptance_line, digit_images):
    imgs, source = digit_images
    start = time.perf_counter()
    ratios = _shift_statistics(imgs)
    secs = time.perf_counter() - start
    shown = ", ".join(f"r={r}: {v:.3f}" for r, v in zip((1, 2, 4), ratios))
    monotone = ratios[0] > ratios[1] > ratios[2]
    if source != "usps":
        acceptance_line(f"C3 translation invariance: SKIP  USPS not under the data root; stand-in "
                        f"({source}, 50 images) feature/pixel ratios {shown}, "
                        f"monotone={monotone} (informational only)")
        pytest.skip("USPS digits not available")
    ok = ratios[1] < SHIFT_RATIO and monotone and secs < SHIFT_SECONDS
    acceptance_line(f"C3 translation invariance: {verdict(ok)}  ratios {shown} (r=2 < {SHIFT_RATIO}, "
                    f"decreasing in r), {secs:.1f} s (< {SHIFT_SECONDS:g} s)")
    assert ok


def _run_timed(cfg):
    start = time.perf_counter()
    report = pipeline.run(cfg)
    return report.data["error_pct"], time.perf_counter() - start


def test_c4_usps_reproduction(acceptance_line):
    if not have("zip.train", "zip.test"):
        acceptance_line("C4 USPS reproduction: SKIP  zip.train/zip.test not under the data root")
        pytest.skip("USPS files not available")
    err, secs = _run_timed(config.reference_config("usps"))
    ok = USPS_BAND[0] <= err <= USPS_BAND[1] and secs < USPS_SECONDS
    acceptance_line(f"C4 USPS reproduction: {verdict(ok)}  test error {err:.2f}% (band {USPS_BAND}), "
                    f"{secs:.0f} s (< {USPS_SECONDS:g} s)")
    assert ok


def test_c5_usps_trend(acceptance_line):
    if not have("zip.train", "zip.test"):
        acceptance_line("C5 USPS ablation trend: SKIP  zip.train/zip.test not under the data root")
        pytest.skip("USPS files not available")
    start = time.perf_counter()
    table = pipeline.ablation(config.reference_config("usps_desk"))
    secs = time.perf_counter() - start
    e = {v: table[v]["nolog"] for v in config.VARIANTS}
    ok = (e["MDSCATP"] <= e["MDSCAT"] <= e["DSCAT"] and e["DSCATP"] <= e["DSCAT"] and secs < TREND_SECONDS)
    shown = " ".join(f"{v}={e[v]:.2f}" for v in config.VARIANTS)
    acceptance_line(f"C5 USPS ablation trend: {verdict(ok)}  no-log errors {shown} "
                    f"(MDSCATP <= MDSCAT <= DSCAT, DSCATP <= DSCAT), {secs:.0f} s (< {TREND_SECONDS:g} s)")
    assert ok


def test_c6_glass(acceptance_line):
    if not have("glass.data"):
        acceptance_line("C6 Glass reproduction: SKIP  glass.data not under the data root")
        pytest.skip("glass.data not available")
    err, secs = _run_timed(config.reference_config("glass"))
    ok = GLASS_BAND[0] <= err <= GLASS_BAND[1] and secs < GLASS_SECONDS
    acceptance_line(f"C6 Glass reproduction: {verdict(ok)}  10-fold mean error {err:.2f}% (band {GLASS_BAND}), "
                    f"{secs:.1f} s (< {GLASS_SECONDS:g} s)")
    assert ok


def test_c7_yeast(acceptance_line):
    if not have("yeast.data"):
        acceptance_line("C7 Yeast reproduction: SKIP  yeast.data not under the data root")
        pytest.skip("yeast.data not available")
    err, secs = _run_timed(config.reference_config("yeast"))
    ok = YEAST_BAND[0] <= err <= YEAST_BAND[1] and secs < YEAST_SECONDS
    acceptance_line(f"C7 Yeast reproduction: {verdict(ok)}  10-fold mean error {err:.2f}% (band {YEAST_BAND}), "
                    f"{secs:.1f} s (< {YEAST_SECONDS:g} s)")
    assert ok


def test_c8_isolet(acceptance_line):
    if not have("isolet1+2+3+4.data", "isolet5.data"):
        acceptance_line("C8 Isolet: SKIP  isolet1+2+3+4.data/isolet5.data not under the data root")
        pytest.skip("Isolet files not available")
    cfg = config.reference_config("isolet")
    err, secs = _run_timed(cfg)
    line = f"10-fold mean error {err:.2f}% (<= {ISOLET_MAX}), {secs:.0f} s"
    ok = err <= ISOLET_MAX
    if ok and not 3.5 <= err <= 6.0:
        nolog, _ = _run_timed(cfg.replace(log=False))
        logged, _ = _run_timed(cfg.replace(log=True))
        ok = abs(logged - nolog) < 1.5
        line += f"; outside [3.5, 6]: log/no-log {logged:.2f}/{nolog:.2f} (|diff| < 1.5)"
    acceptance_line(f"C8 Isolet: {verdict(ok)}  {line}")
    assert ok


def test_c9_log_contract(acceptance_line):
    rng = np.random.default_rng(99)
    from mdscat.pyramid import ResolutionSet
    checks = []
    cases = [(rng.random((20, 16, 16)), ResolutionSet((1.0, 0.85, 0.7, 0.6, 0.5, 0.35)),
              dict(J=3, region=(2, 2), ndim=2)),
             (rng.random((20, 9)), ResolutionSet((1.0, 0.7)), dict(J=2, region=(1, 2), ndim=1))]
    for x, res, kw in cases:
        nolog = multi_resolution_scatter(x, res, ScatterConfig(log_enabled=False, **kw))
        logged = multi_resolution_scatter(x, res, ScatterConfig(log_enabled=True, **kw))
        again = multi_resolution_scatter(x, res, ScatterConfig(log_enabled=False, **kw))
        checks.append(np.array_equal(logged.values, log_transform(nolog.values, 1e-6)))
        checks.append(np.array_equal(again.values, nolog.values))
        # per element and monotone: ordering of every column is preserved
        order_kept = all(np.array_equal(np.argsort(nolog.values[:, j], kind="stable"),
                                        np.argsort(logged.values[:, j], kind="stable"))
                         for j in range(nolog.length))
        checks.append(order_kept)
    ok = all(checks)
    acceptance_line(f"C9 log contract: {verdict(ok)}  log output == log(no-log output + 1e-6) bit-exact, "
                    f"no-log path bit-identical on rerun, per-column order preserved (2D and 1D cases)")
    assert ok
