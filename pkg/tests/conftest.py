"""Shared fixtures and the acceptance-criteria report.

Tests in test_acceptance.py carry an `acceptance(n, label)` marker; after
the run a one-line PASS/FAIL verdict per criterion is printed.  The heavy
simulation summaries (30 replications x 1e6 arrivals for three parameter
sets) are computed once per session and shared by several criteria;
replications are streamed so only one sample path is alive at a time.
"""

import math

import numpy as np
import pytest

from aoi_mm11 import estimators, simulator
from aoi_mm11.model import validate

ACCEPTANCE_LABELS = {
    1: "exact minimum rho(2,2,4) = -1/6 to 1e-12",
    2: "rho < 0 on 1000 random rate triples",
    3: "|rho| < 1e-4 when any rate is 1e6",
    4: "sweep curves: negative, interior minimum, -1/6 at lambda1=2, decay",
    5: "sim vs theory: means, variances, cross moment, rho (30 x 1e6)",
    6: "empirical LST matches transform on default grid",
    7: "valid-packet fraction and service-time law",
    8: "global update-interval moments and update rate",
    9: "post-update age moments at (1,1,1)",
    10: "estimator exactness on hand-built paths (1e-12)",
    11: "bit-identical reruns: path export and estimates",
}

_results: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n, label): acceptance criterion covered by this test"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "setup" and rep.failed:
        _results[n] = "FAIL"
    elif rep.when == "call":
        if rep.failed:
            _results[n] = "FAIL"
        elif rep.skipped:
            _results.setdefault(n, "SKIP")
        else:
            # a criterion spread over several tests passes only if all do
            _results.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LABELS):
        verdict = _results.get(n, "NOT RUN")
        tr.write_line(f"ACCEPTANCE {n:2d} [{verdict:7s}] {ACCEPTANCE_LABELS[n]}")


# ---------------------------------------------------------------------------
# Heavy shared simulation summaries
# ---------------------------------------------------------------------------

ACCEPTANCE_RATE_SETS = ((1.0, 1.0, 1.0), (2.0, 2.0, 4.0), (0.5, 3.0, 2.0))
ACCEPTANCE_REPS = 30
ACCEPTANCE_ARRIVALS = 1_000_000
ACCEPTANCE_BASE_SEED = 20260814


def summarize_replications(params, n_reps, base_seed, arrivals):
    """Per-replication scalar summaries, streaming one path at a time.

    Returns a dict of arrays with leading axis = replication: per-source
    time-average mean/second moment, cross moment, valid fraction, service
    statistics, interval moments, update rate, post-update age moments, and
    empirical LST values on the default grid.
    """
    k_range = range(1, params.n_sources + 1)
    s_grids = np.stack([estimators.default_s_grid(params, k) for k in k_range])
    out = {
        "mean": np.empty((n_reps, params.n_sources)),
        "second": np.empty((n_reps, params.n_sources)),
        "cross": np.empty(n_reps),
        "valid_fraction": np.empty(n_reps),
        "service_mean": np.empty(n_reps),
        "service_var": np.empty(n_reps),
        "interval_m1": np.empty(n_reps),
        "interval_m2": np.empty(n_reps),
        "interval_m3": np.empty(n_reps),
        "update_rate": np.empty(n_reps),
        "post_mean": np.empty((n_reps, 2)),
        "post_cross": np.empty(n_reps),
        "lst": np.empty((n_reps, params.n_sources, s_grids.shape[1])),
        "s_grids": s_grids,
    }
    for r, seed in enumerate(simulator.replication_seeds(base_seed, n_reps)):
        path = simulator.run(
            simulator.SimConfig(params=params, seed=seed, arrivals=arrivals)
        )
        for k in k_range:
            out["mean"][r, k - 1], out["second"][r, k - 1] = (
                estimators.time_average_moments(path, k)
            )
            out["lst"][r, k - 1] = estimators.empirical_lst(path, k, s_grids[k - 1])
        out["cross"][r] = estimators.cross_moment(path)
        out["valid_fraction"][r] = path.valid_fraction
        svc = path.service_times
        out["service_mean"][r] = svc.mean()
        out["service_var"][r] = svc.var(ddof=1)
        intervals, _ = path.window_intervals()
        out["interval_m1"][r] = intervals.mean()
        out["interval_m2"][r] = np.mean(intervals**2)
        out["interval_m3"][r] = np.mean(intervals**3)
        out["update_rate"][r] = intervals.size / path.window_duration
        e1, e2, e12 = estimators.update_epoch_moments(path)
        out["post_mean"][r] = (e1, e2)
        out["post_cross"][r] = e12
    return out


@pytest.fixture(scope="session")
def heavy_summaries():
    """Criterion-5 scale summaries for all three acceptance rate sets."""
    result = {}
    for rates in ACCEPTANCE_RATE_SETS:
        lam1, lam2, mu = rates
        params = validate([lam1, lam2], mu)
        result[rates] = {
            "params": params,
            "stats": summarize_replications(
                params, ACCEPTANCE_REPS, ACCEPTANCE_BASE_SEED, ACCEPTANCE_ARRIVALS
            ),
        }
    return result


def mean_se(samples):
    """(mean, SD/sqrt(n)) of a replication sample along axis 0."""
    samples = np.asarray(samples)
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / math.sqrt(
        samples.shape[0]
    )


def zscore(samples, target):
    est, se = mean_se(samples)
    return (est - target) / se
