"""Exit criteria for the default experiment (25x25 grid, seed 42).

Each test records one PASS/FAIL line, printed in the pytest terminal summary.
"""
import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from geosim import (
    Grid2D,
    Relationship,
    Rng,
    SinkhornParams,
    VariogramModel,
    empirical_variogram,
    evaluate,
    fftma_field,
    greedy_round,
    knn_adjacency,
    mst_direct,
    relational_match,
)
from geosim import cli
from geosim.harness import ExperimentConfig, run_experiments
from geosim.metrics import variogram_correlation
from geosim.transport import unit_rows
from geosim.variogram import EmpiricalVariogram

RELS = list(Relationship)


def record(label, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def report():
    return run_experiments(ExperimentConfig())


def metric(report, rel, method, name):
    return report.metric(rel, method, name)


def test_c01_permutation_exactness(report):
    exact = True
    for rel in RELS:
        x, y = report.originals[rel]
        cell = report.cells[(rel, "mst")]
        before = sorted(zip(x.values.tolist(), y.values.tolist()))
        after = sorted(zip(cell.x.values.tolist(), cell.y.values.tolist()))
        exact &= before == after
    shapes = [metric(report, r, "mst", "shape") for r in RELS]
    seconds = sum(report.cells[(r, "mst")].seconds for r in RELS)
    ok = exact and all(s == 1.0 for s in shapes) and seconds < 5.0
    record("C1 permutation exactness", ok, f"multiset-exact={exact}, shape={shapes}, mst total {seconds:.2f}s < 5s")


def test_c02_baseline_shape_degradation(report):
    band = {
        (r.value, m): metric(report, r, m, "shape")
        for r in (Relationship.GAUSSIAN_MIX, Relationship.STEP_RANDOM)
        for m in ("copula", "lu")
    }
    order = all(
        metric(report, r, "mst", "shape") > metric(report, r, m, "shape") for r in RELS for m in ("copula", "lu")
    )
    ok = all(v <= 0.65 for v in band.values()) and order
    detail = ", ".join(f"{r}/{m}={v:.3f}" for (r, m), v in band.items())
    record("C2 baseline shape degradation", ok, f"{detail} (<= 0.65); MST beats both on all five: {order}")


@pytest.mark.parametrize("method", ["mst", "lu"])
def test_c03_variogram_x(report, method):
    vals = {r.value: metric(report, r, method, "variogram_x") for r in RELS}
    ok = all(v >= 0.95 for v in vals.values())
    record(f"C3 variogram X ({method})", ok, ", ".join(f"{k}={v:.3f}" for k, v in vals.items()) + " (>= 0.95)")


def test_c04_variogram_y_ordering(report):
    accepted = []
    for r in RELS:
        mst, cop, lu = (metric(report, r, m, "variogram_y") for m in ("mst", "copula", "lu"))
        wins = mst > cop and mst > lu
        degraded = r is Relationship.STEP_RANDOM and max(mst, cop, lu) < 0.6
        accepted.append((r.value, wins or degraded, mst, cop, lu))
    n_ok = sum(a[1] for a in accepted)
    detail = "; ".join(f"{n}:{'ok' if ok else 'lost'} ({m:.3f}/{c:.3f}/{l:.3f})" for n, ok, m, c, l in accepted)
    record("C4 variogram Y ordering", n_ok >= 4, f"{n_ok}/5 rows accepted (need 4) [{detail}]")


def test_c05_sinkhorn_marginals(report):
    errors = {r.value: report.cells[(r, "mst")].marginal_error for r in RELS}
    ok = all(e <= 1e-6 for e in errors.values())
    record("C5 Sinkhorn marginals", ok, "worst per relationship " + ", ".join(f"{k}={v:.4e}" for k, v in errors.items()))


def test_c06_small_instance_oracle():
    t0 = time.perf_counter()
    gen = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(50):
        n = int(gen.integers(3, 9))
        v = unit_rows(gen.normal(size=(n, 2)))
        u = unit_rows(gen.normal(size=(n, 2)))
        adj = knn_adjacency(gen.uniform(0, 1, size=(n, 2)), 1)
        c = relational_match(v, u, adj, SinkhornParams(beta=200.0, lam=0.0, k=1, max_sinkhorn=1000))
        pi = greedy_round(c)
        sim = v @ u.T
        perms = np.array(list(itertools.permutations(range(n))))
        opt = sim[np.arange(n), perms].sum(axis=1).max()
        got = sim[np.arange(n), pi].sum()
        worst = max(worst, abs(opt - got) / abs(opt))
    seconds = time.perf_counter() - t0
    ok = worst <= 0.01 and seconds < 10.0
    record("C6 small-instance OT oracle", ok, f"worst relative gap {worst:.4f} (<= 0.01) over 50 instances in {seconds:.2f}s")


@pytest.mark.parametrize(
    "model", [VariogramModel.spherical(1.0, 12.0), VariogramModel.exponential(1.0, 6.0)], ids=["spherical", "exponential"]
)
def test_c07_fftma_fidelity(model):
    grid = Grid2D(25, 25)
    field = fftma_field(grid, model, Rng(42))
    ev = empirical_variogram(field, grid, 15, 18.0)
    theory = EmpiricalVariogram(ev.lag_centers, evaluate(model, ev.lag_centers), ev.pair_counts)
    r = variogram_correlation(ev, theory)
    record(f"C7 FFT-MA fidelity ({model.kind.value})", r >= 0.95, f"r={r:.4f} (>= 0.95)")


def test_c08_determinism(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", "--out", str(tmp_path / d)]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = names == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names
    )
    record("C8 determinism", same, f"{len(names)} output files byte-identical across two default runs: {same}")


def test_c09_closed_forms():
    sph = VariogramModel.spherical(2.0, 12.0)
    exp = VariogramModel.exponential(2.0, 6.0)
    e1 = abs(evaluate(sph, 6.0) - 0.6875 * 2.0)
    e2 = abs(evaluate(exp, 6.0) - (1 - np.exp(-3.0)) * 2.0)
    record("C9 closed forms", max(e1, e2) <= 1e-12, f"errors {e1:.1e}, {e2:.1e} (<= 1e-12)")


def test_c10_runtime(pairs, grid25):
    x, y = pairs[Relationship.GAUSSIAN_MIX]
    t0 = time.perf_counter()
    mst_direct(x, y, grid25, SinkhornParams(), Rng(42).child("sim", "mst"))
    seconds = time.perf_counter() - t0
    record("C10 runtime envelope", seconds < 5.0, f"mst_direct at n=625 took {seconds:.2f}s (< 5s)")
