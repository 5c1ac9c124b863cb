"""Acceptance criteria; each test records one PASS/FAIL line shown in the terminal summary."""

import math
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import hat, hat_slope, lp_norm, riemann_gagliardo_p
from orlicz_hardy import corpus
from orlicz_hardy.cli import parse_config, rows_to_csv, run_campaign
from orlicz_hardy.eigen import (
    DiscreteSpace,
    check_lower_bounds,
    dense_eigen_oracle,
    fractional_modular_discrete,
    minimize_quotient,
    modular_gradient,
)
from orlicz_hardy.hardy import check_palmieri, compute_constants, reconstruct
from orlicz_hardy.modular import gagliardo_seminorm, luxemburg_norm
from orlicz_hardy.young import YoungFunction

ROOT = Path(__file__).resolve().parents[1]

# tolerances pinned from the criteria
BUDGET_MAX = 1e-3
HAND_TOL = 1e-4
RECON_TOL = 1e-6
RECON_NODES = 10_000
ORACLE_REL = 1e-2
GRAD_REL = 1e-5
EIGEN_SECONDS = 600.0


def record(k: int, ok: bool, detail: str):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def grid_rows():
    cfg = parse_config((ROOT / "configs" / "acceptance_grid.json").read_text())
    t0 = time.perf_counter()
    rows, _ = run_campaign(cfg, jobs=1)
    return rows, time.perf_counter() - t0, cfg


def _ok_rows(rows, prefix):
    return [r for r in rows if r["name"].startswith(prefix) and r["status"] == "ok"]


def test_c1_constants():
    c = compute_constants(YoungFunction.power(2), 0.75)
    exact = (c.c_H == 16 and c.C_doubling == 4 and c.C_H == 68 and c.norm_const_thm == 5)
    phi68 = c.norm_const_cor
    ok = exact and c.norm_const_thm < phi68 and abs(phi68 - 8.246) < 5e-4
    record(1, ok, f"c_H={c.c_H:g} C={c.C_doubling:g} C_H={c.C_H:g} thm={c.norm_const_thm:g} "
                  f"< phi(68)={phi68:.6g}")


def _grid_block(rows, cfg, names):
    expected = 0
    for F in cfg.young:
        for s in cfg.s_values(F):
            if 0 < s < 1 and s * F.p_minus > 1:
                expected += len(cfg.corpus) * len(names)
    got = [r for r in rows if r["name"] in names and r["status"] != "skipped"]
    return expected, got


def test_c2_modular_hardy_grid(grid_rows):
    rows, secs, cfg = grid_rows
    expected, got = _grid_block(rows, cfg, ("modular_hardy",))
    ok_rows = [r for r in got if r["status"] == "ok"]
    worst = max(float(r["ratio"]) for r in ok_rows)
    bmax = max(float(r["budget"]) for r in ok_rows)
    ok = (len(got) == expected and len(ok_rows) == expected
          and all(r["pass"] == "true" for r in ok_rows) and bmax < BUDGET_MAX)
    skipped = sum(r["status"] == "skipped" and r["name"] == "modular_hardy" for r in rows)
    record(2, ok, f"{len(ok_rows)}/{expected} rows pass, worst ratio {worst:.4g}, max budget "
                  f"{bmax:.2g} < {BUDGET_MAX:g}, {skipped} out-of-regime skips, grid {secs:.0f}s")


def test_c3_norm_hardy_grid(grid_rows):
    rows, _, cfg = grid_rows
    expected, got = _grid_block(rows, cfg, ("norm_hardy_cor", "norm_hardy_thm"))
    ok_rows = [r for r in got if r["status"] == "ok"]
    na = [r for r in got if r["status"] != "ok"]
    u0_nonzero = {e.id for e in corpus.default_corpus(8) if e.analytic_u0 not in (0.0, None)}
    # the theorem variant is only inapplicable where ||u/x^s||_G is infinite, i.e. u0 != 0
    na_ok = all(r["name"] == "norm_hardy_thm" and r["item"] in u0_nonzero and "infinite" in r["note"]
                for r in na)
    thm_u0 = [r for r in ok_rows if r["name"] == "norm_hardy_thm" and r["item"] in u0_nonzero]
    bmax = max(float(r["budget"]) for r in ok_rows)
    ok = (len(got) == expected and na_ok and all(r["pass"] == "true" for r in ok_rows)
          and bmax < BUDGET_MAX)
    worst = {n: max(float(r["ratio"]) for r in ok_rows if r["name"] == n)
             for n in ("norm_hardy_cor", "norm_hardy_thm")}
    record(3, ok, f"{len(ok_rows)} rows pass (cor worst {worst['norm_hardy_cor']:.4g}, thm worst "
                  f"{worst['norm_hardy_thm']:.4g}); {len(na)} theorem rows with u0 != 0 have "
                  f"infinite ||u/x^s||_G; {len(thm_u0)} finite u0 != 0 theorem rows")


def test_c4_local_machinery(grid_rows):
    rows, _, _ = grid_rows
    loc = _ok_rows(rows, "palmieri") + _ok_rows(rows, "local_lemma")
    both = {r["name"] for r in loc}
    grid_ok = all(r["pass"] == "true" for r in loc) and {
        "palmieri[theta=1-s]", "palmieri[theta=-s]", "local_lemma"} <= both
    ind = corpus.make("indicator", {"ell": 1.0}).function
    r = check_palmieri(ind, YoungFunction.power(2), 0.0)
    hand = (abs(r.lhs.value - 1) < HAND_TOL and abs(r.rhs.value - 1 / math.sqrt(2)) < HAND_TOL
            and r.constant == 2 and r.passed)
    record(4, grid_ok and hand,
           f"{len(loc)} Palmieri/local-lemma rows pass, worst ratio "
           f"{max(float(x['ratio']) for x in loc):.4g}; hand instance lhs={r.lhs.value:.8f} "
           f"rhs={r.rhs.value:.8f} constant={r.constant:g}")


def test_c5_reconstruction():
    errs = {}
    for e in corpus.default_corpus(RECON_NODES):
        if e.analytic_u0 == 0.0:
            u = e.function
            errs[e.id] = float(np.max(np.abs(reconstruct(u) - u(u.nodes))))
    worst = max(errs.values())
    record(5, worst < RECON_TOL, f"{len(errs)} entries with u0 = 0, worst sup error {worst:.2e}")


def test_c6_power_oracles():
    worst = 0.0
    count = 0
    for p in (1.5, 2.0, 3.0):
        F = YoungFunction.power(p)
        for e in corpus.default_corpus():
            u = e.function
            if not u.right_is_constant or u.right[2] != 0:
                continue  # not in L^p
            ref = p ** (-1 / p) * lp_norm(lambda x: float(u(np.array([x]))[0]), p, 0.0, u.x_end,
                                          points=u.nodes[u.nodes < u.x_end])
            worst = max(worst, abs(luxemburg_norm(u, F) / ref - 1))
            count += 1
    hat_u = corpus.make("hat", {"L": 2.0}).function
    for p, s in ((2.0, 0.6), (3.0, 0.5), (1.5, 0.5)):
        classical = riemann_gagliardo_p(hat, hat_slope, p, s, 2.0) ** (1 / p)
        got = gagliardo_seminorm(hat_u, YoungFunction.power(p), s, tol=1e-8)
        worst = max(worst, abs(got / (p ** (-1 / p) * classical) - 1))
        count += 1
    record(6, worst < ORACLE_REL, f"{count} norm/seminorm comparisons, worst relative gap {worst:.2e}")


def test_c7_eigen_bounds():
    t0 = time.perf_counter()
    F = YoungFunction.power(2)
    space = DiscreteSpace(1.0, 2.0, 128)
    sol = minimize_quotient(space, F, 0.75)
    checks = check_lower_bounds(sol, F)
    wsol = minimize_quotient(space, F, 0.75, weighted=True)
    wchecks = check_lower_bounds(wsol, F)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lam, _ = dense_eigen_oracle(space, 0.75)
    secs = time.perf_counter() - t0
    oracle_ok = abs(sol.Lambda_alpha / lam - 1) < ORACLE_REL
    equal = abs(sol.lambda_alpha / sol.Lambda_alpha - 1) < 1e-10
    ok = all(c.passed for c in checks + wchecks) and oracle_ok and equal and secs < EIGEN_SECONDS
    record(7, ok, f"Lambda={sol.Lambda_alpha:.6f} >= 1/68; weighted Lambda={wsol.Lambda_alpha:.6f} "
                  f">= 1/68; lambda/Lambda-1={sol.lambda_alpha / sol.Lambda_alpha - 1:.1e}; "
                  f"oracle {lam:.6f} (gap {abs(sol.Lambda_alpha / lam - 1):.1e}); {secs:.0f}s")


def test_c8_gradient():
    space = DiscreteSpace(1.0, 2.0, 12)
    rng = np.random.default_rng(2024)
    worst = 0.0
    h = 1e-6
    for F in (YoungFunction.power(2.5), YoungFunction.log_perturbed(1, 2, 1)):
        for _ in range(10):
            U = rng.normal(size=space.n)
            g = modular_gradient(space, U, F, 0.7)
            fd = np.array([(fractional_modular_discrete(space, U + h * e, F, 0.7)
                            - fractional_modular_discrete(space, U - h * e, F, 0.7)) / (2 * h)
                           for e in np.eye(space.n)])
            worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(g))
    record(8, worst < GRAD_REL, f"20 random functions x 2 families, worst relative error {worst:.1e}")


def test_c9_determinism():
    text = (ROOT / "configs" / "determinism.json").read_text()
    outs = []
    for jobs in (1, 2, 3):
        rows, _ = run_campaign(parse_config(text), jobs=jobs)
        outs.append(rows_to_csv(rows).encode())
    same = outs[0] == outs[1] == outs[2]
    record(9, same, f"{len(outs[0])} bytes, identical for --jobs 1, 2, 3")
