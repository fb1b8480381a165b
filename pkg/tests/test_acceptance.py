"""End-to-end acceptance checks, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest

from timelot.axioms import audit, check_future_bias, check_ratl, check_stochastic_impatience, mixed_partial_fd, rng_for
from timelot.core import Domain, Tolerances, half_half
from timelot.experiments import (
    DEFAULT_PI_GRID,
    broken_transform,
    demo_local_rstl,
    glbu_tradeoff_demo,
    interior_points,
    invariance_suite,
)
from timelot.models import (
    ExpCubic,
    Hyperbolic,
    IdentityCurvature,
    IdentityValue,
    MultiplicativeEU,
    catalog_models,
    edu,
    example_model,
)
from timelot.solvers import find_indifferent_prize, local_radius, settings_for, time_certainty_equivalent


def edu_everywhere_rstl():
    m = edu(0.9, Domain(1, 100, 0, 10))
    r = audit(m, Tolerances(grid_n=41))
    weak = r["weak_ratl"].counts
    # t* solves 0.9**t* = (0.9 + 0.9**11) / 2; the lottery reaches t = 11
    wide = edu(0.9, Domain(1, 100, 0, 12))
    t_star = time_certainty_equivalent(wide, half_half((100, 1), (100, 11)))
    oracle = math.log(0.5 * (0.9 + 0.9**11)) / math.log(0.9)
    ok = (r["stochastic_impatience"].strict and weak.strict + weak.weak == 0 and r["rstl"].strict
          and abs(t_star - oracle) <= 1e-3 and abs(t_star - 4.740) <= 1e-3)
    return ok, f"SI={r['stochastic_impatience'].status.value} weak-RATL instances={weak.strict + weak.weak} " \
               f"RSTL={r['rstl'].status.value} t*={t_star:.6f} oracle={oracle:.6f}"


def example_strict_si_ratl():
    m = example_model(2.0, 0.6, 0.9, domain=Domain(0.1, 10, 0.1, 5))
    tol = Tolerances()
    r = audit(m, tol)
    dom = m.domain
    xs, ts = dom.x_grid(tol.grid_n)[1:-1], dom.t_grid(tol.grid_n)[1:-1]
    X, T = np.meshgrid(xs, ts, indexing="ij")
    a_xt, a_tt = m.u_xt(X, T), m.u_tt(X, T)
    hx, ht = tol.fd_step_frac * dom.x_len, tol.fd_step_frac * dom.t_len
    u = m.utility
    fd_xt = mixed_partial_fd(m, X, T, hx, ht)
    fd_tt = (u(X, T + ht) - 2 * u(X, T) + u(X, T - ht)) / ht**2
    err = max(float(np.max(np.abs(fd_xt - a_xt) / np.abs(a_xt))), float(np.max(np.abs(fd_tt - a_tt) / np.abs(a_tt))))
    ok = (r["stochastic_impatience"].strict and r["ratl"].strict and bool(np.all(a_xt < 0))
          and bool(np.all(a_tt < 0)) and err <= 1e-4)
    return ok, f"SI={r['stochastic_impatience'].status.value} RATL={r['ratl'].status.value} " \
               f"max u_xt={a_xt.max():.3e} max u_tt={a_tt.max():.3e} fd rel err={err:.2e}"


def expcubic_future_bias_not_ratl():
    m = MultiplicativeEU(IdentityCurvature(), ExpCubic(), IdentityValue(), Domain(1, 100, 0, 3))
    tol = Tolerances()
    _, fb = check_future_bias(m, "separable_logconvexity", tol)
    ratl, _ = check_ratl(m, "concavity", tol)
    ts = m.domain.t_grid(tol.grid_n)
    step = ts[1] - ts[0]
    Ld = m.discount.log(ts)
    second = Ld[:-2] + Ld[2:] - 2 * Ld[1:-1]
    analytic = -2 * ts[1:-1] * step**2
    sd_err = float(np.max(np.abs(second - analytic)))
    ok = fb.strict and ratl.violated and sd_err <= 1e-12
    t_mid = x_w = None
    if ratl.violated:
        w = ratl.witness.points
        x_w = w["right"][0][0]
        t_mid = w["left"][0][1]
        ok = ok and t_mid <= 0.5 and float(m.u_tt(x_w, t_mid)) > 0
    return ok, f"FB={fb.status.value} RATL={ratl.status.value} witness t={t_mid} " \
               f"second-difference err={sd_err:.1e}"


def local_rstl_chain():
    dom = Domain(1, 100, 0, 10)
    models = {"edu": edu(0.9, dom),
              "hyperbolic": MultiplicativeEU(IdentityCurvature(), Hyperbolic(1.0), IdentityValue(), dom)}
    rows = bad = 0
    for m in models.values():
        for x, t in interior_points(dom, 10):
            tr = demo_local_rstl(m, x, t, 20)
            rows += len(tr.rows)
            bad += sum(not (r.final_holds and r.chain_consistent) for r in tr.rows)
    return bad == 0 and rows == 400, f"{rows} rows, {bad} failing"


def glbu_tradeoff():
    tab = glbu_tradeoff_demo(DEFAULT_PI_GRID)
    r = tab.row(0.3)
    oracle = 100 * 0.9**6 - (0.3 * 90 + 0.7 * 100 * 0.9**11)
    ok = (len(tab.rows) == 19 and tab.consistent and r.weak_ratl_instances > 0 and r.si == "violated"
          and r.si_witness is not None and abs(r.probe_gap - oracle) <= 1e-6 and abs(r.probe_gap - 4.17736) <= 1e-5)
    return ok, f"conflicts={sum(x.conflict for x in tab.rows)} pi=0.3 gap={r.probe_gap:.7f} " \
               f"instances={r.weak_ratl_instances} SI={r.si}"


def uniqueness_invariance():
    m = edu(0.9, Domain(1, 100, 0, 10))
    good = invariance_suite(m, 2, 0.1, -0.3, 1000)
    bad = invariance_suite(m, 2, 0.1, -0.3, 1000, transformed=broken_transform(m, 2, 0.1, -0.3))
    ok = good.agree and not bad.agree and bad.witness is not None
    return ok, f"transform agrees={good.agree} negative control agrees={bad.agree}"


def catalog_oracle_agreement():
    tol = Tolerances(grid_n=41)
    models = catalog_models(Domain(0.1, 10, 0, 5))
    mismatches = []
    for m in models:
        four = check_stochastic_impatience(m, "fourpoint", tol)
        mixed = check_stochastic_impatience(m, "mixed_partial", tol)
        c_ratl, c_rstl = check_ratl(m, "concavity", tol)
        w_ratl, w_rstl = check_ratl(m, "midpoint", tol)
        if four.holds != mixed.holds or c_ratl.holds != w_ratl.holds or c_rstl.holds != w_rstl.holds:
            mismatches.append(m.identifier)
    return len(models) == 35 and not mismatches, f"{len(models)} models, {len(mismatches)} discrepancies"


def solver_certificates():
    models = catalog_models(Domain(0.1, 10, 0, 5))
    rng = rng_for(0, "acceptance_solver")
    bad = 0
    for k in range(500):
        m = models[k % len(models)]
        dom = m.domain
        x = float(rng.uniform(dom.x_lo + 0.05 * dom.x_len, dom.x_hi))
        t = float(rng.uniform(dom.t_lo + 0.05 * dom.t_len, dom.t_hi))
        tau = float(rng.uniform(0.01, 0.99)) * local_radius(m, x, t)
        s = settings_for(m)
        y = find_indifferent_prize(m, x, t, tau, s)
        if not (y < x and abs(m.eval_outcome((y, t - tau)) - m.eval_outcome((x, t))) <= s.eq_tol):
            bad += 1
    e = edu(0.9, Domain(1, 100, 0, 10))
    closed = max(abs(find_indifferent_prize(e, x, t, tau) - 0.9**tau * x)
                 for x, t, tau in [(100, 6, 2), (80, 9, 3.5), (55, 4, 1.25), (100, 5, 4.999)])
    return bad == 0 and closed <= 1e-8, f"500 calls, {bad} failing; EDU closed-form err={closed:.1e}"


CRITERIA = [
    ("EDU is everywhere RSTL", edu_everywhere_rstl),
    ("example model has strict SI and strict RATL", example_strict_si_ratl),
    ("e^(-t-t^3/3) is future biased but not RATL", expcubic_future_bias_not_ratl),
    ("local weak-RSTL chain for EDU and hyperbolic", local_rstl_chain),
    ("GLBU SI versus weak-RATL trade-off", glbu_tradeoff),
    ("ranking invariance under log-linear transforms", uniqueness_invariance),
    ("derivative and definition oracles agree over the catalog", catalog_oracle_agreement),
    ("indifferent-prize solver certificates", solver_certificates),
]


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_criterion(name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    sys.exit(1 if failed else 0)
