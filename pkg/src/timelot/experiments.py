"""Demonstrations built on the auditor and the solvers.

* :func:`demo_local_rstl` walks the three-step chain showing that WCI, SI and
  No Future Bias force local weak RSTL around an interior point.
* :func:`glbu_tradeoff_demo` tabulates SI against weak-RATL instances for a
  grid of GLBU weights.
* :func:`scan_example_region` classifies (a, b) cells of the
  ``-(-log(d**(t**a) v))**b`` family.
* :func:`invariance_suite` checks that a positive linear change of log D
  and log v (with phi compensated) leaves every ranking unchanged.

Note on hypotheses: the local RSTL chain uses WCI twice (to add a common
term and to recombine an indifferent pair), so the demo audits WCI along
with SI and No Future Bias instead of assuming it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .axioms import check_future_bias, check_ratl, check_stochastic_impatience, check_wci, rng_for
from .core import Domain, Lottery, Tolerances, Verdict, half_half, make_lottery
from .errors import CurvatureDomainError, HypothesisFailed, ValidationError
from .models import (
    GLBU,
    BoundedRatio,
    Discount,
    Exponential,
    IdentityValue,
    MultiplicativeEU,
    NegNegLogPow,
    PowerExponent,
    TransformedDiscount,
    TransformedValue,
    Value,
    apply_representation_transform,
)
from .solvers import find_indifferent_prize, local_radius, settings_for


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# local weak RSTL chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    tau: float
    y: float
    v_spread: float  # V(1/2 (x, t-tau) + 1/2 (x, t+tau))
    v_after_wci: float  # V(1/2 (y, t) + 1/2 (x, t-tau))
    v_after_si: float  # V(1/2 (x, t) + 1/2 (y, t-tau))
    v_sure: float  # V(delta (x, t))
    step1: float
    step2: float
    step3: float
    final: float
    step1_holds: bool
    step2_holds: bool
    step3_holds: bool
    final_holds: bool
    chain_consistent: bool


@dataclass
class IncompatibilityTrace:
    x: float
    t: float
    radius: float
    tau_limit: float
    eq_tol: float
    hypotheses: dict[str, Verdict]
    rows: list[TraceRow] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(r.final_holds and r.chain_consistent for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "t": self.t,
            "radius": self.radius,
            "tau_limit": self.tau_limit,
            "eq_tol": self.eq_tol,
            "hypotheses": {k: v.to_dict() for k, v in self.hypotheses.items()},
            "rows": [asdict(r) for r in self.rows],
        }

    def to_csv(self) -> str:
        return _csv([{"x": self.x, "t": self.t, **asdict(r)} for r in self.rows])


def audit_local_rstl_hypotheses(m, tol: Tolerances) -> dict[str, Verdict]:
    nfb, _ = check_future_bias(m, "separable_logconvexity", tol)
    return {
        "wci": check_wci(m, tol),
        "stochastic_impatience": check_stochastic_impatience(m, "fourpoint", tol),
        "no_future_bias": nfb,
    }


def demo_local_rstl(m, x: float, t: float, n_tau: int = 20, tol: Tolerances | None = None,
                    hypotheses: dict[str, Verdict] | None = None,
                    taus: Sequence[float] | None = None) -> IncompatibilityTrace:
    """Trace the chain behind local weak RSTL at an interior (x, t).

    For tau in (0, s) with s the local radius (and t + tau kept inside T),
    y solves delta(y, t - tau) ~ delta(x, t) and the rows record

    1. 1/2(x,t+tau) + 1/2(x,t-tau)  >=  1/2(y,t) + 1/2(x,t-tau)   (No Future Bias + WCI)
    2. 1/2(y,t) + 1/2(x,t-tau)      >=  1/2(x,t) + 1/2(y,t-tau)   (SI)
    3. 1/2(x,t) + 1/2(y,t-tau)      ~   delta(x,t)                (WCI)

    and the composed inequality V(spread) >= V(delta(x,t)) - eq_tol.
    ``taus`` replaces the equally spaced delays; each must lie in (0, limit).
    Raises HypothesisFailed when an audited hypothesis is violated.
    """
    tol = tol or Tolerances()
    hyp = hypotheses if hypotheses is not None else audit_local_rstl_hypotheses(m, tol)
    for name in ("wci", "stochastic_impatience", "no_future_bias"):
        v = hyp[name]
        if not v.holds:
            raise HypothesisFailed(name, v.status.value)
    eq, _ = m.tolerances(tol)
    dom = m.domain
    s = local_radius(m, x, t)
    limit = min(s, dom.t_hi - t)
    settings = settings_for(m, tol, axis="x")
    # telescoping sums of values carry a few ulps of rounding
    ulp_slack = 16 * np.finfo(float).eps * max(1.0, m.scale(tol.grid_n))
    trace = IncompatibilityTrace(x, t, s, limit, eq, hyp)
    V = m.eval_lottery
    if taus is None:
        taus = [limit * k / (n_tau + 1) for k in range(1, n_tau + 1)]
    elif not all(0 < tau < limit for tau in taus):
        raise ValidationError(f"every tau must lie in (0, {limit})")
    for tau in taus:
        y = find_indifferent_prize(m, x, t, tau, settings)
        spread = V(half_half((x, t - tau), (x, t + tau), dom))
        after_wci = V(half_half((y, t), (x, t - tau), dom))
        after_si = V(half_half((x, t), (y, t - tau), dom))
        sure = V(make_lottery([(x, t, 1.0)], dom))
        s1, s2, s3, fin = spread - after_wci, after_wci - after_si, after_si - sure, spread - sure
        ok1, ok2, ok3 = s1 >= -eq, s2 >= -eq, abs(s3) <= eq
        telescopes = abs(fin - (s1 + s2 + s3)) <= ulp_slack
        implied = (not (ok1 and ok2 and ok3)) or fin >= -3 * eq - ulp_slack
        trace.rows.append(TraceRow(tau, y, spread, after_wci, after_si, sure, s1, s2, s3, fin,
                                   bool(ok1), bool(ok2), bool(ok3), bool(fin >= -eq), bool(telescopes and implied)))
    return trace


def interior_points(domain: Domain, n: int) -> list[tuple[float, float]]:
    """n interior (x, t) points on a diagonal of the domain."""
    fr = [(k + 1) / (n + 1) for k in range(n)]
    return [(domain.x_lo + f * domain.x_len, domain.t_lo + (0.25 + 0.5 * g) * domain.t_len)
            for f, g in zip(fr, fr)]


# ---------------------------------------------------------------------------
# GLBU trade-off
# ---------------------------------------------------------------------------

GLBU_DOMAIN = Domain(1.0, 100.0, 0.0, 12.0)
DEFAULT_PI_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class GLBURow:
    pi: float
    si: str
    si_margin: float | None
    weak_ratl_instances: int
    no_future_bias: str
    probe_gap: float
    conflict: bool
    si_witness: dict | None = None


@dataclass
class GLBUTable:
    rows: list[GLBURow]
    probe: tuple[float, float, float]
    settings: dict

    @property
    def consistent(self) -> bool:
        return not any(r.conflict for r in self.rows)

    def row(self, pi: float) -> GLBURow:
        return next(r for r in self.rows if math.isclose(r.pi, pi))

    def to_dict(self) -> dict:
        return {"probe": list(self.probe), "settings": self.settings, "consistent": self.consistent,
                "rows": [asdict(r) for r in self.rows]}

    def to_csv(self) -> str:
        return _csv([{k: v for k, v in asdict(r).items() if k != "si_witness"} for r in self.rows])


def glbu_tradeoff_demo(pi_grid: Sequence[float] = DEFAULT_PI_GRID, discount: Discount | None = None,
                       value: Value | None = None, domain: Domain | None = None,
                       tol: Tolerances | None = None,
                       probe: tuple[float, float, float] = (100.0, 1.0, 11.0)) -> GLBUTable:
    """SI verdict, weak-RATL instance count and No Future Bias per GLBU weight.

    A row is a conflict when SI holds while some half-half time lottery is
    strictly worse than its mean date; with a No Future Bias base no row
    should be one. ``probe_gap`` is V(delta(x, mean)) - V(1/2(x,t1) + 1/2(x,t2))
    for the probe (x, t1, t2).
    """
    tol = tol or Tolerances()
    discount = discount or Exponential(0.9)
    value = value or IdentityValue()
    domain = domain or GLBU_DOMAIN
    base = GLBU(0.5, discount, value, domain)
    nfb, _ = check_future_bias(base, "separable_logconvexity", tol)
    if not nfb.holds:
        raise HypothesisFailed("no_future_bias", "base log-discount is not convex on T")
    px, pt1, pt2 = probe
    rows = []
    for pi in pi_grid:
        m = GLBU(float(pi), discount, value, domain)
        si = check_stochastic_impatience(m, "fourpoint", tol)
        weak_ratl, _ = check_ratl(m, "midpoint", tol)
        n_ratl = weak_ratl.counts.strict
        gap = m.eval_outcome((px, 0.5 * (pt1 + pt2))) - m.eval_lottery(half_half((px, pt1), (px, pt2), domain))
        rows.append(GLBURow(float(pi), si.status.value, si.margin, n_ratl, nfb.status.value, gap,
                            si.holds and n_ratl > 0,
                            None if si.witness is None else si.witness.to_dict()))
    return GLBUTable(rows, probe, {"tolerances": tol.to_dict(), "domain": domain.to_dict(),
                                   "discount": discount.to_dict(), "value": value.to_dict()})


# ---------------------------------------------------------------------------
# (a, b) region scan of the -(-log(d**(t**a) v))**b family
# ---------------------------------------------------------------------------

EXAMPLE_DOMAIN = Domain(0.1, 10.0, 0.1, 5.0)


@dataclass(frozen=True)
class RegionCell:
    a: float
    b: float
    status: str  # "guaranteed" | "outside_guarantee" | "invalid"
    strict_si: bool | None
    strict_ratl: bool | None
    si_margin: float | None = None
    ratl_margin: float | None = None
    reason: str | None = None


@dataclass
class RegionMap:
    d: float
    cells: list[RegionCell]
    settings: dict

    @property
    def guarantee_holds(self) -> bool:
        return all(c.strict_si and c.strict_ratl for c in self.cells if c.status == "guaranteed")

    def to_dict(self) -> dict:
        return {"d": self.d, "settings": self.settings, "guarantee_holds": self.guarantee_holds,
                "cells": [asdict(c) for c in self.cells]}

    def to_csv(self) -> str:
        return _csv([asdict(c) for c in self.cells])


def classify_cell(a: float, b: float, d: float, value: Value, domain: Domain, tol: Tolerances) -> RegionCell:
    if not (a > 1 and 0 < b < 1 and 0 < d < 1):
        return RegionCell(a, b, "invalid", None, None, reason="needs a > 1, 0 < b < 1, 0 < d < 1")
    status = "guaranteed" if 1.0 / a < b else "outside_guarantee"
    try:
        m = MultiplicativeEU(NegNegLogPow(b), PowerExponent(d, a), value, domain)
    except (ValidationError, CurvatureDomainError) as exc:
        return RegionCell(a, b, "invalid", None, None, reason=str(exc))
    si = check_stochastic_impatience(m, "fourpoint", tol)
    ratl, _ = check_ratl(m, "concavity", tol)
    return RegionCell(a, b, status, si.strict, ratl.strict, si.margin, ratl.margin)


def scan_example_region(a_range: tuple[float, float] = (1.0, 3.0), b_range: tuple[float, float] = (0.0, 1.0),
                        d: float = 0.9, value: Value | None = None, domain: Domain | None = None,
                        cells: int = 50, tol: Tolerances | None = None, threads: int | None = None) -> RegionMap:
    """Audit strict SI and strict RATL at the centers of a cells x cells grid over (a, b).

    Cells with a > 1 and 1/a < b < 1 are covered by the sufficient
    conditions and must show both flags; other valid cells are audited and
    marked ``outside_guarantee``. As b approaches 1 the SI margins shrink
    towards zero, so cells very close to b = 1 can fall under the strict
    threshold while every margin stays positive; ``si_margin`` shows this.
    """
    value = value or BoundedRatio(1.0)
    domain = domain or EXAMPLE_DOMAIN
    tol = tol or Tolerances(grid_n=21)
    if not 0 < d < 1:
        raise ValidationError("d must lie in (0,1)")
    if not float(value(domain.x_hi)) < 1:
        raise ValidationError("v must have range inside (0,1)")
    a_c = [a_range[0] + (i + 0.5) * (a_range[1] - a_range[0]) / cells for i in range(cells)]
    b_c = [b_range[0] + (j + 0.5) * (b_range[1] - b_range[0]) / cells for j in range(cells)]
    grid = [(a, b) for a in a_c for b in b_c]
    workers = threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as ex:
        out = list(ex.map(lambda ab: classify_cell(ab[0], ab[1], d, value, domain, tol), grid))
    return RegionMap(d, out, {"a_range": list(a_range), "b_range": list(b_range), "cells": cells,
                              "value": value.to_dict(), "domain": domain.to_dict(),
                              "tolerances": tol.to_dict()})


# ---------------------------------------------------------------------------
# uniqueness of the representation
# ---------------------------------------------------------------------------


@dataclass
class InvarianceResult:
    agree: bool
    n_pairs: int
    ties: int
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.agree

    def to_dict(self) -> dict:
        return asdict(self)


def broken_transform(m: MultiplicativeEU, a: float, b1: float, b2: float) -> MultiplicativeEU:
    """Transform log D and log v but keep phi unchanged (a negative control)."""
    return MultiplicativeEU(m.phi, TransformedDiscount(m.discount, a, b1), TransformedValue(m.value, a, b2),
                            m.domain)


def sample_lottery_pairs(domain: Domain, n: int, rng: np.random.Generator) -> list[tuple[Lottery, Lottery]]:
    def one():
        k = int(rng.integers(1, 6))
        xs = rng.uniform(domain.x_lo, domain.x_hi, size=k)
        ts = rng.uniform(domain.t_lo, domain.t_hi, size=k)
        w = rng.dirichlet(np.ones(k)) if k > 1 else np.ones(1)
        return make_lottery([(float(x), float(t), float(p)) for x, t, p in zip(xs, ts, w)], domain)

    return [(one(), one()) for _ in range(n)]


def _sign(delta: float, eq: float) -> int:
    return 0 if abs(delta) <= eq else (1 if delta > 0 else -1)


def invariance_suite(m: MultiplicativeEU, a: float, b1: float, b2: float, n_pairs: int = 1000,
                     tol: Tolerances | None = None, transformed: MultiplicativeEU | None = None) -> InvarianceResult:
    """Compare rankings of n_pairs seeded lottery pairs under m and its transform."""
    tol = tol or Tolerances()
    m2 = transformed if transformed is not None else apply_representation_transform(m, a, b1, b2)
    eq1, _ = m.tolerances(tol)
    eq2, _ = m2.tolerances(tol)
    pairs = sample_lottery_pairs(m.domain, n_pairs, rng_for(tol.seed, "invariance"))
    ties = 0
    for p, q in pairs:
        d1 = m.eval_lottery(p) - m.eval_lottery(q)
        d2 = m2.eval_lottery(p) - m2.eval_lottery(q)
        s1, s2 = _sign(d1, eq1), _sign(d2, eq2)
        ties += s1 == 0
        if s1 != s2:
            return InvarianceResult(False, n_pairs, ties, {
                "p": p.to_dict(), "q": q.to_dict(), "original_diff": d1, "transformed_diff": d2,
            })
    return InvarianceResult(True, n_pairs, ties)


def to_json(obj) -> str:
    return json.dumps(obj.to_dict(), indent=2)
