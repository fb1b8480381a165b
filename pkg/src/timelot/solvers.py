"""One-dimensional monotone solvers: indifferent prizes, local radius, time certainty equivalents.

All solves are plain bisection on a bracketed monotone function of one
axis; every returned point is re-checked against the target value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .core import Lottery, Tolerances, degenerate, expected_time, is_time_lottery
from .errors import MaxIterExceeded, NonMonotoneEvaluation, NoSolution, NotATimeLottery, SolverError, Unbracketed
from .models import Model


@dataclass(frozen=True)
class SolveSettings:
    bisect_tol: float
    eq_tol: float
    max_iter: int = 200

    def __post_init__(self):
        if not (self.bisect_tol > 0 and self.eq_tol > 0):
            raise SolverError("bisect_tol and eq_tol must be positive")
        if self.max_iter < 64:
            raise SolverError("max_iter must be at least 64")


def settings_for(m: Model, tol: Tolerances | None = None, axis: str = "x") -> SolveSettings:
    tol = tol or Tolerances()
    length = m.domain.x_len if axis == "x" else m.domain.t_len
    eq, _ = m.tolerances(tol)
    return SolveSettings(bisect_tol=tol.bisect_tol * max(length, 1e-300), eq_tol=eq)


def bisect_increasing(g: Callable[[float], float], lo: float, hi: float, s: SolveSettings) -> float:
    """Root of an increasing ``g`` with g(lo) <= 0 <= g(hi).

    Stops once the bracket is narrower than ``bisect_tol`` and the residual
    is within ``eq_tol``, or the bracket can no longer be split.
    """
    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        raise NonMonotoneEvaluation(f"bracket [{lo}, {hi}] gives g = ({glo}, {ghi})")
    best, gbest = (lo, glo) if abs(glo) <= abs(ghi) else (hi, ghi)
    for _ in range(s.max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if abs(gm) < abs(gbest):
            best, gbest = mid, gm
        if gm == 0:
            return mid
        if gm < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= s.bisect_tol and abs(gbest) <= s.eq_tol:
            return best
    else:
        raise MaxIterExceeded(f"no convergence in {s.max_iter} iterations")
    if abs(gbest) <= s.eq_tol:
        return best
    raise NonMonotoneEvaluation(f"bracket collapsed with residual {gbest!r} > {s.eq_tol!r}")


def _solvable_point(m: Model, x: float, t: float) -> None:
    # the prize must beat the worst prize and the date must follow the earliest
    # one; the upper edges of X and T are allowed
    dom = m.domain
    if not (dom.x_lo < x <= dom.x_hi and dom.t_lo < t <= dom.t_hi):
        raise SolverError(f"({x}, {t}) needs x in (x_lo, x_hi] and t in (t_lo, t_hi]")


def _value(m: Model, x: float, t: float) -> float:
    return m.eval_lottery(degenerate(x, t, m.domain))


def find_indifferent_prize(m: Model, x: float, t: float, tau: float, settings: SolveSettings | None = None) -> float:
    """Prize y < x with delta(y, t - tau) ~ delta(x, t).

    Raises NoSolution when even the worst prize at t - tau beats (x, t),
    i.e. tau is beyond the local radius.
    """
    s = settings or settings_for(m, axis="x")
    dom = m.domain
    if not tau > 0:
        raise SolverError(f"tau must be positive, got {tau}")
    _solvable_point(m, x, t)
    if t - tau < dom.t_lo:
        raise SolverError(f"t - tau = {t - tau} lies before the domain start {dom.t_lo}")
    target = _value(m, x, t)
    early = t - tau

    def g(y):
        return _value(m, y, early) - target

    if g(dom.x_lo) > 0:
        raise NoSolution(f"delta({dom.x_lo}, {early}) is strictly preferred to delta({x}, {t})")
    if g(x) < 0:
        raise NonMonotoneEvaluation("earlier delivery of the same prize is not preferred")
    return bisect_increasing(g, dom.x_lo, x, s)


def local_radius(m: Model, x: float, t: float, settings: SolveSettings | None = None) -> float:
    """Radius s such that every tau in (0, s) admits an indifferent earlier prize.

    If the worst prize at the earliest date still loses to (x, t) the set of
    dates where it wins is empty and s = t - t_lo; otherwise s = t - d with
    delta(w, d) ~ delta(x, t).
    """
    dom = m.domain
    _solvable_point(m, x, t)
    target = _value(m, x, t)
    w = dom.x_lo
    if _value(m, w, dom.t_lo) < target:
        return t - dom.t_lo
    s = settings or settings_for(m, axis="t")

    # value of (w, c) decreases in c; bisect the negated gap
    def g(c):
        return target - _value(m, w, c)

    d = bisect_increasing(g, dom.t_lo, t, s)
    return t - d


def time_certainty_equivalent(m: Model, p: Lottery, settings: SolveSettings | None = None) -> float:
    """Delivery time t* with delta(x, t*) ~ p for a time lottery p with prize x."""
    if not is_time_lottery(p):
        raise NotATimeLottery("certainty equivalents need a single prize")
    x = p.outcomes[0].x
    dom = m.domain
    target = m.eval_lottery(p)
    if p.is_degenerate():
        return p.outcomes[0].t
    hi_v, lo_v = _value(m, x, dom.t_lo), _value(m, x, dom.t_hi)
    if not lo_v <= target <= hi_v:
        raise Unbracketed(f"V(p) = {target} outside [{lo_v}, {hi_v}]")
    s = settings or settings_for(m, axis="t")

    def g(c):
        return target - _value(m, x, c)

    return bisect_increasing(g, dom.t_lo, dom.t_hi, s)


def risk_attitude_instance(m: Model, p: Lottery, settings: SolveSettings | None = None) -> tuple[float, float, str]:
    """(t*, mean time, label): t* above the mean time is a risk-averse instance."""
    t_star = time_certainty_equivalent(m, p, settings)
    t_bar = expected_time(p)
    if math.isclose(t_star, t_bar, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(t_bar))):
        label = "neutral"
    else:
        label = "risk_averse" if t_star > t_bar else "risk_seeking"
    return t_star, t_bar, label
