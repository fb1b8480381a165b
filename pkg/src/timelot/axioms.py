"""Grid and sample auditor for the behavioral axioms.

Each check compares values of two lotteries (or a derivative estimate
against zero) at every grid instance, reduces the margins with a minimum,
and reports a :class:`~timelot.core.Verdict`. Violations carry a witness
that :func:`reproduce_witness` re-evaluates from scratch.
"""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import Counts, Lottery, Status, Tolerances, Verdict, Witness, degenerate, make_lottery
from .errors import ModeUnsupported, SolverError, UnsupportedLotteryShape
from .models import GLBU, Model, MultiplicativeEU, model_from_dict
from .solvers import find_indifferent_prize, settings_for

AXIOMS = (
    "outcome_monotonicity",
    "impatience",
    "stochastic_impatience",
    "ratl",
    "rstl",
    "weak_ratl",
    "weak_rstl",
    "no_future_bias",
    "future_bias",
    "wci",
    "double_cancellation",
)

# Axioms whose violation makes an audit "fail". The remaining entries are
# classifications: rstl/weak_rstl are the mirror of the ratl pair, and
# future bias is what the phi(D v) class needs in order to reach RATL.
REQUIRED = (
    "outcome_monotonicity",
    "impatience",
    "stochastic_impatience",
    "ratl",
    "weak_ratl",
    "wci",
    "double_cancellation",
)


def rng_for(seed: int, check: str) -> np.random.Generator:
    """Independent stream per check, fixed by (seed, check name)."""
    return np.random.default_rng([seed, zlib.crc32(check.encode())])


def _entries(p: Lottery) -> list[list[float]]:
    return [[o.x, o.t, w] for o, w in p.atoms]


def _hh(a, b) -> list[list[float]]:
    """Atoms of 1/2 delta_a + 1/2 delta_b in witness form."""
    return _entries(make_lottery([(a[0], a[1], 0.5), (b[0], b[1], 0.5)]))


def _deg(a) -> list[list[float]]:
    return [[float(a[0]), float(a[1]), 1.0]]


def _lottery_witness(check: str, left, right, lhs: float, rhs: float, **extra) -> Witness:
    pts = {"left": left, "right": right}
    pts.update(extra)
    return Witness(check, pts, float(lhs), float(rhs))


def degenerate_values(m: Model, x, t):
    """Values of degenerate lotteries, vectorized."""
    u = m.utility(x, t)
    if m.is_eu:
        return u
    return m.half_half_value(u, u)


@dataclass(frozen=True)
class _Grid:
    xs: np.ndarray
    ts: np.ndarray
    U: np.ndarray
    eq: float
    strict: float


def _grid(m: Model, tol: Tolerances) -> _Grid:
    xs, ts, U = m.grid_utility(tol.grid_n)
    eq, strict = tol.resolve(float(np.max(np.abs(U))))
    return _Grid(xs, ts, U, eq, strict)


# ---------------------------------------------------------------------------
# outcome monotonicity and impatience
# ---------------------------------------------------------------------------


def check_outcome_monotonicity(m: Model, tol: Tolerances | None = None) -> Verdict:
    tol = tol or Tolerances()
    if m.domain.x_len == 0:
        return Verdict.not_applicable("degenerate prize interval")
    g = _grid(m, tol)
    W = degenerate_values(m, g.xs[:, None], g.ts[None, :])
    margins = W[1:, :] - W[:-1, :]

    def witness(flat):
        i, j = np.unravel_index(flat, margins.shape)
        hi, lo = (g.xs[i + 1], g.ts[j]), (g.xs[i], g.ts[j])
        return _lottery_witness("outcome_monotonicity", _deg(hi), _deg(lo), W[i + 1, j], W[i, j])

    return Verdict.from_margins(margins, g.eq, g.strict, witness)


def check_impatience(m: Model, tol: Tolerances | None = None) -> Verdict:
    tol = tol or Tolerances()
    if m.domain.t_len == 0:
        return Verdict.not_applicable("degenerate time interval")
    g = _grid(m, tol)
    W = degenerate_values(m, g.xs[:, None], g.ts[None, :])
    margins = W[:, :-1] - W[:, 1:]

    def witness(flat):
        i, j = np.unravel_index(flat, margins.shape)
        early, late = (g.xs[i], g.ts[j]), (g.xs[i], g.ts[j + 1])
        return _lottery_witness("impatience", _deg(early), _deg(late), W[i, j], W[i, j + 1])

    return Verdict.from_margins(margins, g.eq, g.strict, witness)


# ---------------------------------------------------------------------------
# stochastic impatience
# ---------------------------------------------------------------------------


def _si_fourpoint(m: Model, g: _Grid) -> Verdict:
    n_x, n_t = len(g.xs), len(g.ts)
    # x1 = xs[i] > x2 = xs[j]; t1 = ts[k] < t2 = ts[l]
    I, J = np.tril_indices(n_x, -1)
    K, L = np.triu_indices(n_t, 1)
    U = g.U
    lhs = m.half_half_value(U[I[:, None], K[None, :]], U[J[:, None], L[None, :]])
    rhs = m.half_half_value(U[I[:, None], L[None, :]], U[J[:, None], K[None, :]])
    margins = lhs - rhs

    def witness(flat):
        a, b = np.unravel_index(flat, margins.shape)
        x1, x2, t1, t2 = g.xs[I[a]], g.xs[J[a]], g.ts[K[b]], g.ts[L[b]]
        return _lottery_witness(
            "stochastic_impatience", _hh((x1, t1), (x2, t2)), _hh((x1, t2), (x2, t1)), lhs[a, b], rhs[a, b]
        )

    return Verdict.from_margins(margins, g.eq, g.strict, witness)


def mixed_partial_fd(m: MultiplicativeEU, x, t, hx: float, ht: float):
    """Central four-point estimate of d2u/dxdt."""
    u = m.utility
    return (u(x + hx, t + ht) - u(x + hx, t - ht) - u(x - hx, t + ht) + u(x - hx, t - ht)) / (4.0 * hx * ht)


def _si_mixed_partial(m: MultiplicativeEU, g: _Grid, tol: Tolerances) -> Verdict:
    hx, ht = tol.fd_step_frac * m.domain.x_len, tol.fd_step_frac * m.domain.t_len
    dx, dt = g.xs[1] - g.xs[0], g.ts[1] - g.ts[0]
    xi, ti = g.xs[1:-1], g.ts[1:-1]
    fd = mixed_partial_fd(m, xi[:, None], ti[None, :], hx, ht)
    # first-order four-point gap of an adjacent grid cell, in utility units
    implied = 0.5 * fd * dx * dt
    margins = -implied

    def witness(flat):
        i, j = np.unravel_index(flat, margins.shape)
        pts = {"x": float(xi[i]), "t": float(ti[j]), "hx": hx, "ht": ht, "dx": float(dx), "dt": float(dt),
               "u_xt": float(fd[i, j])}
        return Witness("stochastic_impatience:mixed_partial", pts, 0.0, float(implied[i, j]))

    return Verdict.from_margins(margins, g.eq, g.strict, witness)


def check_stochastic_impatience(m: Model, mode: str = "fourpoint", tol: Tolerances | None = None) -> Verdict:
    """Stochastic impatience on all grid quadruples, or via the sign of u_xt.

    ``mode="both"`` runs the two and returns the four-point verdict when they
    agree; on disagreement the violated side is returned with its witness.
    """
    tol = tol or Tolerances()
    if mode not in ("fourpoint", "mixed_partial", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "fourpoint" and not isinstance(m, MultiplicativeEU):
        raise ModeUnsupported("the mixed-partial characterization needs a twice differentiable EU model")
    if m.domain.x_len == 0 or m.domain.t_len == 0:
        return Verdict.not_applicable("degenerate domain")
    g = _grid(m, tol)
    if mode == "fourpoint":
        return _si_fourpoint(m, g)
    if mode == "mixed_partial":
        return _si_mixed_partial(m, g, tol)
    four, mixed = _si_fourpoint(m, g), _si_mixed_partial(m, g, tol)
    if four.violated == mixed.violated:
        return four
    return four if four.violated else mixed


# ---------------------------------------------------------------------------
# risk attitude over time lotteries
# ---------------------------------------------------------------------------


def _pair_verdicts(margins, eq, strict, witness_pair) -> tuple[Verdict, Verdict]:
    """(ratl, rstl) from RATL margins V(delta at mean time) - V(lottery)."""
    ratl = Verdict.from_margins(margins, eq, strict, lambda i: witness_pair(i, True))
    rstl = Verdict.from_margins(-np.asarray(margins), eq, strict, lambda i: witness_pair(i, False))
    return ratl, rstl


def _midpoint_margins(m: Model, g: _Grid, K: np.ndarray, L: np.ndarray):
    mids = 0.5 * (g.ts[K] + g.ts[L])
    Umid = degenerate_values(m, g.xs[:, None], mids[None, :])
    P = m.half_half_value(g.U[:, K], g.U[:, L])
    return mids, Umid, P


def _ratl_midpoint(m: Model, g: _Grid, K, L, check: str):
    mids, Umid, P = _midpoint_margins(m, g, K, L)
    margins = Umid - P

    def witness_pair(flat, ratl):
        i, b = np.unravel_index(flat, margins.shape)
        x = g.xs[i]
        sure, risky = _deg((x, mids[b])), _hh((x, g.ts[K[b]]), (x, g.ts[L[b]]))
        name = check if ratl else check.replace("ratl", "rstl")
        if ratl:
            return _lottery_witness(name, sure, risky, Umid[i, b], P[i, b])
        return _lottery_witness(name, risky, sure, P[i, b], Umid[i, b])

    return _pair_verdicts(margins, g.eq, g.strict, witness_pair)


def sample_time_lotteries(m: Model, n: int, rng: np.random.Generator) -> list[Lottery]:
    """Time lotteries with 2-5 atoms, uniform simplex weights, uniform prize and times."""
    dom = m.domain
    out = []
    for _ in range(n):
        k = int(rng.integers(2, 6))
        x = float(rng.uniform(dom.x_lo, dom.x_hi))
        ts = rng.uniform(dom.t_lo, dom.t_hi, size=k)
        w = rng.dirichlet(np.ones(k))
        out.append(make_lottery([(x, float(t), float(p)) for t, p in zip(ts, w)], dom))
    return out


def _ratl_jensen(m: Model, g: _Grid, tol: Tolerances):
    if isinstance(m, GLBU):
        na = Verdict.not_applicable("GLBU values only half-half binaries")
        return na, na
    lots = sample_time_lotteries(m, tol.sample_n, rng_for(tol.seed, "ratl_jensen"))
    vp = np.array([m.eval_lottery(p) for p in lots])
    sure = [degenerate(p.outcomes[0].x, float(np.sum(p.probs * p.ts)), m.domain) for p in lots]
    vs = np.array([m.eval_lottery(s) for s in sure])
    margins = vs - vp

    def witness_pair(i, ratl):
        a, b = _entries(sure[i]), _entries(lots[i])
        if ratl:
            return _lottery_witness("ratl:jensen_sampled", a, b, vs[i], vp[i])
        return _lottery_witness("rstl:jensen_sampled", b, a, vp[i], vs[i])

    return _pair_verdicts(margins, g.eq, g.strict, witness_pair)


def check_ratl(m: Model, mode: str = "midpoint", tol: Tolerances | None = None) -> tuple[Verdict, Verdict]:
    """(ratl, rstl) verdicts.

    ``midpoint`` compares every half-half binary on a grid prize against its
    mean date; ``concavity`` restricts that to adjacent grid dates, which for
    EU models is the second time-difference of u(x, .); ``jensen_sampled``
    draws general time lotteries.
    """
    tol = tol or Tolerances()
    if mode not in ("midpoint", "concavity", "jensen_sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "concavity" and not isinstance(m, MultiplicativeEU):
        raise ModeUnsupported("the concavity characterization needs an EU model")
    if m.domain.t_len == 0:
        na = Verdict.not_applicable("degenerate time interval")
        return na, na
    g = _grid(m, tol)
    n = len(g.ts)
    if mode == "midpoint":
        K, L = np.triu_indices(n, 1)
        return _ratl_midpoint(m, g, K, L, "weak_ratl:midpoint")
    if mode == "concavity":
        K = np.arange(n - 2)
        return _ratl_midpoint(m, g, K, K + 2, "ratl:concavity")
    return _ratl_jensen(m, g, tol)


# ---------------------------------------------------------------------------
# future bias
# ---------------------------------------------------------------------------


def _exists_verdict(instance_margins, eq, strict, witness_at) -> Verdict:
    """Existential property: holds if some instance margin is positive."""
    m = np.asarray(instance_margins, dtype=float).ravel()
    if m.size == 0:
        return Verdict.not_applicable("no instances at this resolution")
    counts = Counts.from_margins(m, eq, strict)
    i = int(np.argmax(m))
    best = float(m[i])
    if best >= strict:
        return Verdict(Status.HOLDS_STRICTLY, best, counts=counts)
    if best > eq:
        return Verdict(Status.HOLDS_WEAKLY, best, counts=counts)
    return Verdict(Status.VIOLATED, best, witness_at(i), counts=counts)


def _fb_separable(m: Model, tol: Tolerances):
    ts = m.domain.t_grid(tol.grid_n)
    Ld = m.discount.log(ts)
    scale = max(1.0, float(np.max(np.abs(Ld))))
    eq, strict = tol.eq_rel * scale, tol.strict_rel * scale
    outer = Ld[:-2] + Ld[2:]
    mid = 2.0 * Ld[1:-1]
    second = outer - mid

    def w_nfb(j):
        return Witness("no_future_bias:separable", {"t": [float(v) for v in ts[j:j + 3]]}, float(outer[j]),
                       float(mid[j]))

    def w_fb(j):
        return Witness("future_bias:separable", {"t": [float(v) for v in ts[j:j + 3]]}, float(mid[j]),
                       float(outer[j]))

    return Verdict.from_margins(second, eq, strict, w_nfb), _exists_verdict(-second, eq, strict, w_fb)


def _fb_indifference_shift(m: Model, tol: Tolerances):
    dom = m.domain
    g = _grid(m, tol)
    rng = rng_for(tol.seed, "future_bias_shift")
    s = settings_for(m, tol, axis="x")
    rows = []
    for _ in range(tol.sample_n):
        x = float(rng.uniform(dom.x_lo, dom.x_hi))
        t = float(rng.uniform(dom.t_lo, dom.t_hi))
        if not dom.interior(x, t):
            continue
        tau = float(rng.uniform(0.0, t - dom.t_lo))
        sigma = float(rng.uniform(0.0, dom.t_hi - t))
        if tau <= 0 or sigma <= 0:
            continue
        try:
            y = find_indifferent_prize(m, x, t, tau, s)
        except SolverError:
            continue
        resid = abs(m.eval_outcome((y, t - tau)) - m.eval_outcome((x, t)))
        later = m.eval_outcome((x, t + sigma))
        earlier = m.eval_outcome((y, t - tau + sigma))
        rows.append((x, t, tau, sigma, y, later, earlier, resid))
    if not rows:
        na = Verdict.not_applicable("no solvable indifference pairs were sampled")
        return na, na
    arr = np.array([r[5:] for r in rows])
    gap = arr[:, 0] - arr[:, 1]
    slack = arr[:, 2]
    # a solver residual r can move the shifted comparison by about r
    nfb_m = np.where(np.abs(gap) <= slack, np.maximum(gap, 0.0), gap - np.sign(gap) * slack)

    def w(i, nfb):
        x, t, tau, sigma, y, later, earlier, _ = rows[i]
        pts = {"x": x, "t": t, "tau": tau, "sigma": sigma, "y": y,
               "left": _deg((x, t + sigma)) if nfb else _deg((y, t - tau + sigma)),
               "right": _deg((y, t - tau + sigma)) if nfb else _deg((x, t + sigma))}
        name = "no_future_bias:indifference_shift" if nfb else "future_bias:indifference_shift"
        return Witness(name, pts, later if nfb else earlier, earlier if nfb else later)

    nfb = Verdict.from_margins(nfb_m, g.eq, g.strict, lambda i: w(i, True))
    fb = _exists_verdict(-nfb_m, g.eq, g.strict, lambda i: w(i, False))
    return nfb, fb


def check_future_bias(m: Model, mode: str = "separable_logconvexity",
                      tol: Tolerances | None = None) -> tuple[Verdict, Verdict]:
    """(no_future_bias, future_bias) verdicts.

    The separable mode reads the second differences of log D on the time
    grid (margins in log units, tolerances relative to max |log D|). The
    indifference_shift mode samples (x, t, tau, sigma), solves
    delta(y, t - tau) ~ delta(x, t) and compares the pair shifted by sigma.
    """
    tol = tol or Tolerances()
    if m.domain.t_len == 0:
        na = Verdict.not_applicable("degenerate time interval")
        return na, na
    if mode == "separable_logconvexity":
        return _fb_separable(m, tol)
    if mode == "indifference_shift":
        return _fb_indifference_shift(m, tol)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# independence-type implications
# ---------------------------------------------------------------------------


def _sample_outcomes(m: Model, rng: np.random.Generator, size) -> tuple[np.ndarray, np.ndarray]:
    dom = m.domain
    return rng.uniform(dom.x_lo, dom.x_hi, size=size), rng.uniform(dom.t_lo, dom.t_hi, size=size)


def check_wci(m: Model, tol: Tolerances | None = None) -> Verdict:
    """p >= q implies 1/2 p + 1/2 r >= 1/2 q + 1/2 r for degenerate p, q, r.

    Samples whose premise holds by less than eq_tol are skipped. Being an
    implication, the check reports HoldsWeakly at best.
    """
    tol = tol or Tolerances()
    g = _grid(m, tol)
    X, T = _sample_outcomes(m, rng_for(tol.seed, "wci"), (tol.sample_n, 3))
    V = degenerate_values(m, X, T)
    swap = V[:, 0] < V[:, 1]
    for arr in (X, T, V):
        arr[swap, 0], arr[swap, 1] = arr[swap, 1].copy(), arr[swap, 0].copy()
    keep = (V[:, 0] - V[:, 1]) >= g.eq
    X, T, V = X[keep], T[keep], V[keep]
    U = m.utility(X, T)
    lhs = m.half_half_value(U[:, 0], U[:, 2])
    rhs = m.half_half_value(U[:, 1], U[:, 2])

    def witness(i):
        p, q, r = ((X[i, k], T[i, k]) for k in range(3))
        return _lottery_witness("wci", _hh(p, r), _hh(q, r), lhs[i], rhs[i],
                                premise_left=_deg(p), premise_right=_deg(q))

    return Verdict.from_margins(lhs - rhs, g.eq, g.strict, witness, allow_strict=False)


def check_double_cancellation(m: Model, tol: Tolerances | None = None) -> Verdict:
    """(x1,t1) >= (x2,t2) and (x2,t3) >= (x3,t1) imply (x1,t3) >= (x3,t2)."""
    tol = tol or Tolerances()
    g = _grid(m, tol)
    X, T = _sample_outcomes(m, rng_for(tol.seed, "double_cancellation"), (tol.sample_n, 3))
    x1, x2, x3 = X.T
    t1, t2, t3 = T.T
    v = lambda a, b: degenerate_values(m, a, b)
    prem1 = v(x1, t1) - v(x2, t2)
    prem2 = v(x2, t3) - v(x3, t1)
    keep = (prem1 >= g.eq) & (prem2 >= g.eq)
    lhs, rhs = v(x1, t3)[keep], v(x3, t2)[keep]
    idx = np.flatnonzero(keep)

    def witness(i):
        k = idx[i]
        return _lottery_witness(
            "double_cancellation", _deg((x1[k], t3[k])), _deg((x3[k], t2[k])), lhs[i], rhs[i],
            premises=[[_deg((x1[k], t1[k])), _deg((x2[k], t2[k]))], [_deg((x2[k], t3[k])), _deg((x3[k], t1[k]))]],
        )

    return Verdict.from_margins(lhs - rhs, g.eq, g.strict, witness, allow_strict=False)


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


def _lottery(m: Model, atoms) -> Lottery:
    return make_lottery([tuple(a) for a in atoms], m.domain)


def reproduce_witness(m: Model, w: Witness) -> tuple[float, float]:
    """Recompute (lhs, rhs) of a witness from its points alone."""
    pts = w.points
    if "left" in pts:
        return m.eval_lottery(_lottery(m, pts["left"])), m.eval_lottery(_lottery(m, pts["right"]))
    if w.check.endswith(":separable"):
        Ld = m.discount.log(np.array(pts["t"]))
        outer, mid = float(Ld[0] + Ld[2]), float(2.0 * Ld[1])
        return (outer, mid) if w.check.startswith("no_future_bias") else (mid, outer)
    if w.check == "stochastic_impatience:mixed_partial":
        fd = float(mixed_partial_fd(m, pts["x"], pts["t"], pts["hx"], pts["ht"]))
        return 0.0, 0.5 * fd * pts["dx"] * pts["dt"]
    if "grid" in pts:
        raise ValueError("representation-condition witnesses are reproduced by check_representation_conditions")
    raise ValueError(f"cannot reproduce witness of kind {w.check!r}")


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


@dataclass
class AuditReport:
    model: dict
    verdicts: dict[str, Verdict]
    settings: dict = field(default_factory=dict)

    @property
    def model_id(self) -> str:
        return json.dumps(self.model, sort_keys=True, separators=(",", ":"))

    def __getitem__(self, axiom: str) -> Verdict:
        return self.verdicts[axiom]

    def failures(self, required=REQUIRED) -> list[str]:
        return [a for a in required if a in self.verdicts and self.verdicts[a].violated]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "model_id": self.model_id,
            "settings": self.settings,
            "axioms": [{"axiom": a, **self.verdicts[a].to_dict()} for a in AXIOMS if a in self.verdicts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        verdicts = {}
        for row in d["axioms"]:
            row = dict(row)
            verdicts[row.pop("axiom")] = Verdict.from_dict(row)
        return cls(d["model"], verdicts, d.get("settings", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["axiom", "verdict", "margin", "strict", "weak", "violated", "reason"])
        for a in AXIOMS:
            if a not in self.verdicts:
                continue
            v = self.verdicts[a]
            wr.writerow([a, v.status.value, "" if v.margin is None else repr(v.margin), v.counts.strict,
                         v.counts.weak, v.counts.violated, v.reason or ""])
        return buf.getvalue()

    def rebuild_model(self) -> Model:
        return model_from_dict(self.model, enforce_example=False)


def audit(m: Model, tol: Tolerances | None = None) -> AuditReport:
    """Run every applicable check with shared settings; deterministic given the seed."""
    tol = tol or Tolerances()
    eq, strict = m.tolerances(tol)
    v: dict[str, Verdict] = {}
    v["outcome_monotonicity"] = check_outcome_monotonicity(m, tol)
    v["impatience"] = check_impatience(m, tol)
    eu = isinstance(m, MultiplicativeEU)
    v["stochastic_impatience"] = check_stochastic_impatience(m, "both" if eu else "fourpoint", tol)
    v["ratl"], v["rstl"] = check_ratl(m, "concavity" if eu else "jensen_sampled", tol)
    v["weak_ratl"], v["weak_rstl"] = check_ratl(m, "midpoint", tol)
    v["no_future_bias"], v["future_bias"] = check_future_bias(m, "separable_logconvexity", tol)
    try:
        v["wci"] = check_wci(m, tol)
    except UnsupportedLotteryShape as exc:  # pragma: no cover - every catalog model values half-half binaries
        v["wci"] = Verdict.not_applicable(str(exc))
    v["double_cancellation"] = check_double_cancellation(m, tol)
    settings = {
        "tolerances": tol.to_dict(),
        "resolved": {"eq_tol": eq, "strict_margin": strict},
        "modes": {
            "stochastic_impatience": "both" if eu else "fourpoint",
            "ratl": "concavity" if eu else "jensen_sampled",
            "weak_ratl": "midpoint",
            "future_bias": "separable_logconvexity",
        },
    }
    return AuditReport(m.to_dict(), v, settings)
