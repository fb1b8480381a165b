"""Model catalog: V(p) = E_p[phi(D(t) v(x))], GLBU and a disappointment model.

Every component is a closed-form catalog member, so first and second
derivatives are analytic. Components evaluate elementwise on numpy arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Union

import numpy as np

from .core import Domain, Lottery, Outcome, Tolerances, Verdict, Witness, degenerate
from .errors import (
    CurvatureDomainError,
    NonPositiveComponent,
    UnsupportedLotteryShape,
    ValidationError,
)


def _arr(v):
    return np.asarray(v, dtype=float)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


# ---------------------------------------------------------------------------
# curvature phi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCurvature:
    kind: ClassVar[str] = "identity"

    def __call__(self, y):
        return _arr(y) * 1.0

    def d1(self, y):
        return np.ones_like(_arr(y))

    def d2(self, y):
        return np.zeros_like(_arr(y))

    def admits(self, lo: float, hi: float) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PowerCurvature:
    """phi(y) = y**gamma on y > 0."""

    gamma: float
    kind: ClassVar[str] = "power"

    def __post_init__(self):
        _require(self.gamma > 0, "γ must be positive")

    def __call__(self, y):
        return _arr(y) ** self.gamma

    def d1(self, y):
        y = _arr(y)
        return self.gamma * y ** (self.gamma - 1.0)

    def d2(self, y):
        y = _arr(y)
        return self.gamma * (self.gamma - 1.0) * y ** (self.gamma - 2.0)

    def admits(self, lo: float, hi: float) -> bool:
        return lo > 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class NegNegLogPow:
    """phi(y) = -(-log y)**b on 0 < y < 1."""

    b: float
    kind: ClassVar[str] = "neg_neglog_pow"

    def __post_init__(self):
        _require(0 < self.b < 1, "b must lie in (0,1)")

    def __call__(self, y):
        return -((-np.log(_arr(y))) ** self.b)

    def d1(self, y):
        y = _arr(y)
        L = -np.log(y)
        return self.b * L ** (self.b - 1.0) / y

    def d2(self, y):
        y = _arr(y)
        L = -np.log(y)
        return -self.b / y**2 * ((self.b - 1.0) * L ** (self.b - 2.0) + L ** (self.b - 1.0))

    def admits(self, lo: float, hi: float) -> bool:
        return 0 < lo and hi < 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b": self.b}


@dataclass(frozen=True)
class TransformedCurvature:
    """y -> base(exp((log y - shift) / a)); compensates a positive linear change of log D and log v."""

    base: "Curvature"
    a: float
    shift: float
    kind: ClassVar[str] = "transformed"

    def _g(self, y):
        return np.exp((np.log(_arr(y)) - self.shift) / self.a)

    def __call__(self, y):
        return self.base(self._g(y))

    def d1(self, y):
        y = _arr(y)
        g = self._g(y)
        return self.base.d1(g) * g / (self.a * y)

    def d2(self, y):
        y = _arr(y)
        g = self._g(y)
        g1 = g / (self.a * y)
        g2 = g * (1.0 / self.a - 1.0) / (self.a * y**2)
        return self.base.d2(g) * g1**2 + self.base.d1(g) * g2

    def admits(self, lo: float, hi: float) -> bool:
        if lo <= 0:
            return False
        return self.base.admits(float(self._g(lo)), float(self._g(hi)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "a": self.a, "shift": self.shift}


Curvature = Union[IdentityCurvature, PowerCurvature, NegNegLogPow, TransformedCurvature]


# ---------------------------------------------------------------------------
# discount D, parametrized through log D
# ---------------------------------------------------------------------------


class _LogParam:
    """Mixin deriving D, D', D'' from log D and its first two derivatives."""

    def __call__(self, t):
        return np.exp(self.log(t))

    def d1(self, t):
        return self(t) * self.dlog(t)

    def d2(self, t):
        g = self.dlog(t)
        return self(t) * (self.d2log(t) + g * g)


@dataclass(frozen=True)
class Exponential(_LogParam):
    """D(t) = beta**t."""

    beta: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self):
        _require(0 < self.beta < 1, "β must lie in (0,1)")

    def log(self, t):
        return _arr(t) * math.log(self.beta)

    def dlog(self, t):
        return np.full_like(_arr(t), math.log(self.beta))

    def d2log(self, t):
        return np.zeros_like(_arr(t))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta": self.beta}


@dataclass(frozen=True)
class Hyperbolic(_LogParam):
    """D(t) = 1 / (1 + k t)."""

    k: float
    kind: ClassVar[str] = "hyperbolic"

    def __post_init__(self):
        _require(self.k > 0, "k must be positive")

    def log(self, t):
        return -np.log1p(self.k * _arr(t))

    def dlog(self, t):
        return -self.k / (1.0 + self.k * _arr(t))

    def d2log(self, t):
        return self.k**2 / (1.0 + self.k * _arr(t)) ** 2

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class GeneralizedQuasiHyperbolic(_LogParam):
    """D(t) = (1 + alpha t)**(-beta / alpha)."""

    alpha: float
    beta: float
    kind: ClassVar[str] = "gen_quasi_hyperbolic"

    def __post_init__(self):
        _require(self.alpha > 0, "α must be positive")
        _require(self.beta > 0, "β must be positive")

    def log(self, t):
        return -(self.beta / self.alpha) * np.log1p(self.alpha * _arr(t))

    def dlog(self, t):
        return -self.beta / (1.0 + self.alpha * _arr(t))

    def d2log(self, t):
        return self.alpha * self.beta / (1.0 + self.alpha * _arr(t)) ** 2

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class PowerExponent(_LogParam):
    """D(t) = d**(t**a)."""

    d: float
    a: float
    kind: ClassVar[str] = "power_exponent"

    def __post_init__(self):
        _require(0 < self.d < 1, "d must lie in (0,1)")
        _require(self.a > 1, "a must exceed 1")

    def log(self, t):
        return _arr(t) ** self.a * math.log(self.d)

    def dlog(self, t):
        return self.a * _arr(t) ** (self.a - 1.0) * math.log(self.d)

    def d2log(self, t):
        with np.errstate(divide="ignore"):
            return self.a * (self.a - 1.0) * _arr(t) ** (self.a - 2.0) * math.log(self.d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, "a": self.a}


@dataclass(frozen=True)
class ExpCubic(_LogParam):
    """D(t) = exp(-t - t**3 / 3)."""

    kind: ClassVar[str] = "exp_cubic"

    def log(self, t):
        t = _arr(t)
        return -t - t**3 / 3.0

    def dlog(self, t):
        return -(1.0 + _arr(t) ** 2)

    def d2log(self, t):
        return -2.0 * _arr(t)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class TransformedDiscount(_LogParam):
    """log D' = a log D + shift."""

    base: "Discount"
    a: float
    shift: float
    kind: ClassVar[str] = "transformed"

    def log(self, t):
        return self.a * self.base.log(t) + self.shift

    def dlog(self, t):
        return self.a * self.base.dlog(t)

    def d2log(self, t):
        return self.a * self.base.d2log(t)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "a": self.a, "shift": self.shift}


Discount = Union[Exponential, Hyperbolic, GeneralizedQuasiHyperbolic, PowerExponent, ExpCubic, TransformedDiscount]


# ---------------------------------------------------------------------------
# prize value v
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityValue:
    kind: ClassVar[str] = "identity"

    def __call__(self, x):
        return _arr(x) * 1.0

    def d1(self, x):
        return np.ones_like(_arr(x))

    def log(self, x):
        return np.log(_arr(x))

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PowerValue:
    gamma: float
    kind: ClassVar[str] = "power"

    def __post_init__(self):
        _require(self.gamma > 0, "γ must be positive")

    def __call__(self, x):
        return _arr(x) ** self.gamma

    def d1(self, x):
        return self.gamma * _arr(x) ** (self.gamma - 1.0)

    def log(self, x):
        return self.gamma * np.log(_arr(x))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class BoundedRatio:
    """v(x) = c x / (1 + x), with range inside (0, 1)."""

    c: float
    kind: ClassVar[str] = "bounded_ratio"

    def __post_init__(self):
        _require(0 < self.c <= 1, "c must lie in (0,1]")

    def __call__(self, x):
        x = _arr(x)
        return self.c * x / (1.0 + x)

    def d1(self, x):
        return self.c / (1.0 + _arr(x)) ** 2

    def log(self, x):
        x = _arr(x)
        return math.log(self.c) + np.log(x) - np.log1p(x)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class TransformedValue:
    """log v' = a log v + shift."""

    base: "Value"
    a: float
    shift: float
    kind: ClassVar[str] = "transformed"

    def __call__(self, x):
        return np.exp(self.log(x))

    def d1(self, x):
        return self.a * self(x) * self.base.d1(x) / self.base(x)

    def log(self, x):
        return self.a * self.base.log(x) + self.shift

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "a": self.a, "shift": self.shift}


Value = Union[IdentityValue, PowerValue, BoundedRatio, TransformedValue]


# ---------------------------------------------------------------------------
# disappointment parts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpGain:
    """R(z) = lam * (exp(kappa z) - 1): increasing, R(0) = 0, not odd."""

    lam: float
    kappa: float
    kind: ClassVar[str] = "exp_gain"

    def __post_init__(self):
        _require(self.lam > 0, "λ must be positive")
        _require(self.kappa > 0, "κ must be positive")

    def __call__(self, z):
        return self.lam * np.expm1(self.kappa * _arr(z))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lam": self.lam, "kappa": self.kappa}


@dataclass(frozen=True)
class MeanReference:
    kind: ClassVar[str] = "mean"

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ConstantReference:
    ubar: float
    kind: ClassVar[str] = "constant"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ubar": self.ubar}


Reference = Union[MeanReference, ConstantReference]


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


class _BaseModel:
    family: ClassVar[str]
    is_eu: ClassVar[bool] = False
    discount: Discount
    value: Value
    domain: Domain

    def index(self, x, t):
        """D(t) v(x); every catalog model ranks degenerate lotteries by this."""
        return self.discount(t) * self.value(x)

    def eval_outcome(self, o: Outcome | tuple[float, float]) -> float:
        x, t = (o.x, o.t) if isinstance(o, Outcome) else o
        return self.eval_lottery(degenerate(x, t, self.domain))

    def _check_support(self, p: Lottery) -> None:
        for o, _ in p.atoms:
            self.domain.check(o.x, o.t)

    @property
    def identifier(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def grid_utility(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x grid, t grid, U) with U[i, j] the degenerate value at (x_i, t_j)."""
        xs = self.domain.x_grid(n)
        ts = self.domain.t_grid(n)
        return xs, ts, self.utility(xs[:, None], ts[None, :])

    def scale(self, n: int) -> float:
        return float(np.max(np.abs(self.grid_utility(n)[2])))

    def tolerances(self, tol: Tolerances) -> tuple[float, float]:
        return tol.resolve(self.scale(tol.grid_n))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MultiplicativeEU(_BaseModel):
    """V(p) = E_p[phi(D(t) v(x))]."""

    phi: Curvature
    discount: Discount
    value: Value
    domain: Domain
    family: ClassVar[str] = "multiplicative_eu"
    is_eu: ClassVar[bool] = True

    def __post_init__(self):
        lo, hi = self.index_range()
        if not (lo > 0 and math.isfinite(hi)):
            raise NonPositiveComponent(f"D*v must be positive and finite on the domain, got [{lo}, {hi}]")
        if not self.phi.admits(lo, hi):
            raise CurvatureDomainError(f"{self.phi.kind} curvature is undefined on Range(D*v) = [{lo!r}, {hi!r}]")

    def index_range(self) -> tuple[float, float]:
        dom = self.domain
        lo = float(self.discount(dom.t_hi) * self.value(dom.x_lo))
        hi = float(self.discount(dom.t_lo) * self.value(dom.x_hi))
        return lo, hi

    def utility(self, x, t):
        return self.phi(self.index(x, t))

    def eval_lottery(self, p: Lottery) -> float:
        self._check_support(p)
        return float(np.sum(p.probs * self.utility(p.xs, p.ts)))

    def half_half_value(self, ua, ub):
        return 0.5 * (_arr(ua) + _arr(ub))

    # analytic partial derivatives of u(x, t) = phi(D(t) v(x))
    def u_t(self, x, t):
        D1, v = self.discount.d1(t), self.value(x)
        return self.phi.d1(self.index(x, t)) * D1 * v

    def u_tt(self, x, t):
        y = self.index(x, t)
        D1, D2, v = self.discount.d1(t), self.discount.d2(t), self.value(x)
        return self.phi.d2(y) * (D1 * v) ** 2 + self.phi.d1(y) * D2 * v

    def u_xt(self, x, t):
        y = self.index(x, t)
        D, D1 = self.discount(t), self.discount.d1(t)
        v, v1 = self.value(x), self.value.d1(x)
        return self.phi.d2(y) * (D1 * v) * (D * v1) + self.phi.d1(y) * D1 * v1

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "phi": self.phi.to_dict(),
            "discount": self.discount.to_dict(),
            "value": self.value.to_dict(),
            "domain": self.domain.to_dict(),
        }


@dataclass(frozen=True)
class GLBU(_BaseModel):
    """Half-half binaries valued pi*u(best) + (1 - pi)*u(worst), u = D(t) v(x)."""

    pi_half: float
    discount: Discount
    value: Value
    domain: Domain
    family: ClassVar[str] = "glbu"

    def __post_init__(self):
        _require(0 < self.pi_half < 1, "π(½) must lie in (0,1)")

    def utility(self, x, t):
        return self.index(x, t)

    def half_half_value(self, ua, ub):
        ua, ub = _arr(ua), _arr(ub)
        return self.pi_half * np.maximum(ua, ub) + (1.0 - self.pi_half) * np.minimum(ua, ub)

    def eval_lottery(self, p: Lottery) -> float:
        self._check_support(p)
        u = self.utility(p.xs, p.ts)
        if p.is_degenerate():
            return float(u[0])
        if p.is_half_half():
            return float(self.half_half_value(u[0], u[1]))
        raise UnsupportedLotteryShape("GLBU evaluates only degenerate and half-half binary lotteries")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "pi_half": self.pi_half,
            "discount": self.discount.to_dict(),
            "value": self.value.to_dict(),
            "domain": self.domain.to_dict(),
        }


@dataclass(frozen=True)
class Disappointment(_BaseModel):
    """V(p) = E_p[u + R(u - ubar)], u = D(t) v(x), ubar the mean utility or a constant."""

    discount: Discount
    value: Value
    gain: ExpGain
    domain: Domain
    reference: Reference = field(default_factory=MeanReference)
    family: ClassVar[str] = "disappointment"

    def utility(self, x, t):
        return self.index(x, t)

    def _value(self, u, w, axis=-1):
        if isinstance(self.reference, MeanReference):
            ubar = np.sum(w * u, axis=axis, keepdims=True)
        else:
            ubar = self.reference.ubar
        return np.sum(w * (u + self.gain(u - ubar)), axis=axis)

    def half_half_value(self, ua, ub):
        ua, ub = np.broadcast_arrays(_arr(ua), _arr(ub))
        return self._value(np.stack([ua, ub], axis=-1), 0.5)

    def eval_lottery(self, p: Lottery) -> float:
        self._check_support(p)
        return float(self._value(self.utility(p.xs, p.ts), p.probs))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "discount": self.discount.to_dict(),
            "value": self.value.to_dict(),
            "gain": self.gain.to_dict(),
            "reference": self.reference.to_dict(),
            "domain": self.domain.to_dict(),
        }


Model = Union[MultiplicativeEU, GLBU, Disappointment]


def eval_outcome(m: Model, o: Outcome | tuple[float, float]) -> float:
    return m.eval_outcome(o)


def eval_lottery(m: Model, p: Lottery) -> float:
    return m.eval_lottery(p)


# ---------------------------------------------------------------------------
# constructors for the canonical examples
# ---------------------------------------------------------------------------


def check_example_constraints(phi: Curvature, discount: Discount, value: Value) -> None:
    """Sufficient conditions of the -(-log(d**(t**a) v))**b example."""
    if isinstance(phi, NegNegLogPow) and isinstance(discount, PowerExponent):
        _require(1.0 / discount.a < phi.b < 1, "b must lie in (1/a,1)")
        _require(isinstance(value, BoundedRatio), "v must have range inside (0,1) (use bounded_ratio)")


def example_model(a: float = 2.0, b: float = 0.6, d: float = 0.9, value: Value | None = None,
                  domain: Domain | None = None) -> MultiplicativeEU:
    """The strict-SI, strict-RATL example with its parameter constraints enforced."""
    value = BoundedRatio(1.0) if value is None else value
    domain = Domain(0.1, 10.0, 0.1, 5.0) if domain is None else domain
    phi, disc = NegNegLogPow(b), PowerExponent(d, a)
    check_example_constraints(phi, disc, value)
    return MultiplicativeEU(phi, disc, value, domain)


def edu(beta: float = 0.9, domain: Domain | None = None, value: Value | None = None) -> MultiplicativeEU:
    """Expected discounted utility E[beta**t v(x)]."""
    domain = Domain(1.0, 100.0, 0.0, 10.0) if domain is None else domain
    return MultiplicativeEU(IdentityCurvature(), Exponential(beta), value or IdentityValue(), domain)


# ---------------------------------------------------------------------------
# additive form and representation transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdditiveForm:
    """phi*(D*(t) + v*(x)) with phi* = phi o exp, D* = log D, v* = log v."""

    phi: Curvature
    discount: Discount
    value: Value
    domain: Domain

    def phi_star(self, z):
        return self.phi(np.exp(_arr(z)))

    def d_star(self, t):
        return self.discount.log(t)

    def v_star(self, x):
        return self.value.log(x)

    def utility(self, x, t):
        return self.phi_star(self.d_star(t) + self.v_star(x))


def convert_representation(m: MultiplicativeEU | AdditiveForm, direction: str = "to_additive"):
    if direction == "to_additive":
        if not isinstance(m, MultiplicativeEU):
            raise TypeError("to_additive expects a MultiplicativeEU model")
        xs, ts = m.domain.x_grid(64), m.domain.t_grid(64)
        if np.any(m.discount(ts) <= 0) or np.any(m.value(xs) <= 0):
            raise NonPositiveComponent("log transform needs D > 0 and v > 0")
        return AdditiveForm(m.phi, m.discount, m.value, m.domain)
    if direction == "to_multiplicative":
        if not isinstance(m, AdditiveForm):
            raise TypeError("to_multiplicative expects an AdditiveForm")
        return MultiplicativeEU(m.phi, m.discount, m.value, m.domain)
    raise ValueError(f"unknown direction {direction!r}")


def apply_representation_transform(m: MultiplicativeEU, a: float, b1: float, b2: float) -> MultiplicativeEU:
    """log D' = a log D + b1, log v' = a log v + b2, phi'(y) = phi(exp((log y - b1 - b2) / a))."""
    if not a > 0:
        raise ValidationError("a must be positive")
    if a == 1 and b1 == 0 and b2 == 0:
        return m
    return MultiplicativeEU(
        TransformedCurvature(m.phi, a, b1 + b2),
        TransformedDiscount(m.discount, a, b1),
        TransformedValue(m.value, a, b2),
        m.domain,
    )


def _second_difference_verdict(f: Callable, grid: np.ndarray, eq: float, strict: float, check: str,
                               sign: float = 1.0) -> Verdict:
    """Verdict for sign * (f(g[i-1]) + f(g[i+1]) - 2 f(g[i])) / 2 >= 0 at interior grid points."""
    vals = f(grid)
    mid = vals[1:-1]
    outer = 0.5 * (vals[:-2] + vals[2:])
    margins = sign * (outer - mid)

    def witness(i):
        pts = {"grid": [float(grid[i]), float(grid[i + 1]), float(grid[i + 2])]}
        lhs, rhs = (outer[i], mid[i]) if sign > 0 else (mid[i], outer[i])
        return Witness(check, pts, float(lhs), float(rhs))

    return Verdict.from_margins(margins, eq, strict, witness)


def _monotone_verdict(f: Callable, grid: np.ndarray, eq: float, strict: float, check: str,
                      increasing: bool) -> Verdict:
    vals = f(grid)
    margins = (vals[1:] - vals[:-1]) if increasing else (vals[:-1] - vals[1:])

    def witness(i):
        lo, hi = (vals[i + 1], vals[i]) if increasing else (vals[i], vals[i + 1])
        return Witness(check, {"grid": [float(grid[i]), float(grid[i + 1])]}, float(lo), float(hi))

    return Verdict.from_margins(margins, eq, strict, witness)


def check_representation_conditions(m: MultiplicativeEU, tol: Tolerances | None = None) -> dict[str, Verdict]:
    """Grid verdicts for the four conditions of the phi(D(t) v(x)) characterization.

    ``convexity``: phi o exp convex on log Range(D v) (and phi increasing);
    ``discount_decreasing``; ``value_increasing``; ``time_concavity``:
    t -> phi(D(t) v(x)) concave at every grid prize.
    """
    tol = tol or Tolerances()
    n = tol.grid_n
    eq, strict = m.tolerances(tol)
    lo, hi = m.index_range()
    z = np.linspace(math.log(lo), math.log(hi), n)
    phi_exp = lambda zz: m.phi(np.exp(zz))

    out: dict[str, Verdict] = {}
    conv = _second_difference_verdict(phi_exp, z, eq, strict, "phi_exp_convexity")
    incr = _monotone_verdict(phi_exp, z, eq, strict, "phi_increasing", increasing=True)
    out["convexity"] = incr if incr.violated else conv

    ts, xs = m.domain.t_grid(n), m.domain.x_grid(n)
    d_scale = float(np.max(np.abs(m.discount(ts))))
    v_scale = float(np.max(np.abs(m.value(xs))))
    out["discount_decreasing"] = _monotone_verdict(
        m.discount, ts, *tol.with_(eq_tol=None, strict_margin=None).resolve(d_scale), "discount_decreasing",
        increasing=False) if m.domain.t_len > 0 else Verdict.not_applicable("degenerate T")
    out["value_increasing"] = _monotone_verdict(
        m.value, xs, *tol.with_(eq_tol=None, strict_margin=None).resolve(v_scale), "value_increasing",
        increasing=True) if m.domain.x_len > 0 else Verdict.not_applicable("degenerate X")

    if m.domain.t_len == 0:
        out["time_concavity"] = Verdict.not_applicable("degenerate T")
    else:
        U = m.utility(xs[:, None], ts[None, :])
        mid = U[:, 1:-1]
        outer = 0.5 * (U[:, :-2] + U[:, 2:])
        margins = mid - outer

        def witness(flat):
            i, j = np.unravel_index(flat, margins.shape)
            pts = {"x": float(xs[i]), "grid": [float(ts[j]), float(ts[j + 1]), float(ts[j + 2])]}
            return Witness("time_concavity", pts, float(mid[i, j]), float(outer[i, j]))

        out["time_concavity"] = Verdict.from_margins(margins, eq, strict, witness)
    return out


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------

_PHI = {"identity": (IdentityCurvature, ()), "power": (PowerCurvature, ("gamma",)),
        "neg_neglog_pow": (NegNegLogPow, ("b",))}
_DISCOUNT = {"exponential": (Exponential, ("beta",)), "hyperbolic": (Hyperbolic, ("k",)),
             "gen_quasi_hyperbolic": (GeneralizedQuasiHyperbolic, ("alpha", "beta")),
             "power_exponent": (PowerExponent, ("d", "a")), "exp_cubic": (ExpCubic, ())}
_VALUE = {"identity": (IdentityValue, ()), "power": (PowerValue, ("gamma",)),
          "bounded_ratio": (BoundedRatio, ("c",))}
_GAIN = {"exp_gain": (ExpGain, ("lam", "kappa"))}


def _keys(d: dict, allowed: set[str], where: str) -> None:
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ValidationError(f"unknown key(s) in {where}: {sorted(extra)}")
    missing = allowed - set(d)
    if missing:
        raise ValidationError(f"missing key(s) in {where}: {sorted(missing)}")


def _component(d: dict, table: dict, where: str):
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError(f"{where} needs a 'kind'")
    if d["kind"] not in table:
        raise ValidationError(f"unknown {where} kind {d['kind']!r}; expected one of {sorted(table)}")
    cls, params = table[d["kind"]]
    _keys(d, {"kind", *params}, where)
    try:
        return cls(*(float(d[p]) for p in params))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad parameter in {where}: {exc}") from None


def _domain(d) -> Domain:
    _keys(d, {"x", "t"}, "domain")
    try:
        return Domain.from_dict(d)
    except (TypeError, IndexError, ValueError) as exc:
        raise ValidationError(f"bad domain: {exc}") from None


def model_from_dict(d: dict, enforce_example: bool = True) -> Model:
    """Validated model from its JSON form; unknown keys are errors."""
    if not isinstance(d, dict) or "family" not in d:
        raise ValidationError("model needs a 'family'")
    fam = d["family"]
    if fam == "multiplicative_eu":
        _keys(d, {"family", "phi", "discount", "value", "domain"}, "model")
        phi = _component(d["phi"], _PHI, "phi")
        disc = _component(d["discount"], _DISCOUNT, "discount")
        val = _component(d["value"], _VALUE, "value")
        if enforce_example:
            check_example_constraints(phi, disc, val)
        return MultiplicativeEU(phi, disc, val, _domain(d["domain"]))
    if fam == "glbu":
        _keys(d, {"family", "pi_half", "discount", "value", "domain"}, "model")
        return GLBU(float(d["pi_half"]), _component(d["discount"], _DISCOUNT, "discount"),
                    _component(d["value"], _VALUE, "value"), _domain(d["domain"]))
    if fam == "disappointment":
        _keys(d, {"family", "discount", "value", "gain", "reference", "domain"}, "model")
        ref = d["reference"]
        if not isinstance(ref, dict) or ref.get("kind") not in ("mean", "constant"):
            raise ValidationError("reference must be {'kind': 'mean'} or {'kind': 'constant', 'ubar': ...}")
        if ref["kind"] == "mean":
            _keys(ref, {"kind"}, "reference")
            reference: Reference = MeanReference()
        else:
            _keys(ref, {"kind", "ubar"}, "reference")
            reference = ConstantReference(float(ref["ubar"]))
        return Disappointment(_component(d["discount"], _DISCOUNT, "discount"),
                              _component(d["value"], _VALUE, "value"),
                              _component(d["gain"], _GAIN, "gain"), _domain(d["domain"]), reference)
    raise ValidationError(f"unknown model family {fam!r}")


def catalog_components() -> tuple[list[Curvature], list[Discount], list[Value]]:
    """One representative parametrization of every catalog family."""
    phis: list[Curvature] = [IdentityCurvature(), PowerCurvature(0.5), NegNegLogPow(0.6)]
    discounts: list[Discount] = [Exponential(0.9), Hyperbolic(1.0), GeneralizedQuasiHyperbolic(2.0, 1.0),
                                 PowerExponent(0.9, 2.0), ExpCubic()]
    values: list[Value] = [IdentityValue(), PowerValue(0.5), BoundedRatio(1.0)]
    return phis, discounts, values


def catalog_models(domain: Domain) -> list[MultiplicativeEU]:
    """All valid phi x D x v combinations of the representative catalog on ``domain``."""
    phis, discounts, values = catalog_components()
    out = []
    for phi in phis:
        for disc in discounts:
            for val in values:
                try:
                    out.append(MultiplicativeEU(phi, disc, val, domain))
                except (CurvatureDomainError, NonPositiveComponent):
                    continue
    return out
