"""Outcomes, simple lotteries, domains, tolerances and verdicts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    EmptySupport,
    NotATimeLottery,
    OutOfDomain,
    ProbabilitySumError,
    TimelotError,
)

PROB_SUM_TOL = 1e-12


def _canon(v: float) -> float:
    """Round to 12 significant digits; used only as the merge key of an outcome."""
    return float(f"{v:.12g}")


@dataclass(frozen=True)
class Domain:
    """Compact window ``X x T`` of prizes and delivery times.

    ``x_lo`` must be positive so that logarithms of prize values exist.
    A degenerate axis (``lo == hi``) is allowed; checks that need spread
    along that axis report NotApplicable.
    """

    x_lo: float
    x_hi: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        vals = (self.x_lo, self.x_hi, self.t_lo, self.t_hi)
        if not all(math.isfinite(v) for v in vals):
            raise TimelotError(f"domain bounds must be finite, got {vals}")
        if self.x_lo <= 0:
            raise TimelotError(f"x_lo must be positive, got {self.x_lo}")
        if self.t_lo < 0:
            raise TimelotError(f"t_lo must be nonnegative, got {self.t_lo}")
        if self.x_hi < self.x_lo or self.t_hi < self.t_lo:
            raise TimelotError(f"empty domain {vals}")

    @property
    def x_len(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def t_len(self) -> float:
        return self.t_hi - self.t_lo

    def contains(self, x: float, t: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.t_lo <= t <= self.t_hi

    def interior(self, x: float, t: float) -> bool:
        return self.x_lo < x < self.x_hi and self.t_lo < t < self.t_hi

    def check(self, x: float, t: float) -> None:
        if not self.contains(x, t):
            raise OutOfDomain(f"({x!r}, {t!r}) outside X=[{self.x_lo}, {self.x_hi}], T=[{self.t_lo}, {self.t_hi}]")

    def x_grid(self, n: int) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, n)

    def t_grid(self, n: int) -> np.ndarray:
        return np.linspace(self.t_lo, self.t_hi, n)

    def to_dict(self) -> dict:
        return {"x": [self.x_lo, self.x_hi], "t": [self.t_lo, self.t_hi]}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        return cls(float(d["x"][0]), float(d["x"][1]), float(d["t"][0]), float(d["t"][1]))


@dataclass(frozen=True, order=True)
class Outcome:
    x: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.t)):
            raise TimelotError(f"outcome must be finite, got ({self.x}, {self.t})")


@dataclass(frozen=True)
class Lottery:
    """Finite-support distribution over outcomes, atoms ordered by (t, x).

    Build with :func:`make_lottery`, :func:`degenerate` or :func:`mix`;
    the constructor itself does not canonicalize.
    """

    atoms: tuple[tuple[Outcome, float], ...]
    domain: Domain | None = None

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def outcomes(self) -> list[Outcome]:
        return [o for o, _ in self.atoms]

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def xs(self) -> np.ndarray:
        return np.array([o.x for o, _ in self.atoms])

    @property
    def ts(self) -> np.ndarray:
        return np.array([o.t for o, _ in self.atoms])

    def is_degenerate(self) -> bool:
        return len(self.atoms) == 1

    def is_half_half(self) -> bool:
        return len(self.atoms) == 2 and all(abs(p - 0.5) <= PROB_SUM_TOL for _, p in self.atoms)

    def entries(self) -> list[tuple[float, float, float]]:
        return [(o.x, o.t, p) for o, p in self.atoms]

    def to_dict(self) -> dict:
        return {"atoms": [{"x": o.x, "t": o.t, "p": p} for o, p in self.atoms]}


def _merge(entries: Iterable[tuple[float, float, float]]) -> list[tuple[Outcome, float]]:
    merged: dict[tuple[float, float], list] = {}
    for x, t, p in entries:
        key = (_canon(t), _canon(x))
        if key in merged:
            merged[key][1] += p
        else:
            merged[key] = [Outcome(float(x), float(t)), float(p)]
    return [(o, p) for _, (o, p) in sorted(merged.items())]


def make_lottery(entries: Sequence[tuple[float, float, float]], domain: Domain | None = None) -> Lottery:
    """Build a canonical lottery from ``(x, t, prob)`` triples.

    Duplicated outcomes are merged. Probabilities must already sum to one
    (within 1e-12); they are never renormalized.
    """
    entries = list(entries)
    if not entries:
        raise EmptySupport("lottery needs at least one atom")
    for x, t, p in entries:
        if not (p > 0 and math.isfinite(p)):
            raise ProbabilitySumError(f"probabilities must be positive, got {p!r}")
        if domain is not None:
            domain.check(x, t)
    total = math.fsum(p for _, _, p in entries)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ProbabilitySumError(f"probabilities sum to {total!r}, not 1")
    return Lottery(tuple(_merge(entries)), domain)


def degenerate(x: float, t: float, domain: Domain | None = None) -> Lottery:
    return make_lottery([(x, t, 1.0)], domain)


def half_half(a: tuple[float, float], b: tuple[float, float], domain: Domain | None = None) -> Lottery:
    """``1/2 delta_a + 1/2 delta_b`` for outcomes given as (x, t) pairs."""
    return make_lottery([(a[0], a[1], 0.5), (b[0], b[1], 0.5)], domain)


def mix(p: Lottery, q: Lottery, lam: float) -> Lottery:
    """The mixture ``lam*p + (1-lam)*q``; zero-probability atoms are dropped."""
    if not 0.0 <= lam <= 1.0:
        raise TimelotError(f"mixture weight must lie in [0, 1], got {lam}")
    if p.domain is not None and q.domain is not None and p.domain != q.domain:
        raise DomainMismatch(f"{p.domain} != {q.domain}")
    entries = [(o.x, o.t, lam * w) for o, w in p.atoms] + [(o.x, o.t, (1.0 - lam) * w) for o, w in q.atoms]
    atoms = [(o, w) for o, w in _merge(entries) if w > 0.0]
    return Lottery(tuple(atoms), p.domain if p.domain is not None else q.domain)


def is_time_lottery(p: Lottery) -> bool:
    return len({o.x for o in p.outcomes}) == 1


def expected_time(p: Lottery) -> float:
    if not is_time_lottery(p):
        raise NotATimeLottery("atoms carry more than one prize")
    return math.fsum(o.t * w for o, w in p.atoms)


def lottery_from_dict(d: dict, domain: Domain | None = None) -> Lottery:
    return make_lottery([(float(a["x"]), float(a["t"]), float(a["p"])) for a in d["atoms"]], domain)


@dataclass(frozen=True)
class Tolerances:
    """Numerical settings shared by all checks.

    ``eq_tol`` and ``strict_margin`` are absolute, in utility units. Left
    as None they are resolved per model as ``eq_rel * scale`` and
    ``strict_rel * scale`` with scale the largest |utility| on the grid.
    ``bisect_tol`` is a fraction of the axis length being searched.
    """

    eq_tol: float | None = None
    strict_margin: float | None = None
    eq_rel: float = 1e-9
    strict_rel: float = 1e-7
    fd_step_frac: float = 1e-4
    bisect_tol: float = 1e-10
    grid_n: int = 41
    sample_n: int = 2000
    seed: int = 0

    def __post_init__(self):
        for name in ("eq_tol", "strict_margin"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise TimelotError(f"{name} must be positive, got {v}")
        for name in ("eq_rel", "strict_rel", "fd_step_frac", "bisect_tol"):
            if not getattr(self, name) > 0:
                raise TimelotError(f"{name} must be positive")
        if self.grid_n < 3:
            raise TimelotError("grid_n must be at least 3")
        if self.sample_n < 1:
            raise TimelotError("sample_n must be positive")
        if self.fd_step_frac >= 0.01:
            raise TimelotError("fd_step_frac must be below 0.01")
        if not 0 <= self.seed < 2**64:
            raise TimelotError("seed must be a 64-bit unsigned integer")

    def resolve(self, scale: float) -> tuple[float, float]:
        """Absolute (eq_tol, strict_margin) for a utility scale."""
        scale = max(abs(scale), np.finfo(float).tiny)
        eq = self.eq_tol if self.eq_tol is not None else self.eq_rel * scale
        strict = self.strict_margin if self.strict_margin is not None else self.strict_rel * scale
        return eq, strict

    def with_(self, **kw) -> "Tolerances":
        d = self.to_dict()
        d.update(kw)
        return Tolerances(**d)

    def to_dict(self) -> dict:
        return {
            "eq_tol": self.eq_tol,
            "strict_margin": self.strict_margin,
            "eq_rel": self.eq_rel,
            "strict_rel": self.strict_rel,
            "fd_step_frac": self.fd_step_frac,
            "bisect_tol": self.bisect_tol,
            "grid_n": self.grid_n,
            "sample_n": self.sample_n,
            "seed": self.seed,
        }


class Status(str, enum.Enum):
    HOLDS_STRICTLY = "holds_strictly"
    HOLDS_WEAKLY = "holds_weakly"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Witness:
    """Data reproducing one comparison: ``lhs >= rhs`` was expected.

    ``points`` is JSON-shaped; lottery comparisons store ``left`` and
    ``right`` as lists of ``[x, t, p]`` atoms.
    """

    check: str
    points: dict[str, Any]
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {"check": self.check, "points": self.points, "lhs": self.lhs, "rhs": self.rhs}

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(d["check"], d["points"], float(d["lhs"]), float(d["rhs"]))


@dataclass(frozen=True)
class Counts:
    strict: int = 0
    weak: int = 0
    violated: int = 0

    @classmethod
    def from_margins(cls, margins: np.ndarray, eq_tol: float, strict: float) -> "Counts":
        m = np.asarray(margins)
        return cls(
            int(np.count_nonzero(m >= strict)),
            int(np.count_nonzero((m >= -eq_tol) & (m < strict))),
            int(np.count_nonzero(m < -eq_tol)),
        )

    def to_dict(self) -> dict:
        return {"strict": self.strict, "weak": self.weak, "violated": self.violated}


@dataclass(frozen=True)
class Verdict:
    """Result of one grid/sample check.

    "Holds" only ever means that no violation was found at the resolution
    used; a Violated verdict always carries a witness.
    """

    status: Status
    margin: float | None = None
    witness: Witness | None = None
    reason: str | None = None
    counts: Counts = field(default_factory=Counts)

    def __post_init__(self):
        if self.status is Status.VIOLATED and self.witness is None:
            raise TimelotError("a Violated verdict needs a witness")

    @classmethod
    def not_applicable(cls, reason: str) -> "Verdict":
        return cls(Status.NOT_APPLICABLE, reason=reason)

    @classmethod
    def from_margins(
        cls,
        margins: np.ndarray,
        eq_tol: float,
        strict: float,
        witness_at,
        allow_strict: bool = True,
    ) -> "Verdict":
        """Classify ``margins`` (expected >= 0); ``witness_at(i)`` builds the witness at flat index i."""
        m = np.asarray(margins, dtype=float).ravel()
        if m.size == 0:
            return cls.not_applicable("no instances at this resolution")
        counts = Counts.from_margins(m, eq_tol, strict)
        i = int(np.argmin(m))
        lo = float(m[i])
        if lo < -eq_tol:
            return cls(Status.VIOLATED, lo, witness_at(i), counts=counts)
        if allow_strict and lo >= strict:
            return cls(Status.HOLDS_STRICTLY, lo, counts=counts)
        return cls(Status.HOLDS_WEAKLY, lo, counts=counts)

    @property
    def holds(self) -> bool:
        return self.status in (Status.HOLDS_STRICTLY, Status.HOLDS_WEAKLY)

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED

    @property
    def strict(self) -> bool:
        return self.status is Status.HOLDS_STRICTLY

    def to_dict(self) -> dict:
        return {
            "verdict": self.status.value,
            "margin": self.margin,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "reason": self.reason,
            "counts": self.counts.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        w = d.get("witness")
        return cls(
            Status(d["verdict"]),
            d.get("margin"),
            None if w is None else Witness.from_dict(w),
            d.get("reason"),
            Counts(**d.get("counts", {})),
        )
