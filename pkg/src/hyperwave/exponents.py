"""Critical powers, cone weights and admissibility windows.

Everything here is closed-form double-precision arithmetic.  Verdicts carry
signed slacks so endpoint cases can be inspected rather than just accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Non-strict constraints tolerate this much negative slack (rounding only).
NONSTRICT_TOL = 1e-12


class Unbounded:
    """Marker for an interval with no finite upper end (p2 for n = 2, 3)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __gt__(self, other):
        return not isinstance(other, Unbounded)

    def __lt__(self, other):
        return False

    def __ge__(self, other):
        return True

    def __le__(self, other):
        return isinstance(other, Unbounded)

    def to_json(self):
        return "unbounded"


UNBOUNDED = Unbounded()


@dataclass(frozen=True)
class Constraint:
    label: str
    slack: float
    strict: bool

    @property
    def ok(self) -> bool:
        return self.slack > 0 if self.strict else self.slack >= -NONSTRICT_TOL


@dataclass
class AdmissibilityVerdict:
    window_name: str
    margins: list[Constraint] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return all(c.ok for c in self.margins)

    def failed(self) -> list[str]:
        return [c.label for c in self.margins if not c.ok]

    def slack(self, label: str) -> float:
        for c in self.margins:
            if c.label == label:
                return c.slack
        raise KeyError(label)

    def to_json(self):
        return {
            "window": self.window_name,
            "satisfied": self.satisfied,
            "margins": [
                {"label": c.label, "slack": c.slack, "strict": c.strict, "ok": c.ok}
                for c in self.margins
            ],
            "values": self.values,
        }


@dataclass
class ExponentContext:
    """Dimension, power and Lebesgue exponent with the derived indices.

    Use :meth:`scheme` for the sub-conformal iteration choice q = p+1,
    gamma1 = -sigma/(p+1).
    """

    n: int
    p: float
    q: float
    delta: float = 0.0
    gamma1: float = 0.0

    def __post_init__(self):
        _check_dim(self.n)
        if self.p <= 0:
            raise ValueError("p must be positive")
        if self.q < 1:
            raise ValueError("q must be >= 1")

    @classmethod
    def scheme(cls, n: int, p: float, delta: float = 0.0) -> "ExponentContext":
        rho = (n - 1) / 2
        sigma = 1 - rho * (p - 1) / 2
        return cls(n=n, p=p, q=p + 1, delta=delta, gamma1=-sigma / (p + 1))

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2

    @property
    def sigma(self) -> float:
        return 1 - self.rho * (self.p - 1) / 2

    @property
    def gamma2(self) -> float:
        return self.gamma1 - (self.n - 1) / 2 + (self.n + 1) / self.q

    @property
    def s(self) -> float:
        return (self.n + 1) * (0.5 - 1 / (self.p + 1))

    @property
    def s1(self) -> float:
        return self.n * (0.5 - 1 / (self.p + 1)) + self.delta

    @property
    def s0(self) -> float:
        # homogeneous-estimate index with r = p+1, r0 = 2/(1-2 delta); equals s1
        r0 = 2 / (1 - 2 * self.delta)
        return (self.n + 1) / 2 - 1 / r0 - self.n / (self.p + 1)

    @property
    def x_weight(self) -> float:
        """Exponent a in the cylinder weight exp(a*tau) of the X-norm."""
        return 2 * self.gamma1 - self.rho + (self.n + 1) / self.q

    def table(self) -> dict[str, float]:
        return {
            "n": self.n, "p": self.p, "q": self.q, "delta": self.delta,
            "rho": self.rho, "sigma": self.sigma, "gamma1": self.gamma1,
            "gamma2": self.gamma2, "s": self.s, "s0": self.s0, "s1": self.s1,
        }


def _check_dim(n, low=2):
    if int(n) != n or n < low:
        raise ValueError(f"dimension must be an integer >= {low}, got {n}")


def p_strauss(n: int) -> float:
    """Positive root of (n-1)p^2 - (n+1)p - 2 = 0."""
    _check_dim(n)
    a, b, c = n - 1, -(n + 1), -2
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def p_conformal(n: int) -> float:
    _check_dim(n)
    return 1 + 4 / (n - 1)


def p_fujita(n: int) -> float:
    _check_dim(n, low=1)
    return 1 + 2 / n


def p_super_limits(n: int) -> tuple[float | None, float | Unbounded]:
    """(p1, p2): earlier super-conformal range end and the improved one.

    p1 is only tabulated from n = 4 on (None below); p2 is unbounded for
    n = 2, 3.
    """
    _check_dim(n)
    if n == 4:
        p1 = 5 / 2
    elif n == 5:
        p1 = (6 + math.sqrt(21)) / 5
    elif n >= 6:
        p1 = 1 + 2 / ((n - 1) / 2 - 1 / (n - 1))
    else:
        p1 = None
    if n <= 3:
        return p1, UNBOUNDED
    p2 = 1 + 4 * n / (n * n - 3 * n - 2)
    assert p1 < p2
    return p1, p2


def remark_counterexample_value(q: float = 14 / 3) -> float:
    """gamma/2 + (n-5)/(2(n-1)) - gamma/q at n = 6, gamma = 2.

    Pass ``q=math.inf`` to drop the last term.
    """
    n, gamma = 6, 2
    value = gamma / 2 + (n - 5) / (2 * (n - 1)) - (0.0 if math.isinf(q) else gamma / q)
    assert value > 0.5
    return value


def weighted_strichartz_admissible(ctx: ExponentContext) -> AdmissibilityVerdict:
    n, q, g1 = ctx.n, ctx.q, ctx.gamma1
    v = AdmissibilityVerdict("weighted_strichartz")
    v.margins = [
        Constraint("q>=2", q - 2, strict=False),
        Constraint("q<=2(n+1)/(n-1)", 2 * (n + 1) / (n - 1) - q, strict=False),
        Constraint("gamma1<(n-1)/2-n/q", (n - 1) / 2 - n / q - g1, strict=True),
    ]
    v.values = {"gamma1": g1, "gamma2": ctx.gamma2,
                "gamma2_identity_residual": ctx.gamma2 - (g1 - (n - 1) / 2 + (n + 1) / q)}
    return v


def dispersive_weight_condition(ctx: ExponentContext) -> AdmissibilityVerdict:
    """The X-weight beats the dispersive decay rate; equivalent to p > 1."""
    n, q, g1, rho = ctx.n, ctx.q, ctx.gamma1, ctx.rho
    left = 2 * g1 - rho + (n + 1) / q
    right = (n - 1) * (0.5 - 1 / q)
    v = AdmissibilityVerdict("dispersive_weight")
    v.margins = [Constraint("weight<decay", right - left, strict=True)]
    v.values = {
        "left": left,
        "right": right,
        "reduced_slack": rho - (g1 + n / (ctx.p + 1)),
        "p_minus_1": ctx.p - 1,
    }
    return v


def homogeneous_strichartz_window(n: int, q: float, r: float, r0: float,
                                  p: float | None = None,
                                  delta: float | None = None) -> AdmissibilityVerdict:
    """Time-integrability window for the homogeneous L^q_t L^r_x estimate.

    With ``p`` and ``delta`` given, also checks the specialization
    r = p+1, r0 = 2/(1-2 delta) and reports s1.
    """
    _check_dim(n)
    if not (1 <= q < math.inf):
        raise ValueError("q must lie in [1, inf)")
    if not (2 < r < math.inf):
        raise ValueError("r must lie in (2, inf)")
    if not (2 < r0 <= r):
        raise ValueError("r0 must lie in (2, r]")
    v = AdmissibilityVerdict("homogeneous_strichartz")
    v.margins = [Constraint("1/q>(n-1)(1/2-1/r0)", 1 / q - (n - 1) * (0.5 - 1 / r0), strict=True)]
    v.values = {"s0": (n + 1) / 2 - 1 / r0 - n / r}
    if p is not None and delta is not None:
        v.values["s1"] = n * (0.5 - 1 / (p + 1)) + delta
        v.margins += [
            Constraint("delta<1/((n-1)(p+1))", 1 / ((n - 1) * (p + 1)) - delta, strict=True),
            Constraint("delta<=1/2-1/(p+1)", 0.5 - 1 / (p + 1) - delta, strict=False),
        ]
    return v


def strichartz_delta_window(n: int, p: float, delta: float) -> AdmissibilityVerdict:
    """Specialization with q = r = p+1 and r0 = 2/(1-2 delta)."""
    r = p + 1
    r0 = 2 / (1 - 2 * delta)
    if not (2 < r0 <= r):
        v = AdmissibilityVerdict("homogeneous_strichartz")
        v.margins = [
            Constraint("delta>0", delta, strict=True),
            Constraint("delta<=1/2-1/(p+1)", 0.5 - 1 / (p + 1) - delta, strict=False),
        ]
        v.values = {"s1": n * (0.5 - 1 / (p + 1)) + delta}
        return v
    return homogeneous_strichartz_window(n, r, r, r0, p=p, delta=delta)


def superconformal_params(n: int, p: float, delta: float) -> AdmissibilityVerdict:
    """Parameter choices for powers above the conformal one, with checks."""
    _check_dim(n)
    if p <= p_conformal(n):
        raise ValueError("p must exceed the conformal power")
    dmax = 2 / ((n * n - 1) * (p - 1))
    if not (0 < delta < dmax):
        raise ValueError(f"delta must lie in (0, {dmax})")
    p0 = (n + 1) * (p - 1) / 2
    p1_prime = p0 / p
    inv_p1 = 1 - 1 / p1_prime
    r0 = 2 / (1 - 2 * delta)
    s0 = n / (n + 1) + delta
    q = 2 * (n + 1) / (n - 1)
    sob_rhs = n / q - n / ((n + 1) * (p - 1) / 2)
    v = AdmissibilityVerdict("superconformal")
    v.values = {"p0": p0, "p1_prime": p1_prime, "r0": r0, "s0": s0, "q": q,
                "sobolev_rhs": sob_rhs,
                "s0_identity_residual": s0 - ((n + 1) / 2 - 1 / r0 - n / q)}
    pair = 1 / p0 + inv_p1
    v.margins = [
        Constraint("p0>=1", p0 - 1, strict=False),
        Constraint("r0<=q", q - r0, strict=False),
        Constraint("1/p0+1/p1>=(n-1)/(n+1)", pair - (n - 1) / (n + 1), strict=False),
        Constraint("1/p0+1/p1<=1", 1 - pair, strict=False),
        Constraint("1/p0>(n-1)(1/2-1/r0)", 1 / p0 - (n - 1) * (0.5 - 1 / r0), strict=True),
        Constraint("sobolev_gap", 1 - sob_rhs, strict=False),
    ]
    return v


def exponent_table(n: int, p: float | None = None, delta: float | None = None) -> dict:
    """Everything the CLI prints for one (n, p, delta)."""
    p1, p2 = p_super_limits(n)
    out: dict = {
        "n": n,
        "p_strauss": p_strauss(n),
        "p_conformal": p_conformal(n),
        "p_fujita": p_fujita(n),
        "p1": p1,
        "p2": p2,
    }
    if p is not None:
        ctx = ExponentContext.scheme(n, p, delta or 0.0)
        out["context"] = ctx.table()
        out["verdicts"] = [weighted_strichartz_admissible(ctx), dispersive_weight_condition(ctx)]
        if delta:
            out["verdicts"].append(strichartz_delta_window(n, p, delta))
            if p > p_conformal(n):
                try:
                    out["verdicts"].append(superconformal_params(n, p, delta))
                except ValueError as exc:
                    out["superconformal_error"] = str(exc)
    return out
