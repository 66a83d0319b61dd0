"""Variable exponent functions p(x) for the state-dependent diffusion x^p(x).

Four families are supported on the state space (0, inf):

    constant        p(x) = gamma                 (gamma = 1 recovers GBM)
    exp_decay       p(x) = 1 + a * exp(-b*x)
    inverse_square  p(x) = 1 + a / (1+x)^2
    rational_decay  p(x) = 1 + c / (1+x)

The decaying families tend to 1 at infinity and carry admissibility
constants (delta, m0, c0, alpha) bounding |p'(x)| piecewise:
|p'| <= m0 on (0, delta] and |p'| <= c0 * x^(-1-alpha) beyond.
`check_admissibility` verifies the three admissibility conditions
numerically on a finite grid; `estimate_constants` brute-forces the
Lipschitz and linear-growth constants of phi(x) = x^p(x).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

CONSTANT = "constant"
EXP_DECAY = "exp_decay"
INVERSE_SQUARE = "inverse_square"
RATIONAL_DECAY = "rational_decay"

KINDS = (CONSTANT, EXP_DECAY, INVERSE_SQUARE, RATIONAL_DECAY)

# Multiplier applied to grid maxima when estimating Lipschitz/growth
# constants; guards against grid undersampling of the true suprema.
SAFETY_FACTOR = 1.05

# Default brute-force grid: log-spaced, covers both the x->0 and the
# tail regime of the derivative bound.
DEFAULT_GRID_LO = 1e-6
DEFAULT_GRID_HI = 1e6
DEFAULT_GRID_POINTS = 10_000


def _positive(x, name: str = "x"):
    """Validate x in (0, inf); returns a float array view of x."""
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0)):
        raise ValueError(f"{name} must be positive and finite")
    return arr


def _like(x, out):
    """Return a scalar when the input was scalar, else the array."""
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ExponentSpec:
    """A variable exponent p(.) plus its declared admissibility constants.

    p_minus/p_plus are the declared inf/sup of p over (0, inf); delta, m0,
    c0, alpha parameterize the piecewise derivative bound. The constants
    are user choices (checked, not inferred).
    """

    kind: str
    gamma: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    p_minus: float = 1.0
    p_plus: float = 1.0
    delta: float = 1.0
    m0: float = 1.0
    c0: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown exponent kind {self.kind!r}")
        if self.kind == CONSTANT:
            if self.gamma is None or self.gamma < 0:
                raise ValueError("constant exponent requires gamma >= 0")
        elif self.kind == EXP_DECAY:
            if self.a is None or self.b is None or self.a <= 0 or self.b <= 0:
                raise ValueError("exp_decay requires a > 0 and b > 0")
        elif self.kind == INVERSE_SQUARE:
            if self.a is None or self.a <= 0:
                raise ValueError("inverse_square requires a > 0")
        elif self.kind == RATIONAL_DECAY:
            if self.c is None or self.c <= 0:
                raise ValueError("rational_decay requires c > 0")
        if not (self.p_minus <= self.p_plus < math.inf):
            raise ValueError("need p_minus <= p_plus < inf")
        if min(self.delta, self.m0, self.c0, self.alpha) <= 0:
            raise ValueError("delta, m0, c0, alpha must all be positive")

    # -- constructors with per-kind default constants -------------------

    @classmethod
    def constant(cls, gamma: float) -> "ExponentSpec":
        """p(x) = gamma. gamma=1 is GBM; gamma != 1 is the CEV exponent."""
        return cls(
            kind=CONSTANT, gamma=gamma, p_minus=gamma, p_plus=gamma,
            delta=1.0, m0=1.0, c0=1.0, alpha=max(1.0, gamma),
        )

    @classmethod
    def exp_decay(cls, a: float, b: float, delta: float = 1.0) -> "ExponentSpec":
        """p(x) = 1 + a*exp(-b*x); tail bound uses alpha = 2.

        c0 is the exact sup of a*b * x^3 * exp(-b*x) past delta, so the
        declared derivative bound holds with equality somewhere.
        """
        x_star = 3.0 / b
        if x_star > delta:
            c0 = a * b * x_star**3 * math.exp(-3.0)
        else:
            c0 = a * b * delta**3 * math.exp(-b * delta)
        return cls(
            kind=EXP_DECAY, a=a, b=b, p_minus=1.0, p_plus=1.0 + a,
            delta=delta, m0=a * b, c0=c0, alpha=2.0,
        )

    @classmethod
    def inverse_square(cls, a: float, delta: float = 1.0) -> "ExponentSpec":
        """p(x) = 1 + a/(1+x)^2 with delta <= 1, m0 = 2a/delta, c0 = 2a, alpha = 2."""
        if delta > 1.0:
            raise ValueError("inverse_square constants assume delta <= 1")
        return cls(
            kind=INVERSE_SQUARE, a=a, p_minus=1.0, p_plus=1.0 + a,
            delta=delta, m0=2.0 * a / delta, c0=2.0 * a, alpha=2.0,
        )

    @classmethod
    def rational_decay(cls, c: float, delta: float = 1.0) -> "ExponentSpec":
        """p(x) = 1 + c/(1+x); |p'| = c/(1+x)^2 <= c * x^-2, so alpha = 1."""
        return cls(
            kind=RATIONAL_DECAY, c=c, p_minus=1.0, p_plus=1.0 + c,
            delta=delta, m0=c, c0=c, alpha=1.0,
        )

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("gamma", "a", "b", "c"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        d.update(
            p_minus=self.p_minus, p_plus=self.p_plus, delta=self.delta,
            m0=self.m0, c0=self.c0, alpha=self.alpha,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentSpec":
        kind = d.get("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown exponent kind {kind!r}")
        params = {k: d[k] for k in ("gamma", "a", "b", "c") if k in d}
        # Start from the per-kind defaults, then apply explicit overrides.
        if kind == CONSTANT:
            base = cls.constant(params["gamma"])
        elif kind == EXP_DECAY:
            base = cls.exp_decay(params["a"], params["b"])
        elif kind == INVERSE_SQUARE:
            base = cls.inverse_square(params["a"])
        else:
            base = cls.rational_decay(params["c"])
        overrides = {
            k: float(d[k])
            for k in ("p_minus", "p_plus", "delta", "m0", "c0", "alpha")
            if k in d
        }
        if not overrides:
            return base
        merged = asdict(base)
        merged.update(overrides)
        return cls(**merged)


# -- pointwise evaluation ------------------------------------------------

def eval_p(spec: ExponentSpec, x) -> float | np.ndarray:
    """p(x) for x > 0."""
    xs = _positive(x)
    if spec.kind == CONSTANT:
        out = np.full_like(xs, spec.gamma)
    elif spec.kind == EXP_DECAY:
        out = 1.0 + spec.a * np.exp(-spec.b * xs)
    elif spec.kind == INVERSE_SQUARE:
        out = 1.0 + spec.a / (1.0 + xs) ** 2
    else:
        out = 1.0 + spec.c / (1.0 + xs)
    return _like(x, out)


def eval_dp(spec: ExponentSpec, x) -> float | np.ndarray:
    """p'(x) in closed form."""
    xs = _positive(x)
    if spec.kind == CONSTANT:
        out = np.zeros_like(xs)
    elif spec.kind == EXP_DECAY:
        out = -spec.a * spec.b * np.exp(-spec.b * xs)
    elif spec.kind == INVERSE_SQUARE:
        out = -2.0 * spec.a / (1.0 + xs) ** 3
    else:
        out = -spec.c / (1.0 + xs) ** 2
    return _like(x, out)


def eval_phi(spec: ExponentSpec, x) -> float | np.ndarray:
    """phi(x) = x^p(x), computed as exp(p(x) * log x).

    Constant kinds use np.power directly so that p == 1 returns x exactly.
    """
    xs = _positive(x)
    if spec.kind == CONSTANT:
        out = np.power(xs, spec.gamma)
    else:
        out = np.exp(eval_p(spec, xs) * np.log(xs))
    return _like(x, out)


def eval_dphi(spec: ExponentSpec, x) -> float | np.ndarray:
    """phi'(x) = p(x) x^(p(x)-1) + p'(x) x^p(x) log(x), exact."""
    xs = _positive(x)
    p = eval_p(spec, xs)
    if spec.kind == CONSTANT:
        out = spec.gamma * np.power(xs, spec.gamma - 1.0)
    else:
        lnx = np.log(xs)
        x_pow = np.exp(p * lnx)  # x^p
        out = p * np.exp((p - 1.0) * lnx) + eval_dp(spec, xs) * x_pow * lnx
    return _like(x, out)


def sup_deviation(spec: ExponentSpec, lam: float, r: float) -> float:
    """sup over [lam, r] of |p(x) - 1|.

    The decaying kinds are monotone, so the sup sits at x = lam; the
    constant kind gives |gamma - 1| everywhere.
    """
    if not (0.0 < lam < r):
        raise ValueError("need 0 < lambda < r")
    if spec.kind == CONSTANT:
        return abs(spec.gamma - 1.0)
    return abs(float(eval_p(spec, lam)) - 1.0)


# -- admissibility check --------------------------------------------------

def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Log-spaced evaluation grid on [lo, hi]."""
    if not (0.0 < lo < hi) or n < 2:
        raise ValueError("need 0 < lo < hi and n >= 2")
    return np.geomspace(lo, hi, n)


@dataclass
class HypothesisResult:
    passed: bool
    detail: str
    witness_x: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckReport:
    """Numerical evidence for the three admissibility conditions.

    Grid evidence, not proof: the limits and unbounded suprema in the
    conditions are approximated on a finite log-spaced grid with the
    recorded cutoff and tolerances.
    """

    range_ok: HypothesisResult        # p bounded in [p_minus, p_plus], p_minus >= 1
    limit_ok: HypothesisResult        # p -> 1, (p-1)*log x bounded
    derivative_ok: HypothesisResult   # piecewise |p'| bound
    grid_lo: float = 0.0
    cutoff: float = 0.0
    grid_points: int = 0
    tol_limit: float = 0.0

    @property
    def passed(self) -> bool:
        return self.range_ok.passed and self.limit_ok.passed and self.derivative_ok.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "range_condition": self.range_ok.to_dict(),
            "limit_condition": self.limit_ok.to_dict(),
            "derivative_condition": self.derivative_ok.to_dict(),
            "grid": {
                "lo": self.grid_lo,
                "cutoff": self.cutoff,
                "points": self.grid_points,
                "spacing": "log",
            },
            "tol_limit": self.tol_limit,
            "note": "numerical evidence at grid scale, not a proof",
        }


_CHECK_GRID_LO = 1e-8
_TOL_LIMIT = 1e-5      # |p(cutoff) - 1| threshold for the limit condition
_REL_SLACK = 1e-9      # relative slack on inequality checks


def check_admissibility(spec: ExponentSpec, cutoff: float = 1e4,
                        grid_points: int = 4096) -> CheckReport:
    """Check the admissibility conditions on a log grid over (grid_lo, cutoff].

    Violations are reported (with the witnessing x), never raised.
    """
    if cutoff <= spec.delta:
        raise ValueError("cutoff must exceed spec.delta")
    if grid_points < 100:
        raise ValueError("grid_points must be >= 100")

    xs = log_grid(_CHECK_GRID_LO, cutoff, grid_points)
    p = np.asarray(eval_p(spec, xs))
    dp = np.asarray(eval_dp(spec, xs))

    # Condition 1: 1 <= p_minus <= p(x) <= p_plus < inf.
    slack = _REL_SLACK * max(1.0, abs(spec.p_plus))
    if spec.p_minus < 1.0:
        range_ok = HypothesisResult(False, f"declared p_minus = {spec.p_minus} < 1")
    else:
        below = p < spec.p_minus - slack
        above = p > spec.p_plus + slack
        if below.any() or above.any():
            i = int(np.argmax(below | above))
            range_ok = HypothesisResult(
                False, f"p({xs[i]:.6g}) = {p[i]:.9g} outside [{spec.p_minus}, {spec.p_plus}]",
                witness_x=float(xs[i]),
            )
        else:
            range_ok = HypothesisResult(True, "p within declared [p_minus, p_plus] on grid")

    # Condition 2: p(x) -> 1 and (p(x)-1)*log(x) stays bounded.
    tail_dev = abs(p[-1] - 1.0)
    logdev = (p - 1.0) * np.log(xs)
    # Boundedness evidence: the max of (p-1)log x over the last grid decade
    # must not exceed the max over the decade before it.
    last = xs >= cutoff / 10.0
    prev = (xs >= cutoff / 100.0) & ~last
    m_last = float(logdev[last].max())
    m_prev = float(logdev[prev].max())
    if tail_dev > _TOL_LIMIT:
        limit_ok = HypothesisResult(
            False, f"|p(cutoff) - 1| = {tail_dev:.3g} > {_TOL_LIMIT}", witness_x=cutoff,
        )
    elif m_last > m_prev + slack:
        i = int(np.argmax(np.where(last, logdev, -np.inf)))
        limit_ok = HypothesisResult(
            False, f"(p-1)*log x growing in the tail: {m_prev:.3g} -> {m_last:.3g}",
            witness_x=float(xs[i]),
        )
    else:
        limit_ok = HypothesisResult(
            True, f"p(cutoff)-1 = {tail_dev:.3g}; (p-1)*log x tail max {m_last:.3g}",
        )

    # Condition 3: piecewise derivative bound with declared constants.
    if spec.p_plus >= 1.0 + spec.alpha:
        derivative_ok = HypothesisResult(
            False, f"structural violation: p_plus = {spec.p_plus} >= 1 + alpha = {1 + spec.alpha}",
        )
    else:
        bound = np.where(
            xs <= spec.delta, spec.m0, spec.c0 * xs ** (-1.0 - spec.alpha)
        )
        bad = np.abs(dp) > bound * (1.0 + _REL_SLACK) + 1e-300
        if bad.any():
            i = int(np.argmax(bad))
            derivative_ok = HypothesisResult(
                False, f"|p'({xs[i]:.6g})| = {abs(dp[i]):.6g} > bound {bound[i]:.6g}",
                witness_x=float(xs[i]),
            )
        else:
            derivative_ok = HypothesisResult(True, "|p'| within declared piecewise bound on grid")

    return CheckReport(
        range_ok=range_ok, limit_ok=limit_ok, derivative_ok=derivative_ok,
        grid_lo=_CHECK_GRID_LO, cutoff=cutoff, grid_points=grid_points,
        tol_limit=_TOL_LIMIT,
    )


# -- brute-force Lipschitz / growth constants -----------------------------

@dataclass(frozen=True)
class GrowthConstants:
    """Grid estimates of L and K in |phi(x)-phi(y)| <= L|x-y|, phi(x) <= K(1+x)."""

    lipschitz_l: float
    growth_k: float
    grid_lo: float
    grid_hi: float
    grid_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_constants(spec: ExponentSpec,
                       grid_lo: float = DEFAULT_GRID_LO,
                       grid_hi: float = DEFAULT_GRID_HI,
                       grid_points: int = DEFAULT_GRID_POINTS) -> GrowthConstants:
    """Brute-force L = 1.05 * max|phi'| and K = 1.05 * max phi(x)/(1+x) on a log grid."""
    if grid_points < 1000:
        raise ValueError("grid_points must be >= 1000")
    xs = log_grid(grid_lo, grid_hi, grid_points)
    dphi = np.asarray(eval_dphi(spec, xs))
    ratio = np.asarray(eval_phi(spec, xs)) / (1.0 + xs)
    if not (np.all(np.isfinite(dphi)) and np.all(np.isfinite(ratio))):
        raise ArithmeticError("non-finite phi'/growth ratio on the grid; "
                              "constants are not estimable for this exponent")
    return GrowthConstants(
        lipschitz_l=SAFETY_FACTOR * float(np.abs(dphi).max()),
        growth_k=SAFETY_FACTOR * float(ratio.max()),
        grid_lo=grid_lo, grid_hi=grid_hi, grid_points=grid_points,
    )
