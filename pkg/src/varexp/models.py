"""SDE model definitions: dX = mu*X dt + sigma*X^p(X) dW.

A constant exponent gamma=1 gives geometric Brownian motion and a general
constant gamma gives the constant-elasticity model; the decaying exponent
kinds give the state-adaptive diffusion this package is built around.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponent import ExponentSpec, eval_dphi, eval_phi, _positive


@dataclass(frozen=True)
class ModelSpec:
    """Drift/diffusion parameters plus the diffusion exponent.

    sigma = 0 is accepted as the deterministic drift-only limit (useful
    for diagnostics); the closed-form bounds require sigma > 0 and enforce
    it on their own inputs.
    """

    mu: float
    sigma: float
    exponent: ExponentSpec

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def to_dict(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma, "exponent": self.exponent.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(mu=float(d["mu"]), sigma=float(d["sigma"]),
                   exponent=ExponentSpec.from_dict(d["exponent"]))


def gbm(mu: float, sigma: float) -> ModelSpec:
    """Geometric Brownian motion: exponent identically 1."""
    return ModelSpec(mu=mu, sigma=sigma, exponent=ExponentSpec.constant(1.0))


def cev(mu: float, sigma: float, gamma: float) -> ModelSpec:
    """Constant-elasticity model X^gamma.

    gamma in [0, 1) is constructible for comparison plots only; the
    Lipschitz/growth guarantees backing the error bounds assume gamma >= 1.
    """
    return ModelSpec(mu=mu, sigma=sigma, exponent=ExponentSpec.constant(gamma))


def drift(m: ModelSpec, x) -> float | np.ndarray:
    """mu * x."""
    xs = _positive(x)
    out = m.mu * xs
    return float(out) if np.ndim(x) == 0 else out


def diffusion(m: ModelSpec, x) -> float | np.ndarray:
    """sigma * x^p(x)."""
    return m.sigma * eval_phi(m.exponent, x)


def diffusion_deriv(m: ModelSpec, x) -> float | np.ndarray:
    """d/dx of the diffusion coefficient; feeds the Milstein correction."""
    return m.sigma * eval_dphi(m.exponent, x)
