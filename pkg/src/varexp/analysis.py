"""Pathwise error estimators and distributional summaries for coupled runs.

The headline statistic is the strong (pathwise) error

    E[ sup_{t <= T} |X_a(t) - X_b(t)| ]

between two batches driven by identical Brownian increments. Antithetic
pairs are averaged before the confidence interval is formed so the CI
reflects the variance-reduced estimator. The sup over continuous time is
approximated by the sup over the discrete grid.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from . import engine as engine_mod
from .engine import CoupledStats, PathBatch
from .exponent import eval_phi
from .models import ModelSpec


@dataclass
class ErrorReport:
    """Strong-error estimate plus the observed path range it was measured on."""

    strong_error: float
    ci_half_width: float
    lambda_obs: float   # min state visited by either batch
    r_obs: float        # max state visited by either batch
    n_paths: int
    analytic_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _pair_mean_ci(per_path: np.ndarray, antithetic: bool) -> tuple[float, float, int]:
    """Mean and 95% half-width, averaging antithetic pairs first."""
    if antithetic:
        n = per_path.size // 2
        sample = 0.5 * (per_path[:n] + per_path[n:])
    else:
        sample = per_path
    mean = float(sample.mean())
    if sample.size < 2:
        return mean, 0.0, sample.size
    hw = 1.96 * float(sample.std(ddof=1)) / np.sqrt(sample.size)
    return mean, float(hw), sample.size


def strong_error(a: PathBatch, b: PathBatch) -> ErrorReport:
    """Pathwise sup-difference statistics for two coupled batches."""
    if a.values.shape != b.values.shape or not np.array_equal(a.time_grid, b.time_grid):
        raise ValueError("batches must share time grid and path count")
    if a.config.seed != b.config.seed or a.config.antithetic != b.config.antithetic:
        raise ValueError("batches were not produced by a coupled run")
    sup_diff = np.max(np.abs(a.values - b.values), axis=1)
    mean, hw, _ = _pair_mean_ci(sup_diff, a.config.antithetic)
    return ErrorReport(
        strong_error=mean, ci_half_width=hw,
        lambda_obs=float(min(a.values.min(), b.values.min())),
        r_obs=float(max(a.values.max(), b.values.max())),
        n_paths=int(a.values.shape[0]),
    )


def strong_error_from_stats(stats: CoupledStats, model_index: int) -> ErrorReport:
    """Strong error of model `model_index` vs the reference (index 0),
    computed from streaming accumulators instead of dense batches."""
    if not (0 < model_index < len(stats.models)):
        raise ValueError("model_index must point past the reference model")
    sup_diff = stats.sup_abs_diff[model_index]
    mean, hw, _ = _pair_mean_ci(sup_diff, stats.config.antithetic)
    ref, other = stats.models[0], stats.models[model_index]
    return ErrorReport(
        strong_error=mean, ci_half_width=hw,
        lambda_obs=float(min(ref.min_value, other.min_value)),
        r_obs=float(max(ref.max_value, other.max_value)),
        n_paths=stats.config.n_paths,
    )


def sup_second_moment(batch: PathBatch) -> float:
    """Mean over paths of (sup_t X)^2."""
    if batch.values.size == 0:
        raise ValueError("empty batch")
    return float(np.mean(np.max(batch.values, axis=1) ** 2))


@dataclass
class TerminalStats:
    """Distributional summary of X(T)."""

    mean: float
    variance: float
    min: float
    max: float
    bin_edges: np.ndarray   # 65 edges for 64 bins spanning [min, max]
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mean": self.mean, "variance": self.variance,
            "min": self.min, "max": self.max,
            "bin_edges": self.bin_edges.tolist(),
            "counts": self.counts.tolist(),
        }


def terminal_stats(batch: PathBatch, bins: int = 64) -> TerminalStats:
    """Mean/variance/extremes plus a histogram of the terminal values."""
    term = batch.terminal
    if term.size == 0:
        raise ValueError("empty batch")
    lo, hi = float(term.min()), float(term.max())
    if hi == lo:
        hi = lo + 1e-12  # point mass: give the histogram a nonzero span
    counts, edges = np.histogram(term, bins=bins, range=(lo, hi))
    return TerminalStats(
        mean=float(term.mean()),
        variance=float(term.var(ddof=1)) if term.size > 1 else 0.0,
        min=float(term.min()), max=float(term.max()),
        bin_edges=edges, counts=counts,
    )


def diffusion_range(batch: PathBatch, m: ModelSpec) -> tuple[float, float]:
    """(min, max) of the state-dependent diffusion factor x^p(x) over all
    visited states ("interpretation A" of the reported volatility range)."""
    phi = np.asarray(eval_phi(m.exponent, batch.values.ravel()))
    return float(phi.min()), float(phi.max())


def refinement_errors(m: ModelSpec, coarse_dts: list[float], ref_dt: float,
                      n_base_paths: int, seed: int, t_horizon: float = 1.0,
                      x0: float = 1.0, scheme: str = engine_mod.LOG_MILSTEIN,
                      antithetic: bool = True) -> list[tuple[float, float]]:
    """Self-refinement strong errors for a scheme, one per coarse step size.

    A single fine increment matrix at ref_dt drives everything: the
    reference solution uses it directly and each coarse level consumes its
    block sums, so differences isolate discretization error. The sup runs
    over the grid of the coarsest level at every refinement - measuring
    each level on its own grid would bias the coarse errors downward
    (fewer points, smaller sup) and flatten the fitted order.
    """
    for dtc in coarse_dts:
        if abs(round(dtc / ref_dt) * ref_dt - dtc) > 1e-9 * dtc:
            raise ValueError("each coarse dt must be an integer multiple of ref_dt")
        if abs(round(max(coarse_dts) / dtc) * dtc - max(coarse_dts)) > 1e-9:
            raise ValueError("the coarsest dt must be a multiple of every level")

    fine_cfg = engine_mod.SimConfig(
        t_horizon=t_horizon, dt=ref_dt, n_base_paths=n_base_paths, seed=seed,
        antithetic=antithetic, scheme=engine_mod.LOG_MILSTEIN, x0=x0,
    )
    dw_fine = engine_mod.increment_matrix(fine_cfg)
    ref = engine_mod.run_with_increments(m, fine_cfg, dw_fine, "reference")

    shared_n = round(t_horizon / max(coarse_dts))
    out = []
    for dtc in coarse_dts:
        mult = round(dtc / ref_dt)
        nc = round(t_horizon / dtc)
        dwc = dw_fine[:, :nc * mult].reshape(dw_fine.shape[0], nc, mult).sum(axis=2)
        cfg_c = engine_mod.SimConfig(
            t_horizon=t_horizon, dt=dtc, n_base_paths=n_base_paths, seed=seed,
            antithetic=antithetic, scheme=scheme, x0=x0,
        )
        coarse = engine_mod.run_with_increments(m, cfg_c, dwc, "coarse")
        stride_c = nc // shared_n
        stride_f = round(dtc / ref_dt) * stride_c
        diff = np.abs(coarse.values[:, ::stride_c] - ref.values[:, ::stride_f])
        per_path = np.max(diff, axis=1)
        mean, _, _ = _pair_mean_ci(per_path, antithetic)
        out.append((dtc, mean))
    return out


def loglog_slope(pairs: list[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(dt)."""
    xs = np.log([p[0] for p in pairs])
    ys = np.log([p[1] for p in pairs])
    return float(np.polyfit(xs, ys, 1)[0])
