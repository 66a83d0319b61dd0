"""Path simulation engine.

Brownian increments come from counter-based Philox streams keyed by
(seed, path_index), so every path's noise is reproducible regardless of
how paths are partitioned across workers. Four schemes are provided; the
log-transformed Milstein scheme is the default: it discretizes Y = ln X,
which keeps every path strictly positive by construction and is exact for
geometric Brownian motion (the Milstein correction vanishes when the
log-space diffusion is constant).

Log-space coefficients, with x = e^y:

    b(y)  = sigma * x^(p(x)-1)            diffusion of Y
    a(y)  = mu - b(y)^2 / 2               drift of Y (Ito correction)
    b'(y) = b(y) * [(p(x)-1) + x p'(x) ln x]

and one Milstein step is y' = y + a dt + b dW + 0.5 b b' (dW^2 - dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exponent import eval_dp, eval_p, eval_phi
from .models import ModelSpec, diffusion, diffusion_deriv, drift

EULER = "euler"
MILSTEIN = "milstein"
LOG_EULER = "log_euler"
LOG_MILSTEIN = "log_milstein"
SCHEMES = (EULER, MILSTEIN, LOG_EULER, LOG_MILSTEIN)

# Direct-space schemes clamp non-positive states to this floor and count
# the breach; the continuous-time process never hits zero, so a breach is
# purely a discretization artifact worth surfacing.
POSITIVITY_FLOOR = 1e-12

# |ln X| beyond this is a blown-up path (exp would overflow float64 soon).
LOG_OVERFLOW_LIMIT = 700.0

# Dense path storage cap; larger runs must use simulate_coupled_stats.
MEMORY_CAP_BYTES = 2 << 30


class BlowUpError(RuntimeError):
    """A path left the representable range during simulation."""

    def __init__(self, path_indices, step_index: int, model_label: str = ""):
        self.path_indices = list(int(i) for i in np.atleast_1d(path_indices))
        self.step_index = int(step_index)
        self.model_label = model_label
        super().__init__(
            f"path(s) {self.path_indices} blew up at step {self.step_index}"
            + (f" for model {model_label!r}" if model_label else "")
        )


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    n_steps is derived from t_horizon/dt and must divide the horizon
    evenly; total path count doubles when antithetic is set.
    """

    t_horizon: float
    dt: float
    n_base_paths: int
    seed: int
    antithetic: bool = True
    scheme: str = LOG_MILSTEIN
    x0: float = 1.0

    def __post_init__(self):
        if self.t_horizon <= 0 or self.dt <= 0:
            raise ValueError("t_horizon and dt must be positive")
        if self.n_base_paths < 1:
            raise ValueError("n_base_paths must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.x0 <= 0:
            raise ValueError("x0 must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        n = round(self.t_horizon / self.dt)
        if n < 1 or abs(n * self.dt - self.t_horizon) > 1e-12 * self.t_horizon:
            raise ValueError("dt must divide t_horizon evenly")

    @property
    def n_steps(self) -> int:
        return round(self.t_horizon / self.dt)

    @property
    def n_paths(self) -> int:
        return self.n_base_paths * (2 if self.antithetic else 1)

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_horizon, self.n_steps + 1)

    def to_dict(self) -> dict:
        return {
            "t_horizon": self.t_horizon, "dt": self.dt,
            "n_base_paths": self.n_base_paths, "seed": self.seed,
            "antithetic": self.antithetic, "scheme": self.scheme, "x0": self.x0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(
            t_horizon=float(d["t_horizon"]), dt=float(d["dt"]),
            n_base_paths=int(d["n_base_paths"]), seed=int(d["seed"]),
            antithetic=bool(d.get("antithetic", True)),
            scheme=str(d.get("scheme", LOG_MILSTEIN)),
            x0=float(d.get("x0", 1.0)),
        )


# -- increments ------------------------------------------------------------

def gen_increments(seed: int, path_index: int, n_steps: int, dt: float) -> np.ndarray:
    """n_steps i.i.d. N(0, dt) increments for one path.

    The stream is keyed by (seed, path_index), so the same pair always
    yields the same array no matter how many workers draw it or in what
    order.
    """
    if n_steps < 1 or dt <= 0:
        raise ValueError("need n_steps >= 1 and dt > 0")
    key = np.array([seed, path_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.normal(0.0, math.sqrt(dt), n_steps)


def antithetic_of(increments: np.ndarray) -> np.ndarray:
    """Element-wise negation; pairs path i with path n_base_paths + i."""
    return -np.asarray(increments)


def increment_matrix(cfg: SimConfig) -> np.ndarray:
    """(n_paths, n_steps) increment matrix for a whole run.

    Rows 0..n_base_paths-1 come straight from gen_increments; with
    antithetic sampling row n_base_paths + i is the negation of row i.
    """
    base = np.empty((cfg.n_base_paths, cfg.n_steps))
    for i in range(cfg.n_base_paths):
        base[i] = gen_increments(cfg.seed, i, cfg.n_steps, cfg.dt)
    if not cfg.antithetic:
        return base
    return np.concatenate([base, antithetic_of(base)], axis=0)


# -- single steps (the schemes) ---------------------------------------------

def _log_step(m: ModelSpec, y: np.ndarray, x: np.ndarray, dt: float,
              dw: np.ndarray, milstein: bool) -> np.ndarray:
    """Advance Y = ln X by one step; x must equal exp(y)."""
    p = eval_p(m.exponent, x)
    b = m.sigma * np.exp((p - 1.0) * y)  # sigma * x^(p-1)
    incr = (m.mu - 0.5 * b * b) * dt + b * dw
    if milstein:
        b_prime = b * ((p - 1.0) + x * eval_dp(m.exponent, x) * y)
        incr = incr + 0.5 * b * b_prime * (dw * dw - dt)
    return y + incr


def step_log_milstein(m: ModelSpec, x, dt: float, dw) -> float | np.ndarray:
    """One log-space Milstein step; always returns a positive state."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("state must be positive")
    y2 = _log_step(m, np.log(xs), xs, dt, np.asarray(dw, dtype=float), milstein=True)
    bad = np.abs(y2) > LOG_OVERFLOW_LIMIT
    if np.any(bad):
        raise BlowUpError(np.nonzero(np.atleast_1d(bad))[0], step_index=0)
    out = np.exp(y2)
    return float(out) if np.ndim(x) == 0 and np.ndim(dw) == 0 else out


def step_log_euler(m: ModelSpec, x, dt: float, dw) -> float | np.ndarray:
    """Log-space Euler-Maruyama step (drops the Milstein correction)."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("state must be positive")
    y2 = _log_step(m, np.log(xs), xs, dt, np.asarray(dw, dtype=float), milstein=False)
    bad = np.abs(y2) > LOG_OVERFLOW_LIMIT
    if np.any(bad):
        raise BlowUpError(np.nonzero(np.atleast_1d(bad))[0], step_index=0)
    out = np.exp(y2)
    return float(out) if np.ndim(x) == 0 and np.ndim(dw) == 0 else out


def step_euler(m: ModelSpec, x, dt: float, dw) -> float | np.ndarray:
    """Direct-space Euler-Maruyama step; may return a non-positive value.

    Callers are responsible for the positivity policy (simulate_batch
    clamps to POSITIVITY_FLOOR and counts the breach).
    """
    return x + drift(m, x) * dt + diffusion(m, x) * np.asarray(dw, dtype=float)


def step_milstein(m: ModelSpec, x, dt: float, dw) -> float | np.ndarray:
    """Direct-space Milstein step; positivity policy as step_euler."""
    dwa = np.asarray(dw, dtype=float)
    g = diffusion(m, x)
    return (x + drift(m, x) * dt + g * dwa
            + 0.5 * g * diffusion_deriv(m, x) * (dwa * dwa - dt))


# -- batches ----------------------------------------------------------------

@dataclass
class PathBatch:
    """Dense simulated paths: one row per path on the shared time grid."""

    time_grid: np.ndarray
    values: np.ndarray  # (n_paths, n_steps + 1)
    model_label: str
    config: SimConfig
    breach_counts: np.ndarray = field(default=None)  # per-path floor clamps

    def __post_init__(self):
        if self.breach_counts is None:
            self.breach_counts = np.zeros(self.values.shape[0], dtype=int)

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    def summary_dict(self) -> dict:
        term = self.terminal
        return {
            "model": self.model_label,
            "n_paths": int(self.values.shape[0]),
            "terminal_mean": float(term.mean()),
            "terminal_variance": float(term.var(ddof=1)) if term.size > 1 else 0.0,
            "min_value": float(self.values.min()),
            "max_value": float(self.values.max()),
            "positivity_breaches": int(self.breach_counts.sum()),
            "seed": self.config.seed,
            "scheme": self.config.scheme,
        }

    def to_csv(self, path, max_paths: int = 1000) -> None:
        """Write `t,path_0,path_1,...`, subsampled to at most max_paths rows."""
        n = min(self.values.shape[0], max_paths)
        header = "t," + ",".join(f"path_{i}" for i in range(n))
        data = np.column_stack([self.time_grid, self.values[:n].T])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.12g")


def _dense_bytes(cfg: SimConfig) -> int:
    return cfg.n_paths * (cfg.n_steps + 1) * 8


def _require_dense_fits(cfg: SimConfig, n_models: int = 1) -> None:
    need = _dense_bytes(cfg) * n_models
    if need > MEMORY_CAP_BYTES:
        raise MemoryError(
            f"dense path storage needs {need / 2**30:.1f} GiB > cap "
            f"{MEMORY_CAP_BYTES / 2**30:.0f} GiB; use simulate_coupled_stats"
        )


def run_with_increments(m: ModelSpec, cfg: SimConfig, dw: np.ndarray,
                        label: str = "model") -> PathBatch:
    """Advance all paths of one model over a caller-supplied increment
    matrix of shape (n_paths, n_steps) with cfg's step size."""
    dw = np.asarray(dw, dtype=float)
    if dw.ndim != 2 or dw.shape[1] != cfg.n_steps:
        raise ValueError("increment matrix must be (n_paths, cfg.n_steps)")
    n_paths, n_steps = dw.shape
    dt = cfg.dt
    values = np.empty((n_paths, n_steps + 1))
    values[:, 0] = cfg.x0
    breaches = np.zeros(n_paths, dtype=int)

    if cfg.scheme in (LOG_EULER, LOG_MILSTEIN):
        milstein = cfg.scheme == LOG_MILSTEIN
        y = np.full(n_paths, math.log(cfg.x0))
        x = np.exp(y)
        for k in range(n_steps):
            y = _log_step(m, y, x, dt, dw[:, k], milstein)
            bad = np.abs(y) > LOG_OVERFLOW_LIMIT
            if bad.any():
                raise BlowUpError(np.nonzero(bad)[0], k, label)
            x = np.exp(y)
            values[:, k + 1] = x
    else:
        step = step_milstein if cfg.scheme == MILSTEIN else step_euler
        x = np.full(n_paths, cfg.x0)
        for k in range(n_steps):
            x2 = step(m, x, dt, dw[:, k])
            low = x2 < POSITIVITY_FLOOR
            if low.any():
                breaches += low
                x2 = np.where(low, POSITIVITY_FLOOR, x2)
            if not np.all(np.isfinite(x2)):
                raise BlowUpError(np.nonzero(~np.isfinite(x2))[0], k, label)
            x = x2
            values[:, k + 1] = x

    return PathBatch(time_grid=cfg.time_grid, values=values,
                     model_label=label, config=cfg, breach_counts=breaches)


def simulate_batch(m: ModelSpec, cfg: SimConfig, label: str = "model") -> PathBatch:
    """Simulate one model; deterministic for fixed (m, cfg)."""
    _require_dense_fits(cfg)
    return run_with_increments(m, cfg, increment_matrix(cfg), label)


def simulate_coupled(models: Sequence[ModelSpec], cfg: SimConfig,
                     labels: Optional[Sequence[str]] = None) -> list[PathBatch]:
    """Simulate several models over identical Brownian increments.

    Path i of every returned batch consumed the same increment array, so
    pathwise differences isolate model structure rather than noise.
    """
    if labels is None:
        labels = [f"model_{i}" for i in range(len(models))]
    if len(labels) != len(models):
        raise ValueError("labels must match models")
    _require_dense_fits(cfg, n_models=len(models))
    dw = increment_matrix(cfg)
    return [run_with_increments(m, cfg, dw, lab) for m, lab in zip(models, labels)]


# -- streaming accumulators (runs too large for dense storage) ---------------

@dataclass
class ModelPathStats:
    """Per-model accumulators kept when dense paths are not stored."""

    label: str
    terminal: np.ndarray   # (n_paths,)
    path_sup: np.ndarray   # per-path running sup of X
    min_value: float
    max_value: float
    phi_min: float         # range of x^p(x) over visited states
    phi_max: float


@dataclass
class CoupledStats:
    """Streaming reduction of a coupled run: model stats + pathwise sup-diffs.

    sup_abs_diff[j] holds, per path, sup_t |X_j(t) - X_0(t)| against the
    first (reference) model.
    """

    config: SimConfig
    models: list[ModelPathStats]
    sup_abs_diff: np.ndarray  # (n_models, n_paths); row 0 is zeros


def simulate_coupled_terminals(models: Sequence[ModelSpec], cfg: SimConfig) -> list[np.ndarray]:
    """Coupled simulation keeping only the terminal values.

    Lean variant for pricing workloads: identical increments and stepping
    as simulate_coupled, no per-path accumulators.
    """
    if cfg.scheme not in (LOG_EULER, LOG_MILSTEIN):
        batches = simulate_coupled(models, cfg)
        return [b.terminal for b in batches]
    milstein = cfg.scheme == LOG_MILSTEIN
    dw = increment_matrix(cfg)
    out = []
    for j, m in enumerate(models):
        y = np.full(cfg.n_paths, math.log(cfg.x0))
        x = np.exp(y)
        for k in range(cfg.n_steps):
            y = _log_step(m, y, x, cfg.dt, dw[:, k], milstein)
            bad = np.abs(y) > LOG_OVERFLOW_LIMIT
            if bad.any():
                raise BlowUpError(np.nonzero(bad)[0], k, f"model_{j}")
            x = np.exp(y)
        out.append(x)
    return out


def simulate_coupled_stats(models: Sequence[ModelSpec], cfg: SimConfig,
                           labels: Optional[Sequence[str]] = None) -> CoupledStats:
    """Coupled simulation keeping only reductions, never the dense paths.

    Produces exactly the statistics the analysis layer needs (terminal
    values, per-path sups, state extrema, diffusion-factor range and
    sup-differences vs the first model) with O(n_paths) memory.
    """
    if labels is None:
        labels = [f"model_{i}" for i in range(len(models))]
    if len(labels) != len(models):
        raise ValueError("labels must match models")
    if cfg.scheme not in (LOG_EULER, LOG_MILSTEIN):
        raise ValueError("streaming reduction supports the log-space schemes only")
    milstein = cfg.scheme == LOG_MILSTEIN

    n_models = len(models)
    n_paths, n_steps, dt = cfg.n_paths, cfg.n_steps, cfg.dt
    y = np.full((n_models, n_paths), math.log(cfg.x0))
    x = np.exp(y)
    path_sup = np.full((n_models, n_paths), cfg.x0)
    min_val = np.full(n_models, cfg.x0)
    max_val = np.full(n_models, cfg.x0)
    phi_min = np.empty(n_models)
    phi_max = np.empty(n_models)
    for j, m in enumerate(models):
        phi_min[j] = phi_max[j] = float(eval_phi(m.exponent, cfg.x0))
    sup_diff = np.zeros((n_models, n_paths))

    # The increment matrix itself usually fits even when the dense path
    # matrices do not; stream it column-wise. If it does not fit, advance
    # each path's Philox stream one step at a time instead (same streams,
    # same numbers, just drawn lazily).
    if n_paths * n_steps * 8 <= MEMORY_CAP_BYTES // 2:
        full = increment_matrix(cfg)

        def get_col(k: int) -> np.ndarray:
            return full[:, k]
    else:  # pragma: no cover - exercised only at extreme scale
        streams = [
            np.random.Generator(np.random.Philox(key=np.array([cfg.seed, i], dtype=np.uint64)))
            for i in range(cfg.n_base_paths)
        ]
        sqdt = math.sqrt(dt)

        def get_col(k: int) -> np.ndarray:
            col = np.array([g.normal(0.0, sqdt) for g in streams])
            return np.concatenate([col, -col]) if cfg.antithetic else col

    for k in range(n_steps):
        dwk = get_col(k)
        for j, m in enumerate(models):
            y[j] = _log_step(m, y[j], x[j], dt, dwk, milstein)
            bad = np.abs(y[j]) > LOG_OVERFLOW_LIMIT
            if bad.any():
                raise BlowUpError(np.nonzero(bad)[0], k, labels[j])
            x[j] = np.exp(y[j])
            np.maximum(path_sup[j], x[j], out=path_sup[j])
            min_val[j] = min(min_val[j], float(x[j].min()))
            max_val[j] = max(max_val[j], float(x[j].max()))
            phi = np.asarray(eval_phi(m.exponent, x[j]))
            phi_min[j] = min(phi_min[j], float(phi.min()))
            phi_max[j] = max(phi_max[j], float(phi.max()))
            if j > 0:
                np.maximum(sup_diff[j], np.abs(x[j] - x[0]), out=sup_diff[j])

    stats = [
        ModelPathStats(label=labels[j], terminal=x[j].copy(),
                       path_sup=path_sup[j], min_value=float(min_val[j]),
                       max_value=float(max_val[j]), phi_min=float(phi_min[j]),
                       phi_max=float(phi_max[j]))
        for j in range(n_models)
    ]
    return CoupledStats(config=cfg, models=stats, sup_abs_diff=sup_diff)
