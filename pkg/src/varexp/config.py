"""Run configuration: JSON schema, validation, and the bundled default.

A run config names the models (first one is the reference for coupled
comparisons), the simulation parameters, the (lambda, R) cases for the
bound table, and the smile request. `load_config` raises ConfigError for
anything malformed; the CLI maps that to exit code 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .engine import SimConfig
from .models import ModelSpec
from .pricing import SmileRequest


class ConfigError(Exception):
    """Malformed or unusable run configuration."""


@dataclass
class RunConfig:
    labels: list[str]
    models: list[ModelSpec]
    sim: SimConfig
    bound_cases: list[tuple[float, float]] = field(default_factory=list)
    smile: Optional[SmileRequest] = None
    smile_n_base_paths: Optional[int] = None  # overrides sim path count for smiles
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")

    def model_by_label(self, label: str) -> ModelSpec:
        return self.models[self.labels.index(label)]

    def smile_sim(self) -> SimConfig:
        """Simulation config for the smile command (path count may differ)."""
        if self.smile_n_base_paths is None:
            return self.sim
        d = self.sim.to_dict()
        d["n_base_paths"] = self.smile_n_base_paths
        return SimConfig.from_dict(d)


_FORMATS = ("csv", "json", "svg")


def _parse(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    models_raw = raw.get("models")
    if not models_raw or not isinstance(models_raw, list):
        raise ConfigError("config needs a non-empty 'models' list")
    labels, models = [], []
    for i, md in enumerate(models_raw):
        try:
            label = str(md.get("label", f"model_{i}"))
            models.append(ModelSpec.from_dict(md))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"bad model entry {i}: {exc}") from exc
        if label in labels:
            raise ConfigError(f"duplicate model label {label!r}")
        labels.append(label)

    try:
        sim = SimConfig.from_dict(raw["sim"])
    except KeyError as exc:
        raise ConfigError(f"config needs a 'sim' section ({exc} missing)") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sim section: {exc}") from exc

    cases = []
    for j, pair in enumerate(raw.get("bound_cases", [])):
        try:
            lam, r = float(pair[0]), float(pair[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"bad bound case {j}: {exc}") from exc
        cases.append((lam, r))

    smile = None
    smile_paths = None
    if "smile" in raw:
        sd = dict(raw["smile"])
        smile_paths = sd.pop("n_base_paths", None)
        if smile_paths is not None:
            smile_paths = int(smile_paths)
        try:
            smile = SmileRequest(
                strikes=tuple(float(k) for k in sd["strikes"]),
                rate=float(sd["rate"]), maturity=float(sd["maturity"]),
                spot=float(sd["spot"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad smile section: {exc}") from exc

    out = raw.get("output", {})
    out_dir = str(out.get("dir", "out"))
    formats = tuple(out.get("formats", ["csv", "json"]))
    for f in formats:
        if f not in _FORMATS:
            raise ConfigError(f"unknown output format {f!r}")

    return RunConfig(labels=labels, models=models, sim=sim, bound_cases=cases,
                     smile=smile, smile_n_base_paths=smile_paths,
                     out_dir=out_dir, formats=formats)


def load_config(path) -> RunConfig:
    """Load and validate a JSON run config; 'paper.json' falls back to the
    bundled default when no such file exists on disk."""
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    elif p.name == "paper.json":
        text = bundled_paper_text()
    else:
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return _parse(raw)


def bundled_paper_text() -> str:
    """The packaged default configuration (reproduction parameters)."""
    return resources.files("varexp").joinpath("data/paper.json").read_text()


def load_paper_config() -> RunConfig:
    return _parse(json.loads(bundled_paper_text()))
