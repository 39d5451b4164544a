"""Calibration presets shipped as TOML files next to this module."""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..econometrics import VariableExpectation
from ..errors import DomainError
from ..paneldata import DgpCoefficients, PanelSpec, RegressorDistributions

ESTIMATORS = ("glm", "fe")


@dataclass(frozen=True)
class Preset:
    name: str
    estimator: str
    spec: PanelSpec
    pattern: dict[str, VariableExpectation]
    pass_threshold: float
    base_seed: int


def available() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".toml"))


def _parse(doc: dict, source: str) -> Preset:
    try:
        reg = dict(doc.get("regressors", {}))
        for key in ("export_beta", "phi_beta"):
            if key in reg:
                reg[key] = tuple(float(v) for v in reg[key])
        spec = PanelSpec(
            n_firms=int(doc["n_firms"]),
            n_periods=int(doc["n_periods"]),
            dgp=DgpCoefficients(**doc["dgp"]),
            fixed_effect_sd=float(doc.get("fixed_effect_sd", 0.0)),
            seed=int(doc.get("base_seed", 0)),
            regressors=RegressorDistributions(**reg),
            reverse_phi=bool(doc.get("reverse_phi", False)),
        )
        pattern = {name: VariableExpectation(**exp) for name, exp in doc["pattern"].items()}
        estimator = doc["estimator"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"{source}: malformed preset ({exc})") from None
    if estimator not in ESTIMATORS:
        raise DomainError(f"{source}: estimator must be one of {ESTIMATORS}")
    threshold = float(doc.get("pass_threshold", 0.8))
    if not 0.0 <= threshold <= 1.0:
        raise DomainError(f"{source}: pass_threshold must lie in [0, 1]")
    return Preset(doc.get("name", source), estimator, spec, pattern, threshold, spec.seed)


def load_preset(name_or_path: str) -> Preset:
    """Load a bundled preset by name, or any preset file by path."""
    path = Path(name_or_path)
    if path.suffix == ".toml" and path.exists():
        with path.open("rb") as fh:
            return _parse(tomllib.load(fh), str(path))
    if name_or_path not in available():
        raise DomainError(f"unknown preset {name_or_path!r}; available: {', '.join(available())}")
    with resources.files(__name__).joinpath(f"{name_or_path}.toml").open("rb") as fh:
        return _parse(tomllib.load(fh), name_or_path)


def with_overrides(preset: Preset, **spec_changes) -> Preset:
    changes = {k: v for k, v in spec_changes.items() if v is not None}
    return replace(preset, spec=replace(preset.spec, **changes)) if changes else preset
