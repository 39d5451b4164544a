"""Synthetic firm cross-sections and panels, the phi index, and observation CSV I/O."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, ObservationFormatError
from .rng import BlockStream, check_seed

CSV_COLUMNS = ("firm_id", "period", "growth", "endowment", "age", "export_intensity", "phi")
REGRESSORS = ("endowment", "age", "export_intensity", "phi")

# population moments of LogNormal(0, 1); standardising with these keeps each
# firm's value independent of the rest of the sample
_LN_MEAN = math.exp(0.5)
_LN_SD = math.sqrt((math.e - 1.0) * math.e)

# uniforms per firm: 5 time-invariant slots, then 4 per period
_STATIC_SLOTS = 5
_PERIOD_SLOTS = 4


@dataclass(frozen=True)
class PhiProxies:
    digital_adoption: float
    strategic_awareness: float
    advice_seeking: float
    data_capability: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{f.name} must lie in [0, 1], got {v}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.digital_adoption, self.strategic_awareness,
                self.advice_seeking, self.data_capability)


def phi_index(p: PhiProxies, weights: Sequence[float] = (0.25, 0.25, 0.25, 0.25)) -> float:
    """Weighted average of the four proxy scores; 1 means perfect information."""
    if len(weights) != 4:
        raise DomainError("phi_index needs exactly four weights")
    if any(not math.isfinite(w) or w < 0 for w in weights):
        raise DomainError("phi_index weights must be non-negative")
    if abs(math.fsum(weights) - 1.0) > 1e-9:
        raise DomainError(f"phi_index weights must sum to 1, got {math.fsum(weights)}")
    value = math.fsum(w * s for w, s in zip(weights, p.as_tuple()))
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class DgpCoefficients:
    intercept: float = 0.0
    endowment: float = 0.0
    age: float = 0.0
    export: float = 0.0
    phi: float = 0.0
    noise_sd: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(getattr(self, f.name)) for f in fields(self)):
            raise DomainError("DGP coefficients must be finite")
        if self.noise_sd < 0:
            raise DomainError(f"noise_sd must be >= 0, got {self.noise_sd}")

    def slopes(self) -> dict[str, float]:
        return {"endowment": self.endowment, "age": self.age,
                "export_intensity": self.export, "phi": self.phi}


@dataclass(frozen=True)
class RegressorDistributions:
    """How regressors are drawn and evolve.

    Endowment is the population z-score of a LogNormal(0, 1) size, times
    ``endowment_scale`` (a unit choice; 1 keeps plain z-scores). Age is
    uniform on whole years, and export intensity and phi are Beta draws. Within
    a firm, endowment, export and phi follow AR(1) paths around the firm's base
    draw.
    """

    age_min: int = 1
    age_max: int = 50
    export_beta: tuple[float, float] = (2.0, 5.0)
    phi_beta: tuple[float, float] = (5.0, 2.0)
    persistence: float = 0.9
    endowment_scale: float = 1.0
    endowment_shock_sd: float = 0.1
    export_shock_sd: float = 0.02
    phi_shock_sd: float = 0.01

    def __post_init__(self):
        if not 0 <= self.age_min <= self.age_max:
            raise DomainError("age bounds must satisfy 0 <= age_min <= age_max")
        for name in ("export_beta", "phi_beta"):
            a, b = getattr(self, name)
            if not (a > 0 and b > 0):
                raise DomainError(f"{name} shape parameters must be positive")
        if not 0.0 <= self.persistence <= 1.0:
            raise DomainError("persistence must lie in [0, 1]")
        if not (math.isfinite(self.endowment_scale) and self.endowment_scale > 0):
            raise DomainError("endowment_scale must be positive")
        if min(self.endowment_shock_sd, self.export_shock_sd, self.phi_shock_sd) < 0:
            raise DomainError("shock standard deviations must be >= 0")


@dataclass(frozen=True)
class PanelSpec:
    n_firms: int
    n_periods: int
    dgp: DgpCoefficients
    fixed_effect_sd: float = 0.0
    seed: int = 0
    regressors: RegressorDistributions = field(default_factory=RegressorDistributions)
    reverse_phi: bool = False

    def __post_init__(self):
        if self.n_firms < 1 or self.n_periods < 1:
            raise DomainError("panel needs n_firms >= 1 and n_periods >= 1")
        if not (math.isfinite(self.fixed_effect_sd) and self.fixed_effect_sd >= 0):
            raise DomainError("fixed_effect_sd must be finite and >= 0")
        check_seed(self.seed)

    def with_seed(self, seed: int) -> "PanelSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class FirmObservation:
    firm_id: str
    period: int
    growth: float
    endowment: float
    age: float
    export_intensity: float
    phi: float

    def __post_init__(self):
        for name in ("growth", "endowment", "age", "export_intensity", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.age < 0:
            raise DomainError(f"age must be >= 0, got {self.age}")
        for name in ("export_intensity", "phi"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")


@dataclass
class ObservationTable:
    """Columnar form of a list of observations; what the estimators work on."""

    firm_id: np.ndarray
    period: np.ndarray
    growth: np.ndarray
    endowment: np.ndarray
    age: np.ndarray
    export_intensity: np.ndarray
    phi: np.ndarray
    # firm-level intercepts used by the generator, when known
    alpha: dict[str, float] | None = None

    def __len__(self) -> int:
        return len(self.growth)

    def column(self, name: str) -> np.ndarray:
        if name not in CSV_COLUMNS[2:]:
            raise DomainError(f"unknown observation column {name!r}")
        return getattr(self, name)

    def to_rows(self) -> list[FirmObservation]:
        return [
            FirmObservation(str(f), int(p), float(g), float(e), float(a), float(x), float(h))
            for f, p, g, e, a, x, h in zip(self.firm_id, self.period, self.growth,
                                           self.endowment, self.age,
                                           self.export_intensity, self.phi)
        ]

    @classmethod
    def from_rows(cls, rows: Iterable[FirmObservation]) -> "ObservationTable":
        rows = list(rows)
        return cls(
            firm_id=np.array([r.firm_id for r in rows], dtype=object),
            period=np.array([r.period for r in rows], dtype=np.int64),
            **{name: np.array([getattr(r, name) for r in rows], dtype=float)
               for name in CSV_COLUMNS[2:]},
        )


def as_table(data) -> ObservationTable:
    if isinstance(data, ObservationTable):
        return data
    return ObservationTable.from_rows(data)


def _firm_ids(n: int) -> np.ndarray:
    width = max(3, len(str(n)))
    return np.array([f"F{i + 1:0{width}d}" for i in range(n)], dtype=object)


def _stream(spec: PanelSpec) -> BlockStream:
    return BlockStream(spec.seed, _STATIC_SLOTS + _PERIOD_SLOTS * spec.n_periods)


def firm_uniforms(spec: PanelSpec, firm_index: int) -> np.ndarray:
    """The uniforms driving one firm, generated without touching any other firm."""
    return _stream(spec).block(firm_index)


def _simulate(spec: PanelSpec, u: np.ndarray) -> ObservationTable:
    """Turn a ``(n_firms, block)`` array of uniforms into observations."""
    reg, dgp = spec.regressors, spec.dgp
    n, t_count = u.shape[0], spec.n_periods
    z = special.ndtri

    endow_base = (np.exp(z(u[:, 0])) - _LN_MEAN) / _LN_SD
    span = reg.age_max - reg.age_min + 1
    age0 = reg.age_min + np.minimum(np.floor(u[:, 1] * span), span - 1)
    export_base = special.betaincinv(*reg.export_beta, u[:, 2])
    phi_base = special.betaincinv(*reg.phi_beta, u[:, 3])
    alpha = spec.fixed_effect_sd * z(u[:, 4])

    per = u[:, _STATIC_SLOTS:_STATIC_SLOTS + _PERIOD_SLOTS * t_count]
    per = per.reshape(n, t_count, _PERIOD_SLOTS)
    shocks = z(per)  # (n, T, 4): endowment, export, phi, noise

    rho = reg.persistence
    endow = np.empty((n, t_count))
    export = np.empty((n, t_count))
    phi = np.empty((n, t_count))
    endow[:, 0], export[:, 0], phi[:, 0] = endow_base, export_base, phi_base
    for t in range(1, t_count):
        endow[:, t] = endow_base + rho * (endow[:, t - 1] - endow_base) \
            + reg.endowment_shock_sd * shocks[:, t, 0]
        export[:, t] = np.clip(export_base + rho * (export[:, t - 1] - export_base)
                               + reg.export_shock_sd * shocks[:, t, 1], 0.0, 1.0)
        phi[:, t] = np.clip(phi_base + rho * (phi[:, t - 1] - phi_base)
                            + reg.phi_shock_sd * shocks[:, t, 2], 0.0, 1.0)
    endow *= reg.endowment_scale
    if spec.reverse_phi:
        phi = 1.0 - phi
    age = age0[:, None] + np.arange(t_count)[None, :]

    growth = (alpha[:, None] + dgp.intercept + dgp.endowment * endow + dgp.age * age
              + dgp.export * export + dgp.phi * phi + dgp.noise_sd * shocks[:, :, 3])

    ids = _firm_ids(n)
    return ObservationTable(
        firm_id=np.repeat(ids, t_count),
        period=np.tile(np.arange(t_count, dtype=np.int64), n),
        growth=growth.ravel(),
        endowment=endow.ravel(),
        age=age.ravel().astype(float),
        export_intensity=export.ravel(),
        phi=phi.ravel(),
        alpha={str(i): float(a) for i, a in zip(ids, alpha)},
    )


def generate_table(spec: PanelSpec) -> ObservationTable:
    """Columnar panel, rows ordered by firm then period."""
    return _simulate(spec, _stream(spec).blocks(0, spec.n_firms))


def generate_firm(spec: PanelSpec, firm_index: int) -> ObservationTable:
    """Rows for a single firm; identical to that firm's rows in ``generate_table``."""
    if not 0 <= firm_index < spec.n_firms:
        raise DomainError(f"firm index {firm_index} outside 0..{spec.n_firms - 1}")
    table = _simulate(spec, firm_uniforms(spec, firm_index)[None, :])
    fid = _firm_ids(spec.n_firms)[firm_index]
    table.firm_id = np.array([fid] * spec.n_periods, dtype=object)
    table.alpha = {fid: next(iter(table.alpha.values()))}
    return table


def gen_cross_section(spec: PanelSpec) -> list[FirmObservation]:
    if spec.n_periods != 1:
        raise DomainError(f"a cross-section needs n_periods = 1, got {spec.n_periods}")
    return generate_table(spec).to_rows()


def gen_panel(spec: PanelSpec) -> list[FirmObservation]:
    return generate_table(spec).to_rows()


# --- CSV I/O -----------------------------------------------------------------

def format_observations(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    table = as_table(rows)
    for f, p, *vals in zip(table.firm_id, table.period, table.growth, table.endowment,
                           table.age, table.export_intensity, table.phi):
        writer.writerow([f, int(p), *(repr(float(v)) for v in vals)])
    return buf.getvalue()


def write_observations(rows, path: str | Path) -> None:
    Path(path).write_text(format_observations(rows), encoding="utf-8", newline="")


def parse_observations(text: str, source: str = "<string>") -> list[FirmObservation]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ObservationFormatError(f"{source}: missing header line", line=1)
    if tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise ObservationFormatError(
            f"{source}: line 1: header must be {','.join(CSV_COLUMNS)}", line=1)
    rows = []
    for line_no, rec in enumerate(reader, start=2):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        if len(rec) != len(CSV_COLUMNS):
            raise ObservationFormatError(
                f"{source}: line {line_no}: expected {len(CSV_COLUMNS)} fields, got {len(rec)}",
                line=line_no)
        values: dict = {"firm_id": rec[0].strip()}
        if not values["firm_id"]:
            raise ObservationFormatError(f"{source}: line {line_no}: column firm_id is empty",
                                         line=line_no, field="firm_id")
        for name, raw in zip(CSV_COLUMNS[1:], rec[1:]):
            try:
                values[name] = int(raw) if name == "period" else float(raw)
            except ValueError:
                raise ObservationFormatError(
                    f"{source}: line {line_no}: column {name}: cannot parse {raw!r}",
                    line=line_no, field=name) from None
        try:
            rows.append(FirmObservation(**values))
        except DomainError as exc:
            bad = next((n for n in CSV_COLUMNS if str(exc).startswith(n)), None)
            raise ObservationFormatError(f"{source}: line {line_no}: {exc}",
                                         line=line_no, field=bad) from None
    return rows


def read_observations(path: str | Path) -> list[FirmObservation]:
    path = Path(path)
    return parse_observations(path.read_text(encoding="utf-8"), source=str(path))
