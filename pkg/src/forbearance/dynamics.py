"""Planar affine growth dynamics and their stability.

The system couples endowment ``x`` and growth ``y``::

    dx/dt = -a*x + b*y
    dy/dt = A * sigma**(1 - phi) - y

i.e. ``v' = M v + f`` with ``M = [[-a, b], [0, -1]]`` and
``f = (0, growth_rate)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .econ_model import GrowthParams, growth_rate
from .errors import DivergenceError, DomainError, SingularSystemError

DEFAULT_DT = 0.01
DEFAULT_T_END = 50.0
# relative tolerance for treating an eigenvalue part as zero or two roots as equal
EIG_TOL = 1e-12


class StabilityClass(str, enum.Enum):
    STABLE_NODE = "StableNode"
    UNSTABLE_NODE = "UnstableNode"
    SADDLE_PATH = "SaddlePath"
    STABLE_SPIRAL = "StableSpiral"
    UNSTABLE_SPIRAL = "UnstableSpiral"
    CENTER = "Center"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class DynamicsParams:
    a: float
    b: float
    growth: GrowthParams

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("dynamics coefficients a, b must be finite")


@dataclass(frozen=True)
class LinearSystem2x2:
    matrix: tuple[tuple[float, float], tuple[float, float]]
    forcing: tuple[float, float]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        f = np.asarray(self.forcing, dtype=float)
        if m.shape != (2, 2) or f.shape != (2,):
            raise DomainError("system needs a 2x2 matrix and a 2-vector forcing")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(f))):
            raise DomainError("system entries must be finite")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in m))
        object.__setattr__(self, "forcing", tuple(float(v) for v in f))

    def rhs(self, x: float, y: float) -> tuple[float, float]:
        (m00, m01), (m10, m11) = self.matrix
        return (m00 * x + m01 * y + self.forcing[0], m10 * x + m11 * y + self.forcing[1])

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.matrix), np.array(self.forcing)


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[complex, complex]
    stability: StabilityClass
    equilibrium: tuple[float, float] | None

    def to_json(self) -> dict:
        return {
            "eigenvalues": [{"re": e.real, "im": e.imag} for e in self.eigenvalues],
            "class": self.stability.value,
            "equilibrium": list(self.equilibrium) if self.equilibrium is not None else None,
        }


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 2)


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    nx: int = 20
    ny: int = 20

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise DomainError("vector-field grid needs nx >= 2 and ny >= 2")
        for lo, hi in (self.x_range, self.y_range):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError("grid ranges must be finite with lo < hi")

    @classmethod
    def around(cls, equilibrium: tuple[float, float], nx: int = 20, ny: int = 20) -> "GridSpec":
        """Default window ``[0, 2 x*] x [0, 2 y*]``; widened to [-1, 1] on a degenerate axis."""
        def span(v: float) -> tuple[float, float]:
            lo, hi = sorted((0.0, 2.0 * v))
            return (lo, hi) if hi - lo > 1e-12 else (-1.0, 1.0)
        return cls(span(equilibrium[0]), span(equilibrium[1]), nx, ny)


@dataclass(frozen=True)
class VectorFieldGrid:
    grid: GridSpec
    arrows: np.ndarray  # shape (nx*ny, 4): x, y, dx, dy


def build_system(p: DynamicsParams) -> LinearSystem2x2:
    return LinearSystem2x2(((-p.a, p.b), (0.0, -1.0)), (0.0, growth_rate(p.growth)))


def eigenvalues_2x2(m) -> tuple[complex, complex]:
    """Roots of ``lambda**2 - tr*lambda + det`` sorted by (real, imag).

    Real roots use the cancellation-free pairing ``q = (tr + sign(tr) sqrt(disc)) / 2``,
    ``det / q``.
    """
    (a, b), (c, d) = m
    if b * c == 0.0:
        # triangular: the diagonal is exact
        return tuple(sorted((complex(a), complex(d)), key=lambda z: (z.real, z.imag)))
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        s = math.sqrt(disc)
        q = 0.5 * (tr + math.copysign(s, tr))
        if q == 0.0:
            roots = (0.0, 0.0)
        else:
            roots = (q, det / q)
        l1, l2 = complex(roots[0]), complex(roots[1])
    else:
        im = 0.5 * math.sqrt(-disc)
        l1, l2 = complex(0.5 * tr, -im), complex(0.5 * tr, im)
    return tuple(sorted((l1, l2), key=lambda z: (z.real, z.imag)))


def classify_stability(eigs: tuple[complex, complex]) -> StabilityClass:
    l1, l2 = eigs
    scale = max(1.0, abs(l1), abs(l2))
    tol = EIG_TOL * scale
    if abs(l1) <= tol or abs(l2) <= tol:
        return StabilityClass.DEGENERATE
    if abs(l1.imag) > tol:
        if abs(l1.real) <= tol:
            return StabilityClass.CENTER
        return StabilityClass.STABLE_SPIRAL if l1.real < 0 else StabilityClass.UNSTABLE_SPIRAL
    r1, r2 = l1.real, l2.real
    if abs(r1 - r2) <= tol:
        # repeated real root: star or defective node, not separated here
        return StabilityClass.DEGENERATE
    if r1 < 0 and r2 < 0:
        return StabilityClass.STABLE_NODE
    if r1 > 0 and r2 > 0:
        return StabilityClass.UNSTABLE_NODE
    return StabilityClass.SADDLE_PATH


def equilibrium_point(sys: LinearSystem2x2) -> tuple[float, float]:
    """Solve ``M v + f = 0`` by Cramer's rule."""
    (a, b), (c, d) = sys.matrix
    det = a * d - b * c
    scale = max(abs(a), abs(b), abs(c), abs(d), 1e-300)
    if abs(det) <= 1e-14 * scale * scale:
        raise SingularSystemError("system matrix is singular; no unique equilibrium")
    f0, f1 = sys.forcing
    x = (-f0 * d + b * f1) / det
    y = (-a * f1 + c * f0) / det
    return (x + 0.0, y + 0.0)


def analyze(sys: LinearSystem2x2) -> StabilityReport:
    eigs = eigenvalues_2x2(sys.matrix)
    try:
        eq = equilibrium_point(sys)
    except SingularSystemError:
        eq = None
    return StabilityReport(eigs, classify_stability(eigs), eq)


def integrate_trajectory(sys: LinearSystem2x2, start, t_end: float = DEFAULT_T_END,
                         dt: float = DEFAULT_DT) -> Trajectory:
    """Classical fixed-step RK4 from ``t = 0`` to ``t_end``.

    The step count is ``ceil(t_end / dt)`` and the last step is shortened to land
    exactly on ``t_end``.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be a positive finite number, got {dt}")
    if not (t_end >= dt and math.isfinite(t_end)):
        raise DomainError(f"t_end must be >= dt, got t_end={t_end}, dt={dt}")
    (m00, m01), (m10, m11) = sys.matrix
    f0, f1 = sys.forcing
    n = max(1, math.ceil(t_end / dt - 1e-9))
    times = np.minimum(np.arange(n + 1) * dt, t_end)
    times[-1] = t_end
    x, y = (float(v) for v in np.asarray(start, dtype=float).reshape(2))
    xs, ys = [x], [y]
    # scalar arithmetic: numpy call overhead dominates on 2-vectors
    for k in range(n):
        h = float(times[k + 1] - times[k])
        a1 = m00 * x + m01 * y + f0
        b1 = m10 * x + m11 * y + f1
        x2, y2 = x + 0.5 * h * a1, y + 0.5 * h * b1
        a2 = m00 * x2 + m01 * y2 + f0
        b2 = m10 * x2 + m11 * y2 + f1
        x3, y3 = x + 0.5 * h * a2, y + 0.5 * h * b2
        a3 = m00 * x3 + m01 * y3 + f0
        b3 = m10 * x3 + m11 * y3 + f1
        x4, y4 = x + h * a3, y + h * b3
        a4 = m00 * x4 + m01 * y4 + f0
        b4 = m10 * x4 + m11 * y4 + f1
        x = x + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        y = y + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DivergenceError(f"trajectory diverged at t = {times[k + 1]:g}", float(times[k + 1]))
        xs.append(x)
        ys.append(y)
    states = np.column_stack([xs, ys])
    return Trajectory(times, states)


def vector_field(sys: LinearSystem2x2, grid: GridSpec) -> VectorFieldGrid:
    """Right-hand side at every node, row-major in y then x."""
    m, f = sys.as_arrays()
    xs = np.linspace(*grid.x_range, grid.nx)
    ys = np.linspace(*grid.y_range, grid.ny)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vel = pts @ m.T + f
    return VectorFieldGrid(grid, np.column_stack([pts, vel]))
