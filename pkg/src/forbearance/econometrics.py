"""Linear estimation from first principles: Gaussian-identity GLM (OLS) and the
fixed-effects within estimator, with classical homoskedastic inference."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg, special, stats

from .errors import DomainError, RankDeficiencyError
from .paneldata import REGRESSORS, as_table

RANK_TOL = 1e-10
SIGNIFICANCE = 0.05


class Estimator(str, enum.Enum):
    GLM = "GlmGaussianIdentity"
    FIXED_EFFECTS = "FixedEffectsWithin"


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError("design matrix must be two-dimensional")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        n, k = values.shape
        if len(self.column_names) != k:
            raise DomainError(f"{k} columns but {len(self.column_names)} names")
        if len(set(self.column_names)) != k:
            raise DomainError("design column names must be unique")
        if not n > k:
            raise DomainError(f"need more observations than columns, got n={n}, k={k}")
        if not np.all(np.isfinite(values)):
            raise DomainError("design matrix entries must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def from_columns(cls, columns: Mapping[str, np.ndarray], intercept: bool = True):
        cols = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
        n = len(next(iter(cols.values()))) if cols else 0
        names, arrays = [], []
        if intercept:
            names.append("const")
            arrays.append(np.ones(n))
        for name, arr in cols.items():
            names.append(name)
            arrays.append(arr)
        return cls(np.column_stack(arrays) if arrays else np.empty((n, 0)), tuple(names))


@dataclass
class RegressionResult:
    estimator: Estimator
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    n_obs: int
    df_resid: int
    sigma2: float
    fixed_effects: dict[str, float] | None = None
    dropped: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"no coefficient named {name!r}") from None

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.index(name)])

    def pvalue(self, name: str) -> float:
        return float(self.p_values[self.index(name)])

    def confidence_interval(self, level: float = 0.95) -> np.ndarray:
        crit = t_critical(1.0 - level, self.df_resid)
        half = crit * self.std_errors
        return np.column_stack([self.coefficients - half, self.coefficients + half])

    def to_json(self) -> dict:
        return {
            "estimator": self.estimator.value,
            "variables": [
                {"name": n, "coefficient": float(c), "std_error": float(s),
                 "t_statistic": float(t), "p_value": float(p)}
                for n, c, s, t, p in zip(self.names, self.coefficients, self.std_errors,
                                         self.t_stats, self.p_values)
            ],
            "r_squared": self.r_squared,
            "n_obs": self.n_obs,
            "df_resid": self.df_resid,
            "sigma2": self.sigma2,
            "fixed_effects": self.fixed_effects,
            "dropped": list(self.dropped),
            "notes": list(self.notes),
        }

    def to_table(self) -> str:
        """Aligned text table: coefficient, standard error, t-statistic, p-value."""
        head = f"{'Variable':<18}{'Coefficient':>13}{'Std. Error':>13}{'t-Statistic':>13}{'p-Value':>11}"
        lines = [head, "-" * len(head)]
        for n, c, s, t, p in zip(self.names, self.coefficients, self.std_errors,
                                 self.t_stats, self.p_values):
            lines.append(f"{n:<18}{c:>13.6g}{s:>13.6g}{t:>13.6g}{p:>11.6g}")
        lines.append("-" * len(head))
        lines.append(f"estimator: {self.estimator.value}  n: {self.n_obs}  "
                     f"df_resid: {self.df_resid}  R^2: {self.r_squared:.6g}")
        return "\n".join(lines)


def t_pvalue(t, df):
    """Two-sided Student-t p-value ``2 * (1 - F(|t|; df))``.

    Uses ``P(|T| > t) = I_x(df/2, 1/2)`` with ``x = df / (df + t**2)``, the
    regularised incomplete beta function. When p > 1/2 the reflected form
    ``1 - I_{1-x}(1/2, df/2)`` is used instead: ``1 - x`` is then formed without
    cancellation. Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)):
        raise DomainError("t statistic is NaN")
    if not (np.isfinite(df) and df >= 1):
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    with np.errstate(over="ignore"):
        t2 = np.square(t)
    finite = np.where(np.isinf(t2), 1.0, t2)
    x = np.where(np.isinf(t2), 0.0, df / (df + finite))
    x_c = np.where(np.isinf(t2), 1.0, finite / (df + finite))
    inner = special.betainc(0.5, 0.5 * df, x_c)  # P(|T| <= t)
    p = np.where(inner < 0.5, 1.0 - inner, special.betainc(0.5 * df, 0.5, x))
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def t_critical(alpha: float, df: float) -> float:
    """Two-sided critical value: ``P(|T| > c) = alpha``."""
    return float(stats.t.isf(0.5 * alpha, df))


def _least_squares(X: np.ndarray, y: np.ndarray, names: Sequence[str]):
    """Pivoted-QR solve; returns coefficients and ``(X'X)^-1``."""
    n, k = X.shape
    if k == 0:
        return np.empty(0), np.empty((0, 0))
    q, r, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag[0] > 0 else 0
    if rank < k:
        bad = names[piv[rank]]
        raise RankDeficiencyError(
            f"design matrix is rank deficient (rank {rank} < {k}); "
            f"column {bad!r} is linearly dependent on the others", column=bad)
    beta_p = linalg.solve_triangular(r, q.T @ y)
    r_inv = linalg.solve_triangular(r, np.eye(k))
    cov_p = r_inv @ r_inv.T
    beta = np.empty(k)
    beta[piv] = beta_p
    cov = np.empty((k, k))
    cov[np.ix_(piv, piv)] = cov_p
    return beta, cov


def _inference(beta: np.ndarray, cov_unscaled: np.ndarray, rss: float, df: int):
    sigma2 = rss / df
    se = np.sqrt(np.clip(np.diag(cov_unscaled), 0.0, None) * sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / np.where(se > 0, se, 1.0),
                     np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    return sigma2, se, t, t_pvalue(t, df)


def _has_intercept(X: np.ndarray) -> bool:
    return bool(np.any(np.all(X == X[0:1, :], axis=0) & (X[0] != 0)))


def fit_glm(X: DesignMatrix, y) -> RegressionResult:
    """Gaussian family, identity link: coincides with ordinary least squares."""
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if y.shape != (n,):
        raise DomainError(f"response must have length {n}")
    if not np.all(np.isfinite(y)):
        raise DomainError("response must be finite")
    beta, cov = _least_squares(X.values, y, X.column_names)
    resid = y - X.values @ beta
    rss = float(resid @ resid)
    df = n - k
    sigma2, se, t, p = _inference(beta, cov, rss, df)
    centre = y.mean() if _has_intercept(X.values) else 0.0
    tss = float(np.sum((y - centre) ** 2))
    r2 = 0.0 if tss == 0 else min(1.0, max(0.0, 1.0 - rss / tss))
    return RegressionResult(Estimator.GLM, X.column_names, beta, se, np.asarray(t, float),
                            np.atleast_1d(p), r2, n, df, sigma2)


def fit_observations_glm(data, columns: Sequence[str] = REGRESSORS) -> RegressionResult:
    """Pooled GLM of growth on the named observation columns plus an intercept."""
    table = as_table(data)
    X = DesignMatrix.from_columns({c: table.column(c) for c in columns})
    return fit_glm(X, table.growth)


@dataclass(frozen=True)
class WithinData:
    design: DesignMatrix
    response: np.ndarray
    dropped: tuple[str, ...]
    groups: np.ndarray  # firm index per row
    firm_ids: tuple[str, ...]
    firm_means: np.ndarray  # (n_firms, 1 + len(kept)): response then kept regressors


def _group_means(values: np.ndarray, groups: np.ndarray, counts: np.ndarray) -> np.ndarray:
    sums = np.zeros((len(counts), values.shape[1]))
    np.add.at(sums, groups, values)
    return sums / counts[:, None]


def within_transform(data, columns: Sequence[str] = REGRESSORS) -> WithinData:
    """Subtract firm means from growth and each regressor.

    Columns with no within-firm variation vanish under demeaning and are
    dropped; an error is raised only if nothing survives.
    """
    table = as_table(data)
    if len(table) == 0:
        raise DomainError("no observations")
    ids, groups = np.unique(table.firm_id.astype(str), return_inverse=True)
    counts = np.bincount(groups)
    if counts.max() < 2:
        raise DomainError("within transform needs at least one firm observed in >= 2 periods")
    raw = np.column_stack([table.growth] + [table.column(c) for c in columns])
    means = _group_means(raw, groups, counts)
    demeaned = raw - means[groups]
    kept, dropped = [], []
    for j, name in enumerate(columns, start=1):
        scale = max(float(np.linalg.norm(raw[:, j])), 1e-300)
        if float(np.linalg.norm(demeaned[:, j])) <= RANK_TOL * scale:
            dropped.append(name)
        else:
            kept.append(j)
    if not kept:
        raise DomainError("every regressor is firm-invariant; nothing left after the within transform")
    n, k = len(table), len(kept)
    if n - k - len(ids) < 1:
        raise DomainError(f"too few observations for fixed effects: n={n}, k={k}, firms={len(ids)}")
    design = DesignMatrix(demeaned[:, kept], tuple(columns[j - 1] for j in kept))
    return WithinData(design, demeaned[:, 0], tuple(dropped), groups, tuple(str(i) for i in ids),
                      means[:, [0] + kept])


def fit_fixed_effects(data, columns: Sequence[str] = REGRESSORS) -> RegressionResult:
    """Within estimator with firm intercepts; equal to least squares on firm dummies.

    Degrees of freedom count the estimated firm means: ``n - k - n_firms``.
    """
    wd = within_transform(data, columns)
    X, y = wd.design.values, wd.response
    n, k = X.shape
    beta, cov = _least_squares(X, y, wd.design.column_names)
    resid = y - X @ beta
    rss = float(resid @ resid)
    df = n - k - len(wd.firm_ids)
    sigma2, se, t, p = _inference(beta, cov, rss, df)
    tss = float(y @ y)
    r2 = 0.0 if tss == 0 else min(1.0, max(0.0, 1.0 - rss / tss))
    alpha = wd.firm_means[:, 0] - wd.firm_means[:, 1:] @ beta
    notes = []
    if "age" in wd.design.column_names:
        notes.extend(_age_trend_note(data, wd))
    return RegressionResult(Estimator.FIXED_EFFECTS, wd.design.column_names, beta, se,
                            np.asarray(t, float), np.atleast_1d(p), r2, n, df, sigma2,
                            fixed_effects={f: float(a) for f, a in zip(wd.firm_ids, alpha)},
                            dropped=list(wd.dropped), notes=notes)


def _age_trend_note(data, wd: WithinData) -> list[str]:
    table = as_table(data)
    counts = np.bincount(wd.groups)
    period = table.period.astype(float)[:, None]
    trend = (period - _group_means(period, wd.groups, counts)[wd.groups]).ravel()
    age = wd.design.values[:, wd.design.column_names.index("age")]
    denom = float(np.linalg.norm(age) * np.linalg.norm(trend))
    if denom == 0:
        return []
    corr = float(age @ trend) / denom
    if abs(corr) > 0.999:
        return [f"age is collinear with the common period trend within firms "
                f"(correlation {corr:.6f}); kept, but it cannot be separated from a time effect"]
    return []


def fit_lsdv(data, columns: Sequence[str] = REGRESSORS) -> RegressionResult:
    """Least squares with one indicator column per firm (no common intercept)."""
    table = as_table(data)
    ids, groups = np.unique(table.firm_id.astype(str), return_inverse=True)
    dummies = np.zeros((len(table), len(ids)))
    dummies[np.arange(len(table)), groups] = 1.0
    X = np.column_stack([table.column(c) for c in columns] + [dummies])
    names = tuple(columns) + tuple(f"firm[{i}]" for i in ids)
    return fit_glm(DesignMatrix(X, names), table.growth)


# --- pattern comparison ------------------------------------------------------

@dataclass(frozen=True)
class VariableExpectation:
    sign: str = "any"  # "+", "-" or "any"
    significant: bool | None = None  # None: significance not checked

    def __post_init__(self):
        if self.sign not in ("+", "-", "any"):
            raise DomainError(f"expected sign must be '+', '-' or 'any', got {self.sign!r}")


PatternExpectation = Mapping[str, VariableExpectation]


@dataclass(frozen=True)
class PatternRow:
    name: str
    coefficient: float
    p_value: float
    sign_ok: bool
    significance_ok: bool

    @property
    def passed(self) -> bool:
        return self.sign_ok and self.significance_ok


@dataclass(frozen=True)
class PatternReport:
    rows: tuple[PatternRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[str]:
        return [r.name for r in self.rows if not r.passed]


def is_significant(p_value: float, level: float = SIGNIFICANCE) -> bool:
    # boundary counts as significant
    return p_value <= level


def check_pattern(result: RegressionResult, expected: PatternExpectation,
                  level: float = SIGNIFICANCE) -> PatternReport:
    rows = []
    for name, exp in expected.items():
        if name not in result.names:
            raise DomainError(f"pattern names unknown variable {name!r}; "
                              f"fitted variables are {', '.join(result.names)}")
        c, p = result.coef(name), result.pvalue(name)
        sign_ok = exp.sign == "any" or (c > 0 if exp.sign == "+" else c < 0)
        sig_ok = exp.significant is None or is_significant(p, level) == exp.significant
        rows.append(PatternRow(name, c, p, sign_ok, sig_ok))
    return PatternReport(tuple(rows))
