"""Two-firm repeated Bertrand game with grim-trigger (Nash reversion) strategies."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .econ_model import DemandSpec
from .errors import DegenerateError, DomainError

TAIL_TOLERANCE = 1e-9


class StrategyKind(str, enum.Enum):
    GRIM_TRIGGER = "GrimTrigger"
    ALWAYS_COOPERATE = "AlwaysCooperate"
    ALWAYS_DEFECT = "AlwaysDefect"


class Action(str, enum.Enum):
    COOPERATE = "Cooperate"
    DEFECT = "Defect"


@dataclass(frozen=True)
class StagePayoffs:
    """Per-period payoffs of the stage game.

    ``pi_punish`` is paid in every period of mutual defection and to the
    cooperating firm when its rival defects unilaterally. ``pi_nash`` and
    ``pi_monopoly`` only anchor the collusion index. When omitted they default
    to ``pi_punish`` and ``pi_coop``.
    """

    pi_coop: float
    pi_defect: float
    pi_punish: float = 0.0
    pi_nash: float | None = None
    pi_monopoly: float | None = None

    def __post_init__(self):
        if self.pi_nash is None:
            object.__setattr__(self, "pi_nash", self.pi_punish)
        if self.pi_monopoly is None:
            object.__setattr__(self, "pi_monopoly", self.pi_coop)
        for name in ("pi_coop", "pi_defect", "pi_punish", "pi_nash", "pi_monopoly"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.pi_defect >= self.pi_coop >= self.pi_punish:
            raise DomainError(
                "stage payoffs must satisfy pi_defect >= pi_coop >= pi_punish, got "
                f"D={self.pi_defect}, C={self.pi_coop}, P={self.pi_punish}")
        if self.pi_monopoly < self.pi_nash:
            raise DomainError("pi_monopoly must be >= pi_nash")

    @property
    def max_abs(self) -> float:
        return max(abs(self.pi_coop), abs(self.pi_defect), abs(self.pi_punish))


@dataclass(frozen=True)
class BertrandMarketRules:
    sharing: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.sharing <= 1.0:
            raise DomainError(f"sharing must lie in [0, 1], got {self.sharing}")


@dataclass(frozen=True)
class GameConfig:
    payoffs: StagePayoffs
    delta: float
    horizon: int
    strategy_i: StrategyKind = StrategyKind.GRIM_TRIGGER
    strategy_j: StrategyKind = StrategyKind.GRIM_TRIGGER

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise DomainError(f"delta must lie in [0, 1), got {self.delta}")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        object.__setattr__(self, "strategy_i", StrategyKind(self.strategy_i))
        object.__setattr__(self, "strategy_j", StrategyKind(self.strategy_j))


@dataclass(frozen=True)
class GameOutcome:
    actions: tuple[tuple[Action, Action], ...]
    discounted_i: float
    discounted_j: float
    per_period: np.ndarray = field(repr=False)  # shape (horizon, 2)

    def to_json(self) -> dict:
        return {
            "discounted_i": self.discounted_i,
            "discounted_j": self.discounted_j,
            "periods": [
                {"t": t, "action_i": a.value, "action_j": b.value,
                 "payoff_i": float(self.per_period[t, 0]),
                 "payoff_j": float(self.per_period[t, 1])}
                for t, (a, b) in enumerate(self.actions)
            ],
        }


def bertrand_stage_payoffs(p_i: float, p_j: float, d: DemandSpec, c_i: float, c_j: float,
                           rules: BertrandMarketRules | None = None) -> tuple[float, float]:
    """Winner-take-all Bertrand payoffs.

    The lower-priced firm serves the whole market at its own price, where
    market demand is ``d.quantity(p, p)``. At equal prices firm ``i`` takes the
    ``sharing`` fraction and firm ``j`` the remainder.
    """
    if p_i < 0 or p_j < 0:
        raise DomainError("prices must be non-negative")
    rules = rules or BertrandMarketRules()
    if p_i < p_j:
        return (p_i - c_i) * d.quantity(p_i, p_i), 0.0
    if p_j < p_i:
        return 0.0, (p_j - c_j) * d.quantity(p_j, p_j)
    q = d.quantity(p_i, p_i)
    return rules.sharing * (p_i - c_i) * q, (1.0 - rules.sharing) * (p_j - c_j) * q


def critical_discount(p: StagePayoffs) -> float:
    """Smallest discount factor at which grim-trigger cooperation is sustainable."""
    gap = p.pi_defect - p.pi_punish
    if gap == 0:
        raise DegenerateError("critical discount undefined when pi_defect == pi_punish")
    return min(1.0, max(0.0, (p.pi_defect - p.pi_coop) / gap))


def is_sustainable(p: StagePayoffs, delta: float) -> bool:
    """Incentive compatibility ``pi_C/(1-d) >= pi_D + d*pi_P/(1-d)``.

    Evaluated as ``delta >= critical_discount`` so the verdict and the
    threshold can never disagree through rounding.
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    if p.pi_defect == p.pi_punish:
        # invariants force pi_coop == pi_defect as well: deviation gains nothing
        return True
    return delta >= critical_discount(p)


def tail_horizon(p: StagePayoffs, delta: float, tol: float = TAIL_TOLERANCE) -> int:
    """Shortest horizon T with ``delta**T * max|pi| / (1 - delta) < tol``."""
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    scale = p.max_abs / (1.0 - delta)
    if delta == 0.0 or scale < tol:
        return 1
    t = max(1, math.ceil(math.log(tol / scale) / math.log(delta)))
    while delta ** t * scale >= tol:
        t += 1
    return t


def _next_action(kind: StrategyKind, triggered: bool) -> Action:
    if kind is StrategyKind.ALWAYS_DEFECT:
        return Action.DEFECT
    if kind is StrategyKind.GRIM_TRIGGER and triggered:
        return Action.DEFECT
    return Action.COOPERATE


@lru_cache(maxsize=1024)
def _play(strategy_i: StrategyKind, strategy_j: StrategyKind, horizon: int):
    """Action path and payoff-cell codes; depends on neither payoffs nor delta.

    Actions depend only on whether each rival has defected yet, so the path
    reaches a constant pair within three periods; that pair is then repeated.
    """
    triggered_i = triggered_j = False  # has the *rival* defected yet
    prefix = []
    while len(prefix) < horizon:
        pair = (_next_action(strategy_i, triggered_i), _next_action(strategy_j, triggered_j))
        prefix.append(pair)
        state = (triggered_i or pair[1] is Action.DEFECT, triggered_j or pair[0] is Action.DEFECT)
        if state == (triggered_i, triggered_j):
            break
        triggered_i, triggered_j = state
    actions = tuple(prefix) + (prefix[-1],) * (horizon - len(prefix))
    head = np.array([[a is Action.DEFECT for a in pair] for pair in prefix], dtype=np.intp)
    codes = np.empty((horizon, 2), dtype=np.intp)
    codes[:len(head)] = head
    codes[len(head):] = head[-1]
    codes.setflags(write=False)
    return actions, codes


def _cell_payoffs(p: StagePayoffs, codes: np.ndarray) -> np.ndarray:
    # rows: own action (C, D); columns: rival action (C, D)
    table = np.array([[p.pi_coop, p.pi_punish], [p.pi_defect, p.pi_punish]])
    own, rival = codes[:, 0], codes[:, 1]
    return np.column_stack([table[own, rival], table[rival, own]])


def simulate_repeated_game(cfg: GameConfig) -> GameOutcome:
    actions, codes = _play(cfg.strategy_i, cfg.strategy_j, cfg.horizon)
    per_period = _cell_payoffs(cfg.payoffs, codes)
    weights = cfg.delta ** np.arange(cfg.horizon, dtype=float)
    disc = weights @ per_period
    return GameOutcome(actions, float(disc[0]), float(disc[1]), per_period)


def collusion_index(observed: float, p: StagePayoffs) -> float:
    """Friedman index: 0 at the static Nash payoff, 1 at joint monopoly."""
    span = p.pi_monopoly - p.pi_nash
    if span == 0:
        raise DegenerateError("collusion index undefined when pi_monopoly == pi_nash")
    return (observed - p.pi_nash) / span
