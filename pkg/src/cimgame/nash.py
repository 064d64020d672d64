"""Zero-sum matrix-game solving and the expanding restricted-game loop.

The restricted game over the current action subsets is solved exactly as a
pair of maximin linear programs; each side's exact best response against the
other's equilibrium mixture then either certifies convergence (both already
present) or enlarges the game. With exact oracles the loop terminates at a
Nash equilibrium of the full game, or earlier once the best-response value
gap falls below epsilon.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .best_response import best_response
from .game import Allocation, GameError, GameSpec, MixedStrategy, payoff_pure

_SUPPORT_EPS = 1e-12
_DUALITY_TOL = 1e-7


class SolverError(RuntimeError):
    """Numerical failure in the LP backend; carries the offending matrix."""

    def __init__(self, message: str, matrix: np.ndarray):
        super().__init__(f"{message}\nmatrix:\n{np.array2string(matrix, threshold=200)}")
        self.matrix = matrix


class RestrictedGame:
    """Payoff matrix over explicit row/column action lists, grown in place."""

    def __init__(self, spec: GameSpec, rows, cols):
        self.spec = spec
        self.rows: list[Allocation] = list(rows)
        self.cols: list[Allocation] = list(cols)
        if not self.rows or not self.cols:
            raise GameError("restricted game needs at least one action per side")
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise GameError("restricted action sets must be distinct")
        self.matrix = np.array(
            [[payoff_pure(r, c, spec) for c in self.cols] for r in self.rows],
            dtype=np.float64,
        ).reshape(len(self.rows), len(self.cols))

    def add_row(self, action: Allocation) -> None:
        new = np.array([[payoff_pure(action, c, self.spec) for c in self.cols]])
        self.matrix = np.vstack([self.matrix, new])
        self.rows.append(action)

    def add_col(self, action: Allocation) -> None:
        new = np.array([[payoff_pure(r, action, self.spec)] for r in self.rows])
        self.matrix = np.hstack([self.matrix, new])
        self.cols.append(action)


def _maximin(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Row player's maximin mixture and guaranteed value for ``matrix``."""
    m, n = matrix.shape
    # variables (p_1..p_m, v): maximize v s.t. p^T M >= v per column, sum p = 1
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-matrix.T, np.ones((n, 1))])
    b_ub = np.zeros(n)
    a_eq = np.zeros((1, m + 1))
    a_eq[0, :m] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0.0, 1.0)] * m + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise SolverError(f"maximin LP failed: {res.message}", matrix)
    return res.x[:m], float(res.x[-1])


def _filter_support(actions, probs) -> MixedStrategy:
    keep = [(a, p) for a, p in zip(actions, probs) if p > _SUPPORT_EPS]
    total = sum(p for _, p in keep)
    return MixedStrategy(
        support=tuple(a for a, _ in keep),
        probs=tuple(p / total for _, p in keep),
    )


def solve_matrix_game(matrix) -> tuple[np.ndarray, np.ndarray, float]:
    """Equilibrium of a zero-sum matrix game (row player maximizes).

    Returns the row mixture, the column mixture, and the game value; both
    mixtures are verified to pin the value within 1e-6 on every pure reply.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise GameError("payoff matrix must be 2-D and nonempty")
    p, v_row = _maximin(matrix)
    q, v_col_neg = _maximin(-matrix.T)
    if abs(v_row + v_col_neg) > _DUALITY_TOL * max(1.0, abs(v_row)):
        raise SolverError(
            f"duality gap {v_row} vs {-v_col_neg} exceeds tolerance", matrix
        )
    _verify_equilibrium(matrix, p, q, v_row)
    return p, q, v_row


def solve_zero_sum(game: RestrictedGame) -> tuple[MixedStrategy, MixedStrategy, float]:
    """Exact equilibrium of the restricted matrix game.

    Returns the row player's maximin mixture, the column player's minimax
    mixture, and the game value from the row player's perspective. Support
    entries below 1e-12 are dropped and the mixtures renormalized.
    """
    p, q, value = solve_matrix_game(game.matrix)
    return _filter_support(game.rows, p), _filter_support(game.cols, q), value


def _verify_equilibrium(matrix, p, q, value) -> None:
    held_to = matrix @ q          # row player's payoff per pure row vs q
    guaranteed = p @ matrix       # row mixture's payoff per pure column
    if (held_to > value + 1e-6).any() or (guaranteed < value - 1e-6).any():
        raise SolverError("LP solution violates equilibrium bounds", matrix)


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    """Outcome of the restricted-game expansion loop."""

    nash1: MixedStrategy
    nash2: MixedStrategy
    game_value: float
    iterations: int
    gap: float
    wall_time: float
    termination: str  # converged | gap_epsilon | max_iters
    trace: list[dict] = field(default_factory=list)

    def trace_rows(self) -> list[dict]:
        return list(self.trace)


def double_oracle(
    spec: GameSpec,
    init1: Allocation,
    init2: Allocation,
    epsilon: float = 0.0,
    max_iters: int = 1000,
) -> EquilibriumResult:
    """Expand restricted action sets with exact best responses to equilibrium.

    Per iteration: solve the restricted game, best-respond to each side's
    mixture over the full action space (v1 = player 1's best-response value,
    v2 = player 2's best-response value negated into player-1 terms), and add
    the responses. Stops as converged when both responses were already
    present (exact full-game Nash), as gap_epsilon when v1 - v2 < epsilon
    (epsilon > 0), or flagged as max_iters when the budget runs out.
    """
    if epsilon < 0:
        raise GameError("epsilon must be >= 0")
    spec.validate_allocation(init1, 1)
    spec.validate_allocation(init2, 2)

    start = time.perf_counter()
    game = RestrictedGame(spec, [init1], [init2])
    row_set = {init1}
    col_set = {init2}
    trace: list[dict] = []
    nash1 = nash2 = None
    value = gap = 0.0
    termination = "max_iters"
    iteration = 0

    for iteration in range(1, max_iters + 1):
        nash1, nash2, value = solve_zero_sum(game)
        a1, v1 = best_response(nash2, spec, player=1)
        a2, payoff2 = best_response(nash1, spec, player=2)
        v2 = -payoff2
        gap = v1 - v2
        trace.append(
            {
                "iteration": iteration,
                "value": value,
                "v1": v1,
                "v2": v2,
                "gap": gap,
                "rows": len(game.rows),
                "cols": len(game.cols),
                "support1": len(nash1.support),
                "support2": len(nash2.support),
            }
        )
        have1 = a1 in row_set
        have2 = a2 in col_set
        if have1 and have2:
            termination = "converged"
            break
        if epsilon > 0 and gap < epsilon:
            termination = "gap_epsilon"
            break
        if not have1:
            game.add_row(a1)
            row_set.add(a1)
        if not have2:
            game.add_col(a2)
            col_set.add(a2)

    return EquilibriumResult(
        nash1=nash1,
        nash2=nash2,
        game_value=value,
        iterations=iteration,
        gap=gap,
        wall_time=time.perf_counter() - start,
        termination=termination,
        trace=trace,
    )
