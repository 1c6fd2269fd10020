"""Budgeted adaptive quantile bracketing with a known Lipschitz constant.

Starting from the whole cube, each level evaluates f at the centers of the
surviving cells, takes the weighted quantile of the resulting table, prunes
every cell whose value is farther than 2*L*delta_k from the estimate, and
refines the survivors threefold per axis.  Pruned subtrees keep contributing
their inherited value and probability mass ("frozen" points), so the table
always represents the full partition.

The refinement path does not depend on the budget: the budget only decides
how deep the run goes.  `run_known_sweep` exploits this to answer many
budgets from a single deep run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import center_point, child_digits, half_radius
from .measure import ProductMeasure
from .wquantile import ValueMassTable, weighted_quantile_inf, weighted_quantile_sup


@dataclass(frozen=True)
class QuantileBracket:
    """Deterministic bracket [lower, upper] around the alpha-quantile."""

    estimate: float
    lower: float
    upper: float
    level: int
    calls_used: int
    evaluations: int


@dataclass(frozen=True)
class LevelRecord:
    level: int
    estimate: float
    lower: float
    upper: float
    calls_used: int       # ledger value needed to reach and evaluate this level
    evaluations: int      # distinct f evaluations after this level
    active_cells: int
    active_mass: float
    frozen_mass: float


@dataclass
class KnownRun:
    bracket: QuantileBracket
    history: list[LevelRecord]
    budget: int
    active_sets: list[list[tuple[int, ...]]] = field(default_factory=list)

    def bracket_for_budget(self, budget: int) -> QuantileBracket:
        """Deepest completed level affordable within `budget` calls."""
        if budget < 1:
            raise ValueError("budget must be >= 1")
        rec = None
        for r in self.history:
            if r.calls_used <= budget:
                rec = r
            else:
                break
        if rec is None:
            raise ValueError("budget smaller than the first level's cost")
        return QuantileBracket(
            rec.estimate, rec.lower, rec.upper, rec.level, rec.calls_used, rec.evaluations
        )


class _Evaluator:
    """Memoized center evaluation; the center child inherits without a call."""

    def __init__(self, f, dim: int):
        self.f = f
        self.dim = dim
        self.cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def __call__(self, level: int, cells: list[tuple[int, ...]]) -> np.ndarray:
        from .grid import canonical_center_key

        keys = [canonical_center_key(level, c) for c in cells]
        missing = [k for k in keys if k not in self.cache]
        if missing:
            pts = np.array([center_point(lv, dg) for lv, dg in missing])
            vals = np.asarray(self.f(pts), dtype=float)
            for k, v in zip(missing, vals):
                self.cache[k] = float(v)
        return np.array([self.cache[k] for k in keys])

    @property
    def count(self) -> int:
        return len(self.cache)


def run_known(
    f,
    lipschitz: float,
    measure: ProductMeasure,
    alpha: float,
    budget: int,
    max_level: int | None = None,
    keep_active_sets: bool = False,
) -> KnownRun:
    """Run the known-constant algorithm with at most `budget` calls to f.

    f maps an (n, d) array of points to an (n,) array of values and must be
    pure.  Returns the bracket of the deepest fully affordable level together
    with the per-level history.
    """
    if lipschitz <= 0:
        raise ValueError(f"lipschitz must be positive, got {lipschitz}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")

    d = measure.dim
    n_children = 3 ** d
    ev = _Evaluator(f, d)

    active: list[tuple[int, ...]] = [(0,) * d]
    values = ev(0, active)
    frozen_values: list[float] = []
    frozen_masses: list[float] = []
    n_call = 1
    k = 0
    history: list[LevelRecord] = []
    active_sets: list[list[tuple[int, ...]]] = []

    while True:
        masses = measure.cell_probabilities(k, active)
        table = ValueMassTable(
            np.concatenate([values, frozen_values]),
            np.concatenate([masses, frozen_masses]),
            np.concatenate([np.ones(len(active), dtype=bool), np.zeros(len(frozen_values), dtype=bool)]),
        )
        estimate = weighted_quantile_sup(table, alpha)
        est_inf = weighted_quantile_inf(table, alpha)
        # equal in exact arithmetic; cumulative-sum rounding can flip one
        # index when the alpha boundary falls between two near-equal values
        if abs(estimate - est_inf) > 1e-9 * (1.0 + abs(estimate)):
            raise AssertionError(
                f"sup/inf estimator mismatch at level {k}: {estimate} vs {est_inf}"
            )
        delta = half_radius(k, d)
        history.append(
            LevelRecord(
                level=k,
                estimate=estimate,
                lower=estimate - lipschitz * delta,
                upper=estimate + lipschitz * delta,
                calls_used=n_call,
                evaluations=ev.count,
                active_cells=len(active),
                active_mass=float(np.sum(masses)),
                frozen_mass=float(np.sum(frozen_masses)),
            )
        )
        if keep_active_sets:
            active_sets.append(list(active))

        band = 2.0 * lipschitz * delta
        keep = np.abs(values - estimate) <= band
        if not np.any(keep):
            raise AssertionError("no survivor: the estimate must lie in its own band")
        for i in np.flatnonzero(~keep):
            frozen_values.append(float(values[i]))
            frozen_masses.append(float(masses[i]))
        survivors = [active[i] for i in np.flatnonzero(keep)]

        n_call += (n_children - 1) * len(survivors)
        if n_call > budget:
            break
        if max_level is not None and k >= max_level:
            break

        k += 1
        active = []
        for cell in survivors:
            active.extend(child_digits(cell))
        # the center child shares the parent's center, so the memo makes it free
        values = ev(k, active)

    last = history[-1]
    bracket = QuantileBracket(
        last.estimate, last.lower, last.upper, last.level, last.calls_used, last.evaluations
    )
    return KnownRun(bracket=bracket, history=history, budget=budget, active_sets=active_sets)


def run_known_sweep(
    f,
    lipschitz: float,
    measure: ProductMeasure,
    alpha: float,
    budgets: list[int],
) -> dict[int, QuantileBracket]:
    """Brackets for many budgets from one deep run.

    Valid because the per-level estimates and active sets never depend on the
    budget; each budget just truncates the same run at a different level.
    """
    run = run_known(f, lipschitz, measure, alpha, max(budgets))
    return {n: run.bracket_for_budget(n) for n in budgets}


def full_grid_estimate(f, measure: ProductMeasure, alpha: float, level: int) -> float:
    """Level-k estimator computed on the complete grid (test oracle only)."""
    d = measure.dim
    n_cells = 3 ** (level * d)
    if n_cells > 10 ** 6:
        raise ValueError(f"refusing to enumerate {n_cells} cells")
    import itertools

    cells = [tuple(c) for c in itertools.product(range(3 ** level), repeat=d)]
    pts = np.array([center_point(level, c) for c in cells])
    values = np.asarray(f(pts), dtype=float)
    masses = measure.cell_probabilities(level, cells)
    table = ValueMassTable(values, masses, np.ones(len(cells), dtype=bool))
    return weighted_quantile_sup(table, alpha)


def prune(
    active: list[tuple[int, ...]],
    values: np.ndarray,
    estimate: float,
    lipschitz: float,
    level: int,
    dim: int,
) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Survivors of the closed band [estimate +/- 2*L*delta_k] and their children."""
    band = 2.0 * lipschitz * half_radius(level, dim)
    keep = np.abs(np.asarray(values, dtype=float) - estimate) <= band
    survivors = [active[i] for i in np.flatnonzero(keep)]
    nxt: list[tuple[int, ...]] = []
    for cell in survivors:
        nxt.extend(child_digits(cell))
    return nxt, keep
