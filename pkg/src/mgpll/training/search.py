"""
Trade-off weight selection by final training classification loss.
"""

import dataclasses
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from ..errors import ConfigError
from ..model.networks import MgpllConfig
from ..pldata.dataset import PLDataset
from .ablation import AblationVariant
from .trainer import TrainConfig, train

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)

Point = tuple[float, float, float]


class SearchStrategy(Enum):
    COORDINATE = "coordinate"
    FULL = "full"


@dataclass(frozen=True)
class SearchConfig:
    """Grid shared by alpha, beta and gamma, and how to walk it."""
    grid: tuple[float, ...] = DEFAULT_GRID
    strategy: SearchStrategy = SearchStrategy.COORDINATE
    workers: int = 1

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("search grid must not be empty")
        if any(not v >= 0 for v in self.grid):
            raise ConfigError(f"grid values must be nonnegative, got {self.grid}")
        if len(set(self.grid)) != len(self.grid):
            raise ConfigError(f"grid values must be distinct, got {self.grid}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")


@dataclass
class SearchResult:
    """Chosen weights and the final L_c of every evaluated point."""
    best: Point
    best_l_c: float
    evaluated: dict[Point, float] = field(default_factory=dict)

    @property
    def trainings(self) -> int:
        return len(self.evaluated)


def _rank(point: Point, l_c: float) -> tuple:
    # smallest L_c, then lexicographically smallest weights
    return (l_c, point)


class _Evaluator:
    """Trains each grid point at most once."""

    def __init__(
        self,
        dataset: PLDataset,
        variant: AblationVariant,
        cfg: TrainConfig,
        mcfg: MgpllConfig,
        progress_callback: Optional[Callable[[str, int, int], None]],
    ):
        self.dataset = dataset
        self.variant = variant
        self.cfg = cfg
        self.mcfg = mcfg
        self.progress_callback = progress_callback
        self.cache: dict[Point, float] = {}

    def evaluate(self, point: Point) -> float:
        if point not in self.cache:
            self.cache[point] = self._train(point)
        return self.cache[point]

    def _train(self, point: Point) -> float:
        alpha, beta, gamma = point
        mcfg = dataclasses.replace(self.mcfg, alpha=alpha, beta=beta, gamma=gamma)
        _, log = train(self.dataset, self.variant, self.cfg, mcfg)
        logger.info(
            "Grid point alpha=%g beta=%g gamma=%g: final l_c=%.6g",
            alpha, beta, gamma, log.final_l_c,
        )
        return log.final_l_c

    def evaluate_many(self, points: list[Point], workers: int) -> None:
        todo = [p for p in points if p not in self.cache]
        if workers <= 1 or len(todo) <= 1:
            for i, p in enumerate(todo, start=1):
                self.evaluate(p)
                if self.progress_callback:
                    self.progress_callback("grid", i, len(todo))
            return

        results: dict[Point, float] = {}
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(self._train, p): p for p in todo}
            for i, future in enumerate(as_completed(futures), start=1):
                results[futures[future]] = future.result()
                if self.progress_callback:
                    self.progress_callback("grid", i, len(todo))
        # merge in grid order
        for p in todo:
            self.cache[p] = results[p]


def _best(evaluated: dict[Point, float]) -> tuple[Point, float]:
    point = min(evaluated, key=lambda p: _rank(p, evaluated[p]))
    return point, evaluated[point]


def select_hyperparameters(
    dataset: PLDataset,
    cfg: Optional[TrainConfig] = None,
    search: Optional[SearchConfig] = None,
    mcfg: Optional[MgpllConfig] = None,
    variant: AblationVariant = AblationVariant.FULL,
    progress_callback: Optional[Callable[[str, int, int], None]] = None,
) -> SearchResult:
    """
    Pick (alpha, beta, gamma) from the grid by smallest final training L_c.

    Coordinate descent starts with every weight at the first grid value and
    sweeps alpha, beta, gamma in turn, keeping the best value of each; a
    point is never trained twice. The full strategy trains every grid point.
    A single-point grid is returned without training.

    Args:
        dataset: Normalized training set
        cfg: Training settings used for every grid point
        search: Grid and strategy
        mcfg: Base model config (alpha, beta, gamma are overridden)
        variant: Ablation variant to train
        progress_callback: Called as (label, current, total)

    Returns:
        SearchResult
    """
    cfg = cfg or TrainConfig()
    search = search or SearchConfig()
    mcfg = mcfg or MgpllConfig()
    grid = tuple(float(v) for v in search.grid)

    if len(grid) == 1:
        point = (grid[0],) * 3
        logger.info("Single-point grid, skipping search")
        return SearchResult(best=point, best_l_c=float("nan"), evaluated={})

    evaluator = _Evaluator(dataset, variant, cfg, mcfg, progress_callback)

    if search.strategy == SearchStrategy.FULL:
        points = [tuple(p) for p in itertools.product(grid, repeat=3)]
        evaluator.evaluate_many(points, search.workers)
    else:
        current = [grid[0]] * 3
        for axis in range(3):
            line = []
            for value in grid:
                point = list(current)
                point[axis] = value
                line.append(tuple(point))
            evaluator.evaluate_many(line, search.workers)
            scores = {p: evaluator.cache[p] for p in line}
            current = list(_best(scores)[0])

    best, best_l_c = _best(evaluator.cache)
    logger.info(
        "Selected alpha=%g beta=%g gamma=%g (l_c=%.6g, %d trainings)",
        *best, best_l_c, len(evaluator.cache),
    )
    return SearchResult(best=best, best_l_c=best_l_c, evaluated=dict(evaluator.cache))
