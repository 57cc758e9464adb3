"""Seqspace - Search budgets, seeded restarts and ratio ascent"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]
Projector = Callable[[np.ndarray], np.ndarray]

# Smallest step tried before an ascent run stops
MIN_STEP = 1e-12


@dataclass(frozen=True)
class SearchBudget:
    """Multistart search budget"""
    restarts: int = 64
    steps: int = 200

    def __post_init__(self):
        if self.restarts < 0 or self.steps < 0:
            raise ValueError(f"budget must be non-negative, got {self.restarts}x{self.steps}")


DEFAULT_BUDGET = SearchBudget()
# Cheaper budget for inner loops (dual norms, nested searches)
INNER_BUDGET = SearchBudget(restarts=8, steps=60)


@dataclass
class EvaluationMeter:
    """Counts objective evaluations spent by a search"""
    used: int = field(default=0)

    def consume(self, count: int = 1) -> None:
        self.used += count


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for restart `index`, stable under changes of the restart count"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def random_directions(seed: int, count: int, dim: int) -> Iterator[np.ndarray]:
    """Unit vectors drawn uniformly on the Euclidean sphere, one generator per restart"""
    for index in range(count):
        rng = restart_rng(seed, index)
        z = rng.standard_normal(dim)
        norm = np.linalg.norm(z)
        yield z / norm if norm > 0 else np.eye(dim)[0]


def sign_patterns(dim: int) -> Iterator[np.ndarray]:
    """All +-1 vectors with a positive first entry"""
    for mask in range(2 ** (dim - 1)):
        yield np.array([1.0] + [(-1.0 if mask >> k & 1 else 1.0) for k in range(dim - 1)])


def ascend(
    objective: Objective,
    gradient: Gradient,
    start: np.ndarray,
    steps: int,
    project: Optional[Projector] = None,
    meter: Optional[EvaluationMeter] = None,
) -> tuple[np.ndarray, float]:
    """Normalized gradient ascent of a scale-invariant ratio with backtracking.

    Iterates stay on the Euclidean unit sphere; only strict improvements are
    accepted, so the returned value never decreases with more steps.
    """
    z = np.asarray(start, dtype=float)
    z = z / np.linalg.norm(z)
    value = objective(z)
    eta = 0.25
    for _ in range(steps):
        g = gradient(z)
        g_norm = np.linalg.norm(g)
        if not np.isfinite(g_norm) or g_norm == 0.0:
            break
        direction = g / g_norm
        improved = False
        while eta > MIN_STEP:
            candidate = z + eta * direction
            if project is not None:
                candidate = project(candidate)
            c_norm = np.linalg.norm(candidate)
            if c_norm == 0.0:
                eta /= 2.0
                continue
            candidate = candidate / c_norm
            c_value = objective(candidate)
            if meter is not None:
                meter.consume()
            if c_value > value:
                z, value = candidate, c_value
                eta = min(2.0 * eta, 1.0)
                improved = True
                break
            eta /= 2.0
        if not improved:
            break
    return z, value
