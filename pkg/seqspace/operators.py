"""Seqspace - Linear operators, projections in standard form and operator norms"""

import logging
import math
from typing import Any, List, NamedTuple, Optional, Sequence, Union

import numpy as np
from opentelemetry import trace
from opentelemetry.trace import Status, StatusCode
from pydantic import BaseModel, Field, model_validator
from scipy import linalg, optimize

from .duality import norm_subgradient
from .errors import DependentFunctionals, DimensionMismatch, InvariantViolation, PreconditionViolation
from .search import (
    DEFAULT_BUDGET,
    EvaluationMeter,
    SearchBudget,
    ascend,
    random_directions,
    restart_rng,
    sign_patterns,
)
from .spaces import LorentzSpec, OrliczSpec, norm

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

Space = Union[LorentzSpec, OrliczSpec]

BIORTHOGONAL_TOL = 1e-10
# Exhaustive +-1 starts up to this dimension
SIGN_PATTERN_DIM = 4
# Cheap inner budget used while comparing candidate projections
CANDIDATE_BUDGET = SearchBudget(restarts=4, steps=30)


class OperatorSpec(BaseModel):
    """Dense square matrix acting on coordinate columns (row-major JSON)"""
    matrix: List[List[float]] = Field(min_length=1)

    @model_validator(mode="after")
    def _square(self) -> "OperatorSpec":
        size = len(self.matrix)
        if any(len(row) != size for row in self.matrix):
            raise ValueError("operator matrix must be square")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


class ProjectionSpec(BaseModel):
    """Families {f_j}, {u_j} defining P = Id - sum f_j (x) u_j"""
    fs: List[List[float]] = Field(min_length=1)
    us: List[List[float]] = Field(min_length=1)

    @model_validator(mode="after")
    def _shapes(self) -> "ProjectionSpec":
        if len(self.fs) != len(self.us):
            raise ValueError(f"{len(self.fs)} functionals but {len(self.us)} vectors")
        dim = len(self.fs[0])
        if any(len(v) != dim for v in self.fs + self.us):
            raise ValueError("all functionals and vectors must have the same length")
        return self

    @property
    def F(self) -> np.ndarray:
        return np.asarray(self.fs, dtype=float)

    @property
    def U(self) -> np.ndarray:
        return np.asarray(self.us, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.fs[0])

    def complement(self) -> np.ndarray:
        """Matrix of Id - P = sum f_j (x) u_j"""
        return self.U.T @ self.F

    def biorthogonality_defect(self) -> float:
        return float(np.max(np.abs(self.F @ self.U.T - np.eye(len(self.fs)))))


class StandardForm(NamedTuple):
    functionals: np.ndarray
    pivots: List[int]
    transform: np.ndarray

    @property
    def permutation(self) -> List[int]:
        """Basis order putting the pivot coordinates first"""
        rest = [k for k in range(self.functionals.shape[1]) if k not in self.pivots]
        return list(self.pivots) + rest


class NormEstimate(NamedTuple):
    value: float
    maximizer: np.ndarray


class MinimalProjection(NamedTuple):
    projection: ProjectionSpec
    norm: float
    maximizer: np.ndarray


def standardize_kernel(fs: Any) -> StandardForm:
    """Row-reduce functionals so f_j is 1 at its own pivot and 0 at the others.

    The kernel intersection is unchanged; ``transform`` is the invertible A
    with standardized = A @ fs.
    """
    F = np.atleast_2d(np.asarray(fs, dtype=float)).copy()
    n, d = F.shape
    A = np.eye(n)
    scale = float(np.max(np.abs(F))) if F.size else 0.0
    tol = 1e-10 * max(scale, 1.0)
    pivots: List[int] = []
    row = 0
    for col in range(d):
        if row == n:
            break
        best = row + int(np.argmax(np.abs(F[row:, col])))
        if abs(F[best, col]) <= tol:
            continue
        F[[row, best]] = F[[best, row]]
        A[[row, best]] = A[[best, row]]
        pivot = F[row, col]
        F[row] /= pivot
        A[row] /= pivot
        for other in range(n):
            if other != row and F[other, col] != 0.0:
                factor = F[other, col]
                F[other] -= factor * F[row]
                A[other] -= factor * A[row]
        F[row, col] = 1.0
        pivots.append(col)
        row += 1
    if row < n:
        raise DependentFunctionals(f"{n} functionals span only a {row}-dimensional space")
    return StandardForm(functionals=F, pivots=pivots, transform=A)


def build_projection(ps: ProjectionSpec, dim: Optional[int] = None) -> np.ndarray:
    """Matrix of P = Id - sum f_j (x) u_j"""
    if dim is not None and dim != ps.dim:
        raise DimensionMismatch(dim, ps.dim, "projection")
    defect = ps.biorthogonality_defect()
    if defect > BIORTHOGONAL_TOL:
        raise InvariantViolation(f"f_j(u_k) deviates from delta_jk by {defect:.3e}")
    P = np.eye(ps.dim) - ps.complement()
    idempotence = float(np.max(np.abs(P @ P - P)))
    if idempotence > BIORTHOGONAL_TOL * max(1.0, float(np.max(np.abs(P)))):
        raise InvariantViolation(f"P is not idempotent (defect {idempotence:.3e})")
    return P


def _norm_ratio(space: Space, T: np.ndarray):
    def ratio(x: np.ndarray) -> float:
        nx = norm(space, x)
        return norm(space, T @ x) / nx if nx > 0 else 0.0

    def gradient(x: np.ndarray) -> np.ndarray:
        nx = norm(space, x)
        tx = T @ x
        return (T.T @ norm_subgradient(space, tx) * nx - norm(space, tx) * norm_subgradient(space, x)) / nx ** 2

    return ratio, gradient


def operator_norm(
    space: Space,
    T: Any,
    budget: SearchBudget = DEFAULT_BUDGET,
    seed: int = 0,
    hints: Sequence[Any] = (),
) -> NormEstimate:
    """Certified lower bound for ||T|| by multistart ascent of ||Tx||/||x||.

    Starts are the hints, the basis vectors, every sign pattern in small
    dimension and `budget.restarts` seeded random directions. Ties keep the
    earliest start.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (space.dim, space.dim):
        raise DimensionMismatch(space.dim, T.shape[0], "operator")
    with tracer.start_as_current_span("operator_norm") as span:
        span.set_attribute("seqspace.dim", space.dim)
        span.set_attribute("seqspace.restarts", budget.restarts)
        span.set_attribute("seqspace.steps", budget.steps)

        ratio, gradient = _norm_ratio(space, T)
        starts: List[np.ndarray] = [np.asarray(h, dtype=float) for h in hints if np.any(h)]
        starts.extend(np.eye(space.dim))
        if space.dim <= SIGN_PATTERN_DIM:
            starts.extend(sign_patterns(space.dim))
        starts.extend(random_directions(seed, budget.restarts, space.dim))

        meter = EvaluationMeter()
        best_value, best_x = -math.inf, starts[0]
        for x0 in starts:
            x, value = ascend(ratio, gradient, x0, budget.steps, meter=meter)
            if value > best_value:
                best_value, best_x = value, x
        best_x = best_x / norm(space, best_x)

        span.set_attribute("seqspace.estimate", best_value)
        span.set_status(Status(StatusCode.OK))
        logger.debug(f"Operator norm estimate {best_value:.12g} over {len(starts)} starts, {meter.used} evaluations")
        return NormEstimate(value=float(best_value), maximizer=best_x)


def _range_vector(P: np.ndarray) -> np.ndarray:
    column = int(np.argmax(np.linalg.norm(P, axis=0)))
    return P[:, column]


def minimal_projection_search(
    space: Space,
    fs: Any,
    budget: SearchBudget = DEFAULT_BUDGET,
    seed: int = 0,
) -> MinimalProjection:
    """Search the u-families with f_j(u_k) = delta_jk for the smallest ||P||.

    u's are parameterized as the orthogonal solution plus null-space
    combinations. Candidates (orthogonal, pivot, random) are compared with a
    cheap inner norm estimate, the best few refined by Nelder-Mead, and the
    winner re-estimated with the full budget.
    """
    F = np.atleast_2d(np.asarray(fs, dtype=float))
    if F.shape[1] != space.dim:
        raise DimensionMismatch(space.dim, F.shape[1], "functional")
    standard = standardize_kernel(F)
    n, d = F.shape
    if n >= d:
        raise PreconditionViolation("the kernel intersection must be a nonzero subspace")

    with tracer.start_as_current_span("minimal_projection_search") as span:
        span.set_attribute("seqspace.dim", d)
        span.set_attribute("seqspace.codim", n)

        particular = F.T @ np.linalg.inv(F @ F.T)
        null = linalg.null_space(F)
        free = null.shape[1] * n

        def projection_of(c: np.ndarray) -> ProjectionSpec:
            Ut = particular + null @ c.reshape(null.shape[1], n)
            return ProjectionSpec(fs=F.tolist(), us=Ut.T.tolist())

        def estimate(c: np.ndarray, search_budget: SearchBudget) -> NormEstimate:
            P = np.eye(d) - projection_of(c).complement()
            return operator_norm(space, P, search_budget, seed, hints=[_range_vector(P)])

        pivot_ut = np.eye(d)[:, standard.pivots] @ standard.transform
        candidates = [np.zeros(free), (null.T @ (pivot_ut - particular)).ravel()]
        rng = restart_rng(seed, 0)
        candidates.extend(rng.standard_normal(free) for _ in range(max(1, budget.restarts // 8)))

        scored = []
        for index, c in enumerate(candidates):
            value = estimate(c, CANDIDATE_BUDGET).value
            scored.append((value, index, c))
        scored.sort(key=lambda item: (item[0], item[1]))

        best_value, _, best_c = scored[0]
        if best_value > 1.0 + 1e-9:
            for value, index, c in scored[:2]:
                result = optimize.minimize(
                    lambda v: estimate(v, CANDIDATE_BUDGET).value,
                    c,
                    method="Nelder-Mead",
                    options={"maxfev": budget.steps, "xatol": 1e-7, "fatol": 1e-10},
                )
                if result.fun < best_value:
                    best_value, best_c = float(result.fun), result.x

        final = estimate(best_c, budget)
        spec = projection_of(best_c)
        span.set_attribute("seqspace.estimate", final.value)
        span.set_status(Status(StatusCode.OK))
        logger.info(f"Minimal projection search: best norm {final.value:.9g} over {len(candidates)} candidates")
        return MinimalProjection(projection=spec, norm=final.value, maximizer=final.maximizer)
