"""Seqspace - Numerical positivity of operators and the projection norm-one test"""

import logging
import math
from enum import Enum
from typing import Any, List, Optional, Union

import numpy as np
from opentelemetry import trace
from opentelemetry.trace import Status, StatusCode
from pydantic import BaseModel
from scipy import optimize

from .duality import DEFAULT_CAP, canonical_functional, norming_set
from .errors import BudgetExhausted, DimensionMismatch, PreconditionViolation
from .operators import ProjectionSpec, build_projection, operator_norm, standardize_kernel
from .search import DEFAULT_BUDGET, EvaluationMeter, SearchBudget, random_directions, sign_patterns
from .spaces import LorentzSpec, OrliczSpec, as_vector, norm

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

Space = Union[LorentzSpec, OrliczSpec]

POSITIVITY_TOL = 1e-9
# Number of lowest starting points refined by Nelder-Mead
REFINED_STARTS = 3
SIGN_PATTERN_DIM = 6


class Verdict(Enum):
    """Outcome of a positivity scan"""
    POSITIVE = "Positive"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


class PositivityReport(BaseModel):
    """Smallest numerical-form value found, with its witness"""
    inf_sup_value: float
    witness_x: List[float]
    witness_xstar: List[float]
    verdict: Verdict
    budget_used: int
    extremes_complete: bool
    tol: float
    seed: int


class PropACheck(BaseModel):
    """Norm-one test for P against numerical positivity of Id - P"""
    projection_norm: float
    complement_norm: float
    positivity: PositivityReport
    consistent: bool


class LemmaWitness(BaseModel):
    """Positivity violation for sum f_j (x) u_j at x = e_k + eps e_pivot"""
    x: List[float]
    xstar: List[float]
    value: float
    k: int
    pivot: int
    eps: float


def numerical_form(space: Space, T: np.ndarray, x: np.ndarray, cap: int = DEFAULT_CAP, seed: int = 0) -> tuple[float, np.ndarray, bool]:
    """max of x*(T x) over norming extremes x* at x/||x||; also the maximizing x* and completeness"""
    unit = x / norm(space, x)
    found = norming_set(space, unit, cap, seed)
    image = T @ unit
    values = [float(np.dot(g, image)) for g in found.functionals]
    best = int(np.argmax(values))
    return values[best], found.functionals[best], found.complete


def positivity_scan(
    space: Space,
    T: Any,
    budget: SearchBudget = DEFAULT_BUDGET,
    seed: int = 0,
    tol: float = POSITIVITY_TOL,
    cap: int = DEFAULT_CAP,
) -> PositivityReport:
    """Minimize the numerical form over the unit sphere.

    Refuted only when a point is found where every norming extreme gives a
    value below -tol and the extreme set there is complete; Positive means the
    search stayed above -tol within the budget.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (space.dim, space.dim):
        raise DimensionMismatch(space.dim, T.shape[0], "operator")
    with tracer.start_as_current_span("positivity_scan") as span:
        span.set_attribute("seqspace.dim", space.dim)
        span.set_attribute("seqspace.restarts", budget.restarts)
        meter = EvaluationMeter()

        def nu(x: np.ndarray) -> float:
            if not np.any(x):
                return math.inf
            meter.consume()
            return numerical_form(space, T, x, cap, seed)[0]

        starts: List[np.ndarray] = list(np.eye(space.dim))
        for i in range(space.dim):
            for j in range(i + 1, space.dim):
                for sign in (1.0, -1.0):
                    v = np.zeros(space.dim)
                    v[i], v[j] = 1.0, sign
                    starts.append(v)
        if space.dim <= SIGN_PATTERN_DIM:
            starts.extend(sign_patterns(space.dim))
        starts.extend(random_directions(seed, budget.restarts, space.dim))

        scored = sorted(((nu(x), index) for index, x in enumerate(starts)), key=lambda item: item)
        best_value, best_x = scored[0][0], starts[scored[0][1]]
        for value, index in scored[:REFINED_STARTS]:
            if best_value < -tol:
                break
            result = optimize.minimize(
                nu, starts[index], method="Nelder-Mead",
                options={"maxfev": budget.steps, "xatol": 1e-10, "fatol": 1e-12},
            )
            if result.fun < best_value:
                best_value, best_x = float(result.fun), result.x

        unit = best_x / norm(space, best_x)
        value, xstar, complete = numerical_form(space, T, unit, cap, seed)
        if value < -tol:
            verdict = Verdict.REFUTED if complete else Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.POSITIVE

        span.set_attribute("seqspace.inf_sup_value", value)
        span.set_attribute("seqspace.verdict", verdict.value)
        span.set_status(Status(StatusCode.OK))
        if verdict is Verdict.REFUTED:
            logger.warning(f"Numerical positivity refuted: value {value:.3e} at x={unit.tolist()}")
        else:
            logger.info(f"Positivity scan {verdict.value}: min value {value:.3e}")
        return PositivityReport(
            inf_sup_value=value,
            witness_x=unit.tolist(),
            witness_xstar=xstar.tolist(),
            verdict=verdict,
            budget_used=meter.used,
            extremes_complete=complete,
            tol=tol,
            seed=seed,
        )


def replay(space: Space, T: Any, report: PositivityReport, cap: int = DEFAULT_CAP) -> float:
    """Re-evaluate the numerical form at a stored witness"""
    x = as_vector(space, report.witness_x)
    return numerical_form(space, np.asarray(T, dtype=float), x, cap, report.seed)[0]


def prop_A_check(
    space: Space,
    ps: ProjectionSpec,
    budget: SearchBudget = DEFAULT_BUDGET,
    seed: int = 0,
    tol: float = 1e-6,
) -> PropACheck:
    """||P|| = 1 exactly when Id - P = sum f_j (x) u_j is numerically positive.

    Both sides are estimated independently; `consistent` records whether the
    estimates agree with that equivalence.
    """
    P = build_projection(ps, space.dim)
    Q = ps.complement()
    with tracer.start_as_current_span("prop_A_check") as span:
        projection = operator_norm(space, P, budget, seed)
        complement = operator_norm(space, Q, budget, seed)
        report = positivity_scan(space, Q, budget, seed)
        norm_one = projection.value <= 1.0 + tol
        consistent = norm_one == (report.verdict is not Verdict.REFUTED)
        span.set_attribute("seqspace.projection_norm", projection.value)
        span.set_attribute("seqspace.consistent", consistent)
        if not consistent:
            logger.warning(
                f"Inconsistent projection check: ||P||={projection.value:.9g}, "
                f"positivity {report.verdict.value}"
            )
        return PropACheck(
            projection_norm=projection.value,
            complement_norm=complement.value,
            positivity=report,
            consistent=consistent,
        )


def lemma_supp_refuter(space: Space, ps: ProjectionSpec, tol: float = POSITIVITY_TOL) -> Optional[LemmaWitness]:
    """Positivity violation when some u_j is supported outside the union of supp f_j.

    With the functionals in standard form, x = e_k + eps e_pivot(i) and eps of
    sign opposite to u_ik, shrunk until the norming coefficient at the pivot is
    small against |u_ik|, makes x*((sum f_j (x) u_j) x) negative.
    """
    from .theorems import has_property_P, has_property_Q

    if not has_property_P(space) or not has_property_Q(space):
        raise PreconditionViolation("the refuter needs a space with properties (P) and (Q)")
    standard = standardize_kernel(ps.F)
    A = standard.transform
    U = np.linalg.solve(A.T, ps.U)
    F = standard.functionals
    Q = ps.complement()
    f_support = set(np.flatnonzero(np.any(np.abs(F) > 1e-12, axis=0)).tolist())
    M = max(abs(U[j, p]) for j, p in enumerate(standard.pivots)) + 1.0

    tried: List[str] = []
    for i, pivot in enumerate(standard.pivots):
        for k in range(space.dim):
            if k in f_support or abs(U[i, k]) <= 1e-12:
                continue
            eta = abs(U[i, k])
            for exponent in range(1, 13):
                eps = -math.copysign(10.0 ** -exponent, U[i, k])
                x = np.zeros(space.dim)
                x[k], x[pivot] = 1.0, eps
                xstar = canonical_functional(space, x)
                normed = xstar / norm(space, x)
                a_eps, b_eps = normed[k], normed[pivot]
                if abs(b_eps) < eta / (2.0 * M) and a_eps > 0.5:
                    value = float(np.dot(xstar, Q @ x))
                    if value < -tol:
                        logger.warning(f"Support refutation at k={k}, pivot={pivot}, eps={eps:g}: {value:.3e}")
                        return LemmaWitness(
                            x=x.tolist(), xstar=xstar.tolist(), value=value,
                            k=k, pivot=pivot, eps=eps,
                        )
            tried.append(f"k={k}, pivot={pivot}")
    if tried:
        raise BudgetExhausted(f"no eps down to 1e-12 separated the signs at {'; '.join(tried)}")
    return None
