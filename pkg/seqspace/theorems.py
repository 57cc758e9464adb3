"""Seqspace - Characterization predicates, witness generators and classifiers"""

import itertools
import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Iterator, List, Optional, Sequence, Union

import numpy as np
from opentelemetry import trace
from opentelemetry.trace import Status, StatusCode
from pydantic import BaseModel, Field, model_validator

from .duality import is_norming_pair
from .errors import BudgetExhausted, InvariantViolation, ParamOutOfRange, PreconditionViolation
from .operators import ProjectionSpec, standardize_kernel
from .phi import OrliczFunction
from .positivity import Verdict, numerical_form, positivity_scan
from .search import DEFAULT_BUDGET, SearchBudget, restart_rng
from .spaces import LorentzSpec, NormFlavor, OrliczSpec, amemiya_multiplier, as_vector, norm

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

Space = Union[LorentzSpec, OrliczSpec]

PROPERTY_EPS = (1e-1, 1e-2, 1e-3)
SLOPE_EPS = (1e-3, 1e-4, 1e-5)
# Rounding floor for norm ratios and finite-difference slopes
PROPERTY_TOL = 1e-12
SLOPE_FLOOR = 1e-9
GRID_POINTS = 32
EPS_DECADES = range(2, 7)
REFUTE_TARGET = 1e-8
TIE_BREAK = 1e-6
# Largest denominator accepted when fitting a common geometric scale
SCALE_DENOMINATOR = 64
SCALE_TOL = 1e-9


# Properties (P) and (Q)

def _basis_perturbation_norm(space: Space, eps: float) -> float:
    x = np.zeros(space.dim)
    x[0] = 1.0
    x[1] = eps
    return norm(space, x) / norm(space, np.eye(space.dim)[0])


def has_property_P(space: Space) -> bool:
    """||e_i + eps e_j|| > 1 for all i != j and eps > 0"""
    if space.dim < 2:
        return True
    if isinstance(space, LorentzSpec):
        return space.w[1] != 0.0
    return space.phi.is_positive()


def has_property_Q(space: Space) -> bool:
    """(||e_i + eps e_j|| - 1) / eps -> 0 as eps -> 0.

    In the Amemiya form this also needs the multiplier at e_i to be
    attained; otherwise ||e_i|| is the linear growth rate of phi and the norm
    near e_i has a corner like l_1.
    """
    if space.dim < 2:
        return True
    if isinstance(space, LorentzSpec):
        return space.p > 1.0 or space.w[1] == 0.0
    if space.phi.derivative_at_zero() != 0.0:
        return False
    if space.flavor is NormFlavor.ORLICZ:
        return amemiya_multiplier(space.phi, [1.0]) is not None
    return True


def sampled_property_P(space: Space) -> bool:
    if space.dim < 2:
        return True
    return all(_basis_perturbation_norm(space, eps) > 1.0 + PROPERTY_TOL for eps in PROPERTY_EPS)


def sampled_property_Q(space: Space) -> bool:
    """Finite-difference slopes shrink toward 0"""
    if space.dim < 2:
        return True
    slopes = [(_basis_perturbation_norm(space, eps) - 1.0) / eps for eps in SLOPE_EPS]
    return slopes[-1] <= SLOPE_FLOOR or slopes[-1] < 0.5 * slopes[0]


# Hyperplane witnesses

class WitnessVariant(Enum):
    """Which family of test elements x(a, eps) is used"""
    GENERAL = "General"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


class WitnessParams(BaseModel):
    """Parameters of x(a, eps) with the admissible bounds derived from f"""
    a: float = Field(ge=0.0, le=1.0)
    eps: float = Field(ge=-1.0, le=1.0)
    eta: float
    delta_a: float
    eps1: float
    eps_a: float


def _sorted_support(f: Any) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    n = int(np.count_nonzero(f))
    head = f[:n]
    if n < 3:
        raise PreconditionViolation(f"witnesses need at least 3 nonzero coefficients, got {n}")
    if np.any(f[n:] != 0.0) or np.any(head <= 0.0) or np.any(np.diff(head) > 0.0):
        raise PreconditionViolation("f must be positive and non-increasing on its support")
    return head


def witness_params(f: Any, a: float, eps: float) -> WitnessParams:
    head = _sorted_support(f)
    s = float(head[:-2].sum())
    f_prev, f_last = float(head[-2]), float(head[-1])
    eta = min(f_prev / s, 1.0 - f_last / s)
    delta_a = min((s / f_last) * (1.0 - a) - 1.0, 1.0 - (s / f_prev) * a, (s / f_prev) * a)
    eps1 = min(s / f_prev - 1.0, 1.0)
    if head.size == 3:
        eps_a = min(1.0 - a, 0.5 * (a - (head[0] / head[2]) * (1.0 - a)))
    else:
        eps_a = 0.0
    return WitnessParams(a=a, eps=eps, eta=eta, delta_a=delta_a, eps1=eps1, eps_a=float(eps_a))


def _a3_applies(head: np.ndarray) -> bool:
    return head.size == 3 and math.isclose(head[0], head[1], rel_tol=1e-12)


def _check_admissible(head: np.ndarray, params: WitnessParams, variant: WitnessVariant) -> None:
    a, eps = params.a, params.eps
    if variant is WitnessVariant.A1:
        ok = 0.0 < a < params.eta and abs(eps) < params.delta_a
    elif variant is WitnessVariant.A2:
        ok = a == 1.0 and abs(eps) < params.eps1
    elif variant is WitnessVariant.A3:
        lower = head[1] / (head[1] + head[2]) if head.size == 3 else 1.0
        ok = _a3_applies(head) and lower < a < 1.0 and abs(eps) < params.eps_a
    else:
        ok = True
    if not ok:
        raise ParamOutOfRange(f"(a={a}, eps={eps}) outside the {variant.value} range")


def _moduli_pattern_holds(x: np.ndarray, variant: WitnessVariant) -> bool:
    m = np.abs(x)
    if variant is WitnessVariant.A1:
        block = m[:-2]
        return bool(m[-1] > block[0] > m[-2] and np.allclose(block, block[0], rtol=0, atol=1e-15))
    if variant is WitnessVariant.A2:
        return bool(m[-2] > m[0] > m[-1])
    if variant is WitnessVariant.A3:
        return bool(m[0] > m[1] > m[2])
    return True


def witness_x(f: Any, params: WitnessParams, variant: WitnessVariant = WitnessVariant.GENERAL) -> np.ndarray:
    """x(a, eps) = e_1 + ... + e_{n-2} - (S a/f_{n-1} + eps) e_{n-1} - (S (1-a)/f_n + eps) e_n.

    S = f_1 + ... + f_{n-2}. f must be positive and non-increasing on its
    support; coordinates outside the support stay 0.
    """
    f = np.asarray(f, dtype=float)
    head = _sorted_support(f)
    _check_admissible(head, params, variant)
    n = head.size
    s = float(head[:-2].sum())
    x = np.zeros(f.size)
    x[: n - 2] = 1.0
    x[n - 2] = -(s / head[-2] * params.a + params.eps)
    x[n - 1] = -(s / head[-1] * (1.0 - params.a) + params.eps)

    residual = float(np.dot(f, x)) + params.eps * (head[-2] + head[-1])
    if abs(residual) > 1e-12 * max(1.0, s / head[-1]):
        raise InvariantViolation(f"x(a) left ker f by {residual:.3e}")
    if not _moduli_pattern_holds(x[:n], variant):
        raise InvariantViolation(f"moduli of x(a, eps) break the {variant.value} pattern")
    return x


def witness_functional(space: LorentzSpec, f: Any, params: WitnessParams) -> np.ndarray:
    """Closed-form norming functional at an A1 witness, scaled so ||x*|| = ||x||"""
    f = np.asarray(f, dtype=float)
    head = _sorted_support(f)
    n, p, w = head.size, space.p, space.weights
    s = float(head[:-2].sum())
    g = np.zeros(f.size)
    g[: n - 2] = w[1 : n - 1].mean()
    g[n - 2] = -((s / head[-2]) * params.a + params.eps) ** (p - 1.0) * w[n - 1]
    g[n - 1] = -((s / head[-1]) * (1.0 - params.a) + params.eps) ** (p - 1.0)
    x = witness_x(f, params, WitnessVariant.A1)
    return norm(space, x) ** (2.0 - p) * g


# Lorentz hyperplanes

class HyperplaneStatus(Enum):
    """Whether ker f can be 1-complemented"""
    POSSIBLY_ONE = "PossiblyOne"
    IMPOSSIBLE = "Impossible"


class HyperplaneVerdict(BaseModel):
    status: HyperplaneStatus
    reason: Optional[str] = None
    support: int


class HyperplaneWitness(BaseModel):
    """Unit vector x and norming x* with x*((f (x) u) x) < 0"""
    x: List[float]
    xstar: List[float]
    value: float
    variant: str
    a: Optional[float] = None
    eps: Optional[float] = None
    verified: bool


def lorentz_hyperplane_verdict(space: LorentzSpec, f: Any) -> HyperplaneVerdict:
    f = as_vector(space, f, "functional")
    if space.p <= 1.0:
        raise PreconditionViolation("hyperplane verdicts need p > 1")
    if space.dim >= 2 and space.w[1] <= 0.0:
        raise PreconditionViolation("hyperplane verdicts need w_2 > 0")
    if not np.any(f):
        raise PreconditionViolation("f must be nonzero")
    w = space.weights
    n = int(np.count_nonzero(f))
    d = space.dim
    reason = None
    if n > 2:
        if space.p != 2.0:
            reason = "THM31_P_NOT_2"
        elif np.any(w[:n] != 1.0):
            reason = "THM31_WEIGHT_NOT_1"
        elif w[d - n + 2] > 0.0 and np.any(w != 1.0):
            reason = "COR32_NOT_L2"
    elif n == 2:
        moduli = np.abs(f[f != 0.0])
        if moduli[0] != moduli[1] and np.all(w > 0.0) and np.any(w != 1.0):
            reason = "COR34_UNEQUAL_MODULI"
    status = HyperplaneStatus.IMPOSSIBLE if reason else HyperplaneStatus.POSSIBLY_ONE
    return HyperplaneVerdict(status=status, reason=reason, support=n)


def _eps_candidates(bound: float) -> List[float]:
    if bound <= 0.0:
        return []
    magnitudes = [10.0 ** -k for k in EPS_DECADES if 10.0 ** -k < bound]
    magnitudes += [bound / 2.0, bound / 8.0]
    return [sign * m for m in sorted(set(magnitudes), reverse=True) for sign in (1.0, -1.0)]


def _witness_grid(head: np.ndarray) -> Iterator[tuple[WitnessVariant, float, float]]:
    n = head.size
    interior = [(i + 1) / (GRID_POINTS + 1) for i in range(GRID_POINTS)]
    probe = witness_params(head, 0.5, 0.0)
    if probe.eta > 0.0 and (n >= 4 or head[2] < head[0]):
        for t in interior:
            a = probe.eta * t
            bound = witness_params(head, a, 0.0).delta_a
            for eps in _eps_candidates(bound):
                yield WitnessVariant.A1, a, eps
    if n >= 4 or head[1] < head[0]:
        for eps in _eps_candidates(probe.eps1):
            yield WitnessVariant.A2, 1.0, eps
    if _a3_applies(head):
        lower = head[1] / (head[1] + head[2])
        for t in interior:
            a = lower + (1.0 - lower) * t
            for eps in _eps_candidates(witness_params(head, a, 0.0).eps_a):
                yield WitnessVariant.A3, a, eps
    for a in interior:
        for eps in _eps_candidates(1.0):
            yield WitnessVariant.GENERAL, a, eps


def _group_orderings(order: np.ndarray, head: np.ndarray, limit: int) -> Iterator[np.ndarray]:
    """Orderings of the support that keep |f| non-increasing"""
    groups, start = [], 0
    for r in range(1, head.size + 1):
        if r == head.size or not math.isclose(head[r], head[start], rel_tol=1e-12):
            groups.append(list(order[start:r]))
            start = r
    choices = [itertools.permutations(g) for g in groups]
    for count, combo in enumerate(itertools.product(*choices)):
        if count >= limit:
            return
        yield np.array([i for part in combo for i in part])


def _tie_breaks(block: int) -> List[np.ndarray]:
    """Distinct offsets for equal block moduli that keep f(x) unchanged"""
    if block < 2:
        return []
    offsets = []
    for perm in itertools.islice(itertools.permutations(range(block)), 24):
        ranks = np.array(perm, dtype=float)
        offsets.append(TIE_BREAK * (ranks - ranks.mean()))
    return offsets


def _witness_candidates(f: np.ndarray, dim: int, orderings: int) -> Iterator[tuple[np.ndarray, WitnessVariant, float, float]]:
    """x(a, eps) in user coordinates for every ordering, grid point and tie break"""
    support = np.flatnonzero(f)
    order = support[np.argsort(-np.abs(f[support]), kind="stable")]
    head = np.abs(f[order])
    n = head.size
    padded = np.concatenate([head, np.zeros(dim - n)])
    offsets = [np.zeros(n - 2)] + _tie_breaks(n - 2)
    for mapping in _group_orderings(order, head, orderings):
        signs = np.sign(f[mapping])
        for variant, a, eps in _witness_grid(head):
            base = witness_x(padded, witness_params(head, a, eps), variant)[:n]
            for offset in offsets:
                local = base.copy()
                local[: n - 2] += offset
                x = np.zeros(dim)
                x[mapping] = signs * local
                yield x, variant, a, eps


def _scan_witness(space: LorentzSpec, T: np.ndarray, budget: SearchBudget, seed: int) -> HyperplaneWitness:
    report = positivity_scan(space, T, budget, seed, tol=REFUTE_TARGET)
    if report.verdict is not Verdict.REFUTED:
        raise BudgetExhausted(f"positivity scan ended {report.verdict.value} at {report.inf_sup_value:.3e}")
    return HyperplaneWitness(
        x=report.witness_x, xstar=report.witness_xstar, value=report.inf_sup_value,
        variant="Scan", verified=True,
    )


def refute_lorentz_hyperplane(
    space: LorentzSpec,
    f: Any,
    u: Any,
    budget: SearchBudget = DEFAULT_BUDGET,
    seed: int = 0,
) -> Optional[HyperplaneWitness]:
    """Find x with x*((f (x) u) x) < 0 for every norming x*, proving ||Id - f (x) u|| > 1.

    Scans the x(a, eps) families on the sorted, sign-normalized support of f
    under every ordering of equal |f| values and maps witnesses back to user
    coordinates. Returns None when the verdict allows norm one; raises
    BudgetExhausted rather than report an unproven refutation.
    """
    verdict = lorentz_hyperplane_verdict(space, f)
    if verdict.status is HyperplaneStatus.POSSIBLY_ONE:
        return None
    f = as_vector(space, f, "functional")
    u = as_vector(space, u)
    if abs(float(np.dot(f, u)) - 1.0) > 1e-9:
        raise PreconditionViolation(f"f(u) must be 1, got {float(np.dot(f, u))}")
    T = np.outer(u, f)

    with tracer.start_as_current_span("refute_lorentz_hyperplane") as span:
        span.set_attribute("seqspace.dim", space.dim)
        span.set_attribute("seqspace.reason", verdict.reason or "")

        if verdict.support <= 2:
            return _scan_witness(space, T, budget, seed)

        best: Optional[tuple[float, np.ndarray, np.ndarray, WitnessVariant, float, float]] = None
        for x, variant, a, eps in _witness_candidates(f, space.dim, max(6, budget.restarts)):
            value, xstar, complete = numerical_form(space, T, x)
            if complete and (best is None or value < best[0]):
                best = (value, x / norm(space, x), xstar, variant, a, eps)
                if value < -REFUTE_TARGET:
                    break

        if best is None or best[0] >= -REFUTE_TARGET:
            logger.info(f"Witness grid ended at {best[0] if best else None}; falling back to a positivity scan")
            return _scan_witness(space, T, budget, seed)

        value, x, xstar, variant, a, eps = best
        verified = is_norming_pair(space, x, xstar)
        span.set_attribute("seqspace.value", value)
        span.set_status(Status(StatusCode.OK))
        logger.info(f"Hyperplane refuted with {variant.value} witness a={a:.6g} eps={eps:.3g}: {value:.3e}")
        return HyperplaneWitness(
            x=x.tolist(), xstar=xstar.tolist(), value=value,
            variant=variant.value, a=a, eps=eps, verified=verified,
        )


# Orlicz classification

class PhiClassKind(Enum):
    """Behaviour of phi near 0 compared with powers t^p"""
    SIMILAR = "SimilarTo"
    EQUIVALENT = "EquivalentTo"
    NOT_EQUIVALENT = "NotEquivalentToAnyPower"


class PhiClass(BaseModel):
    kind: PhiClassKind
    p: Optional[float] = None
    C: Optional[float] = None

    def label(self) -> str:
        if self.kind is PhiClassKind.SIMILAR:
            return f"SimilarTo({self.p:g},{self.C:g})"
        if self.kind is PhiClassKind.EQUIVALENT:
            return f"EquivalentTo({self.p:g})"
        return self.kind.value


def classify_orlicz_phi(phi: OrliczFunction) -> PhiClass:
    """Compare phi with C t^p on its first piece"""
    first = phi.pieces[0]
    d0 = phi.derivative_at_zero()
    if first.is_affine:
        if d0 > 0.0:
            return PhiClass(kind=PhiClassKind.SIMILAR, p=1.0, C=d0)
        return PhiClass(kind=PhiClassKind.NOT_EQUIVALENT)
    if first.center == 0.0 and first.slope == 0.0:
        return PhiClass(kind=PhiClassKind.SIMILAR, p=first.exponent, C=first.coef)
    if d0 > 0.0:
        return PhiClass(kind=PhiClassKind.EQUIVALENT, p=1.0)
    if first.exponent == 2.0:
        return PhiClass(kind=PhiClassKind.SIMILAR, p=2.0, C=first.coef)
    # shifted power with zero slope at 0 has positive curvature there
    return PhiClass(kind=PhiClassKind.EQUIVALENT, p=2.0)


class SubspaceStatus(Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    NOT_APPLICABLE = "NotApplicable"


class SubspaceVerdict(BaseModel):
    """Whether the kernel intersection can be 1-complemented in l_phi"""
    status: SubspaceStatus
    reason: Optional[str] = None
    gamma: Optional[float] = None
    phi_class: str
    standardized: List[List[float]]


def basis_vectors_in_kernel(fs: Any) -> List[int]:
    """Indices k with e_k in the intersection of the kernels"""
    F = np.atleast_2d(np.asarray(fs, dtype=float))
    return np.flatnonzero(np.all(F == 0.0, axis=0)).tolist()


def within_basis_vector_bound(fs: Any) -> bool:
    """The kernel intersection misses at most 2n basis vectors"""
    F = np.atleast_2d(np.asarray(fs, dtype=float))
    missing = F.shape[1] - len(basis_vectors_in_kernel(F))
    return missing <= 2 * F.shape[0]


def fit_geometric_scale(moduli: Sequence[float]) -> Optional[float]:
    """gamma >= 1 with every modulus in {gamma^m : m integer}, or None"""
    logs = [abs(math.log(m)) for m in moduli if m > 0.0]
    logs = [v for v in logs if v > SCALE_TOL]
    if not logs:
        return 1.0
    base = min(logs)
    denominator = 1
    for v in logs:
        denominator = math.lcm(denominator, Fraction(v / base).limit_denominator(SCALE_DENOMINATOR).denominator)
    step = base / denominator
    for v in logs:
        ratio = v / step
        if abs(ratio - round(ratio)) > SCALE_TOL * max(1.0, ratio):
            return None
    return math.exp(step)


def orlicz_subspace_verdict(
    space: OrliczSpec,
    fs: Any,
    contains_basis_vector: Optional[bool] = None,
) -> SubspaceVerdict:
    """Support and modulus conditions a 1-complemented kernel intersection must meet"""
    F = np.atleast_2d(np.asarray(fs, dtype=float))
    standard = standardize_kernel(F)
    G = standard.functionals
    if space.dim - G.shape[0] <= 1:
        raise PreconditionViolation("the kernel intersection must have dimension > 1")
    if contains_basis_vector is None:
        contains_basis_vector = bool(basis_vectors_in_kernel(G))
    phi_class = classify_orlicz_phi(space.phi)

    def verdict(status: SubspaceStatus, reason: Optional[str] = None, gamma: Optional[float] = None) -> SubspaceVerdict:
        return SubspaceVerdict(
            status=status, reason=reason, gamma=gamma,
            phi_class=phi_class.label(), standardized=G.tolist(),
        )

    if not space.phi.is_positive():
        return verdict(SubspaceStatus.NOT_APPLICABLE, "PHI_NOT_POSITIVE")
    if phi_class.kind is PhiClassKind.SIMILAR and phi_class.p == 2.0:
        return verdict(SubspaceStatus.NOT_APPLICABLE, "PHI_SIMILAR_T2")
    if not contains_basis_vector:
        return verdict(SubspaceStatus.NOT_APPLICABLE, "NO_BASIS_VECTOR")

    rows = [row[np.abs(row) > 1e-12] for row in G]
    if any(row.size > 2 for row in rows):
        return verdict(SubspaceStatus.INCOMPATIBLE, "THM41_SUPPORT_GT_2")
    # a positive phi from pieces is Similar or Equivalent to a power near 0
    if phi_class.kind is PhiClassKind.EQUIVALENT:
        gamma = fit_geometric_scale(np.concatenate([np.abs(row) for row in rows]).tolist())
        if gamma is None:
            return verdict(SubspaceStatus.INCOMPATIBLE, "THM41_SCALE_VIOLATION")
        return verdict(SubspaceStatus.COMPATIBLE, gamma=gamma)
    return verdict(SubspaceStatus.COMPATIBLE)


def derivative_additivity_defect(phi: OrliczFunction, radius: float, samples: int = 64) -> float:
    """max |phi'(x+y) - phi'(x) - phi'(y)| over a grid of [0, radius]^2"""
    grid = np.linspace(0.0, radius, samples)
    x, y = np.meshgrid(grid, grid)
    def d(t: np.ndarray) -> np.ndarray:
        return phi.derivative(t.ravel(), side="left")

    return float(np.max(np.abs(d(x + y) - d(x) - d(y))))


# Block averaging projections

class BlockSpec(BaseModel):
    """Disjoint index blocks with a sign per index"""
    blocks: List[List[int]] = Field(min_length=1)
    signs: Optional[List[List[int]]] = None

    @model_validator(mode="after")
    def _disjoint(self) -> "BlockSpec":
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be nonempty")
            if seen.intersection(block) or len(set(block)) != len(block):
                raise ValueError(f"overlapping blocks at {sorted(seen.intersection(block))}")
            seen.update(block)
        if self.signs is None:
            self.signs = [[1] * len(block) for block in self.blocks]
        if [len(s) for s in self.signs] != [len(b) for b in self.blocks]:
            raise ValueError("one sign per block index is required")
        if any(s not in (1, -1) for row in self.signs for s in row):
            raise ValueError("signs must be +1 or -1")
        return self

    def vectors(self, dim: int) -> np.ndarray:
        out = np.zeros((len(self.blocks), dim))
        for row, (block, signs) in enumerate(zip(self.blocks, self.signs)):
            if max(block) >= dim or min(block) < 0:
                raise PreconditionViolation(f"block {block} exceeds dimension {dim}")
            out[row, block] = signs
        return out


def build_averaging_projection(space: Space, blocks: BlockSpec) -> ProjectionSpec:
    """Projection onto the span of signed block indicators, by block averaging.

    Kernel functionals are the within-block sign-adjusted differences and the
    coordinate functionals off the blocks.
    """
    d = space.dim
    V = blocks.vectors(d)
    functionals = []
    for block, signs in zip(blocks.blocks, blocks.signs):
        for (i, si), (j, sj) in zip(zip(block, signs), list(zip(block, signs))[1:]):
            g = np.zeros(d)
            g[i], g[j] = si, -sj
            functionals.append(g)
    covered = {i for block in blocks.blocks for i in block}
    for k in range(d):
        if k not in covered:
            functionals.append(np.eye(d)[k])
    if not functionals:
        raise PreconditionViolation("blocks cover every coordinate singly; the projection is the identity")
    F = np.array(functionals)
    averaging = sum(np.outer(v, v) / np.dot(v, v) for v in V)
    Ut = (np.eye(d) - averaging) @ F.T @ np.linalg.inv(F @ F.T)
    return ProjectionSpec(fs=F.tolist(), us=Ut.T.tolist())


# Disjointly spanned subspaces of Lorentz spaces

class DisjointSpanSpec(BaseModel):
    """Mutually disjointly supported vectors"""
    xs: List[List[float]] = Field(min_length=2)

    @model_validator(mode="after")
    def _disjoint(self) -> "DisjointSpanSpec":
        if len({len(x) for x in self.xs}) != 1:
            raise ValueError("vectors must share one length")
        supports = [set(np.flatnonzero(x).tolist()) for x in self.xs]
        if any(not s for s in supports):
            raise ValueError("vectors must be nonzero")
        for a, b in itertools.combinations(supports, 2):
            if a & b:
                raise ValueError("supports must be pairwise disjoint")
        return self

    @property
    def sigma(self) -> int:
        return int(sum(np.count_nonzero(x) for x in self.xs))


class DisjointCondition(Enum):
    COND_A = "CondA"
    COND_B = "CondB"
    NEITHER = "Neither"


def disjoint_span_conditions(space: LorentzSpec, spec: DisjointSpanSpec) -> DisjointCondition:
    """Which necessary condition for 1-complementation of the span holds"""
    sigma = spec.sigma
    w = space.weights
    if len(spec.xs[0]) != space.dim:
        raise PreconditionViolation("vectors do not match the space dimension")
    if np.any(w[:sigma] == 0.0):
        raise PreconditionViolation(f"weights must be nonzero up to index {sigma}")
    if np.all(w[:sigma] == 1.0):
        return DisjointCondition.COND_A
    for x in spec.xs:
        m = np.abs(np.asarray(x)[np.asarray(x) != 0.0])
        if not np.allclose(m, m[0], rtol=1e-12, atol=0.0):
            return DisjointCondition.NEITHER
    return DisjointCondition.COND_B


# p-convexity

class ConvexityCheck(BaseModel):
    holds: bool
    trials: int
    violation: Optional[List[List[float]]] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None


def p_convexity_sample_check(space: Space, p: float, trials: int = 10_000, seed: int = 0) -> ConvexityCheck:
    """Sampled test of ||(sum |x_i|^p)^(1/p)|| <= (sum ||x_i||^p)^(1/p).

    False comes with an explicit violating tuple; True is only evidence.
    """
    if p < 1.0:
        raise PreconditionViolation("p-convexity needs p >= 1")
    d = space.dim
    eye = np.eye(d)
    candidates: List[np.ndarray] = [eye[[i, j]] for i in range(d) for j in range(i + 1, d)]
    rng = restart_rng(seed, 0)
    for _ in range(trials):
        count = int(rng.integers(2, 4))
        xs = rng.standard_normal((count, d))
        if rng.random() < 0.5:
            xs *= rng.random((count, d)) < 0.5
        candidates.append(xs)

    for xs in candidates:
        norms = [norm(space, x) for x in xs]
        lhs = norm(space, np.sum(np.abs(xs) ** p, axis=0) ** (1.0 / p))
        rhs = float(np.sum(np.array(norms) ** p) ** (1.0 / p))
        if lhs > rhs + 1e-9 * max(1.0, rhs):
            logger.info(f"{p}-convexity violated: {lhs:.9g} > {rhs:.9g}")
            return ConvexityCheck(holds=False, trials=trials, violation=xs.tolist(), lhs=lhs, rhs=rhs)
    return ConvexityCheck(holds=True, trials=trials)
