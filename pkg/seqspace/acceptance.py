"""Seqspace - Executable acceptance cases for the norm, duality and theorem modules"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from opentelemetry import trace
from opentelemetry.trace import Status, StatusCode
from pydantic import BaseModel

from .duality import canonical_functional
from .errors import BudgetExhausted, SeqspaceError
from .operators import ProjectionSpec, build_projection, minimal_projection_search, operator_norm
from .phi import OrliczFunction, PowerPiece, power, square_patch
from .positivity import Verdict, positivity_scan, prop_A_check
from .sampling import (
    hyperplane_family,
    kernel_basis,
    periodic_sum_zero_functionals,
    random_block_spec,
    random_hyperplane_vector,
    random_lorentz_space,
    random_orlicz_function,
    random_orlicz_space,
)
from .search import SearchBudget, restart_rng
from .spaces import LorentzSpec, NormFlavor, OrliczSpec, luxemburg_norm, norm, orlicz_norm, orlicz_norm_via_dual_ball
from .theorems import (
    SubspaceStatus,
    WitnessParams,
    WitnessVariant,
    build_averaging_projection,
    classify_orlicz_phi,
    has_property_P,
    has_property_Q,
    orlicz_subspace_verdict,
    refute_lorentz_hyperplane,
    sampled_property_P,
    sampled_property_Q,
    witness_functional,
    witness_params,
    witness_x,
)

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

ACCEPTANCE_BUDGET = SearchBudget(restarts=16, steps=80)
# Per-projection budget for the averaging sweep
SWEEP_BUDGET = SearchBudget(restarts=8, steps=40)
REFUTE_BUDGET = SearchBudget(restarts=16, steps=60)


class CaseResult(BaseModel):
    """Outcome of one acceptance case"""
    case: str
    name: str
    passed: bool
    checked: int
    failures: int
    detail: str


@dataclass
class CaseContext:
    seed: int = 0
    # Shrinks sample counts for quick runs; 1.0 is the full protocol
    scale: float = 1.0

    def count(self, full: int, minimum: int = 1) -> int:
        return max(minimum, int(round(full * self.scale)))

    def rng(self, stream: int) -> np.random.Generator:
        return restart_rng(self.seed, stream)


@dataclass
class Tally:
    checked: int = 0
    failures: int = 0
    first_failure: Optional[str] = None

    def record(self, ok: bool, what: str) -> None:
        self.checked += 1
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = what


def shifted_square() -> OrliczFunction:
    """((t + 1)^2 - 1)/3: equivalent to t near 0 but not similar to any power"""
    return OrliczFunction(pieces=[PowerPiece(start=0.0, offset=-1.0 / 3.0, coef=1.0 / 3.0, center=-1.0, exponent=2.0)])


def flat_then_linear() -> OrliczFunction:
    """0 on [0, 1/2], then 2t - 1"""
    return OrliczFunction(pieces=[PowerPiece(start=0.0), PowerPiece(start=0.5, offset=-1.0, slope=2.0)])


def lorentz_example_projection() -> ProjectionSpec:
    """Orthogonal projection onto ker(1,1,1) on the first three coordinates, 0 on e_4"""
    third = 1.0 / 3.0
    return ProjectionSpec(
        fs=[[1.0, 1.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        us=[[third, third, third, 0.0], [0.0, 0.0, 0.0, 1.0]],
    )


def lorentz_example(ctx: CaseContext) -> tuple[Tally, str]:
    space = LorentzSpec(kind="lorentz", w=[1.0, 1.0, 1.0, 0.0], p=2.0)
    ps = lorentz_example_projection()
    tally = Tally()
    P = build_projection(ps, space.dim)
    # P e_1 lies in the range, where ||Px|| = ||x||
    estimate = operator_norm(space, P, ACCEPTANCE_BUDGET, ctx.seed, hints=[P[:, 0]])
    tally.record(1.0 - 1e-9 <= estimate.value <= 1.0 + 1e-6, f"||P|| estimate {estimate.value!r}")
    check = prop_A_check(space, ps, ACCEPTANCE_BUDGET, ctx.seed)
    tally.record(check.positivity.verdict is Verdict.POSITIVE, f"positivity {check.positivity.verdict.value}")
    tally.record(check.consistent, f"||P||={check.projection_norm!r} against Id-P {check.positivity.verdict.value}")
    tally.record(check.complement_norm <= 1.0 + 1e-6, f"||Id-P|| estimate {check.complement_norm!r}")
    return tally, f"||P|| ~ {estimate.value:.12g}, Id-P {check.positivity.verdict.value}"


def _refutation_sweep(ctx: CaseContext, space: LorentzSpec, f: np.ndarray) -> tuple[Tally, str]:
    grid = np.linspace(-1.0, 1.0, ctx.count(10, minimum=2))
    us = [hyperplane_family(f, s, t) for s in grid for t in grid]
    rng = ctx.rng(2)
    us += [random_hyperplane_vector(rng, f) for _ in range(ctx.count(64))]
    tally = Tally()
    worst = -np.inf
    for index, u in enumerate(us):
        try:
            witness = refute_lorentz_hyperplane(space, f, u, REFUTE_BUDGET, ctx.seed)
            value = witness.value if witness is not None else np.inf
        except BudgetExhausted:
            report = positivity_scan(space, np.outer(u, f), REFUTE_BUDGET, ctx.seed, tol=1e-8)
            value = report.inf_sup_value if report.verdict is Verdict.REFUTED else np.inf
        worst = max(worst, value)
        tally.record(value < -1e-8, f"u #{index} = {np.round(u, 6).tolist()}")
    return tally, f"{len(us)} vectors u, weakest witness value {worst:.3e}"


def lorentz_weights(ctx: CaseContext) -> tuple[Tally, str]:
    space = LorentzSpec(kind="lorentz", w=[1.0, 0.8, 0.6], p=2.0)
    return _refutation_sweep(ctx, space, np.ones(3))


def lorentz_p3(ctx: CaseContext) -> tuple[Tally, str]:
    space = LorentzSpec(kind="lorentz", w=[1.0, 1.0, 1.0], p=3.0)
    return _refutation_sweep(ctx, space, np.ones(3))


def l2_minimal_projection(ctx: CaseContext) -> tuple[Tally, str]:
    rng = ctx.rng(4)
    tally = Tally()
    worst = 0.0
    for trial in range(ctx.count(20)):
        dim = int(rng.integers(3, 7))
        space = LorentzSpec(kind="lorentz", w=[1.0] * dim, p=2.0)
        f = rng.standard_normal(dim)
        found = minimal_projection_search(space, [f], ACCEPTANCE_BUDGET, ctx.seed)
        check = prop_A_check(space, found.projection, SWEEP_BUDGET, ctx.seed)
        worst = max(worst, found.norm)
        tally.record(found.norm <= 1.0 + 1e-6 and check.consistent, f"trial {trial}: norm {found.norm!r}")
    return tally, f"largest minimal norm {worst:.12g}"


def orlicz_example(ctx: CaseContext) -> tuple[Tally, str]:
    m, a = 3, 0.6
    space = OrliczSpec(kind="orlicz", phi=square_patch(a), dim=3 * m)
    fs = periodic_sum_zero_functionals(m)
    basis = kernel_basis(fs)
    Q = basis @ basis.T
    rng = ctx.rng(5)
    tally = Tally()
    for trial in range(ctx.count(1000)):
        x = basis @ rng.standard_normal(basis.shape[1])
        l2 = float(np.linalg.norm(x))
        tally.record(abs(luxemburg_norm(space, x) - l2) <= 1e-9 * max(1.0, l2), f"F-vector {trial}")
    for trial in range(ctx.count(10_000)):
        x = rng.standard_normal(space.dim) * rng.uniform(0.1, 10.0)
        tally.record(norm(space, Q @ x) <= norm(space, x) * (1.0 + 1e-9), f"contraction {trial}")
    verdict = orlicz_subspace_verdict(space, fs)
    return tally, f"subspace verdict {verdict.status.value} ({verdict.reason})"


def amemiya_vs_dual_ball(ctx: CaseContext) -> tuple[Tally, str]:
    rng = ctx.rng(6)
    tally = Tally()
    worst = 0.0
    for trial in range(ctx.count(100)):
        phi = random_orlicz_function(rng)
        dim = int(rng.integers(2, 7))
        x = rng.standard_normal(dim) * rng.uniform(0.1, 5.0)
        space = OrliczSpec(kind="orlicz", phi=phi, flavor=NormFlavor.ORLICZ, dim=dim)
        direct = orlicz_norm(space, x)
        dual = orlicz_norm_via_dual_ball(phi, x)
        gap = abs(direct - dual) / max(direct, 1e-300)
        worst = max(worst, gap)
        tally.record(gap <= 1e-7, f"trial {trial}: {direct!r} vs {dual!r}")
    return tally, f"largest relative gap {worst:.3e}"


def averaging_consistency(ctx: CaseContext) -> tuple[Tally, str]:
    rng = ctx.rng(7)
    tally = Tally()
    for trial in range(ctx.count(50)):
        dim = int(rng.integers(3, 9 if ctx.scale >= 1.0 else 6))
        space = random_lorentz_space(rng, dim) if rng.random() < 0.5 else random_orlicz_space(rng, dim)
        blocks = random_block_spec(rng, dim)
        check = prop_A_check(space, build_averaging_projection(space, blocks), SWEEP_BUDGET, ctx.seed)
        tally.record(check.consistent, f"trial {trial}: {space.kind} blocks {blocks.blocks}")
    return tally, "prop_A_check over random block averages"


def _admissible_a1(rng: np.random.Generator, n: int) -> tuple[np.ndarray, WitnessParams]:
    f = np.sort(rng.uniform(0.5, 2.0, size=n))[::-1]
    eta = witness_params(f, 0.5, 0.0).eta
    a = eta * rng.uniform(0.1, 0.9)
    delta = witness_params(f, a, 0.0).delta_a
    eps = delta * rng.uniform(0.1, 0.9) * rng.choice([-1.0, 1.0])
    return f, witness_params(f, a, eps)


def norming_display(ctx: CaseContext) -> tuple[Tally, str]:
    rng = ctx.rng(8)
    tally = Tally()
    worst = 0.0
    for trial in range(ctx.count(20)):
        n = int(rng.choice([3, 4, 5]))
        space = random_lorentz_space(rng, n)
        f, params = _admissible_a1(rng, n)
        x = witness_x(f, params, WitnessVariant.A1)
        computed = canonical_functional(space, x)
        expected = witness_functional(space, f, params)
        gap = float(np.max(np.abs(computed - expected)))
        worst = max(worst, gap)
        tally.record(gap <= 1e-10 * max(1.0, float(np.max(np.abs(expected)))), f"trial {trial}: n={n}")
    return tally, f"largest coordinate gap {worst:.3e}"


def _property_spaces() -> List[tuple[object, bool, bool]]:
    """(space, P expected, Q expected) read off the defining statements"""
    cases: List[tuple[object, bool, bool]] = []
    for w2 in (0.0, 0.3, 1.0):
        for p in (1.0, 1.5, 2.0):
            if p == 1.0 and w2 == 0.0:
                continue
            w = [1.0, w2, w2 / 2.0]
            cases.append((LorentzSpec(kind="lorentz", w=w, p=p), w2 != 0.0, p > 1.0))
    linear_plus = OrliczFunction(pieces=[PowerPiece(start=0.0, slope=0.5, coef=0.5, exponent=2.0)])
    # (phi, P, Q for Luxemburg, Q for Amemiya); the Amemiya form of the square
    # patch grows linearly at e_i, so its multiplier is never attained there
    phis = [
        (power(2.0), True, True, True),
        (power(3.0), True, True, True),
        (power(1.0), True, False, False),
        (square_patch(0.6), True, True, False),
        (shifted_square(), True, False, False),
        (linear_plus, True, False, False),
        (flat_then_linear(), False, True, True),
    ]
    for phi, expect_p, q_luxemburg, q_orlicz in phis:
        for flavor, expect_q in ((NormFlavor.LUXEMBURG, q_luxemburg), (NormFlavor.ORLICZ, q_orlicz)):
            if len(cases) >= 20:
                break
            cases.append((OrliczSpec(kind="orlicz", phi=phi, flavor=flavor, dim=3), expect_p, expect_q))
    return cases[:20]


def orlicz_classification(ctx: CaseContext) -> tuple[Tally, str]:
    tally = Tally()
    labels = {
        "t^3": (classify_orlicz_phi(power(3.0)).label(), "SimilarTo(3,1)"),
        "square patch": (classify_orlicz_phi(square_patch(0.6)).label(), "SimilarTo(2,1)"),
        "shifted square": (classify_orlicz_phi(shifted_square()).label(), "EquivalentTo(1)"),
    }
    for what, (got, want) in labels.items():
        tally.record(got == want, f"{what}: {got} != {want}")

    space = OrliczSpec(kind="orlicz", phi=shifted_square(), dim=4)
    examples = [
        ([[1.0, -1.0, 0.0, 0.0]], SubspaceStatus.COMPATIBLE, 1.0),
        ([[1.0, 1.0, 1.0, 0.0]], SubspaceStatus.INCOMPATIBLE, None),
        ([[1.0, 2.0, 0.0, 0.0]], SubspaceStatus.COMPATIBLE, 2.0),
    ]
    for fs, status, gamma in examples:
        verdict = orlicz_subspace_verdict(space, fs)
        ok = verdict.status is status and (gamma is None or abs((verdict.gamma or 0.0) - gamma) <= 1e-9)
        tally.record(ok, f"{fs}: {verdict.status.value} gamma={verdict.gamma}")

    for index, (s, expect_p, expect_q) in enumerate(_property_spaces()):
        exact = (has_property_P(s), has_property_Q(s))
        sampled = (sampled_property_P(s), sampled_property_Q(s))
        tally.record(exact == (expect_p, expect_q) == sampled, f"space {index}: exact {exact}, sampled {sampled}")
    return tally, "classifier, subspace verdicts and (P)/(Q) statements"


@dataclass(frozen=True)
class AcceptanceCase:
    case: str
    name: str
    run: Callable[[CaseContext], tuple[Tally, str]]
    slow: bool = False


CASES: List[AcceptanceCase] = [
    AcceptanceCase("AC-1", "lorentz-example", lorentz_example),
    AcceptanceCase("AC-2", "lorentz-weights", lorentz_weights, slow=True),
    AcceptanceCase("AC-3", "lorentz-p3", lorentz_p3, slow=True),
    AcceptanceCase("AC-4", "l2-minproj", l2_minimal_projection, slow=True),
    AcceptanceCase("AC-5", "orlicz-example", orlicz_example, slow=True),
    AcceptanceCase("AC-6", "amemiya-dual", amemiya_vs_dual_ball),
    AcceptanceCase("AC-7", "averaging", averaging_consistency, slow=True),
    AcceptanceCase("AC-8", "norming-display", norming_display),
    AcceptanceCase("AC-9", "orlicz-classify", orlicz_classification),
]

CASES_BY_KEY: Dict[str, AcceptanceCase] = {
    key: case for case in CASES for key in (case.case.lower(), case.name)
}


def find_case(key: str) -> AcceptanceCase:
    try:
        return CASES_BY_KEY[key.lower()]
    except KeyError:
        raise KeyError(f"unknown case {key!r}; choose from {', '.join(c.name for c in CASES)}") from None


def run_case(case: AcceptanceCase, ctx: CaseContext) -> CaseResult:
    with tracer.start_as_current_span(f"verify {case.case}") as span:
        span.set_attribute("seqspace.case", case.name)
        span.set_attribute("seqspace.seed", ctx.seed)
        started = time.perf_counter()
        try:
            tally, summary = case.run(ctx)
            passed = tally.failures == 0 and tally.checked > 0
            detail = summary if passed else f"{summary}; first failure: {tally.first_failure}"
        except SeqspaceError as e:
            tally, passed, detail = Tally(), False, f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - started

        span.set_attribute("seqspace.passed", passed)
        span.set_status(Status(StatusCode.OK) if passed else Status(StatusCode.ERROR, detail))
        if passed:
            logger.info(f"{case.case} {case.name} passed ({tally.checked} checks, {seconds:.1f}s)")
        else:
            logger.warning(f"{case.case} {case.name} failed: {detail}")
        return CaseResult(
            case=case.case, name=case.name, passed=passed,
            checked=tally.checked, failures=tally.failures,
            detail=detail,
        )


def run_suite(keys: Optional[List[str]] = None, ctx: Optional[CaseContext] = None) -> List[CaseResult]:
    ctx = ctx or CaseContext()
    cases = [find_case(key) for key in keys] if keys else CASES
    return [run_case(case, ctx) for case in cases]
