"""Seqspace - Norming functionals, norming sets and the dual norm"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from .errors import PreconditionViolation, VerificationFailed
from .phi import OrliczFunction
from .search import INNER_BUDGET, SearchBudget, ascend, random_directions, restart_rng
from .spaces import (
    LorentzSpec,
    NormFlavor,
    OrliczSpec,
    amemiya_multiplier,
    as_vector,
    decreasing_rearrangement,
    norm,
)

logger = logging.getLogger(__name__)

Space = Union[LorentzSpec, OrliczSpec]

# Moduli closer than this (relative to the largest) form one tie block
TIE_TOL = 1e-12
DEFAULT_CAP = 64
NORMING_TOL = 1e-6
# Arguments this close (relative) to a piece start are read at the start itself
KINK_TOL = 1e-9


@dataclass
class NormingSet:
    """Norming functionals found at x; `complete` is False when the set was sampled"""
    functionals: List[np.ndarray]
    complete: bool


def tie_blocks(sorted_moduli: np.ndarray) -> List[tuple[int, int]]:
    """Rank ranges [start, stop) of equal moduli in a non-increasing array"""
    if sorted_moduli.size == 0:
        return []
    scale = TIE_TOL * max(float(sorted_moduli[0]), np.finfo(float).tiny)
    blocks, start = [], 0
    for r in range(1, sorted_moduli.size):
        if sorted_moduli[r - 1] - sorted_moduli[r] > scale:
            blocks.append((start, r))
            start = r
    blocks.append((start, sorted_moduli.size))
    return blocks


def distinct_permutations(values: Sequence[float]) -> Iterator[tuple]:
    """Permutations of a multiset, each produced once"""
    counts = Counter(values)
    keys = sorted(counts)
    size = len(values)

    def build(prefix: list) -> Iterator[tuple]:
        if len(prefix) == size:
            yield tuple(prefix)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                prefix.append(key)
                yield from build(prefix)
                prefix.pop()
                counts[key] += 1

    yield from build([])


def _multiset_count(values: Sequence[float]) -> int:
    total = math.factorial(len(values))
    for c in Counter(values).values():
        total //= math.factorial(c)
    return total


# Lorentz

def _lorentz_from_weights(space: LorentzSpec, x: np.ndarray, coord_weights: np.ndarray, zero_signs: Optional[np.ndarray] = None) -> np.ndarray:
    n = norm(space, x)
    p = space.p
    sign = np.sign(x)
    magnitude = np.where(x != 0.0, np.abs(x) ** (p - 1.0), 0.0)
    out = n ** (2.0 - p) * coord_weights * sign * magnitude
    if zero_signs is not None:
        out = out + n ** (2.0 - p) * coord_weights * zero_signs * (x == 0.0)
    return out


def _lorentz_canonical(space: LorentzSpec, x: np.ndarray) -> np.ndarray:
    sorted_moduli, order = decreasing_rearrangement(x)
    averaged = np.empty_like(space.weights)
    for start, stop in tie_blocks(sorted_moduli):
        averaged[start:stop] = space.weights[start:stop].mean()
    coord_weights = np.empty_like(averaged)
    coord_weights[order] = averaged
    return _lorentz_from_weights(space, x, coord_weights)


def _lorentz_extremes(space: LorentzSpec, x: np.ndarray, cap: int, seed: int) -> tuple[List[np.ndarray], bool]:
    sorted_moduli, order = decreasing_rearrangement(x)
    blocks = [(a, b) for a, b in tie_blocks(sorted_moduli) if sorted_moduli[a] > 0.0]
    zero_start = int(np.count_nonzero(sorted_moduli))
    signed_tail = space.p == 1.0 and zero_start < x.size
    w = space.weights

    def realize(choice: Sequence[Sequence[float]], tail: Optional[Sequence[float]]) -> np.ndarray:
        by_rank = w.copy()
        for (a, b), block in zip(blocks, choice):
            by_rank[a:b] = block
        zero_signs = None
        if tail is not None:
            signs_by_rank = np.zeros_like(by_rank)
            signs_by_rank[zero_start:] = np.sign(tail)
            by_rank[zero_start:] = np.abs(tail)
            zero_signs = np.empty_like(by_rank)
            zero_signs[order] = signs_by_rank
        coord_weights = np.empty_like(by_rank)
        coord_weights[order] = by_rank
        return _lorentz_from_weights(space, x, coord_weights, zero_signs)

    tail_weights = list(w[zero_start:]) if signed_tail else []
    total = 1
    for a, b in blocks:
        total *= _multiset_count(list(w[a:b]))
    if signed_tail:
        total *= _multiset_count(tail_weights) * 2 ** sum(1 for v in tail_weights if v > 0)

    if total <= cap:
        block_lists = [list(distinct_permutations(list(w[a:b]))) for a, b in blocks]
        tails: Iterable = [None]
        if signed_tail:
            tails = {
                tuple(s * v for s, v in zip(signs, perm))
                for perm in distinct_permutations(tail_weights)
                for signs in itertools.product((1.0, -1.0), repeat=len(tail_weights))
            }
            tails = sorted(tails)
        out = [realize(choice, tail) for choice in itertools.product(*block_lists) for tail in tails]
        return out, True

    rng = restart_rng(seed, 0)
    seen, out = set(), []
    for _ in range(8 * cap):
        choice = [tuple(rng.permutation(w[a:b])) for a, b in blocks]
        tail = None
        if signed_tail:
            tail = tuple(rng.choice([-1.0, 1.0], size=len(tail_weights)) * rng.permutation(tail_weights))
        key = (tuple(choice), tail)
        if key in seen:
            continue
        seen.add(key)
        out.append(realize(choice, tail))
        if len(out) >= cap:
            break
    logger.debug(f"Sampled {len(out)} of {total} Lorentz norming extremes")
    return out, False


# Orlicz, Luxemburg flavor

def _snap_to_kinks(phi: OrliczFunction, s: np.ndarray) -> np.ndarray:
    """Move points lying within KINK_TOL of a piece start onto it, so both one-sided derivatives are seen"""
    starts = phi.starts[1:]
    if starts.size == 0:
        return s
    nearest = starts[np.argmin(np.abs(s[:, None] - starts[None, :]), axis=1)]
    return np.where(np.abs(s - nearest) <= KINK_TOL * nearest, nearest, s)


def _luxemburg_box(space: OrliczSpec, x: np.ndarray) -> tuple[float, np.ndarray, List[List[float]]]:
    n = norm(space, x)
    xhat = x / n
    a = _snap_to_kinks(space.phi, np.abs(xhat))
    left = space.phi.derivative(a, side="left")
    right = space.phi.derivative(a, side="right")
    d0 = space.phi.derivative_at_zero()
    choices: List[List[float]] = []
    for j in range(x.size):
        if a[j] == 0.0:
            choices.append([d0, -d0] if d0 > 0.0 else [0.0])
        elif right[j] - left[j] > TIE_TOL * max(1.0, right[j]):
            choices.append([np.sign(xhat[j]) * left[j], np.sign(xhat[j]) * right[j]])
        else:
            choices.append([np.sign(xhat[j]) * left[j]])
    return n, xhat, choices


def _luxemburg_canonical(space: OrliczSpec, x: np.ndarray) -> np.ndarray:
    n = norm(space, x)
    xhat = x / n
    g = np.sign(xhat) * space.phi.derivative(_snap_to_kinks(space.phi, np.abs(xhat)), side="left")
    return n * g / float(np.dot(g, xhat))


def _luxemburg_extremes(space: OrliczSpec, x: np.ndarray, cap: int, seed: int) -> tuple[List[np.ndarray], bool]:
    n, xhat, choices = _luxemburg_box(space, x)
    total = math.prod(len(c) for c in choices)
    if total <= cap:
        vertices = [np.array(v) for v in itertools.product(*choices)]
        complete = True
    else:
        rng = restart_rng(seed, 0)
        seen, vertices = set(), []
        for _ in range(8 * cap):
            v = tuple(c[rng.integers(len(c))] for c in choices)
            if v not in seen:
                seen.add(v)
                vertices.append(np.array(v))
            if len(vertices) >= cap:
                break
        complete = False
    return [n * g / float(np.dot(g, xhat)) for g in vertices], complete


# Orlicz, Orlicz-norm flavor

def _orlicz_slopes(space: OrliczSpec, x: np.ndarray) -> tuple[float, np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
    a = np.abs(x)
    n = norm(space, x)
    k = amemiya_multiplier(space.phi, a)
    if k is None:
        return n, a, None, None
    s = _snap_to_kinks(space.phi, k * a)
    lo = np.where(a > 0, space.phi.derivative(s, side="left"), 0.0)
    hi = np.where(a > 0, space.phi.derivative(s, side="right"), 0.0)
    return n, a, lo, hi


def _orlicz_canonical(space: OrliczSpec, x: np.ndarray) -> np.ndarray:
    n, a, lo, hi = _orlicz_slopes(space, x)
    if lo is None:
        y = space.phi.sup_growth() * (a > 0)
    else:
        spread = float(np.dot(a, hi - lo))
        theta = 0.0 if spread <= 0.0 else float(np.clip((n - np.dot(a, lo)) / spread, 0.0, 1.0))
        y = lo + theta * (hi - lo)
    return n * np.sign(x) * y


def _orlicz_extremes(space: OrliczSpec, x: np.ndarray, cap: int, seed: int) -> tuple[List[np.ndarray], bool]:
    n, a, lo, hi = _orlicz_slopes(space, x)
    zeros = np.flatnonzero(a == 0.0)
    if lo is None:
        return [_orlicz_canonical(space, x)], zeros.size == 0
    kinks = [i for i in range(a.size) if a[i] > 0 and hi[i] - lo[i] > TIE_TOL * max(1.0, hi[i])]
    fixed = float(sum(a[i] * lo[i] for i in range(a.size) if i not in kinks))
    points: List[np.ndarray] = []
    if not kinks:
        points.append(lo.copy())
    for i in kinks:
        others = [j for j in kinks if j != i]
        for pattern in itertools.product((0, 1), repeat=len(others)):
            y = lo.copy()
            for j, bit in zip(others, pattern):
                y[j] = hi[j] if bit else lo[j]
            rest = n - fixed - sum(a[j] * y[j] for j in others)
            yi = rest / a[i]
            slack = TIE_TOL * max(1.0, hi[i])
            if lo[i] - slack <= yi <= hi[i] + slack:
                y[i] = min(max(yi, lo[i]), hi[i])
                points.append(y)
    d0 = space.phi.derivative_at_zero()
    if d0 > 0.0 and zeros.size:
        expanded = []
        for y in points:
            for signs in itertools.product((1.0, -1.0), repeat=zeros.size):
                z = y.copy()
                z[zeros] = d0 * np.array(signs)
                expanded.append(z)
        points = expanded
    signs = np.where(x != 0.0, np.sign(x), 1.0)
    out = _dedupe([n * signs * y for y in points])
    complete = True
    if len(out) > cap:
        rng = restart_rng(seed, 0)
        picked = sorted(rng.choice(len(out), size=cap, replace=False))
        out = [out[i] for i in picked]
        complete = False
    return out, complete


def _dedupe(vectors: Iterable[np.ndarray]) -> List[np.ndarray]:
    seen, out = set(), []
    for v in vectors:
        key = tuple(np.round(v, 12))
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def canonical_functional(space: Space, x: Any) -> np.ndarray:
    """Canonical norming functional of x != 0, without the dual-norm check"""
    arr = as_vector(space, x)
    if not np.any(arr):
        raise PreconditionViolation("norming functional of the zero vector")
    if isinstance(space, LorentzSpec):
        return _lorentz_canonical(space, arr)
    if space.flavor is NormFlavor.LUXEMBURG:
        return _luxemburg_canonical(space, arr)
    return _orlicz_canonical(space, arr)


def norm_subgradient(space: Space, x: Any) -> np.ndarray:
    """An element of the subdifferential of the norm at x (0 at x = 0)"""
    arr = as_vector(space, x)
    if not np.any(arr):
        return np.zeros_like(arr)
    return canonical_functional(space, arr) / norm(space, arr)


def dual_norm(
    space: Space,
    g: Any,
    budget: SearchBudget = INNER_BUDGET,
    seed: int = 0,
    hints: Sequence[Any] = (),
) -> float:
    """Lower bound for max{g(x) : ||x|| <= 1} by multistart ratio ascent.

    By symmetry the maximizer can be taken sign-aligned with g, so the search
    runs over the non-negative orthant. The bound only grows with the budget.
    """
    g = as_vector(space, g, "functional")
    weights = np.abs(g)
    if not np.any(weights):
        return 0.0

    def ratio(z: np.ndarray) -> float:
        n = norm(space, z)
        return float(np.dot(weights, z)) / n if n > 0 else -math.inf

    def gradient(z: np.ndarray) -> np.ndarray:
        n = norm(space, z)
        return (weights * n - float(np.dot(weights, z)) * norm_subgradient(space, z)) / n ** 2

    def project(z: np.ndarray) -> np.ndarray:
        return np.maximum(z, 0.0)

    starts: List[np.ndarray] = [np.abs(as_vector(space, h)) for h in hints if np.any(h)]
    order = np.argsort(-weights, kind="stable")
    for count in range(1, g.size + 1):
        z = np.zeros_like(g)
        z[order[:count]] = 1.0
        starts.append(z)
    if isinstance(space, LorentzSpec) and space.p > 1.0:
        starts.append(weights ** (1.0 / (space.p - 1.0)))
    starts.append(weights.copy())
    starts.extend(np.abs(d) for d in random_directions(seed, budget.restarts, g.size))

    best = -math.inf
    for z0 in starts:
        if not np.any(z0):
            continue
        _, value = ascend(ratio, gradient, z0, budget.steps, project=project)
        best = max(best, value)
    return best


def is_norming_pair(space: Space, x: Any, g: Any, tol: float = NORMING_TOL, budget: SearchBudget = INNER_BUDGET, seed: int = 0) -> bool:
    """g(x) = ||x||**2 and ||g||_* = ||x||, both within tol"""
    arr = as_vector(space, x)
    g = as_vector(space, g, "functional")
    n = norm(space, arr)
    if abs(float(np.dot(g, arr)) - n ** 2) > tol * max(1.0, n ** 2):
        return False
    if n == 0.0:
        return not np.any(g)
    return dual_norm(space, g, budget, seed, hints=[arr]) <= n * (1.0 + tol)


def norming_functional(space: Space, x: Any, tol: float = NORMING_TOL) -> np.ndarray:
    """Canonical norming functional of x, checked against the dual norm"""
    g = canonical_functional(space, x)
    if not is_norming_pair(space, x, g, tol):
        raise VerificationFailed(f"functional {g.tolist()} is not norming for {np.asarray(x).tolist()}")
    return g


def norming_set(space: Space, x: Any, cap: int = DEFAULT_CAP, seed: int = 0) -> NormingSet:
    arr = as_vector(space, x)
    if not np.any(arr):
        raise PreconditionViolation("norming set of the zero vector")
    if isinstance(space, LorentzSpec):
        extremes, complete = _lorentz_extremes(space, arr, cap, seed)
    elif space.flavor is NormFlavor.LUXEMBURG:
        extremes, complete = _luxemburg_extremes(space, arr, cap, seed)
    else:
        extremes, complete = _orlicz_extremes(space, arr, cap, seed)
    functionals = _dedupe([canonical_functional(space, arr)] + extremes)
    return NormingSet(functionals=functionals, complete=complete)


def norming_extremes(space: Space, x: Any, cap: int = DEFAULT_CAP, seed: int = 0) -> List[np.ndarray]:
    """Extreme points of the norming set at x (up to `cap`), canonical functional first"""
    return norming_set(space, x, cap, seed).functionals
