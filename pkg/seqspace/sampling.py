"""Seqspace - Random spaces, Orlicz functions, blocks and subspace vectors"""

import logging
from typing import List, Optional

import numpy as np
from scipy import linalg

from .phi import OrliczFunction, PiecewisePowerFunction, PowerPiece
from .spaces import LorentzSpec, NormFlavor, OrliczSpec
from .theorems import BlockSpec

logger = logging.getLogger(__name__)

EXPONENT_RANGE = (1.5, 4.0)


def random_lorentz_weights(rng: np.random.Generator, dim: int, floor: float = 0.3) -> List[float]:
    """w_1 = 1 followed by a non-increasing sequence bounded below by `floor`"""
    ratios = rng.uniform(0.75, 1.0, size=dim - 1)
    w = np.concatenate([[1.0], np.cumprod(ratios)])
    return np.maximum(w, floor).tolist()


def random_lorentz_space(rng: np.random.Generator, dim: int, p: Optional[float] = None) -> LorentzSpec:
    if p is None:
        p = float(rng.uniform(1.2, 4.0))
    return LorentzSpec(kind="lorentz", w=random_lorentz_weights(rng, dim), p=p)


def random_orlicz_function(rng: np.random.Generator, pieces: Optional[int] = None) -> OrliczFunction:
    """Random convex piecewise-power function normalized to phi(1) = 1.

    Each piece continues the previous one with a non-negative kink in slope
    and its own power term centred at its start. The last piece is affine
    half of the time.
    """
    count = int(pieces) if pieces is not None else int(rng.integers(1, 4))
    starts = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 1.5, size=count - 1))])
    if np.any(np.diff(starts) < 1e-3):
        starts = np.linspace(0.0, 1.2, count + 1)[:-1]
    first_slope = float(rng.choice([0.0, 0.0, rng.uniform(0.0, 0.5)]))
    raw = [PowerPiece(start=0.0, slope=first_slope, coef=float(rng.uniform(0.5, 2.0)),
                      exponent=float(rng.uniform(*EXPONENT_RANGE)))]
    for k, start in enumerate(starts[1:], start=1):
        prev = raw[-1]
        value = float(prev.value(np.array(start)))
        slope = float(prev.derivative(np.array(start))) + float(rng.uniform(0.0, 0.5))
        affine = k == count - 1 and rng.random() < 0.5
        raw.append(PowerPiece(
            start=float(start),
            offset=value - slope * start,
            slope=slope,
            coef=0.0 if affine else float(rng.uniform(0.2, 2.0)),
            center=float(start),
            exponent=1.0 if affine else float(rng.uniform(*EXPONENT_RANGE)),
        ))

    at_one = float(PiecewisePowerFunction(pieces=raw)(1.0))
    scaled = [
        piece.model_copy(update={
            "offset": piece.offset / at_one,
            "slope": piece.slope / at_one,
            "coef": piece.coef / at_one,
        })
        for piece in raw
    ]
    return OrliczFunction(pieces=[piece.model_dump() for piece in scaled])


def random_orlicz_space(
    rng: np.random.Generator,
    dim: int,
    flavor: Optional[NormFlavor] = None,
) -> OrliczSpec:
    if flavor is None:
        flavor = NormFlavor.LUXEMBURG if rng.random() < 0.5 else NormFlavor.ORLICZ
    return OrliczSpec(kind="orlicz", phi=random_orlicz_function(rng), flavor=flavor, dim=dim)


def random_block_spec(rng: np.random.Generator, dim: int) -> BlockSpec:
    """Disjoint signed blocks, at least one with two or more indices"""
    order = rng.permutation(dim).tolist()
    blocks: List[List[int]] = []
    cursor = 0
    while cursor < dim:
        size = int(rng.integers(1, max(2, dim // 2) + 1))
        block = order[cursor:cursor + size]
        cursor += size
        if rng.random() < 0.8 or not blocks:
            blocks.append(sorted(block))
    if all(len(block) < 2 for block in blocks):
        blocks[0] = sorted(order[:2])
        blocks = [blocks[0]] + [b for b in blocks[1:] if not set(b) & set(blocks[0])]
    signs = [[int(s) for s in rng.choice([-1, 1], size=len(block))] for block in blocks]
    return BlockSpec(blocks=blocks, signs=signs)


def hyperplane_family(f: np.ndarray, s: float, t: float) -> np.ndarray:
    """u with f(u) = 1: the minimal-norm solution moved along two kernel directions"""
    f = np.asarray(f, dtype=float)
    kernel = linalg.null_space(f[None, :])
    u = f / np.dot(f, f)
    if kernel.shape[1] >= 1:
        u = u + s * kernel[:, 0]
    if kernel.shape[1] >= 2:
        u = u + t * kernel[:, 1]
    return u


def random_hyperplane_vector(rng: np.random.Generator, f: np.ndarray, scale: float = 1.0) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    kernel = linalg.null_space(f[None, :])
    return f / np.dot(f, f) + kernel @ rng.normal(0.0, scale, size=kernel.shape[1])


def kernel_basis(fs: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the intersection of the kernels"""
    return linalg.null_space(np.atleast_2d(np.asarray(fs, dtype=float)))


def periodic_sum_zero_functionals(m: int) -> np.ndarray:
    """Kernel description of {x in R^{3m}: x_1+x_2+x_3 = 0, x_k = x_{k+3j}}"""
    d = 3 * m
    rows = [np.r_[np.ones(3), np.zeros(d - 3)]]
    for j in range(1, m):
        for k in range(3):
            row = np.zeros(d)
            row[k], row[k + 3 * j] = 1.0, -1.0
            rows.append(row)
    return np.array(rows)
