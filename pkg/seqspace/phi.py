"""Seqspace - Piecewise power functions, Orlicz functions and Young conjugates"""

import logging
import math
from functools import cached_property
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray, List[float]]

# Relative tolerance for continuity and convexity checks at breakpoints
SHAPE_TOL = 1e-9


class PowerPiece(BaseModel):
    """One segment offset + slope*t + coef*(t - center)**exponent, valid from `start`"""
    start: float = Field(ge=0.0)
    offset: float = 0.0
    slope: float = 0.0
    coef: float = Field(default=0.0, ge=0.0)
    center: float = 0.0
    exponent: float = Field(default=1.0, ge=1.0)

    @model_validator(mode="after")
    def _center_left_of_start(self) -> "PowerPiece":
        if self.center > self.start + 1e-12:
            raise ValueError(f"center {self.center} lies right of start {self.start}")
        return self

    @property
    def is_affine(self) -> bool:
        return self.coef == 0.0 or self.exponent == 1.0

    def value(self, t: np.ndarray) -> np.ndarray:
        shifted = np.maximum(t - self.center, 0.0)
        return self.offset + self.slope * t + self.coef * np.power(shifted, self.exponent)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        if self.is_affine:
            return np.full_like(np.asarray(t, dtype=float), self.slope + self.coef)
        shifted = np.maximum(t - self.center, 0.0)
        return self.slope + self.coef * self.exponent * np.power(shifted, self.exponent - 1.0)

    def derivative_inverse(self, v: float) -> float:
        """Point where a strictly convex piece has derivative v"""
        q = self.exponent
        base = max(v - self.slope, 0.0) / (self.coef * q)
        return self.center + base ** (1.0 / (q - 1.0))


def _expand_preset(data: Any) -> Any:
    """Turn {"power": p} / {"square_patch": a} shorthands into piece lists"""
    if not isinstance(data, dict) or "pieces" in data:
        return data
    if "power" in data:
        p = float(data["power"])
        return {"pieces": [{"start": 0.0, "coef": 1.0, "exponent": p}]}
    if "square_patch" in data:
        a = float(data["square_patch"])
        if not 0.0 < a < 1.0:
            raise ValueError(f"square_patch needs 0 < a < 1, got {a}")
        return {
            "pieces": [
                {"start": 0.0, "coef": 1.0, "exponent": 2.0},
                {"start": a, "offset": -a, "slope": 1.0 + a},
            ]
        }
    return data


class PiecewisePowerFunction(BaseModel):
    """Convex, non-decreasing function on [0, domain_end) built from power pieces.

    The function is +inf beyond a finite ``domain_end``; this is how Young
    conjugates of functions with linear growth are represented.
    """
    pieces: List[PowerPiece] = Field(min_length=1)
    domain_end: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def _presets(cls, data: Any) -> Any:
        return _expand_preset(data)

    @model_validator(mode="after")
    def _check_shape(self) -> "PiecewisePowerFunction":
        starts = [piece.start for piece in self.pieces]
        if starts[0] != 0.0:
            raise ValueError("first piece must start at 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("piece starts must be strictly increasing")
        if self.domain_end is not None and self.domain_end <= starts[-1]:
            raise ValueError("domain_end must lie right of the last piece start")
        if abs(float(self.pieces[0].value(np.array(0.0)))) > 1e-12:
            raise ValueError("function must vanish at 0")
        if float(self.pieces[0].derivative(np.array(0.0))) < -1e-12:
            raise ValueError("function must be non-decreasing")
        for left, right in zip(self.pieces, self.pieces[1:]):
            t = np.array(right.start)
            lv, rv = float(left.value(t)), float(right.value(t))
            if abs(lv - rv) > SHAPE_TOL * max(1.0, abs(lv)):
                raise ValueError(f"discontinuity at t={right.start}: {lv} vs {rv}")
            ld, rd = float(left.derivative(t)), float(right.derivative(t))
            if ld > rd + SHAPE_TOL * max(1.0, abs(ld)):
                raise ValueError(f"convexity fails at t={right.start}: slopes {ld} > {rd}")
        return self

    @cached_property
    def starts(self) -> np.ndarray:
        return np.array([piece.start for piece in self.pieces])

    @cached_property
    def coefficients(self) -> Dict[str, np.ndarray]:
        return {
            name: np.array([getattr(piece, name) for piece in self.pieces])
            for name in ("offset", "slope", "coef", "center", "exponent")
        }

    @property
    def end(self) -> float:
        return math.inf if self.domain_end is None else self.domain_end

    def piece_end(self, k: int) -> float:
        return self.pieces[k + 1].start if k + 1 < len(self.pieces) else self.end

    def __call__(self, t: ArrayLike) -> Union[float, np.ndarray]:
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        idx = np.clip(np.searchsorted(self.starts, arr, side="right") - 1, 0, None)
        tab = self.coefficients
        shifted = np.maximum(arr - tab["center"][idx], 0.0)
        out = tab["offset"][idx] + tab["slope"][idx] * arr + tab["coef"][idx] * np.power(shifted, tab["exponent"][idx])
        if self.domain_end is not None:
            out = np.where(arr > self.domain_end, math.inf, out)
        return float(out[0]) if scalar else out

    def derivative(self, t: ArrayLike, side: str = "right") -> Union[float, np.ndarray]:
        """One-sided derivative; the left derivative at 0 is taken as 0"""
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        idx = np.clip(np.searchsorted(self.starts, arr, side=side) - 1, 0, None)
        tab = self.coefficients
        q = tab["exponent"][idx]
        affine = (q == 1.0) | (tab["coef"][idx] == 0.0)
        shifted = np.maximum(arr - tab["center"][idx], 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            power_part = tab["coef"][idx] * q * np.power(shifted, np.where(affine, 0.0, q - 1.0))
        out = tab["slope"][idx] + np.where(affine, tab["coef"][idx], power_part)
        if side == "left":
            out = np.where(arr <= 0.0, 0.0, out)
        if self.domain_end is not None:
            beyond = arr >= self.domain_end if side == "right" else arr > self.domain_end
            out = np.where(beyond, math.inf, out)
        return float(out[0]) if scalar else out

    def conjugate(self) -> "PiecewisePowerFunction":
        """Young conjugate u -> sup_t (t*u - f(t)) in closed form.

        A strictly convex piece maps to a power piece with the conjugate
        exponent, a kink maps to an affine piece and an affine piece maps to
        a kink. Linear growth at infinity becomes a finite domain end.
        """
        dual: List[PowerPiece] = []
        cursor = 0.0
        for k, piece in enumerate(self.pieces):
            t_k = piece.start
            slope_right = float(piece.derivative(np.array(t_k)))
            if slope_right - cursor > 1e-14 * max(1.0, cursor):
                dual.append(PowerPiece(start=cursor, offset=-float(self(t_k)), slope=t_k, center=cursor))
                cursor = slope_right
            if not piece.is_affine:
                q = piece.exponent
                big_q = q / (q - 1.0)
                dual.append(
                    PowerPiece(
                        start=cursor,
                        offset=-piece.offset - piece.slope * piece.center,
                        slope=piece.center,
                        coef=piece.coef * (q - 1.0) * (piece.coef * q) ** (-big_q),
                        center=min(piece.slope, cursor),
                        exponent=big_q,
                    )
                )
                end = self.piece_end(k)
                cursor = math.inf if math.isinf(end) else float(piece.derivative(np.array(end)))
        dual_end: Optional[float] = None
        if self.domain_end is not None:
            if math.isfinite(cursor):
                d = self.domain_end
                dual.append(PowerPiece(start=cursor, offset=-float(self(d)), slope=d, center=cursor))
        elif math.isfinite(cursor):
            dual_end = cursor
        if not dual:
            dual.append(PowerPiece(start=0.0))
        logger.debug(f"Conjugate built with {len(dual)} pieces, domain_end={dual_end}")
        return PiecewisePowerFunction(pieces=dual, domain_end=dual_end)

    def maximizers(self, v: float) -> tuple[float, float]:
        """Interval [lo, hi] of t >= 0 maximizing v*t - f(t); inf when unbounded"""
        if v < 0:
            return 0.0, 0.0
        lo = hi = None
        for k, piece in enumerate(self.pieces):
            end = self.piece_end(k)
            d_start = float(piece.derivative(np.array(piece.start)))
            d_end = math.inf if math.isinf(end) else float(piece.derivative(np.array(end)))
            if lo is None:
                if d_start >= v:
                    lo = piece.start
                elif not piece.is_affine and d_end >= v:
                    lo = min(piece.derivative_inverse(v), end)
            if hi is None:
                if d_start > v:
                    hi = piece.start
                elif not piece.is_affine and d_end > v:
                    hi = min(piece.derivative_inverse(v), end)
            if lo is not None and hi is not None:
                break
        end = self.end
        return (end if lo is None else lo), (end if hi is None else hi)

    def sup_growth(self) -> float:
        """Limit slope at the end of the domain (inf unless the last piece is affine)"""
        last = self.pieces[-1]
        if self.domain_end is not None or not last.is_affine:
            return math.inf
        return last.slope + last.coef


class OrliczFunction(PiecewisePowerFunction):
    """Orlicz function: convex, non-decreasing, phi(0)=0, phi(1)=1, finite on [0, inf)"""

    @model_validator(mode="after")
    def _check_normalized(self) -> "OrliczFunction":
        if self.domain_end is not None:
            raise ValueError("an Orlicz function is finite on all of [0, inf)")
        at_one = float(self(1.0))
        if abs(at_one - 1.0) > 1e-9:
            raise ValueError(f"phi(1) must equal 1, got {at_one}")
        return self

    def is_positive(self) -> bool:
        """phi(t) > 0 for every t > 0"""
        first = self.pieces[0]
        return not (first.is_affine and first.slope + first.coef == 0.0)

    def derivative_at_zero(self) -> float:
        return float(self.derivative(0.0, side="right"))


def power(p: float) -> OrliczFunction:
    """phi(t) = t**p"""
    return OrliczFunction.model_validate({"power": p})


def square_patch(a: float) -> OrliczFunction:
    """t**2 on [0, a], then the affine line through (a, a**2) and (1, 1)"""
    return OrliczFunction.model_validate({"square_patch": a})


def young_conjugate(phi: PiecewisePowerFunction) -> PiecewisePowerFunction:
    return phi.conjugate()
