"""Seqspace - Lorentz and Orlicz sequence spaces and their norms"""

import logging
import math
from enum import Enum
from functools import cached_property
from typing import Annotated, Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, model_validator
from scipy import optimize

from .errors import DimensionMismatch, NonConvergentBracket
from .phi import OrliczFunction, PiecewisePowerFunction, young_conjugate

logger = logging.getLogger(__name__)

# phi(1) = 1 is only validated to this accuracy
BRACKET_SLACK = 1e-9

__all__ = [
    "NormFlavor",
    "LorentzSpec",
    "OrliczSpec",
    "SpaceSpec",
    "parse_space",
    "as_vector",
    "decreasing_rearrangement",
    "lorentz_norm",
    "luxemburg_norm",
    "orlicz_norm",
    "orlicz_norm_via_dual_ball",
    "amemiya_multiplier",
    "modular",
    "norm",
    "young_conjugate",
]


class NormFlavor(Enum):
    """Which of the two norms an Orlicz space carries"""
    LUXEMBURG = "luxemburg"
    ORLICZ = "orlicz"


class LorentzSpec(BaseModel):
    """Lorentz space l_{w,p} of dimension len(w)"""
    kind: Literal["lorentz"] = "lorentz"
    w: List[float] = Field(min_length=1)
    p: float = Field(ge=1.0)
    dim: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_weights(self) -> "LorentzSpec":
        w = self.w
        if w[0] != 1.0:
            raise ValueError(f"w[0] must be 1, got {w[0]}")
        if any(v < 0.0 for v in w):
            raise ValueError("weights must be non-negative")
        if any(b > a for a, b in zip(w, w[1:])):
            raise ValueError("weights must be non-increasing")
        if self.dim == 0:
            self.dim = len(w)
        elif self.dim != len(w):
            raise ValueError(f"dim {self.dim} does not match {len(w)} weights")
        return self

    @cached_property
    def weights(self) -> np.ndarray:
        return np.asarray(self.w, dtype=float)

    def norm(self, x: Any) -> float:
        return lorentz_norm(self, x)


class OrliczSpec(BaseModel):
    """Orlicz space l_phi of dimension `dim` with the chosen norm flavor"""
    kind: Literal["orlicz"] = "orlicz"
    phi: OrliczFunction
    flavor: NormFlavor = NormFlavor.LUXEMBURG
    dim: int = Field(ge=1)

    @model_validator(mode="before")
    @classmethod
    def _inline_phi(cls, data: Any) -> Any:
        # {"pieces": [...]} or a preset may sit next to "kind" instead of under "phi"
        if isinstance(data, dict) and "phi" not in data:
            inline = {key: data[key] for key in ("pieces", "power", "square_patch") if key in data}
            if inline:
                data = {key: value for key, value in data.items() if key not in inline}
                data["phi"] = inline
        return data

    @cached_property
    def conjugate(self) -> PiecewisePowerFunction:
        return young_conjugate(self.phi)

    def norm(self, x: Any) -> float:
        if self.flavor is NormFlavor.LUXEMBURG:
            return luxemburg_norm(self, x)
        return orlicz_norm(self, x)


SpaceSpec = Annotated[Union[LorentzSpec, OrliczSpec], Field(discriminator="kind")]

_space_adapter: TypeAdapter = TypeAdapter(SpaceSpec)


def parse_space(data: Any) -> Union[LorentzSpec, OrliczSpec]:
    """Validate a space description (dict or JSON text)"""
    if isinstance(data, (str, bytes)):
        return _space_adapter.validate_json(data)
    return _space_adapter.validate_python(data)


def as_vector(space: Union[LorentzSpec, OrliczSpec], x: Any, what: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape[0] != space.dim:
        raise DimensionMismatch(space.dim, arr.shape[0], what)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} has non-finite entries")
    return arr


def decreasing_rearrangement(x: Any) -> tuple[np.ndarray, np.ndarray]:
    """Moduli sorted non-increasingly, and the original index at each rank.

    Ties keep ascending original index.

    Examples
    --------
    >>> decreasing_rearrangement([-2.0, 1.0, 3.0])
    (array([3., 2., 1.]), array([2, 0, 1]))
    """
    moduli = np.abs(np.asarray(x, dtype=float))
    order = np.argsort(-moduli, kind="stable")
    return moduli[order], order


def lorentz_norm(space: LorentzSpec, x: Any) -> float:
    arr = as_vector(space, x)
    sorted_moduli, _ = decreasing_rearrangement(arr)
    top = sorted_moduli[0]
    if top == 0.0:
        return 0.0
    scaled = sorted_moduli / top
    return float(top * np.sum(space.weights * scaled ** space.p) ** (1.0 / space.p))


def modular(phi: PiecewisePowerFunction, x: Any) -> float:
    """Sum of phi(|x_i|)"""
    return float(np.sum(phi(np.abs(np.asarray(x, dtype=float)))))


def luxemburg_norm(space: OrliczSpec, x: Any) -> float:
    """inf{lam > 0 : sum phi(|x_i|/lam) <= 1} by bracketed root finding"""
    a = np.abs(as_vector(space, x))
    if not np.any(a):
        return 0.0
    lo, hi = float(a.max()), float(a.sum())
    excess = lambda lam: modular(space.phi, a / lam) - 1.0
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo < -BRACKET_SLACK or f_hi > BRACKET_SLACK:
        raise NonConvergentBracket(
            f"Luxemburg bracket [{lo}, {hi}] gives modular excess {f_lo}, {f_hi}"
        )
    if f_lo <= 0.0:
        return lo
    if f_hi >= 0.0:
        return hi
    return float(optimize.brentq(excess, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=500))


def _amemiya_excess(phi: OrliczFunction, a: np.ndarray, k: float) -> float:
    # d/dk of (1 + sum phi(k a_i)) / k, times k**2
    s = k * a
    return float(np.sum(s * phi.derivative(s) - phi(s))) - 1.0


def amemiya_multiplier(phi: OrliczFunction, x: Any) -> Optional[float]:
    """k minimizing (1 + sum phi(k|x_i|)) / k, or None when the infimum is only reached at k -> inf"""
    a = np.abs(np.asarray(x, dtype=float))
    if not np.any(a):
        raise ValueError("Amemiya multiplier is undefined at 0")
    nonzero = a[a > 0]
    k_hi = 1.0 / nonzero.max() + 2.0 * phi.starts[-1] / nonzero.min()
    for _ in range(200):
        if _amemiya_excess(phi, a, k_hi) >= 0.0:
            break
        k_hi *= 2.0
    else:
        if math.isfinite(phi.sup_growth()):
            return None
        raise NonConvergentBracket(f"Amemiya multiplier not bracketed up to k={k_hi}")
    return float(
        optimize.brentq(
            lambda k: _amemiya_excess(phi, a, k), 0.0, k_hi,
            xtol=1e-15 * k_hi, rtol=4 * np.finfo(float).eps, maxiter=500,
        )
    )


def orlicz_norm(space: OrliczSpec, x: Any) -> float:
    """Orlicz norm in the Amemiya form inf_k (1 + sum phi(k|x_i|)) / k"""
    a = np.abs(as_vector(space, x))
    if not np.any(a):
        return 0.0
    k = amemiya_multiplier(space.phi, a)
    if k is None:
        return float(space.phi.sup_growth() * a.sum())
    return float((1.0 + modular(space.phi, k * a)) / k)


def orlicz_norm_via_dual_ball(phi: OrliczFunction, x: Any) -> float:
    """sup{sum |x_i| y_i : sum phi*(y_i) <= 1}, maximized directly over the conjugate modular ball.

    Each y_i maximizes (|x_i|/mu) y - phi*(y); the multiplier mu is fixed by
    making the constraint tight. Independent of the Amemiya code path.
    """
    a = np.abs(np.asarray(x, dtype=float))
    if not np.any(a):
        return 0.0
    conj = young_conjugate(phi)

    def choose(mu: float, upper: bool) -> np.ndarray:
        picks = [conj.maximizers(v / mu) for v in a]
        return np.array([hi if upper else lo for lo, hi in picks])

    def load(y: np.ndarray) -> float:
        return float(np.sum(conj(y)))

    end = conj.end
    if math.isfinite(end):
        y_end = np.where(a > 0, end, 0.0)
        if load(y_end) <= 1.0:
            return float(np.dot(a, y_end))

    mu_hi = float(a.max())
    while load(choose(mu_hi, upper=False)) > 1.0:
        mu_hi *= 2.0
    mu_lo = mu_hi
    for _ in range(2000):
        if load(choose(mu_lo, upper=False)) >= 1.0:
            break
        mu_lo /= 2.0
    else:
        raise NonConvergentBracket("dual-ball multiplier not bracketed")

    log_mu = optimize.bisect(
        lambda lm: load(choose(math.exp(lm), upper=False)) - 1.0,
        math.log(mu_lo), math.log(mu_hi), xtol=1e-14, maxiter=500,
    )
    y_small = choose(math.exp(log_mu + 1e-12), upper=False)
    y_large = choose(math.exp(log_mu - 1e-12), upper=True)
    y_large = np.where(np.isfinite(y_large), y_large, y_small)
    gap = lambda theta: load(y_small + theta * (y_large - y_small)) - 1.0
    g0, g1 = gap(0.0), gap(1.0)
    if g0 >= 0.0:
        theta = 0.0
    elif g1 <= 0.0:
        theta = 1.0
    else:
        theta = optimize.brentq(gap, 0.0, 1.0, xtol=1e-15)
    y = y_small + theta * (y_large - y_small)
    return float(np.dot(a, y))


def norm(space: Union[LorentzSpec, OrliczSpec], x: Any) -> float:
    return space.norm(x)
