"""Coefficient families (a_ij, b, c) with analytic derivatives.

Every evaluable takes Cartesian coordinate arrays (x1, x2) of a common
shape S and returns arrays of shape S (scalars), S + (2,) (vectors),
S + (2, 2) (the matrix a) or S + (2, 2, 2) (grad_a[..., i, j, k] = d_k a_ij).
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from src.errors import ConfigurationError
from src.log import get_logger

logger = get_logger(__name__)

Evaluable = Callable[[np.ndarray, np.ndarray], np.ndarray]

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of L u = -d_i(a_ij d_j u) + b . grad u + c u.

    Attributes:
        name: Family name
        a: Diffusion matrix, symmetric
        grad_a: Derivatives d_k a_ij
        b: Drift vector
        div_b: Divergence of b
        c: Reaction coefficient
        lambda_claimed: Claimed ellipticity constant
        params: Family parameters
        isotropic: a is a scalar multiple of the identity everywhere
        violates: Assumption the family is built to violate, if any
    """
    name: str
    a: Evaluable
    grad_a: Evaluable
    b: Evaluable
    div_b: Evaluable
    c: Evaluable
    lambda_claimed: float
    params: Dict[str, float] = field(default_factory=dict)
    isotropic: bool = True
    violates: Optional[str] = None

    def __post_init__(self):
        if not self.lambda_claimed > 0:
            raise ConfigurationError(
                f"claimed ellipticity constant must be positive, got {self.lambda_claimed}",
                field="coefficients.lambda",
            )

    def matrix(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Evaluate a and enforce its symmetry."""
        a = np.asarray(self.a(x, y), dtype=float)
        asym = np.max(np.abs(a[..., 0, 1] - a[..., 1, 0]), initial=0.0)
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
        if asym > SYMMETRY_TOL * scale:
            raise ConfigurationError(
                f"family '{self.name}' produced a non-symmetric matrix (|a12 - a21| = {asym:.3e})",
                field="coefficients.family",
            )
        return a

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "params": dict(sorted(self.params.items())),
            "lambda_claimed": self.lambda_claimed,
            "isotropic": self.isotropic,
        }


# Shape helpers

def _scalar(x: np.ndarray, value: float = 0.0) -> np.ndarray:
    return np.full(np.shape(x), float(value))


def _vector(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    return np.stack(np.broadcast_arrays(vx, vy), axis=-1)


def _constant_matrix(a11: float, a12: float, a22: float) -> Evaluable:
    m = np.array([[a11, a12], [a12, a22]], dtype=float)

    def a(x, y):
        return np.broadcast_to(m, np.shape(x) + (2, 2)).copy()

    return a


def _zero_tensor(x, y):
    return np.zeros(np.shape(x) + (2, 2, 2))


def _zero_vector(x, y):
    return np.zeros(np.shape(x) + (2,))


def _zero_scalar(x, y):
    return _scalar(x)


# Families

def laplace() -> CoefficientSet:
    """a = I, b = 0, c = 0."""
    return CoefficientSet(
        name="laplace",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=_zero_vector,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=1.0,
    )


def remark_optimal(p: float = 2.0) -> CoefficientSet:
    """Identity diffusion with radial drift b = -(2/p) x / |x|^2.

    |x|^(-2/p) is an exact solution, and it lies in the weak space
    L^{p, inf} but in no L^{p, q} with q finite.
    """
    if not (p >= 1.0 and math.isfinite(p)):
        raise ConfigurationError(f"p must be a finite value >= 1, got {p}", field="coefficients.params.p")
    k = 2.0 / p

    def b(x, y):
        r2 = x * x + y * y
        return _vector(-k * x / r2, -k * y / r2)

    return CoefficientSet(
        name="remark_optimal",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=b,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=1.0,
        params={"p": float(p)},
    )


def rotational(kappa: float = 1.0) -> CoefficientSet:
    """Swirling drift b = kappa (-x2, x1) / |x|^2, divergence free."""
    if not math.isfinite(kappa):
        raise ConfigurationError("kappa must be finite", field="coefficients.params.kappa")

    def b(x, y):
        r2 = x * x + y * y
        return _vector(-kappa * y / r2, kappa * x / r2)

    return CoefficientSet(
        name="rotational",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=b,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=1.0,
        params={"kappa": float(kappa)},
    )


def reaction(strength: float = 1.0) -> CoefficientSet:
    """Absorbing reaction c = strength * |x|^-3."""
    if not strength >= 0:
        raise ConfigurationError(
            "strength must be non-negative (use negative_reaction for a violator)",
            field="coefficients.params.strength",
        )

    def c(x, y):
        return strength * (x * x + y * y) ** -1.5

    return CoefficientSet(
        name="reaction",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=_zero_vector,
        div_b=_zero_scalar,
        c=c,
        lambda_claimed=1.0,
        params={"strength": float(strength)},
    )


def anisotropic(a11: float = 2.0, a22: float = 3.0, a12: float = 0.0) -> CoefficientSet:
    """Constant symmetric positive definite a."""
    eig = np.linalg.eigvalsh(np.array([[a11, a12], [a12, a22]], dtype=float))
    if eig[0] <= 0:
        raise ConfigurationError(
            f"matrix [[{a11}, {a12}], [{a12}, {a22}]] is not positive definite",
            field="coefficients.params",
        )
    return CoefficientSet(
        name="anisotropic",
        a=_constant_matrix(a11, a12, a22),
        grad_a=_zero_tensor,
        b=_zero_vector,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=float(eig[0]),
        params={"a11": float(a11), "a22": float(a22), "a12": float(a12)},
        isotropic=(a12 == 0 and a11 == a22),
    )


def radial_anisotropic(alpha: float = 0.5) -> CoefficientSet:
    """a = I + alpha * x x^T / |x|^2 (stiffer along the radius for alpha > 0)."""
    if not alpha > -1.0:
        raise ConfigurationError(
            f"alpha must exceed -1 for ellipticity, got {alpha}",
            field="coefficients.params.alpha",
        )

    def a(x, y):
        r2 = x * x + y * y
        out = np.empty(np.shape(x) + (2, 2))
        out[..., 0, 0] = 1.0 + alpha * x * x / r2
        out[..., 1, 1] = 1.0 + alpha * y * y / r2
        out[..., 0, 1] = out[..., 1, 0] = alpha * x * y / r2
        return out

    def grad_a(x, y):
        # d_k (x_i x_j / r^2) = (delta_ik x_j + delta_jk x_i) / r^2 - 2 x_i x_j x_k / r^4
        r2 = x * x + y * y
        xs = (x, y)
        out = np.empty(np.shape(x) + (2, 2, 2))
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    term = -2.0 * xs[i] * xs[j] * xs[k] / (r2 * r2)
                    if i == k:
                        term = term + xs[j] / r2
                    if j == k:
                        term = term + xs[i] / r2
                    out[..., i, j, k] = alpha * term
        return out

    return CoefficientSet(
        name="radial_anisotropic",
        a=a,
        grad_a=grad_a,
        b=_zero_vector,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=min(1.0, 1.0 + alpha),
        params={"alpha": float(alpha)},
        isotropic=(alpha == 0),
    )


def constant_drift(b1: float = 1.0, b2: float = 0.0) -> CoefficientSet:
    """Constant drift; breaks the |b| = O(1/|x|) decay."""
    def b(x, y):
        return _vector(np.full(np.shape(x), b1), np.full(np.shape(x), b2))

    return CoefficientSet(
        name="constant_drift",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=b,
        div_b=_zero_scalar,
        c=_zero_scalar,
        lambda_claimed=1.0,
        params={"b1": float(b1), "b2": float(b2)},
        violates="C2",
    )


def negative_reaction(value: float = 1.0) -> CoefficientSet:
    """c = -value; breaks c >= 0."""
    return CoefficientSet(
        name="negative_reaction",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=_zero_vector,
        div_b=_zero_scalar,
        c=lambda x, y: _scalar(x, -value),
        lambda_claimed=1.0,
        params={"value": float(value)},
        violates="C3",
    )


def sink_drift() -> CoefficientSet:
    """b = -x with div b = -2; (div b - c)_- is not integrable."""
    return CoefficientSet(
        name="sink_drift",
        a=_constant_matrix(1.0, 0.0, 1.0),
        grad_a=_zero_tensor,
        b=lambda x, y: _vector(-x, -y),
        div_b=lambda x, y: _scalar(x, -2.0),
        c=_zero_scalar,
        lambda_claimed=1.0,
        violates="C4",
    )


FAMILIES: Dict[str, Callable[..., CoefficientSet]] = {
    "laplace": laplace,
    "remark_optimal": remark_optimal,
    "rotational": rotational,
    "reaction": reaction,
    "anisotropic": anisotropic,
    "radial_anisotropic": radial_anisotropic,
    "constant_drift": constant_drift,
    "negative_reaction": negative_reaction,
    "sink_drift": sink_drift,
}

FAMILY_PARAMS: Dict[str, tuple] = {
    "laplace": (),
    "remark_optimal": ("p",),
    "rotational": ("kappa",),
    "reaction": ("strength",),
    "anisotropic": ("a11", "a22", "a12"),
    "radial_anisotropic": ("alpha",),
    "constant_drift": ("b1", "b2"),
    "negative_reaction": ("value",),
    "sink_drift": (),
}


def builtin_family(name: str, params: Optional[Dict[str, float]] = None) -> CoefficientSet:
    """Build a named coefficient family.

    Args:
        name: One of FAMILIES
        params: Family parameters; omitted ones take the builder defaults

    Returns:
        CoefficientSet with analytic grad_a and div_b

    Raises:
        ConfigurationError: Unknown family, unknown parameter or invalid value
    """
    if name not in FAMILIES:
        raise ConfigurationError(
            f"unknown family '{name}' (known: {', '.join(sorted(FAMILIES))})",
            field="coefficients.family",
        )
    params = dict(params or {})
    unknown = sorted(set(params) - set(FAMILY_PARAMS[name]))
    if unknown:
        raise ConfigurationError(
            f"family '{name}' does not take {', '.join(unknown)}",
            field="coefficients.params",
        )
    coeffs = FAMILIES[name](**{k: float(v) for k, v in params.items()})
    logger.debug("built coefficient family %s %s", name, coeffs.params)
    return coeffs
