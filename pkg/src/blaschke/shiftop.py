"""Matrix model of the compressed shift and its numerical range.

For zeros a_1..a_n the model-space matrix is upper triangular with the zeros
on the diagonal and

    A_ij = (prod of -conj(a_l) for i < l < j) * sqrt(1-|a_i|^2) * sqrt(1-|a_j|^2)

above it.  It is a contraction with rank(I - A*A) = 1, and its numerical
range W(A) = {<Av, v> : |v| = 1} is the convex region whose boundary this
module samples by a support-function sweep: for each direction, the top
eigenpair of the Hermitian part of e^{-i theta} A gives both the support
value and a boundary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, ToleranceConfig, format_float
from .errors import EigensolverFailure, InputError

__all__ = [
    "ShiftMatrix",
    "shift_matrix",
    "NumericalRangeSample",
    "numerical_range_boundary",
    "KippenhahnForm",
    "kippenhahn_form",
    "kippenhahn_eval",
    "RangeVerdict",
    "is_elliptical_range",
    "boundary_csv",
]


@dataclass(frozen=True, eq=False)
class ShiftMatrix:
    """Upper-triangular model matrix; entries is an n x n complex array."""

    entries: np.ndarray
    zeros: tuple[complex, ...]

    @property
    def size(self) -> int:
        return len(self.zeros)


def shift_matrix(zeros) -> ShiftMatrix:
    zs = tuple(complex(a) for a in zeros)
    if not zs:
        raise InputError("at least one zero is required")
    if any(abs(a) >= 1.0 for a in zs):
        raise InputError("matrix model requires zeros in the open disk")
    n = len(zs)
    defect = [math.sqrt(max(0.0, 1.0 - abs(a) ** 2)) for a in zs]
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        A[i, i] = zs[i]
        run = 1.0 + 0j
        for j in range(i + 1, n):
            A[i, j] = run * defect[i] * defect[j]
            run *= -zs[j].conjugate()
    return ShiftMatrix(A, zs)


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, ShiftMatrix):
        return A.entries
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("expected a square matrix")
    return M


@dataclass(frozen=True)
class NumericalRangeSample:
    """Support-function sweep of W(A).

    For each angle theta_k: support[k] is the maximum of Re(e^{-i theta} w)
    over w in W(A), and points[k] = <A v, v> for a maximizing unit vector v,
    a boundary point attaining that support value.
    """

    angles: tuple[float, ...]
    support: tuple[float, ...]
    points: tuple[complex, ...]


def numerical_range_boundary(A, samples: int = 720) -> NumericalRangeSample:
    """Boundary sample of the numerical range by Hermitian eigen-sweep."""
    if samples < 8:
        raise InputError("need at least 8 sweep directions")
    M = _as_matrix(A)
    angles = []
    support = []
    points = []
    for k in range(samples):
        theta = 2.0 * math.pi * k / samples
        R = np.exp(-1j * theta) * M
        H = 0.5 * (R + R.conj().T)
        try:
            w, V = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise EigensolverFailure(f"Hermitian eigensolve failed at theta={theta}") from exc
        v = V[:, -1]
        angles.append(theta)
        support.append(float(w[-1]))
        points.append(complex(np.vdot(v, M @ v)))
    return NumericalRangeSample(tuple(angles), tuple(support), tuple(points))


@dataclass(frozen=True, eq=False)
class KippenhahnForm:
    """Hermitian parts of A and the ternary form det(u ReA + v ImA + w I).

    The real points of the dual of {f = 0} sweep out the boundary generators
    of W(A); here the form is only evaluated, never expanded symbolically.
    """

    re_part: np.ndarray
    im_part: np.ndarray

    def __call__(self, u: complex, v: complex, w: complex) -> complex:
        n = self.re_part.shape[0]
        return complex(
            np.linalg.det(u * self.re_part + v * self.im_part + w * np.eye(n))
        )


def kippenhahn_form(A) -> KippenhahnForm:
    M = _as_matrix(A)
    re = 0.5 * (M + M.conj().T)
    im = (M - M.conj().T) / 2j
    return KippenhahnForm(re, im)


def kippenhahn_eval(A, u: complex, v: complex, w: complex) -> complex:
    return kippenhahn_form(A)(u, v, w)


@dataclass(frozen=True, eq=False)
class RangeVerdict:
    """Outcome of the ellipticity test for W(A)."""

    is_ellipse: bool
    fit: object
    support_mismatch: float
    sample: NumericalRangeSample

    def __bool__(self) -> bool:
        return self.is_ellipse


def is_elliptical_range(
    A, samples: int = 720, tol: ToleranceConfig | None = None
) -> RangeVerdict:
    """Decide whether the sampled boundary of W(A) is an ellipse.

    Two gates: the algebraic conic fit must classify as an ellipse within
    conic_residual_tol, and the fitted ellipse's support function must match
    the swept support values within 1e-6.  The second gate catches convex
    non-ellipses whose best conic happens to fit the sample pointwise.
    """
    from .poncelet import fit_conic

    tol = tol if tol is not None else DEFAULT_TOL
    sample = numerical_range_boundary(A, samples)
    fit = fit_conic(sample.points, tol)
    if fit.classification != "ellipse":
        return RangeVerdict(False, fit, math.inf, sample)
    mismatch = max(
        abs(fit.support(theta) - h) for theta, h in zip(sample.angles, sample.support)
    )
    return RangeVerdict(mismatch < 1e-6, fit, mismatch, sample)


def boundary_csv(sample: NumericalRangeSample) -> str:
    lines = ["theta,h,re,im"]
    for theta, h, x in zip(sample.angles, sample.support, sample.points):
        lines.append(
            ",".join(
                (
                    format_float(theta),
                    format_float(h),
                    format_float(x.real),
                    format_float(x.imag),
                )
            )
        )
    return "\n".join(lines) + "\n"
