"""Curve packages inscribed in the level-set polygons of a product.

Fix a product Bhat of degree n.  For each unimodular lambda the n circle
solutions of Bhat(z) = lambda are the vertices of an inscribed polygon, and
the chords connecting vertex j to vertex j + (m+1) sweep out, as lambda runs
around the circle, a closed convex curve: the envelope K_{m+1}.  The family
K_1 .. K_{floor(n/2)} is the curve package of Bhat.

Envelope points come from the analytic tangency condition, not finite
differences.  Differentiating Bhat(z(t)) = e^{it} gives the vertex velocity
z'(t) = i e^{it} / Bhat'(z), and the tangency point of the moving chord
p(t) + s (q(t) - p(t)) is the s where the point velocity stays parallel to
the chord:

    s = - cross(p', q - p) / cross(q' - p', q - p),   cross(u, v) = Im(conj(u) v).

Conic identification is algebraic least squares on the six monomials with a
Sampson (gradient-normalized) residual; classification separates genuine
ellipses from points, degenerate conics, and outright non-conics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    BlaschkeProduct,
    DEFAULT_TOL,
    ToleranceConfig,
    format_float,
    unit,
)
from .circle import CircleSolutionSet, next_preimage, solve_on_circle
from .errors import (
    DegenerateEnvelope,
    GeometryFailure,
    InputError,
)

__all__ = [
    "polygon_vertices",
    "EnvelopeSample",
    "EnvelopeCurve",
    "envelope",
    "ConicFit",
    "fit_conic",
    "tangency_audit",
    "closure_order",
    "PackageEntry",
    "PonceletPackage",
    "package",
    "FociZeroMatch",
    "foci_vs_zeros",
    "curve_csv",
    "scene_svg",
]

TAU = 2.0 * math.pi


def polygon_vertices(
    Bhat: BlaschkeProduct, lam: complex, tol: ToleranceConfig | None = None
) -> CircleSolutionSet:
    """Vertices of the inscribed polygon for one level value, sorted by angle."""
    return solve_on_circle(Bhat, lam, tol)


class EnvelopeSample(NamedTuple):
    angle: float
    point: complex
    chord: tuple[complex, complex]


@dataclass(frozen=True)
class EnvelopeCurve:
    """Sampled envelope of the skip-m chords, in order along the curve."""

    skip: int
    samples: tuple[EnvelopeSample, ...]

    @property
    def points(self) -> tuple[complex, ...]:
        return tuple(s.point for s in self.samples)

    def diameter(self) -> float:
        pts = np.array(self.points)
        return float(
            np.max(np.abs(pts[:, None] - pts[None, :])) if len(pts) > 1 else 0.0
        )


def _tangency(
    Bhat: BlaschkeProduct,
    sol: CircleSolutionSet,
    j: int,
    hop: int,
    t: float,
    tol: ToleranceConfig,
) -> EnvelopeSample:
    p = sol.point(j)
    q = sol.point(j + hop)
    lam = cmath.exp(1j * t)

    def velocity(z: complex) -> complex:
        return 1j * lam / Bhat.derivative(z, tol)

    dp = velocity(p)
    dq = velocity(q)
    chord = q - p

    def cross(u: complex, v: complex) -> float:
        return (u.conjugate() * v).imag

    den = cross(dq - dp, chord)
    scale = (abs(dp) + abs(dq)) * abs(chord)
    if abs(den) <= 1e-12 * scale or scale == 0.0:
        raise DegenerateEnvelope(
            f"stationary chord at angle {t:.6f} (skip {hop - 1})"
        )
    s = -cross(dp, chord) / den
    e = p + s * chord
    if abs(e) > 1.0 + 1e-6:
        raise GeometryFailure(f"envelope point left the disk: |e| = {abs(e):.6f}")
    return EnvelopeSample(t, e, (p, q))


def _level_sets(
    Bhat: BlaschkeProduct, count: int, tol: ToleranceConfig
) -> list[CircleSolutionSet]:
    return [
        solve_on_circle(Bhat, cmath.exp(1j * TAU * q / count), tol)
        for q in range(count)
    ]


def _envelope_from_table(
    Bhat: BlaschkeProduct,
    skip: int,
    table: list[CircleSolutionSet],
    tol: ToleranceConfig,
) -> EnvelopeCurve:
    n = Bhat.degree
    per_chord = len(table)
    hop = skip + 1
    samples = []
    for j in range(n):
        for q in range(per_chord):
            t = TAU * q / per_chord
            samples.append(_tangency(Bhat, table[q], j, hop, t, tol))
    return EnvelopeCurve(skip, tuple(samples))


def envelope(
    Bhat: BlaschkeProduct,
    skip: int,
    samples: int = 720,
    tol: ToleranceConfig | None = None,
) -> EnvelopeCurve:
    """Envelope of the chords connecting vertex j to vertex j + skip + 1.

    samples is the total point budget for the closed curve; the same level
    sets serve all n chord families, so only ceil(samples/n) circle solves
    are performed.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    n = Bhat.degree
    if n < 2:
        raise InputError("envelope needs degree at least 2")
    if not 0 <= skip <= n // 2 - 1:
        raise InputError(f"skip must lie in [0, {n // 2 - 1}] for degree {n}")
    if samples < 6:
        raise InputError("need at least 6 envelope samples")
    per_chord = max(2, -(-samples // n))
    table = _level_sets(Bhat, per_chord, tol)
    return _envelope_from_table(Bhat, skip, table, tol)


@dataclass(frozen=True)
class ConicFit:
    """Least-squares conic through a point sample.

    coefficients (A, B, C, D, E, F) of Ax^2 + Bxy + Cy^2 + Dx + Ey + F,
    unit-normalized.  classification is one of "ellipse", "point",
    "degenerate", "non-conic".  center/semi_axes/axis_angle/foci are set for
    ellipses (and degenerately for points); max_residual is the worst
    gradient-normalized algebraic distance over the sample.
    """

    coefficients: tuple[float, float, float, float, float, float]
    classification: str
    center: complex | None
    semi_axes: tuple[float, float] | None
    axis_angle: float | None
    foci: tuple[complex, complex] | None
    max_residual: float

    def support(self, theta: float) -> float:
        """Support function max Re(e^{-i theta} z) over the fitted curve."""
        if self.classification == "point":
            return (cmath.exp(-1j * theta) * self.center).real
        if self.classification != "ellipse":
            raise InputError(f"no support function for a {self.classification} fit")
        p, q = self.semi_axes
        c = theta - self.axis_angle
        reach = math.sqrt((p * math.cos(c)) ** 2 + (q * math.sin(c)) ** 2)
        return (cmath.exp(-1j * theta) * self.center).real + reach


def _point_fit(pts: np.ndarray) -> ConicFit:
    center = complex(np.mean(pts))
    cx, cy = center.real, center.imag
    coeff = np.array([1.0, 0.0, 1.0, -2 * cx, -2 * cy, cx * cx + cy * cy])
    coeff /= np.linalg.norm(coeff)
    spread = float(np.max(np.abs(pts - center))) if len(pts) else 0.0
    return ConicFit(
        tuple(float(c) for c in coeff),
        "point",
        center,
        (0.0, 0.0),
        0.0,
        (center, center),
        spread,
    )


def fit_conic(points, tol: ToleranceConfig | None = None) -> ConicFit:
    """Fit and classify a conic through a planar point sample (at least 6)."""
    tol = tol if tol is not None else DEFAULT_TOL
    pts = np.asarray([complex(p) for p in points], dtype=complex)
    if len(pts) < 6:
        raise InputError("conic fitting needs at least 6 points")
    if float(np.max(np.abs(pts - pts[0]))) < 1e-6:
        return _point_fit(pts)

    x, y = pts.real, pts.imag
    design = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    _, _, vh = np.linalg.svd(design)
    coeff = vh[-1]
    # pin the arbitrary SVD sign: with A + C > 0 the quadratic part of an
    # ellipse is positive definite, so the eigh ordering below is reliable
    if float(coeff[0] + coeff[2]) < 0:
        coeff = -coeff
    A, B, C, D, E, F = (float(c) for c in coeff)

    qform = design @ coeff
    gx = 2 * A * x + B * y + D
    gy = B * x + 2 * C * y + E
    grad = np.hypot(gx, gy)
    grad = np.where(grad < 1e-12, 1e-12, grad)
    max_residual = float(np.max(np.abs(qform) / grad))

    disc = B * B - 4 * A * C
    det3 = float(
        np.linalg.det(
            np.array(
                [[A, B / 2, D / 2], [B / 2, C, E / 2], [D / 2, E / 2, F]]
            )
        )
    )
    if max_residual >= tol.conic_residual_tol:
        classification = "non-conic"
    elif disc < 0 and det3 * (A + C) < 0:
        classification = "ellipse"
    else:
        classification = "degenerate"

    center = semi_axes = axis_angle = foci = None
    if classification == "ellipse":
        sol = np.linalg.solve(np.array([[2 * A, B], [B, 2 * C]]), [-D, -E])
        cx, cy = float(sol[0]), float(sol[1])
        center = complex(cx, cy)
        G = A * cx * cx + B * cx * cy + C * cy * cy + D * cx + E * cy + F
        M2 = np.array([[A, B / 2], [B / 2, C]])
        eigvals, eigvecs = np.linalg.eigh(M2)
        axes = []
        for lam_i in eigvals:
            ratio = -G / lam_i
            if ratio <= 0:
                classification = "degenerate"
                break
            axes.append(math.sqrt(ratio))
        if classification == "ellipse":
            # eigh sorts eigenvalues ascending, so the first axis is major
            major, minor = axes[0], axes[1]
            direction = eigvecs[:, 0]
            axis_angle = math.atan2(float(direction[1]), float(direction[0]))
            semi_axes = (major, minor)
            spread = math.sqrt(max(major * major - minor * minor, 0.0))
            offset = spread * cmath.exp(1j * axis_angle)
            foci = (center + offset, center - offset)
        else:
            center = None
    return ConicFit(
        (A, B, C, D, E, F),
        classification,
        center,
        semi_axes,
        axis_angle,
        foci,
        max_residual,
    )


def tangency_audit(
    fit: ConicFit,
    Bhat: BlaschkeProduct,
    lambdas,
    skip: int = 0,
    tol: ToleranceConfig | None = None,
) -> float:
    """Worst gap between the fitted curve and the polygon chords.

    A curve genuinely inscribed in the level-set polygons has every chord as
    a supporting line: the support value in the outward normal direction of
    each chord must equal the chord's offset.  Returns the max discrepancy
    over all chords of all supplied level values.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    if fit.classification not in ("ellipse", "point"):
        raise InputError("tangency audit requires an ellipse or point fit")
    worst = 0.0
    hop = skip + 1
    for lam in lambdas:
        sol = solve_on_circle(Bhat, lam, tol)
        n = len(sol)
        centroid = sum(sol.points) / n
        for j in range(n):
            p = sol.point(j)
            q = sol.point(j + hop)
            normal = unit(-1j * (q - p))
            if ((centroid - p) * normal.conjugate()).real > 0:
                normal = -normal
            offset = (normal.conjugate() * p).real
            h = fit.support(cmath.phase(normal))
            worst = max(worst, abs(h - offset))
    return worst


def closure_order(
    Bhat: BlaschkeProduct,
    skip: int,
    tol: ToleranceConfig | None = None,
    start: complex = 1.0 + 0j,
) -> int:
    """Steps of the tangent-chord construction until the polygon closes.

    From a starting circle point, hop to the far endpoint of the skip-m chord
    (skip+1 solutions ahead on the same level set) until landing back within
    1e-8 of the start.  Each hop re-solves the level set, so closure is a
    measured property, not an assumption.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    start = unit(complex(cmath.exp(0.3j) if start is None else start))
    v = start
    for d in range(1, 2 * Bhat.degree + 1):
        v = next_preimage(Bhat, v, tol, steps=skip + 1)
        if abs(v - start) <= 1e-8:
            return d
    raise GeometryFailure(
        f"tangent polygon failed to close within {2 * Bhat.degree} steps"
    )


@dataclass(frozen=True)
class PackageEntry:
    skip: int
    curve: EnvelopeCurve
    fit: ConicFit
    closure: int

    @property
    def index(self) -> int:
        """This entry is K_index, counting from 1."""
        return self.skip + 1


@dataclass(frozen=True)
class PonceletPackage:
    """The full family K_1 .. K_{floor(n/2)} of one product."""

    entries: tuple[PackageEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, index: int) -> PackageEntry:
        """K_index, counting from 1."""
        if not 1 <= index <= len(self.entries):
            raise InputError(
                f"curve index {index} out of range 1..{len(self.entries)}"
            )
        return self.entries[index - 1]


def package(
    Bhat: BlaschkeProduct,
    samples: int = 720,
    tol: ToleranceConfig | None = None,
) -> PonceletPackage:
    """Compute, fit, and order-test every curve of the package.

    The level-set table is solved once and shared by every skip.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    n = Bhat.degree
    if n < 2:
        raise InputError("package needs degree at least 2")
    per_chord = max(2, -(-samples // n))
    table = _level_sets(Bhat, per_chord, tol)
    entries = []
    for skip in range(n // 2):
        curve = _envelope_from_table(Bhat, skip, table, tol)
        fit = fit_conic(curve.points, tol)
        entries.append(
            PackageEntry(skip, curve, fit, closure_order(Bhat, skip, tol))
        )
    return PonceletPackage(tuple(entries))


@dataclass(frozen=True)
class FociZeroMatch:
    """Closest pairing of fitted foci against zeros of the product."""

    foci: tuple[complex, complex]
    matched_zeros: tuple[complex, complex]
    distances: tuple[float, float]

    @property
    def max_distance(self) -> float:
        return max(self.distances)


def foci_vs_zeros(
    fit: ConicFit, B: BlaschkeProduct, tol: ToleranceConfig | None = None
) -> FociZeroMatch:
    """Match the two fitted foci to the closest pair of zeros of B.

    Zeros are taken with multiplicity, so a repeated zero may absorb both
    foci (the circle case: both foci at the center).
    """
    if fit.classification not in ("ellipse", "point"):
        raise InputError("foci matching requires an ellipse or point fit")
    f1, f2 = fit.foci
    zs = B.zeros
    if len(zs) < 2:
        raise InputError("need at least two zeros to match a focus pair")
    best = None
    for i, zi in enumerate(zs):
        for j, zj in enumerate(zs):
            if i == j:
                continue
            d = (abs(f1 - zi), abs(f2 - zj))
            if best is None or max(d) < max(best[0]):
                best = (d, (zi, zj))
    return FociZeroMatch((f1, f2), best[1], best[0])


def curve_csv(curve: EnvelopeCurve) -> str:
    lines = ["t,re,im"]
    for s in curve.samples:
        lines.append(
            ",".join(
                (format_float(s.angle), format_float(s.point.real), format_float(s.point.imag))
            )
        )
    return "\n".join(lines) + "\n"


def _f6(x: float) -> str:
    out = f"{x:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _svg_xy(z: complex) -> str:
    # flip the vertical axis so the scene displays in math orientation
    return f"{_f6(z.real)},{_f6(-z.imag)}"


def _svg_polyline(pts, color: str, width: float, dashed: bool = False, close: bool = True) -> str:
    seq = list(pts)
    if close and seq:
        seq.append(seq[0])
    dash = ' stroke-dasharray="0.03,0.02"' if dashed else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash} '
        f'points="{" ".join(_svg_xy(p) for p in seq)}"/>'
    )


def scene_svg(
    Bhat: BlaschkeProduct,
    curve: EnvelopeCurve,
    fit: ConicFit,
    tol: ToleranceConfig | None = None,
    lambda_angles: tuple[float, ...] = (0.4, 2.5, 4.6),
) -> str:
    """Standalone SVG: unit circle, sample polygons, envelope, fit overlay."""
    tol = tol if tol is not None else DEFAULT_TOL
    n = Bhat.degree
    hop = curve.skip + 1
    cycle = n // math.gcd(n, hop)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.1 -1.1 2.2 2.2">',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="#303030" stroke-width="0.008"/>',
    ]
    for t in lambda_angles:
        sol = solve_on_circle(Bhat, cmath.exp(1j * t), tol)
        for offset in range(math.gcd(n, hop)):
            ring = [sol.point(offset + k * hop) for k in range(cycle)]
            parts.append(_svg_polyline(ring, "#4878b0", 0.006))
    parts.append(_svg_polyline(curve.points, "#c03030", 0.01))
    if fit.classification == "ellipse":
        p, q = fit.semi_axes
        rim = [
            fit.center
            + cmath.exp(1j * fit.axis_angle)
            * complex(p * math.cos(TAU * k / 256), q * math.sin(TAU * k / 256))
            for k in range(256)
        ]
        parts.append(_svg_polyline(rim, "#208040", 0.006, dashed=True))
    elif fit.classification == "point":
        parts.append(
            f'<circle cx="{_f6(fit.center.real)}" cy="{_f6(-fit.center.imag)}" '
            f'r="0.012" fill="#208040"/>'
        )
    label = f"K{curve.skip + 1}: {fit.classification} (residual {fit.max_residual:.2e})"
    parts.append(
        f'<text x="-1.05" y="1.05" font-size="0.07" fill="#303030">{label}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
