"""Finite Blaschke products and disk automorphisms.

A finite Blaschke product of degree n is

    B(z) = gamma * prod_j (z - a_j) / (1 - conj(a_j) z),

with |gamma| = 1 and all zeros a_j in the open unit disk.  B maps the disk
n-to-1 onto itself and the unit circle n-to-1 onto itself.  Everything in this
package is built on top of the two value types here (BlaschkeProduct,
DiskAutomorphism), the chain container, and the shared tolerance block.

The automorphism convention used everywhere is the self-inverse involution

    phi_a(z) = (a - z) / (1 - conj(a) z),

so phi_a(phi_a(z)) = z and phi_a swaps 0 and a.  A general automorphism is
rotation * phi_center.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DegenerateInput, InputError, NoInteriorFixedPoint, PoleProximity

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "BlaschkeProduct",
    "DiskAutomorphism",
    "CompositionChain",
    "NormalizedForm",
    "RegularizedCheck",
    "compose",
    "normalize",
    "is_regularized",
    "unit",
    "circle_samples",
    "disk_samples",
    "format_float",
]

_ON_CIRCLE_TOL = 1e-12


@dataclass(frozen=True)
class ToleranceConfig:
    """Shared numerical tolerances.

    root_tol: residual target for root finding and circle solving.
    cluster_tol: distance below which two computed values are the same value.
    identity_tol: sup-norm slack when checking that two maps agree.
    conic_residual_tol: algebraic residual gate for conic fits.
    circle_samples: base grid size for work on the unit circle.
    """

    root_tol: float = 1e-12
    cluster_tol: float = 1e-8
    identity_tol: float = 1e-9
    conic_residual_tol: float = 1e-6
    circle_samples: int = 512

    def __post_init__(self):
        for name in ("root_tol", "cluster_tol", "identity_tol", "conic_residual_tol"):
            if not (0.0 < getattr(self, name) < 1.0):
                raise InputError(f"{name} must lie in (0, 1)")
        if self.cluster_tol <= self.root_tol:
            raise InputError("cluster_tol must exceed root_tol")
        if self.circle_samples < 16:
            raise InputError("circle_samples must be at least 16")


DEFAULT_TOL = ToleranceConfig()


def _tol(tol: ToleranceConfig | None) -> ToleranceConfig:
    return DEFAULT_TOL if tol is None else tol


def unit(c: complex) -> complex:
    """Project a nonzero complex number onto the unit circle."""
    m = abs(c)
    if m == 0.0:
        raise DegenerateInput("cannot normalize 0 to the unit circle")
    return c / m


def format_float(x: float) -> str:
    """IEEE double rendered with 17 significant digits (round-trip safe)."""
    return f"{x:.17g}"


def circle_samples(count: int, offset: float = 0.0) -> list[complex]:
    """Evenly spaced points on the unit circle, deterministic."""
    return [cmath.exp(1j * (offset + 2.0 * math.pi * k / count)) for k in range(count)]


def disk_samples(count: int, seed: int = 7) -> list[complex]:
    """Deterministic quasi-random points in the open disk."""
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0.0, 0.9025, count))
    t = rng.uniform(0.0, 2.0 * np.pi, count)
    return [complex(ri * math.cos(ti), ri * math.sin(ti)) for ri, ti in zip(r, t)]


@dataclass(frozen=True)
class BlaschkeProduct:
    """A finite Blaschke product, stored as unimodular constant plus zero list.

    zeros is a tuple with multiplicity; the degree is its length.
    """

    gamma: complex
    zeros: tuple[complex, ...]

    def __post_init__(self):
        gamma = complex(self.gamma)
        zeros = tuple(complex(a) for a in self.zeros)
        if abs(abs(gamma) - 1.0) > 1e-12:
            raise InputError(f"|gamma| = {abs(gamma)!r}, must be 1")
        if len(zeros) < 1:
            raise InputError("a Blaschke product needs at least one zero")
        for a in zeros:
            if abs(a) >= 1.0:
                raise InputError(f"zero {a} is not inside the open unit disk")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "zeros", zeros)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z, tol: ToleranceConfig | None = None):
        return self.evaluate(z, tol)

    def evaluate(self, z, tol: ToleranceConfig | None = None):
        """Evaluate B(z), factor by factor.

        On the unit circle every factor has modulus exactly 1, so when |z| is
        within 1e-12 of 1 each factor is renormalized to unit modulus as it is
        multiplied in; the result then satisfies ||B(z)| - 1| <= a few ulps
        regardless of degree.  Raises PoleProximity when a denominator falls
        below root_tol (only possible for |z| > 1).
        """
        tol = _tol(tol)
        if isinstance(z, np.ndarray):
            return self._evaluate_array(z, tol)
        z = complex(z)
        on_circle = abs(abs(z) - 1.0) <= _ON_CIRCLE_TOL
        w = self.gamma
        for a in self.zeros:
            den = 1.0 - a.conjugate() * z
            if abs(den) <= tol.root_tol:
                raise PoleProximity(z, den)
            f = (z - a) / den
            if on_circle:
                f /= abs(f)
            w *= f
        return w

    def _evaluate_array(self, z: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        on_circle = np.abs(np.abs(z) - 1.0) <= _ON_CIRCLE_TOL
        w = np.full(z.shape, self.gamma, dtype=complex)
        for a in self.zeros:
            den = 1.0 - np.conj(a) * z
            if np.any(np.abs(den) <= tol.root_tol):
                bad = z.flat[int(np.argmin(np.abs(den)))]
                raise PoleProximity(bad, np.min(np.abs(den)))
            f = (z - a) / den
            if np.any(on_circle):
                f = np.where(on_circle, f / np.abs(f), f)
            w *= f
        return w

    def derivative(self, z, tol: ToleranceConfig | None = None):
        """Evaluate B'(z) by running product-rule accumulation over factors.

        Each factor f_j = (z - a_j)/(1 - conj(a_j) z) has
        f_j' = (1 - |a_j|^2)/(1 - conj(a_j) z)^2; the running pair
        (prod, dprod) is updated without ever dividing by f_j, so zeros of B
        need no special casing.
        """
        tol = _tol(tol)
        if isinstance(z, np.ndarray):
            return self._derivative_array(z, tol)
        z = complex(z)
        p = self.gamma
        dp = 0.0 + 0.0j
        for a in self.zeros:
            den = 1.0 - a.conjugate() * z
            if abs(den) <= tol.root_tol:
                raise PoleProximity(z, den)
            f = (z - a) / den
            df = (1.0 - abs(a) ** 2) / (den * den)
            dp = dp * f + p * df
            p = p * f
        return dp

    def _derivative_array(self, z: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        p = np.full(z.shape, self.gamma, dtype=complex)
        dp = np.zeros(z.shape, dtype=complex)
        for a in self.zeros:
            den = 1.0 - np.conj(a) * z
            if np.any(np.abs(den) <= tol.root_tol):
                bad = z.flat[int(np.argmin(np.abs(den)))]
                raise PoleProximity(bad, np.min(np.abs(den)))
            f = (z - a) / den
            df = (1.0 - abs(a) ** 2) / (den * den)
            dp = dp * f + p * df
            p = p * f
        return dp

    def hat(self) -> "BlaschkeProduct":
        """z * B(z): prepend a zero at the origin."""
        return BlaschkeProduct(self.gamma, (0j,) + self.zeros)

    def to_json(self) -> str:
        """Serialize as {"gamma":[re,im],"zeros":[[re,im],...]}, 17 digits."""
        g = f"[{format_float(self.gamma.real)},{format_float(self.gamma.imag)}]"
        zs = ",".join(
            f"[{format_float(a.real)},{format_float(a.imag)}]" for a in self.zeros
        )
        return f'{{"gamma":{g},"zeros":[{zs}]}}'

    @staticmethod
    def from_json(text: str) -> "BlaschkeProduct":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
        return BlaschkeProduct._from_json_dict(data)

    @staticmethod
    def _from_json_dict(data) -> "BlaschkeProduct":
        if not isinstance(data, dict) or "gamma" not in data or "zeros" not in data:
            raise InputError('product JSON needs "gamma" and "zeros"')
        try:
            gamma = complex(data["gamma"][0], data["gamma"][1])
            zeros = tuple(complex(p[0], p[1]) for p in data["zeros"])
        except (TypeError, IndexError, ValueError) as exc:
            raise InputError(f"malformed product JSON: {exc}") from exc
        return BlaschkeProduct(gamma, zeros)


@dataclass(frozen=True)
class DiskAutomorphism:
    """Degree-1 self-map of the disk: z -> rotation * (center - z)/(1 - conj(center) z).

    With rotation = 1 this is the involution phi_center.  The identity map is
    DiskAutomorphism(-1, 0).
    """

    rotation: complex = 1.0 + 0.0j
    center: complex = 0.0 + 0.0j

    def __post_init__(self):
        rotation = complex(self.rotation)
        center = complex(self.center)
        if abs(abs(rotation) - 1.0) > 1e-12:
            raise InputError(f"|rotation| = {abs(rotation)!r}, must be 1")
        if abs(center) >= 1.0:
            raise InputError(f"center {center} is not inside the open unit disk")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "center", center)

    @staticmethod
    def identity() -> "DiskAutomorphism":
        return DiskAutomorphism(-1.0, 0.0)

    @staticmethod
    def rotation_map(mu: complex) -> "DiskAutomorphism":
        """The map z -> mu * z for |mu| = 1."""
        return DiskAutomorphism(-unit(mu), 0.0)

    def __call__(self, z):
        c = self.center
        if isinstance(z, np.ndarray):
            return self.rotation * (c - z) / (1.0 - np.conj(c) * z)
        z = complex(z)
        return self.rotation * (c - z) / (1.0 - c.conjugate() * z)

    def inverse(self) -> "DiskAutomorphism":
        return DiskAutomorphism(
            self.rotation.conjugate(), self.rotation * self.center
        )

    def _matrix(self) -> np.ndarray:
        lam, c = self.rotation, self.center
        return np.array([[-lam, lam * c], [-c.conjugate(), 1.0]], dtype=complex)

    def compose(self, inner: "DiskAutomorphism") -> "DiskAutomorphism":
        """self after inner, again in canonical (rotation, center) form."""
        m = self._matrix() @ inner._matrix()
        alpha, beta = m[0, 0], m[0, 1]
        delta = m[1, 1]
        rotation = unit(-alpha / delta)
        center = -beta / alpha
        return DiskAutomorphism(rotation, center)

    def fixed_point(self, tol: ToleranceConfig | None = None) -> complex:
        """The fixed point inside the open disk, when one exists.

        Rotations about the origin (center == 0) fix 0.  Otherwise the fixed
        points solve conj(c) z^2 - (1 + rotation) z + rotation c = 0, whose
        root moduli multiply to 1; if neither root is interior the map has no
        interior fixed point and NoInteriorFixedPoint is raised.
        """
        tol = _tol(tol)
        lam, c = self.rotation, self.center
        if abs(c) <= tol.root_tol:
            return 0j
        disc = cmath.sqrt((1.0 + lam) ** 2 - 4.0 * c.conjugate() * lam * c)
        denom = 2.0 * c.conjugate()
        roots = [((1.0 + lam) + disc) / denom, ((1.0 + lam) - disc) / denom]
        roots.sort(key=abs)
        if abs(roots[0]) < 1.0 - 1e-12:
            return roots[0]
        raise NoInteriorFixedPoint(
            f"fixed points of {self} lie on the unit circle"
        )

    def as_blaschke(self) -> BlaschkeProduct:
        """The same map as a degree-1 BlaschkeProduct."""
        return BlaschkeProduct(-self.rotation, (self.center,))


@dataclass(frozen=True)
class CompositionChain:
    """A composition B = factors[0] o factors[1] o ... o factors[-1].

    Outermost first, innermost last.
    """

    factors: tuple[BlaschkeProduct, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InputError("a chain needs at least one factor")
        for f in factors:
            if not isinstance(f, BlaschkeProduct):
                raise InputError("chain factors must be BlaschkeProduct instances")
        object.__setattr__(self, "factors", factors)

    @property
    def degree(self) -> int:
        d = 1
        for f in self.factors:
            d *= f.degree
        return d

    def __call__(self, z, tol: ToleranceConfig | None = None):
        for f in reversed(self.factors):
            z = f.evaluate(z, tol)
        return z

    def expand(self, tol: ToleranceConfig | None = None) -> BlaschkeProduct:
        """Multiply the chain out to a single product."""
        out = self.factors[0]
        for f in self.factors[1:]:
            out = compose(out, f, tol)
        return out

    def to_json(self) -> str:
        inner = ",".join(f.to_json() for f in self.factors)
        return f'{{"factors":[{inner}]}}'

    @staticmethod
    def from_json(text: str) -> "CompositionChain":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict) or "factors" not in data:
            raise InputError('chain JSON needs "factors"')
        return CompositionChain(
            tuple(BlaschkeProduct._from_json_dict(d) for d in data["factors"])
        )


def _matching_point_candidates() -> list[complex]:
    # fixed circle points used to pin down unimodular constants; a handful of
    # angles with no shared symmetry so at least one is well away from any
    # structure of the product at hand
    return [cmath.exp(1j * t) for t in (0.83, 2.11, 3.91, 5.03, 0.17, 4.57)]


def compose(
    outer: BlaschkeProduct,
    inner: BlaschkeProduct,
    tol: ToleranceConfig | None = None,
) -> BlaschkeProduct:
    """Expand outer(inner(z)) into a single Blaschke product.

    The zeros of the composition are the inner-preimages of the outer zeros:
    for each zero w of outer, solve inner(z) = w as the degree-m polynomial
    gamma_inner * P(z) - w * Q(z) = 0, all of whose roots lie in the open
    disk.  The constant is fixed by matching one circle evaluation.
    """
    from .critical import polynomial_roots, product_numerator_denominator

    tol = _tol(tol)
    p_coeffs, q_coeffs = product_numerator_denominator(inner)
    width = max(len(p_coeffs), len(q_coeffs))
    p_pad = np.zeros(width, dtype=complex)
    p_pad[: len(p_coeffs)] = p_coeffs
    q_pad = np.zeros(width, dtype=complex)
    q_pad[: len(q_coeffs)] = q_coeffs

    zeros: list[complex] = []
    fiber_cache: dict[complex, list[complex]] = {}
    for w in outer.zeros:
        if w not in fiber_cache:
            poly = inner.gamma * p_pad - w * q_pad
            fiber: list[complex] = []
            for root, mult in polynomial_roots(poly, tol):
                fiber.extend([root] * mult)
            fiber_cache[w] = fiber
        zeros.extend(fiber_cache[w])

    base = BlaschkeProduct(1.0, tuple(zeros))
    for z0 in _matching_point_candidates():
        try:
            gamma = outer.evaluate(inner.evaluate(z0, tol), tol) / base.evaluate(z0, tol)
        except PoleProximity:
            continue
        return BlaschkeProduct(unit(gamma), tuple(zeros))
    raise DegenerateInput("no usable matching point on the circle")


class NormalizedForm(NamedTuple):
    """normalize() result: product = post o B o pre with product(0) = 0,
    product'(0) > 0, and simple zeros.  pre is an involution (rotation 1), so
    B = post.inverse() o product o pre."""

    product: BlaschkeProduct
    pre: DiskAutomorphism
    post: DiskAutomorphism


def normalize(B: BlaschkeProduct, tol: ToleranceConfig | None = None) -> NormalizedForm:
    """Conjugate B by disk automorphisms into the normalized form.

    Picks a base point beta whose image alpha = B(beta) is a regular value
    (beta = 0 when possible, otherwise scanning small circles around the
    origin), then returns lambda * phi_alpha o B o phi_beta with the rotation
    chosen so the derivative at 0 is real positive.
    """
    from .critical import critical_data, polynomial_roots, product_numerator_denominator

    tol = _tol(tol)
    cd = critical_data(B, tol)
    values = [v for v, _ in cd.distinct_values]

    def margin(alpha: complex) -> float:
        return min((abs(alpha - v) for v in values), default=math.inf)

    beta = 0j
    if margin(B.evaluate(0j, tol)) <= tol.cluster_tol:
        best: tuple[float, complex] | None = None
        for k in range(1, 6):
            for j in range(16):
                cand = 0.1 * k * cmath.exp(2j * math.pi * (j + 0.3) / 16)
                m = margin(B.evaluate(cand, tol))
                if best is None or m > best[0]:
                    best = (m, cand)
            if best is not None and best[0] > 100 * tol.cluster_tol:
                break
        if best is None or best[0] <= tol.cluster_tol:
            raise DegenerateInput("no regular base point found near the origin")
        beta = best[1]
    alpha = B.evaluate(beta, tol)

    p_coeffs, q_coeffs = product_numerator_denominator(B)
    width = max(len(p_coeffs), len(q_coeffs))
    p_pad = np.zeros(width, dtype=complex)
    p_pad[: len(p_coeffs)] = p_coeffs
    q_pad = np.zeros(width, dtype=complex)
    q_pad[: len(q_coeffs)] = q_coeffs
    fiber: list[complex] = []
    for root, mult in polynomial_roots(B.gamma * p_pad - alpha * q_pad, tol):
        fiber.extend([root] * mult)
    if len(fiber) != B.degree:
        raise DegenerateInput("fiber of the base value has the wrong size")

    pre = DiskAutomorphism(1.0, beta)
    zeros_n = [pre(w) for w in fiber]
    # beta itself is in the fiber; snap its image to exactly 0
    i0 = min(range(len(zeros_n)), key=lambda i: abs(zeros_n[i]))
    if abs(zeros_n[i0]) > 1e-7:
        raise DegenerateInput("fiber does not contain the base point")
    zeros_n[i0] = 0j
    zeros_n.sort(key=lambda z: (z.real, z.imag))

    base = BlaschkeProduct(1.0, tuple(zeros_n))
    phi_alpha = DiskAutomorphism(1.0, alpha)
    gamma2 = None
    for z0 in _matching_point_candidates():
        try:
            gamma2 = phi_alpha(B.evaluate(pre(z0), tol)) / base.evaluate(z0, tol)
            break
        except PoleProximity:
            continue
    if gamma2 is None:
        raise DegenerateInput("no usable matching point on the circle")
    n2 = BlaschkeProduct(unit(gamma2), tuple(zeros_n))
    d0 = n2.derivative(0j, tol)
    if abs(d0) == 0.0:
        raise DegenerateInput("normalized derivative vanished at 0")
    lam = d0.conjugate() / abs(d0)
    product = BlaschkeProduct(unit(lam * n2.gamma), tuple(zeros_n))
    post = DiskAutomorphism(lam, alpha)
    return NormalizedForm(product, pre, post)


@dataclass(frozen=True)
class RegularizedCheck:
    """Result of is_regularized: overall flag plus the individual findings."""

    ok: bool
    zero_at_origin: bool
    simple_zeros: bool
    violating_pairs: tuple[tuple[complex, complex], ...]

    def __bool__(self) -> bool:
        return self.ok


def is_regularized(
    B: BlaschkeProduct, tol: ToleranceConfig | None = None
) -> RegularizedCheck:
    """Check B(0) = 0, simple zeros, and the critical-value ratio condition.

    The ratio condition: no two distinct critical values may have a ratio that
    is a positive real number (such a pair would make distinct level sets
    collide after a radial rescaling).
    """
    from .critical import critical_data

    tol = _tol(tol)
    zero_at_origin = abs(B.evaluate(0j, tol)) <= tol.identity_tol
    zs = B.zeros
    simple = all(
        abs(zs[i] - zs[j]) > tol.cluster_tol
        for i in range(len(zs))
        for j in range(i + 1, len(zs))
    )
    violating: list[tuple[complex, complex]] = []
    values = [v for v, _ in critical_data(B, tol).distinct_values]
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            v1, v2 = values[i], values[j]
            if abs(v1) <= tol.root_tol or abs(v2) <= tol.root_tol:
                continue
            r = v1 / v2
            if r.real > 0.0 and abs(r.imag) <= 1e-9 * (1.0 + abs(r)):
                violating.append((v1, v2))
    ok = zero_at_origin and simple and not violating
    return RegularizedCheck(ok, zero_at_origin, simple, tuple(violating))
