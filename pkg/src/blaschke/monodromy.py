"""Numerical monodromy of a finite Blaschke product over the disk.

The fiber over the base point 0 is the zero set; a loop in the disk avoiding
the critical values lifts through each zero to a path ending at a (possibly
different) zero, and the induced permutations of the zero labels generate the
monodromy group.  One loop per distinct critical value suffices.

Loops are lollipops: a straight run from 0 toward the value (with circular
detours around any other critical value sitting in the corridor), one full
counterclockwise circle, and the same run reversed.  Lifting is a
predictor-corrector tracker on B(z(t)) = gamma(t): Euler prediction through
z' = gamma'/B'(z), Newton correction to 1e-12, with the step halved whenever
correction labors and grown when it coasts.

Block systems of the resulting group are the group-respected partitions of
the zero labels; each corresponds to a compositional factorization, which is
what cross_validate checks against the direct factor search.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import reduce

from .core import (
    BlaschkeProduct,
    DEFAULT_TOL,
    ToleranceConfig,
    unit,
)
from .critical import critical_data
from .errors import (
    DegenerateInput,
    GeometryFailure,
    InputError,
    NonBijective,
    TrackingFailure,
)

__all__ = [
    "Permutation",
    "PermutationGroup",
    "BlockSystem",
    "LoopSpec",
    "build_loops",
    "continue_branch",
    "MonodromyResult",
    "monodromy_group",
    "block_systems",
    "WreathAudit",
    "wreath_audit",
    "CrossRow",
    "CrossValidation",
    "cross_validate",
]

TAU = 2.0 * math.pi


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise NonBijective(f"not a bijection: {self.images}")

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """self after other."""
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(n)))

    @property
    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * len(self.images)
        out = []
        for start in range(len(self.images)):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            out.append(tuple(cyc))
        return tuple(out)

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def order(self) -> int:
        return reduce(math.lcm, (len(c) for c in self.cycles()), 1)


class PermutationGroup:
    """Group generated by a list of permutations on range(degree).

    Closure is computed on demand by breadth-first products and cached; when
    it would exceed the cap the order is reported as None rather than wrong.
    """

    def __init__(self, generators, degree: int):
        self.generators = tuple(generators)
        self.degree = int(degree)
        if any(len(g.images) != self.degree for g in self.generators):
            raise InputError("generator degree mismatch")
        self._closure: frozenset | None = None
        self._closure_done = False

    def elements(self, cap: int = 10**6) -> frozenset | None:
        if self._closure_done:
            return self._closure
        identity = tuple(range(self.degree))
        seen = {identity}
        frontier = [identity]
        gen_images = [g.images for g in self.generators]
        while frontier:
            nxt = []
            for elem in frontier:
                for gi in gen_images:
                    prod = tuple(gi[j] for j in elem)
                    if prod not in seen:
                        seen.add(prod)
                        nxt.append(prod)
                        if len(seen) > cap:
                            self._closure, self._closure_done = None, True
                            return None
            frontier = nxt
        self._closure = frozenset(seen)
        self._closure_done = True
        return self._closure

    def order(self) -> int | None:
        closure = self.elements()
        return None if closure is None else len(closure)

    def is_abelian(self) -> bool:
        gens = self.generators
        return all(
            (a * b).images == (b * a).images for a in gens for b in gens
        )

    def is_transitive(self) -> bool:
        reached = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for g in self.generators:
                    for j in (g.images[i], g.inverse().images[i]):
                        if j not in reached:
                            reached.add(j)
                            nxt.append(j)
            frontier = nxt
        return len(reached) == self.degree

    def element_orders(self) -> tuple[int, ...] | None:
        closure = self.elements()
        if closure is None:
            return None
        return tuple(sorted({Permutation(e).order() for e in closure}))


@dataclass(frozen=True)
class BlockSystem:
    """Partition of the zero labels respected by the group."""

    blocks: tuple[tuple[int, ...], ...]

    @property
    def block_size(self) -> int:
        return len(self.blocks[0])

    @property
    def count(self) -> int:
        return len(self.blocks)

    @staticmethod
    def from_classes(classes: dict) -> "BlockSystem":
        buckets: dict = {}
        for x, root in classes.items():
            buckets.setdefault(root, []).append(x)
        blocks = tuple(
            sorted((tuple(sorted(b)) for b in buckets.values()), key=lambda b: b[0])
        )
        return BlockSystem(blocks)


@dataclass(frozen=True)
class LoopSpec:
    """Closed waypoint polyline from 0 around one critical value.

    The full counterclockwise circle around target has the given radius;
    detour arcs around bystander values use the same radius.  Waypoints are
    polyline vertices; the tracker subdivides each segment adaptively.
    """

    target: complex
    waypoints: tuple[complex, ...]
    radius: float


def _detour_arc(w: complex, p1: complex, p2: complex, r: float) -> list[complex]:
    t1 = cmath.phase(p1 - w)
    sweep = math.remainder(cmath.phase(p2 - w) - t1, TAU)
    steps = max(4, int(math.ceil(abs(sweep) / 0.3)))
    return [w + r * cmath.exp(1j * (t1 + sweep * j / steps)) for j in range(1, steps)]


def build_loops(
    values, tol: ToleranceConfig | None = None
) -> tuple[LoopSpec, ...]:
    """One loop per critical value, all sharing a single exclusion radius.

    The radius is 0.45 of the smallest of: pairwise value distances, value
    distances to the unit circle, value distances to the base point 0.  Every
    loop therefore clears every other value by more than the radius.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    vals = [complex(v) for v in values]
    if not vals:
        raise GeometryFailure("no critical values; nothing to loop around")
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= tol.cluster_tol:
                raise GeometryFailure(
                    f"critical values {vals[i]} and {vals[j]} coincide; "
                    "cluster before building loops"
                )
    margins = [1.0 - abs(v) for v in vals] + [abs(v) for v in vals]
    pairwise = [
        abs(vals[i] - vals[j])
        for i in range(len(vals))
        for j in range(i + 1, len(vals))
    ]
    tightest = min(margins + pairwise)
    if tightest <= tol.cluster_tol:
        raise GeometryFailure(
            "a critical value sits at the base point or on the circle; "
            "normalize the product first"
        )
    r = 0.45 * tightest

    loops = []
    for v in vals:
        u = v / abs(v)
        reach = abs(v) - r
        outward: list[complex] = [0j]
        blockers = []
        for w in vals:
            if w is v:
                continue
            along = (u.conjugate() * w).real
            perp = (u.conjugate() * w).imag
            if 0.0 < along < reach and abs(perp) < r:
                blockers.append((along, perp, w))
        blockers.sort(key=lambda t: t[0])
        for along, perp, w in blockers:
            half = math.sqrt(r * r - perp * perp)
            p1 = (along - half) * u
            p2 = (along + half) * u
            outward.append(p1)
            outward.extend(_detour_arc(w, p1, p2, r))
            outward.append(p2)
        e = v - r * u
        outward.append(e)

        phi0 = cmath.phase(e - v)
        circle = [
            v + r * cmath.exp(1j * (phi0 + TAU * j / 24)) for j in range(1, 25)
        ]
        waypoints = outward + circle + list(reversed(outward[:-1]))
        for p in waypoints:
            for w in vals:
                if w is not v and abs(p - w) < 0.9 * r:
                    raise GeometryFailure(
                        f"loop for {v} passes within {abs(p - w):.3e} of {w}"
                    )
        loops.append(LoopSpec(v, tuple(waypoints), r))
    return tuple(loops)


def continue_branch(
    B: BlaschkeProduct,
    loop: LoopSpec,
    start: complex,
    tol: ToleranceConfig | None = None,
    step_scale: float = 1.0,
) -> complex:
    """Lift the loop through the fiber point start; returns the endpoint.

    Tracks B(z(t)) = gamma(t) along each waypoint segment with an Euler
    predictor and a Newton corrector (to 1e-12).  The step fraction halves
    when correction takes more than 5 iterations and grows by 1.5 when it
    takes fewer than 3; underflow below 1e-9 or escape past |z| = 1.5 raises
    TrackingFailure.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    z = complex(start)
    ws = loop.waypoints
    for w0, w1 in zip(ws, ws[1:]):
        span = w1 - w0
        if span == 0:
            continue
        s = 0.0
        ds = 0.2 * step_scale
        while s < 1.0 - 1e-15:
            ds = min(ds, 1.0 - s)
            gamma_now = w0 + s * span
            gamma_next = w0 + (s + ds) * span
            d = B.derivative(z, tol)
            trial = z if abs(d) < 1e-12 else z + (gamma_next - gamma_now) / d
            converged = False
            iterations = 0
            for iterations in range(1, 11):
                f = B.evaluate(trial, tol) - gamma_next
                if abs(f) <= 1e-12:
                    converged = True
                    break
                df = B.derivative(trial, tol)
                if abs(df) < 1e-12:
                    break
                trial = trial - f / df
            if not converged or iterations > 5 or abs(trial) > 1.5:
                if abs(trial) > 1.5:
                    raise TrackingFailure(
                        f"branch escaped the tracking region at |z|={abs(trial):.3f}"
                    )
                ds *= 0.5
                if ds < 1e-9:
                    raise TrackingFailure(
                        f"step underflow near gamma={gamma_now:.6f}"
                    )
                continue
            z = trial
            s += ds
            if iterations < 3:
                ds = min(ds * 1.5, 0.5 * step_scale)
    return z


@dataclass(frozen=True)
class MonodromyResult:
    labels: tuple[complex, ...]
    loops: tuple[LoopSpec, ...]
    generators: tuple[Permutation, ...]
    group: PermutationGroup


def monodromy_group(
    B: BlaschkeProduct,
    tol: ToleranceConfig | None = None,
    step_scale: float = 1.0,
) -> MonodromyResult:
    """Generators and group of the branch permutations over the base point 0.

    Requires a product whose fiber over 0 is the zero set with all zeros
    simple (0 a regular value); normalize first otherwise.  Branch labels are
    the zeros sorted by (argument, modulus); one generator per distinct
    critical value, values in (real, imag) order.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    n = B.degree
    zeros = list(B.zeros)
    min_sep = min(
        (abs(zeros[i] - zeros[j]) for i in range(n) for j in range(i + 1, n)),
        default=math.inf,
    )
    if min_sep <= tol.cluster_tol:
        raise DegenerateInput(
            "zeros must be simple and separated for branch labeling; "
            "normalize the product first"
        )
    labels = tuple(sorted(zeros, key=lambda z: (cmath.phase(z), abs(z))))

    cd = critical_data(B, tol)
    values = [v for v, _ in cd.distinct_values]
    loops = build_loops(values, tol)

    generators = []
    for loop in loops:
        images = []
        for z0 in labels:
            end = continue_branch(B, loop, z0, tol, step_scale)
            if abs(B.evaluate(end, tol)) > 1e-10:
                raise TrackingFailure(
                    f"lifted endpoint is not in the fiber: |B(end)|="
                    f"{abs(B.evaluate(end, tol)):.3e}"
                )
            dists = [abs(end - lb) for lb in labels]
            j = min(range(n), key=dists.__getitem__)
            if dists[j] > min_sep / 10.0:
                raise NonBijective(
                    f"endpoint {end:.6f} matches no branch label within "
                    f"{min_sep / 10.0:.3e}"
                )
            images.append(j)
        if sorted(images) != list(range(n)):
            raise NonBijective(f"loop around {loop.target:.6f} did not permute")
        generators.append(Permutation(tuple(images)))

    return MonodromyResult(
        labels, loops, tuple(generators), PermutationGroup(generators, n)
    )


def _minimal_system(
    gens: tuple[Permutation, ...], n: int, a: int, b: int
) -> BlockSystem:
    """Finest group-congruence identifying a and b (union-find propagation)."""
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> bool:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        parent[ry] = rx
        return True

    stack = [(a, b)]
    union(a, b)
    while stack:
        x, y = stack.pop()
        for g in gens:
            gx, gy = g.images[x], g.images[y]
            if union(gx, gy):
                stack.append((gx, gy))
    return BlockSystem.from_classes({x: find(x) for x in range(n)})


def _join(p: BlockSystem, q: BlockSystem, n: int) -> BlockSystem:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for system in (p, q):
        for block in system.blocks:
            for x in block[1:]:
                parent[find(x)] = find(block[0])
    return BlockSystem.from_classes({x: find(x) for x in range(n)})


def block_systems(G: PermutationGroup) -> tuple[BlockSystem, ...]:
    """Every nontrivial block system of a transitive group.

    Atkinson's propagation gives the minimal system identifying 0 with each
    other point; an arbitrary system is recovered as the join of the minimal
    systems for the pairs inside its 0-block, so closing the minimal set
    under joins enumerates everything.
    """
    if not G.is_transitive():
        raise InputError("block systems are defined for transitive groups only")
    n = G.degree
    found: dict = {}
    for j in range(1, n):
        system = _minimal_system(G.generators, n, 0, j)
        if 1 < system.count < n:
            found.setdefault(system.blocks, system)

    frontier = list(found.values())
    while frontier:
        fresh = []
        for p in frontier:
            for q in list(found.values()):
                joined = _join(p, q, n)
                if 1 < joined.count < n and joined.blocks not in found:
                    found[joined.blocks] = joined
                    fresh.append(joined)
        frontier = fresh

    systems = sorted(found.values(), key=lambda s: (s.block_size, s.blocks))
    for s in systems:
        sizes = {len(b) for b in s.blocks}
        if len(sizes) != 1:
            raise GeometryFailure("uneven blocks from a transitive group")
        block_index = {x: i for i, block in enumerate(s.blocks) for x in block}
        for g in G.generators:
            for block in s.blocks:
                if len({block_index[g.images[x]] for x in block}) != 1:
                    raise GeometryFailure("generator tore a block apart")
    return tuple(systems)


def _refines(p: BlockSystem, q: BlockSystem) -> bool:
    lookup = {}
    for i, block in enumerate(q.blocks):
        for x in block:
            lookup[x] = i
    return all(len({lookup[x] for x in block}) == 1 for block in p.blocks)


@dataclass(frozen=True)
class WreathAudit:
    levels: int
    order: int | None
    expected_order: int
    order_ok: bool
    two_group_ok: bool
    nested_sizes: tuple[int, ...]
    nested_ok: bool

    @property
    def ok(self) -> bool:
        return self.order_ok and self.two_group_ok and self.nested_ok


def wreath_audit(G: PermutationGroup, levels: int) -> WreathAudit:
    """Audit G against the iterated binary wreath shape of height `levels`:
    order 2^(2^levels - 1), every element order a power of two, and a nested
    chain of block systems of sizes 2, 4, ..., 2^(levels-1)."""
    if levels < 1:
        raise InputError("levels must be positive")
    expected = 2 ** (2**levels - 1)
    order = G.order()
    order_ok = order == expected

    orders = G.element_orders()
    two_group_ok = orders is not None and all(
        o & (o - 1) == 0 for o in orders
    )

    wanted = [2**i for i in range(1, levels)]
    systems = block_systems(G) if G.is_transitive() else ()
    by_size: dict = {}
    for s in systems:
        by_size.setdefault(s.block_size, []).append(s)

    def chain_exists(idx: int, prev: BlockSystem | None) -> bool:
        if idx == len(wanted):
            return True
        for s in by_size.get(wanted[idx], []):
            if prev is None or _refines(prev, s):
                if chain_exists(idx + 1, s):
                    return True
        return False

    nested_ok = chain_exists(0, None)
    nested_sizes = tuple(size for size in wanted if size in by_size)
    return WreathAudit(
        levels, order, expected, order_ok, two_group_ok, nested_sizes, nested_ok
    )


@dataclass(frozen=True)
class CrossRow:
    k: int
    block_system: bool
    factor_found: bool

    @property
    def agree(self) -> bool:
        return self.block_system == self.factor_found


@dataclass(frozen=True)
class CrossValidation:
    monodromy: MonodromyResult
    systems: tuple[BlockSystem, ...]
    rows: tuple[CrossRow, ...]

    @property
    def consistent(self) -> bool:
        return all(r.agree for r in self.rows)


def cross_validate(
    B: BlaschkeProduct, tol: ToleranceConfig | None = None
) -> CrossValidation:
    """Compare block-system existence against direct inner-factor search.

    An inner factor of degree k partitions the branches into blocks of size
    k, and conversely; the agreement matrix over proper divisors of the
    degree checks the two pipelines against each other.  Requires a product
    acceptable to monodromy_group (simple zeros, 0 regular).
    """
    from .decompose import inner_factor_general

    tol = tol if tol is not None else DEFAULT_TOL
    mono = monodromy_group(B, tol)
    systems = block_systems(mono.group)
    sizes = {s.block_size for s in systems}
    rows = []
    n = B.degree
    for k in range(2, n):
        if n % k == 0:
            result = inner_factor_general(B, k, tol)
            rows.append(CrossRow(k, k in sizes, result.found))
    return CrossValidation(mono, systems, tuple(rows))
