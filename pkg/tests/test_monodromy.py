import itertools

import pytest

from blaschke import BlaschkeProduct, InputError, compose, normalize
from blaschke.errors import DegenerateInput, GeometryFailure, NonBijective
from blaschke.monodromy import (
    LoopSpec,
    Permutation,
    PermutationGroup,
    block_systems,
    build_loops,
    continue_branch,
    cross_validate,
    monodromy_group,
    wreath_audit,
)

from conftest import random_point, rng_for


# -------------------------------------------------------- permutation algebra


def _random_perm(rng, n):
    return Permutation(tuple(int(i) for i in rng.permutation(n)))


def test_product_is_composition():
    rng = rng_for(301)
    for _ in range(10):
        p = _random_perm(rng, 7)
        q = _random_perm(rng, 7)
        pq = p * q
        for x in range(7):
            assert pq(x) == p(q(x))


def test_inverse_and_identity():
    rng = rng_for(302)
    p = _random_perm(rng, 9)
    assert (p * p.inverse()).is_identity
    assert (p.inverse() * p).is_identity
    assert p.inverse().inverse().images == p.images
    assert Permutation.identity(6).is_identity


def test_cycle_structure():
    p = Permutation((1, 2, 0, 4, 3))
    assert p.cycles() == ((0, 1, 2), (3, 4))
    assert p.cycle_type() == (3, 2)
    assert p.order() == 6
    assert Permutation.identity(4).cycle_type() == (1, 1, 1, 1)


def test_non_bijection_rejected():
    with pytest.raises(NonBijective):
        Permutation((0, 0, 1))


def test_group_basics():
    c4 = PermutationGroup([Permutation((1, 2, 3, 0))], 4)
    assert c4.order() == 4
    assert c4.is_abelian()
    assert c4.is_transitive()
    assert c4.element_orders() == (1, 2, 4)

    s3 = PermutationGroup([Permutation((1, 0, 2)), Permutation((1, 2, 0))], 3)
    assert s3.order() == 6
    assert not s3.is_abelian()
    assert s3.is_transitive()
    assert s3.element_orders() == (1, 2, 3)


def test_group_rejects_degree_mismatch():
    with pytest.raises(InputError):
        PermutationGroup([Permutation((1, 0))], 3)


def test_single_transposition_not_transitive():
    g = PermutationGroup([Permutation((1, 0, 2, 3))], 4)
    assert not g.is_transitive()


# ------------------------------------------------- block systems vs brute force


def _equal_partitions(n, size):
    """Every partition of range(n) into blocks of the given size."""

    def rec(remaining):
        if not remaining:
            yield []
            return
        head = remaining[0]
        for rest in itertools.combinations(remaining[1:], size - 1):
            block = frozenset((head, *rest))
            left = [x for x in remaining if x not in block]
            for tail in rec(left):
                yield [block] + tail

    return rec(list(range(n)))


def _brute_systems(generators, n):
    out = set()
    for size in range(2, n):
        if n % size:
            continue
        for part in _equal_partitions(n, size):
            table = set(part)
            if all(
                frozenset(g(x) for x in b) in table
                for g in generators
                for b in part
            ):
                out.add(frozenset(table))
    return out


def _as_sets(systems):
    return {frozenset(frozenset(b) for b in s.blocks) for s in systems}


@pytest.mark.parametrize(
    "gens,n",
    [
        ([(1, 2, 3, 0)], 4),
        ([(1, 2, 3, 0), (0, 3, 2, 1)], 4),
        ([(1, 0, 2, 3), (1, 2, 3, 0)], 4),
        ([(1, 0, 3, 2), (2, 3, 0, 1)], 4),
        ([(1, 2, 3, 4, 5, 0)], 6),
        ([(1, 2, 3, 4, 5, 6, 7, 0)], 8),
    ],
    ids=["c4", "d4", "s4", "klein", "c6", "c8"],
)
def test_block_systems_match_brute_force(gens, n):
    perms = [Permutation(g) for g in gens]
    G = PermutationGroup(perms, n)
    assert G.is_transitive()
    assert _as_sets(block_systems(G)) == _brute_systems(perms, n)


def test_four_cycle_has_the_diagonal_system():
    G = PermutationGroup([Permutation((1, 2, 3, 0))], 4)
    (sys,) = block_systems(G)
    assert sys.blocks == ((0, 2), (1, 3))
    assert sys.block_size == 2 and sys.count == 2


def test_symmetric_group_is_primitive():
    G = PermutationGroup([Permutation((1, 0, 2, 3)), Permutation((1, 2, 3, 0))], 4)
    assert block_systems(G) == ()


# ---------------------------------------------------------------- wreath audit


def test_wreath_audit_height_two():
    # leaf swap and branch swap on a depth-2 binary tree
    G = PermutationGroup([Permutation((1, 0, 2, 3)), Permutation((2, 3, 0, 1))], 4)
    audit = wreath_audit(G, 2)
    assert G.order() == 8
    assert audit.ok
    assert audit.order == audit.expected_order == 8
    assert audit.nested_sizes == (2,)


def test_wreath_audit_height_three():
    gens = [
        Permutation((1, 0, 2, 3, 4, 5, 6, 7)),
        Permutation((2, 3, 0, 1, 4, 5, 6, 7)),
        Permutation((4, 5, 6, 7, 0, 1, 2, 3)),
    ]
    G = PermutationGroup(gens, 8)
    # independent closure count, so the audit is not grading its own homework
    seen = {tuple(range(8))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                prod = tuple(g.images[j] for j in e)
                if prod not in seen:
                    seen.add(prod)
                    nxt.append(prod)
        frontier = nxt
    assert len(seen) == 128

    audit = wreath_audit(G, 3)
    assert audit.ok
    assert audit.order == 128
    assert audit.nested_sizes == (2, 4)


def test_wreath_audit_rejects_plain_cycle():
    G = PermutationGroup([Permutation((1, 2, 3, 4, 5, 6, 7, 0))], 8)
    audit = wreath_audit(G, 3)
    assert not audit.order_ok
    assert not audit.ok
    assert audit.two_group_ok


def test_wreath_audit_height_one_and_bad_levels():
    G = PermutationGroup([Permutation((1, 0))], 2)
    assert wreath_audit(G, 1).ok
    with pytest.raises(InputError):
        wreath_audit(G, 0)


# ---------------------------------------------------------------- loop routing


def test_single_value_loop_geometry():
    (loop,) = build_loops([0.3 + 0j])
    pts = loop.waypoints
    assert pts[0] == 0j and pts[-1] == 0j
    assert all(abs(p) < 1.0 for p in pts)
    assert loop.radius <= 0.45 * 0.3 + 1e-12
    # the circular part sits exactly at the exclusion radius
    assert min(abs(p - 0.3) for p in pts if p != 0) == pytest.approx(loop.radius)


def test_collinear_values_force_a_detour():
    near, far = 0.25 + 0j, 0.55 + 0j
    loops = build_loops([near, far])
    by_target = {loop.target: loop for loop in loops}
    r = loops[0].radius
    for p in by_target[far].waypoints:
        assert abs(p - near) >= 0.9 * r - 1e-12
    for p in by_target[near].waypoints:
        assert abs(p - far) >= 0.9 * r - 1e-12


def test_loop_count_matches_value_count():
    vals = [0.3, -0.2 + 0.4j, 0.1 - 0.5j]
    assert len(build_loops(vals)) == 3


def test_loop_rejects_bad_value_sets():
    with pytest.raises(GeometryFailure):
        build_loops([])
    with pytest.raises(GeometryFailure):
        build_loops([0.3, 0.3 + 1e-12])
    with pytest.raises(GeometryFailure):
        build_loops([1e-12 + 0j])
    with pytest.raises(GeometryFailure):
        build_loops([0.999999999 + 0j])


# ----------------------------------------------------------------- continuation


def _two_value_chain():
    inner = BlaschkeProduct(-1.0, (0j, -0.22 + 0.4j))
    outer = BlaschkeProduct(-1.0, (0j, 0.31 + 0.12j))
    return normalize(compose(outer, inner)).product


def test_null_loop_is_the_identity():
    from blaschke.critical import critical_data

    B = _two_value_chain()
    r = 0.4 * min(abs(v) for v, _ in critical_data(B).distinct_values)
    import cmath

    ring = [r * cmath.exp(2j * cmath.pi * k / 12) for k in range(12)]
    loop = LoopSpec(0j, tuple([0j] + ring + [0j]), r)
    for z0 in B.zeros:
        end = continue_branch(B, loop, z0)
        assert abs(end - z0) < 1e-8


def test_continuation_stable_under_step_halving():
    B = _two_value_chain()
    full = monodromy_group(B, step_scale=1.0)
    half = monodromy_group(B, step_scale=0.5)
    assert [g.images for g in full.generators] == [
        g.images for g in half.generators
    ]


# -------------------------------------------------------------- monodromy group


def test_conjugated_power_is_cyclic():
    B = normalize(BlaschkeProduct(1.0, (0.3 + 0.2j,) * 4)).product
    res = monodromy_group(B)
    assert len(res.generators) == 1
    assert res.generators[0].cycle_type() == (4,)
    assert res.group.order() == 4
    assert res.group.is_abelian()


def test_plain_power_needs_normalization():
    B = BlaschkeProduct(1.0, (0j,) * 4)
    with pytest.raises(DegenerateInput):
        monodromy_group(B)
    res = monodromy_group(normalize(B).product)
    assert res.group.order() == 4


def test_repeated_zero_rejected():
    with pytest.raises(DegenerateInput):
        monodromy_group(BlaschkeProduct(1.0, (0.4, 0.4, 0.2)))


def test_two_value_chain_group():
    B = _two_value_chain()
    res = monodromy_group(B)
    assert len(res.generators) == 2
    assert res.group.order() == 8
    assert not res.group.is_abelian()
    assert {g.cycle_type() for g in res.generators} == {(2, 2), (2, 1, 1)}
    assert 2 in {s.block_size for s in block_systems(res.group)}


def test_generic_product_is_transitive():
    rng = rng_for(317)
    zeros = tuple(random_point(rng, 0.7) for _ in range(5))
    B = normalize(BlaschkeProduct(1.0, zeros)).product
    res = monodromy_group(B)
    assert res.group.is_transitive()
    assert len(res.generators) == 4


def test_fiber_labels_are_the_zeros():
    B = _two_value_chain()
    res = monodromy_group(B)
    assert sorted(res.labels, key=lambda z: (z.real, z.imag)) == sorted(
        B.zeros, key=lambda z: (z.real, z.imag)
    )


# -------------------------------------------------------------- cross validation


def test_cross_validation_on_a_two_three_composite():
    inner = BlaschkeProduct(1.0, (0j, 0.35, -0.2 + 0.3j))
    outer = BlaschkeProduct(-1.0, (0j, 0.4 - 0.1j))
    B = normalize(compose(outer, inner)).product
    report = cross_validate(B)
    assert report.consistent
    rows = {r.k: r for r in report.rows}
    assert rows[3].block_system and rows[3].factor_found
    assert not rows[2].factor_found


def test_prime_degree_has_no_blocks():
    rng = rng_for(320)
    zeros = tuple(random_point(rng, 0.6) for _ in range(5))
    B = normalize(BlaschkeProduct(1.0, zeros)).product
    report = cross_validate(B)
    assert report.rows == ()
    assert report.systems == ()
    assert report.consistent
