import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke import (
    BlaschkeProduct,
    CompositionChain,
    DiskAutomorphism,
    InputError,
    ToleranceConfig,
    compose,
    is_regularized,
    normalize,
    unit,
)
from blaschke.core import format_float

from conftest import TAU, circle_grid, random_degree2_chain, random_product, rng_for

disk_points = st.builds(
    lambda r, t: math.sqrt(r) * 0.85 * cmath.exp(1j * t),
    st.floats(0.0, 1.0),
    st.floats(0.0, TAU),
)
angles = st.floats(0.0, TAU)


# ----------------------------------------------------------------- evaluation


@settings(max_examples=60, deadline=None)
@given(st.lists(disk_points, min_size=1, max_size=6), angles)
def test_unimodular_on_circle(zeros, t):
    B = BlaschkeProduct(1.0, tuple(zeros))
    value = B(cmath.exp(1j * t))
    assert abs(abs(value) - 1.0) < 1e-9


def test_zeros_are_zeros():
    rng = rng_for(11)
    for _ in range(20):
        B = random_product(rng, int(rng.integers(1, 7)))
        for a in B.zeros:
            assert abs(B(a)) < 1e-10


def test_degree_one_is_mobius():
    B = BlaschkeProduct(1j, (0.4 + 0.1j,))
    a = 0.4 + 0.1j
    for z in circle_grid(16, 0.3):
        expected = 1j * (z - a) / (1 - a.conjugate() * z)
        assert abs(B(z) - expected) < 1e-14


def test_array_evaluation_matches_scalar():
    rng = rng_for(12)
    B = random_product(rng, 5)
    zs = np.array(circle_grid(32, 0.17))
    vals = B(zs)
    assert isinstance(vals, np.ndarray)
    for z, v in zip(zs, vals):
        assert abs(v - B(complex(z))) < 1e-13


def test_gamma_must_be_unimodular():
    with pytest.raises(InputError):
        BlaschkeProduct(0.5, (0.1 + 0j,))


def test_zero_outside_disk_rejected():
    with pytest.raises(InputError):
        BlaschkeProduct(1.0, (1.2 + 0j,))


def test_evaluation_near_pole_guarded():
    from blaschke import PoleProximity

    B = BlaschkeProduct(1.0, (0.9 + 0j,))
    with pytest.raises(PoleProximity):
        B(1.0 / 0.9 + 0j)


# ----------------------------------------------------------------- derivative


def test_derivative_matches_finite_differences():
    # independent oracle: central differences on the evaluation map
    rng = rng_for(21)
    h = 1e-6
    for _ in range(15):
        B = random_product(rng, int(rng.integers(1, 8)))
        for z in (0.3 + 0.2j, cmath.exp(0.7j), -0.1 - 0.55j):
            fd = (B(z + h) - B(z - h)) / (2 * h)
            assert abs(B.derivative(z) - fd) < 1e-5 * max(1.0, abs(fd))


def test_derivative_of_power():
    B = BlaschkeProduct(1.0, (0j,) * 4)
    for z in circle_grid(8, 0.4):
        assert abs(B.derivative(z) - 4 * z**3) < 1e-13


# ---------------------------------------------------------------- composition


def test_compose_degree_multiplies():
    rng = rng_for(31)
    outer = random_product(rng, 3, radius=0.6)
    inner = random_product(rng, 2, radius=0.6)
    assert compose(outer, inner).degree == 6


def test_compose_pointwise():
    rng = rng_for(32)
    for _ in range(8):
        outer = random_product(rng, int(rng.integers(1, 4)), radius=0.6)
        inner = random_product(rng, int(rng.integers(1, 4)), radius=0.6)
        C = compose(outer, inner)
        for z in circle_grid(24, 0.05) + [0.2 + 0.1j, -0.4j]:
            assert abs(C(z) - outer(inner(z))) < 1e-9


def test_chain_expand_and_call_agree():
    rng = rng_for(33)
    chain = random_degree2_chain(rng, 3)
    B = chain.expand()
    assert B.degree == 8
    for z in circle_grid(32, 0.09):
        assert abs(chain(z) - B(z)) < 1e-9


# -------------------------------------------------------------- automorphisms


def test_automorphism_is_involution_without_rotation():
    phi = DiskAutomorphism(1.0, 0.3 - 0.4j)
    for z in circle_grid(12, 0.2) + [0.1 + 0.5j]:
        assert abs(phi(phi(z)) - z) < 1e-12


def test_automorphism_inverse_and_compose():
    rng = rng_for(41)
    for _ in range(10):
        f = DiskAutomorphism(cmath.exp(1j * rng.uniform(0, TAU)), random_product(rng, 1).zeros[0])
        g = DiskAutomorphism(cmath.exp(1j * rng.uniform(0, TAU)), random_product(rng, 1).zeros[0])
        h = f.compose(g)
        for z in circle_grid(8, 0.6):
            assert abs(h(z) - f(g(z))) < 1e-12
            assert abs(f.inverse()(f(z)) - z) < 1e-12


def test_automorphism_as_blaschke_agrees():
    phi = DiskAutomorphism(cmath.exp(0.3j), 0.25 + 0.6j)
    B = phi.as_blaschke()
    assert B.degree == 1
    for z in circle_grid(16, 0.11):
        assert abs(B(z) - phi(z)) < 1e-13


def test_rotation_map_fixed_point():
    rot = DiskAutomorphism.rotation_map(cmath.exp(1.1j))
    assert abs(rot.fixed_point()) < 1e-12
    phi = DiskAutomorphism(cmath.exp(0.4j), 0.3 + 0.2j)
    w = phi.fixed_point()
    assert abs(w) < 1.0
    assert abs(phi(w) - w) < 1e-10


# --------------------------------------------------------------- normal forms


def test_normalize_postconditions():
    rng = rng_for(51)
    for _ in range(10):
        B = random_product(rng, int(rng.integers(2, 7)))
        nf = normalize(B)
        N = nf.product
        assert abs(N(0j)) < 1e-10
        d0 = N.derivative(0j)
        assert abs(d0.imag) < 1e-9
        assert d0.real > 0
        zs = N.zeros
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                assert abs(zs[i] - zs[j]) > 1e-8


def test_normalize_reconstruction():
    rng = rng_for(52)
    B = random_product(rng, 5)
    nf = normalize(B)
    # product = post o B o pre, so B = post^{-1} o product o pre (pre is
    # an involution)
    post_inv = nf.post.inverse()
    for z in circle_grid(40, 0.23):
        assert abs(nf.product(z) - nf.post(B(nf.pre(z)))) < 1e-9
        assert abs(B(z) - post_inv(nf.product(nf.pre(z)))) < 1e-9


def test_regularized_examples():
    bad = BlaschkeProduct(1.0, (0j, 0.4 + 0j, 0.5 + 0j, 0.9 + 0j))
    check = is_regularized(bad)
    assert not check.ok
    assert check.zero_at_origin and check.simple_zeros
    assert len(check.violating_pairs) >= 1

    good = BlaschkeProduct(1.0, (0j, 0.4 + 0j, 0.7 + 0j))
    assert is_regularized(good).ok

    no_origin = BlaschkeProduct(1.0, (0.3 + 0j, 0.5 + 0j))
    assert not is_regularized(no_origin).zero_at_origin


# ---------------------------------------------------------------------- JSON


def test_product_json_round_trip():
    rng = rng_for(61)
    B = random_product(rng, 4)
    again = BlaschkeProduct.from_json(B.to_json())
    assert again.gamma == B.gamma
    assert again.zeros == B.zeros


def test_chain_json_round_trip():
    rng = rng_for(62)
    chain = random_degree2_chain(rng, 3)
    again = CompositionChain.from_json(chain.to_json())
    assert len(again.factors) == 3
    for f, g in zip(chain.factors, again.factors):
        assert f.gamma == g.gamma and f.zeros == g.zeros


def test_from_json_validates():
    with pytest.raises(InputError):
        BlaschkeProduct.from_json(json.dumps({"gamma": [2, 0], "zeros": [[0, 0]]}))
    with pytest.raises(InputError):
        BlaschkeProduct.from_json(json.dumps({"gamma": [1, 0], "zeros": [[3, 0]]}))


def test_format_float_round_trips():
    values = [0.1, 1.0 / 3.0, 2.0**-40, math.pi, 0.0, -1.5e-13]
    for x in values:
        assert float(format_float(x)) == x


def test_unit_helper():
    assert abs(unit(3 + 4j) - (0.6 + 0.8j)) < 1e-15
    z = unit(cmath.exp(0.2j) * (1 + 3e-12))
    assert abs(abs(z) - 1.0) < 1e-15
