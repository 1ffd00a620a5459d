import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noetherlab.expr import canonicalize, is_zero
from noetherlab.grammar import to_text
from noetherlab.jet import (
    ISENTROPIC,
    LAGRANGIAN,
    FrameError,
    Generator,
    Prolongation,
    divergence,
    eulerian_frame,
    lagrangian_frame,
    noether_identity_residual,
    noether_vector,
    second_identity_residual,
    total_derivative,
    variational_derivative,
)
from noetherlab.suite import random_pair

FR = ISENTROPIC
JETS = ["phi1", "phi2", "phi1_t", "phi2_t", "phi1_xi", "phi1_eta", "phi2_xi", "phi2_eta", "t", "xi", "eta"]


@st.composite
def densities(draw, pool=JETS, frame=FR):
    terms = []
    for _ in range(draw(st.integers(1, 3))):
        k = draw(st.integers(-3, 3).filter(bool))
        fs = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3))
        terms.append(f"{k}*" + "*".join(fs))
    return frame.parse(" + ".join(terms))


def test_total_derivative_chain_rule():
    d = total_derivative(FR.parse("phi1^2*xi"), "xi", FR)
    assert is_zero(d - FR.parse("2*phi1*phi1_xi*xi + phi1^2"))


def test_total_derivative_of_j():
    d = total_derivative(FR.parse("J"), "t", FR)
    want = FR.parse("phi1_txi*phi2_eta + phi1_xi*phi2_teta - phi1_teta*phi2_xi - phi1_eta*phi2_txi")
    assert is_zero(d - want)


def test_entropy_is_time_independent():
    assert not total_derivative(LAGRANGIAN.parse("S"), "t").terms
    assert not total_derivative(FR.parse("S"), "xi", FR).terms


def test_restrict_drops_impossible_derivatives():
    assert not FR.parse("S_xi").terms
    assert LAGRANGIAN.parse("S_xi").terms


def test_eulerian_frame_modes():
    assert eulerian_frame("isentropic").deps[("eulerian", "S")] == ()
    assert "t" in eulerian_frame("general").deps[("eulerian", "S")]


def test_lagrangian_frame_rejects_unknown_mode():
    with pytest.raises(FrameError):
        lagrangian_frame("adiabatic")


def test_prolongation_of_rotation():
    X = Generator.from_text({"phi1": "phi2", "phi2": "-phi1"}, "rot", FR)
    P = Prolongation(X)
    assert is_zero(P.apply(FR.parse("phi1_t^2 + phi2_t^2")))
    assert is_zero(P.apply(FR.parse("J")))


def test_euler_operator_of_kinetic_energy():
    L = FR.parse("(phi1_t^2 + phi2_t^2)/2")
    assert is_zero(variational_derivative(L, "phi1", FR) + FR.parse("phi1_tt"))


def test_noether_vector_of_time_translation():
    X = Generator.from_text({"t": "1"}, "X6", FR)
    L = FR.parse("(phi1_t^2 + phi2_t^2)/2")
    N = noether_vector(X, L)
    assert is_zero(N[0] + L)
    assert not N[1].terms and not N[2].terms


@settings(max_examples=40, deadline=None)
@given(densities())
def test_total_derivatives_commute(f):
    a = total_derivative(total_derivative(f, "t", FR), "xi", FR)
    b = total_derivative(total_derivative(f, "xi", FR), "t", FR)
    assert is_zero(a - b)


@settings(max_examples=40, deadline=None)
@given(densities(), densities(), densities())
def test_divergences_are_variationally_trivial(A, B, C):
    V = divergence((A, B, C), FR)
    for dep in FR.dependents:
        assert is_zero(canonicalize(variational_derivative(V, dep, FR)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_noether_identity_random_pairs(seed):
    X, F = random_pair(random.Random(seed))
    r = canonicalize(noether_identity_residual(X, F))
    assert is_zero(r), to_text(r)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_variational_identity_random_first_order(seed):
    rng = random.Random(seed)
    X, _ = random_pair(rng)
    F = FR.parse(" + ".join(f"{rng.randint(1, 3)}*{a}*{b}" for a, b in
                            [rng.sample(JETS, 2) for _ in range(3)]))
    for v in second_identity_residual(X, F).values():
        assert is_zero(canonicalize(v)), to_text(v)
