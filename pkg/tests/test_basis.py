import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import angular_integral
from rotorkick.basis import (
    BasisSpec,
    build_cosine_operator,
    build_l2_diagonal,
    cos_matrix_element,
    project_truncate,
)
from rotorkick.propagation import RotorState, apply_kick, make_kick_propagator


# frozen from the quadrature oracle (tests/oracles.py::angular_integral)
@pytest.mark.parametrize(
    "l, m, expected",
    [(0, 0, 0.5773502691896287), (1, 1, 0.4472135954999563), (3, -2, 0.4364357804719828)],
)
def test_matrix_element_matches_quadrature(l, m, expected):
    assert cos_matrix_element(l, m) == pytest.approx(expected, abs=1e-12)
    assert angular_integral(l, l + 1, m) == pytest.approx(expected, abs=1e-12)


def test_matrix_element_large_l_is_one_half():
    assert cos_matrix_element(50, 0) == pytest.approx(0.50002, abs=1e-5)


def test_matrix_element_rejects_l_below_m():
    with pytest.raises(ValueError):
        cos_matrix_element(1, 2)


@given(st.integers(0, 30), st.integers(0, 60))
def test_matrix_element_bounds(m, dl):
    l = m + dl
    c = cos_matrix_element(l, m)
    assert 0 < c <= 1 / np.sqrt(3) + 1e-15
    # approaches 1/2 from above only once l is large; always monotone towards it
    assert abs(cos_matrix_element(l + 1, m) - 0.5) <= abs(c - 0.5) + 1e-15


@pytest.mark.parametrize("l, m", [(0, 0), (2, 1), (5, 3), (7, 0)])
def test_completeness_against_cos_squared(l, m):
    lower = cos_matrix_element(l - 1, m) ** 2 if l - 1 >= abs(m) else 0.0
    upper = cos_matrix_element(l, m) ** 2
    assert lower + upper == pytest.approx(angular_integral(l, l, m, power=2), abs=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        BasisSpec(3, 2)
    spec = BasisSpec(-2, 5)
    assert spec.dimension == 4
    assert list(spec.l_values) == [2, 3, 4, 5]
    assert spec.index_of(4) == 2


def test_cosine_operator_small_cases():
    op = build_cosine_operator(BasisSpec(0, 1))
    assert op.off_diagonal == pytest.approx([0.5773502691896287], abs=1e-12)
    assert build_cosine_operator(BasisSpec(0, 0)).dense().tolist() == [[0.0]]
    assert build_cosine_operator(BasisSpec(2, 2)).dense().tolist() == [[0.0]]


def test_cosine_operator_matches_quadrature_matrix():
    from oracles import cos_dense

    for m in (0, 1, 3):
        op = build_cosine_operator(BasisSpec(m, m + 6))
        np.testing.assert_allclose(op.dense(), cos_dense(m, m + 6), atol=1e-12)


@given(st.integers(-6, 6), st.integers(0, 40))
@settings(max_examples=40)
def test_cosine_operator_spectrum(m, extra):
    op = build_cosine_operator(BasisSpec(m, abs(m) + extra))
    c = op.dense()
    assert np.all(np.diag(c) == 0)
    w, v = op.eigh()
    assert np.all(np.abs(w) < 1)
    np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-12)
    np.testing.assert_allclose(v.T @ v, np.eye(len(w)), atol=1e-12)
    np.testing.assert_allclose((v * w) @ v.T, c, atol=1e-12)


@pytest.mark.parametrize(
    "m, l_max, expected", [(0, 2, [0, 2, 6]), (1, 3, [2, 6, 12]), (0, 0, [0])]
)
def test_l2_diagonal(m, l_max, expected):
    assert build_l2_diagonal(BasisSpec(m, l_max)).values.tolist() == expected


def test_project_truncate_ground_state():
    state = RotorState.ground(BasisSpec(0, 9))
    kept, leaked = project_truncate(state, 4)
    assert leaked == 0.0
    assert kept.spec.dimension == 5
    assert kept.amplitudes[0] == 1


def test_project_truncate_equal_weights():
    state = RotorState.normalized(BasisSpec(0, 9), np.ones(10))
    kept, leaked = project_truncate(state, 4)
    assert leaked == pytest.approx(0.5, abs=1e-14)
    assert kept.norm == pytest.approx(1.0, abs=1e-14)


def test_project_truncate_after_kick_is_small():
    spec = BasisSpec(0, 40)
    kicked = apply_kick(RotorState.ground(spec), make_kick_propagator(spec, 1.0))
    _, leaked = project_truncate(kicked, 4)
    # direct sum of the kicked populations above l = 4
    assert leaked == pytest.approx(np.sum(kicked.populations[5:]), abs=1e-15)
    assert 0 < leaked < 0.02


def test_project_truncate_orthogonal_state_fails():
    with pytest.raises(ValueError):
        project_truncate(RotorState.basis_state(BasisSpec(0, 9), 7), 4)
