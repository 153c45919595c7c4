from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silverforge.errors import UnsupportedSize
from silverforge.frames import (Frame, ProductMask, all_masks, basis_independence_check,
                                build_frame, commute_predicate, pauli_generators,
                                square_sign, subset_product, verify_frame)


def test_pauli_generators():
    P1, P2, P3 = pauli_generators()
    assert np.array_equal(P1 @ P2, -P2 @ P1)
    assert np.array_equal(P3 @ P3, np.eye(2))
    assert np.array_equal(P1 @ P1, -np.eye(2))


def test_frame_a1_entries():
    f = build_frame(1)
    assert np.array_equal(f[1], [[1j, 0], [0, -1j]])
    assert np.array_equal(f[2], [[0, 1], [-1, 0]])


@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_frames_pass(a):
    f = build_frame(a)
    assert len(f) == 2 * a
    rep = verify_frame(f)
    assert rep.passed and rep.max_deviation <= 1e-15


@pytest.mark.parametrize("a", [0, 5, -1])
def test_frame_size_limits(a):
    with pytest.raises(UnsupportedSize):
        build_frame(a)


def test_frame_with_identity_fails():
    f = build_frame(2)
    mats = list(f.matrices)
    mats[1] = np.eye(4, dtype=complex)
    rep = verify_frame(Frame(a=2, matrices=tuple(mats)))
    assert not rep.passed
    assert rep.anticommutators[(1, 2)] == pytest.approx(2 * np.linalg.norm(f[1]))
    assert "anticommute F1F2" in rep.failures()


def test_subset_product_examples():
    f = build_frame(2)
    assert np.array_equal(subset_product(f, ProductMask((0, 0, 0, 0))), np.eye(4))
    F123 = subset_product(f, ProductMask.from_indices(4, [1, 2, 3]))
    assert np.allclose(F123 @ F123, np.eye(4))
    F12 = subset_product(f, ProductMask.from_indices(4, [1, 2]))
    assert np.allclose(F12 @ F12, -np.eye(4))
    jF12 = subset_product(f, ProductMask.from_indices(4, [1, 2], j_flag=True))
    assert np.allclose(jF12, 1j * F12)
    assert ProductMask.from_indices(4, [1, 2], True).label() == "jF1F2"


def test_square_sign_values():
    assert [square_sign(s) for s in (1, 2, 3, 4)] == [-1, -1, 1, 1]
    with pytest.raises(ValueError):
        square_sign(0)


def test_commute_predicate_cases():
    # distinct single elements share nothing
    assert commute_predicate(1, 1, 0) == "anticommute"
    # an element with itself
    assert commute_predicate(1, 1, 1) == "commute"
    assert commute_predicate(2, 2, 0) == "commute"
    with pytest.raises(ValueError):
        commute_predicate(1, 2, 2)


@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_commute_predicate_is_parity_rule(r, s, data):
    p = data.draw(st.integers(0, min(r, s)))
    expected = "commute" if (r * s - p) % 2 == 0 else "anticommute"
    assert commute_predicate(r, s, p) == expected


@pytest.mark.parametrize("a", [1, 2, 3])
def test_products_match_sign_and_commutation_rules(a):
    f = build_frame(a)
    masks = [m for m in all_masks(2 * a) if m.size]
    mats = {m.lambdas: subset_product(f, m) for m in masks}
    eye = np.eye(f.n)
    for m in masks:
        P = mats[m.lambdas]
        assert np.abs(P @ P - square_sign(m.size) * eye).max() <= 1e-12
        assert abs(np.trace(P)) <= 1e-12
    for m1, m2 in combinations(masks, 2):
        A, B = mats[m1.lambdas], mats[m2.lambdas]
        p = len(set(m1.indices) & set(m2.indices))
        rel = commute_predicate(m1.size, m2.size, p)
        if rel == "commute":
            assert np.abs(A @ B - B @ A).max() <= 1e-12
        else:
            assert np.abs(A @ B + B @ A).max() <= 1e-12


@pytest.mark.parametrize("a", [1, 2])
def test_basis_independence(a):
    assert basis_independence_check(build_frame(a))


def test_basis_check_detects_duplicates():
    f = build_frame(2)
    mats = list(f.matrices)
    mats[2] = mats[1]
    assert not basis_independence_check(Frame(a=2, matrices=tuple(mats)))


def test_basis_check_size_cap():
    with pytest.raises(UnsupportedSize):
        basis_independence_check(build_frame(4))
