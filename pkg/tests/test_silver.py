from itertools import combinations

import numpy as np
import pytest

from silverforge.errors import DependentLayers, UnsupportedSize
from silverforge.frames import build_frame
from silverforge.group_code import LinearDispersionCode, build_rate1_4group, verify_g_group
from silverforge.silver import (SILVER_U, LayerMultiplier, LayerPlan, assemble_generator,
                                build_silver, build_silver2, default_layer_plan, extend_layers,
                                hr_pair_census, self_interference_trace_check, trace_column_gap)

CONFIGS = [(nt, nr) for nt in (2, 4, 8) for nr in range(1, nt + 1)]


def fprod(f, *idx, coef=1):
    M = np.eye(f.n, dtype=complex)
    for i in idx:
        M = M @ f[i]
    return coef * M


def test_second_layer_for_4tx():
    f = build_frame(2)
    code = build_silver(4, 2, phase_deg=0, rotate=False)
    # listed pairwise per group, stored group-major
    illus = [fprod(f, 4), fprod(f, 1, 4, coef=-1), fprod(f, 2, 4, coef=-1), fprod(f, 3, 4, coef=-1),
             fprod(f, 1, 2, 3, 4, coef=-1), fprod(f, 2, 3, 4, coef=-1), fprod(f, 1, 3, 4),
             fprod(f, 1, 2, 4, coef=-1)]
    order = [0, 4, 1, 5, 2, 6, 3, 7]
    for k, idx in enumerate(order):
        assert np.array_equal(code.weights[8 + k], illus[idx])


def test_4tx_layers_three_and_four():
    f = build_frame(2)
    base = build_rate1_4group(2)
    code = build_silver(4, 4, phase_deg=0, rotate=False)
    for i, A in enumerate(base.weights):
        assert np.allclose(code.weights[16 + i], 1j * A)
        assert np.allclose(code.weights[24 + i], 1j * f[4] @ A)
    G = assemble_generator(code)
    assert G.rank() == 32


def test_default_plans():
    p = default_layer_plan(4, 2)
    assert p.describe() == ["I", "e^(j45deg)*F4"]
    assert default_layer_plan(4, 4).describe() == ["I", "e^(j45deg)*F4", "jI", "e^(j45deg)*jF4"]
    assert default_layer_plan(2, 2).describe() == ["I", "jU (post)"]
    assert default_layer_plan(8, 4).describe() == ["I", "e^(j45deg)*F4", "F6", "e^(j45deg)*F4F6"]
    with pytest.raises(UnsupportedSize):
        default_layer_plan(6, 2)
    with pytest.raises(UnsupportedSize):
        default_layer_plan(4, 5)


def test_silver2_construction():
    code = build_silver2()
    A = code.weights
    assert SILVER_U[0, 0] == pytest.approx((1 + 1j) / np.sqrt(7))
    assert np.abs(SILVER_U.conj().T @ SILVER_U - np.eye(2)).max() <= 1e-12
    assert np.abs(SILVER_U - (A[0] + A[1] + A[2] + 2 * A[3]) / np.sqrt(7)).max() <= 1e-12
    for i in range(4):
        assert np.allclose(A[4 + i], 1j * A[i] @ SILVER_U)
    G = assemble_generator(code)
    assert G.normalization == pytest.approx(1 / np.sqrt(2))
    assert np.abs(G.G.T @ G.G - np.eye(8)).max() <= 1e-9


def test_alamouti_generator():
    G = assemble_generator(build_rate1_4group(1))
    assert G.shape == (8, 4)
    assert np.abs(G.G.T @ G.G - np.eye(4)).max() <= 1e-12


@pytest.mark.parametrize("nt,nr", CONFIGS)
def test_silver_properties(nt, nr):
    code = build_silver(nt, nr)
    L = min(nt, nr)
    assert code.n_layers == L and len(code.weights) == 2 * nt * L
    assert code.power_sum() == pytest.approx(2 * nt * nt)
    G = assemble_generator(code)
    assert G.shape == (2 * nt * nt, 2 * nt * L)
    assert G.rank() == G.shape[1]
    assert G.gram_deviation() <= 1e-9
    assert self_interference_trace_check(code) <= 1e-9
    assert trace_column_gap(code) <= 1e-9
    for layer in range(L):
        assert verify_g_group(code.layer(layer)).cross_group_ok


@pytest.mark.parametrize("nt,nr", [(4, 4), (8, 8), (8, 3)])
def test_unrotated_layers_keep_group_conditions(nt, nr):
    code = build_silver(nt, nr, rotate=False)
    for A in code.weights:
        assert np.abs(A @ A.conj().T - np.eye(nt)).max() <= 1e-12
    for layer in range(code.n_layers):
        assert verify_g_group(code.layer(layer)).passed


@pytest.mark.parametrize("nt", [4, 8])
def test_layers_share_no_weight(nt):
    code = build_silver(nt, nt)
    units = [A / np.linalg.norm(A) for A in code.weights]
    for i, j in combinations(range(len(units)), 2):
        if code.layer_tags[i] != code.layer_tags[j]:
            assert np.linalg.norm(units[i] - units[j]) > 1e-6
            assert np.linalg.norm(units[i] + units[j]) > 1e-6


def test_16tx_full_rate_lossless():
    code = build_silver(16, 16)
    assert assemble_generator(code).gram_deviation() <= 1e-9


def test_hr_census_examples():
    assert hr_pair_census(build_rate1_4group(2)) == (24, 28)
    assert hr_pair_census(build_rate1_4group(1)) == (6, 6)


def test_census_beats_unstructured_basis():
    code = build_silver(4, 2)
    gen = np.random.default_rng(5)
    W = gen.standard_normal((16, 4, 4)) + 1j * gen.standard_normal((16, 4, 4))
    other = LinearDispersionCode(n_t=4, T=4, weights=tuple(W), groups=(tuple(range(16)),),
                                 layer_tags=(0,) * 16)
    assert hr_pair_census(code)[0] > hr_pair_census(other)[0]


def test_trace_check_detects_scaled_copy():
    A = np.eye(4, dtype=complex)
    code = LinearDispersionCode(n_t=4, T=4, weights=(A, 3 * A), groups=((0, 1),), layer_tags=(0, 0))
    assert self_interference_trace_check(code) == pytest.approx(6 * 4)


def test_trace_column_equivalence_random_codes():
    gen = np.random.default_rng(9)
    W = gen.standard_normal((6, 2, 2)) + 1j * gen.standard_normal((6, 2, 2))
    code = LinearDispersionCode(n_t=2, T=2, weights=tuple(W), groups=(tuple(range(6)),),
                                layer_tags=(0,) * 6)
    assert trace_column_gap(code) <= 1e-9


def test_dependent_layers_rejected():
    base = build_rate1_4group(2)
    eye = np.eye(4, dtype=complex)
    plan = LayerPlan(n_t=4, n_layers=2, multipliers=(LayerMultiplier("I", eye), LayerMultiplier("I", eye)))
    with pytest.raises(DependentLayers):
        extend_layers(base, plan)
    minus = LayerPlan(n_t=4, n_layers=2, multipliers=(LayerMultiplier("I", eye), LayerMultiplier("-I", -eye)))
    with pytest.raises(DependentLayers):
        extend_layers(base, minus)
