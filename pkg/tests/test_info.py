import math

import numpy as np
import pytest
from scipy.special import exp1

from silverforge.channel import Prng, db_to_linear
from silverforge.group_code import LinearDispersionCode, build_rate1_4group
from silverforge.info import (capacity_C2, ergodic_capacity_mc, expansion_coefficients,
                              expansion_I1, expansion_I2, fit_low_snr_series, stbc_mutual_info_mc)
from silverforge.silver import assemble_generator, build_silver, build_silver2


@pytest.mark.parametrize("snr_db", [0.0, 10.0])
def test_siso_capacity_closed_form(snr_db):
    rho = db_to_linear(snr_db)
    exact = math.exp(1 / rho) * exp1(1 / rho) / math.log(2)
    est = ergodic_capacity_mc(1, 1, rho, 20000, Prng(1))
    assert abs(est.mean - exact) <= 4 * est.std_error + 1e-3


def test_capacity_grows_with_receive_antennas():
    rho = db_to_linear(10)
    a = ergodic_capacity_mc(4, 2, rho, 2000, Prng(2)).mean
    b = ergodic_capacity_mc(4, 4, rho, 2000, Prng(2)).mean
    assert a < b


@pytest.mark.parametrize("nt,nr", [(2, 2), (4, 4), (8, 8)])
def test_full_rate_code_is_lossless_per_draw(nt, nr):
    code = build_silver(nt, nr)
    G = assemble_generator(code)
    rho = db_to_linear(12)
    c = ergodic_capacity_mc(nt, nr, rho, 20, Prng(4), keep_samples=True)
    i = stbc_mutual_info_mc(G, nt, nr, code.T, rho, 20, Prng(4), keep_samples=True)
    assert np.abs(c.samples - i.samples).max() <= 1e-9


@pytest.mark.parametrize("nt,nr", [(2, 1), (4, 2), (8, 3)])
def test_punctured_code_below_capacity(nt, nr):
    code = build_silver(nt, nr)
    G = assemble_generator(code)
    rho = db_to_linear(12)
    c = ergodic_capacity_mc(nt, nr, rho, 30, Prng(6), keep_samples=True)
    i = stbc_mutual_info_mc(G, nt, nr, code.T, rho, 30, Prng(6), keep_samples=True)
    assert np.all(i.samples <= c.samples + 1e-9)


@pytest.mark.parametrize("nt,nr", [(2, 1), (2, 2), (4, 2), (8, 8)])
def test_first_coefficient_matches_capacity(nt, nr):
    assert expansion_I1(build_silver(nt, nr), nr) == pytest.approx(nr, abs=1e-12)


def test_first_coefficient_scales_with_power():
    code = build_rate1_4group(1)
    doubled = LinearDispersionCode(n_t=2, T=2, weights=tuple(2 * A for A in code.weights),
                                   groups=code.groups, layer_tags=code.layer_tags)
    assert expansion_I1(doubled, 3) == pytest.approx(4 * 3)


def test_second_coefficient_values():
    assert expansion_I2(build_rate1_4group(1), 1) == pytest.approx(-0.75)
    assert capacity_C2(2, 1) == pytest.approx(-0.75)
    assert expansion_I2(build_silver2(), 2) == pytest.approx(-2.0)
    assert expansion_I2(build_silver2(), 2, summation="upper") == pytest.approx(-1.625)
    coef = expansion_coefficients(build_silver(4, 4), 4)
    assert coef.I2 == pytest.approx(coef.C2)


@pytest.mark.parametrize("phase", [0.0, 15.0, 30.0, 45.0, 60.0, 90.0])
def test_second_coefficient_phase_invariant(phase):
    ref = expansion_I2(build_silver(4, 2), 2)
    assert expansion_I2(build_silver(4, 2, phase_deg=phase, check=False), 2) == pytest.approx(ref, abs=1e-10)


def test_second_coefficient_unitary_invariance():
    code = build_silver(4, 2)
    gen = np.random.default_rng(3)
    Z = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    U, _ = np.linalg.qr(Z)
    Z = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    V, _ = np.linalg.qr(Z)
    moved = LinearDispersionCode(n_t=4, T=4, weights=tuple(U @ A @ V for A in code.weights),
                                 groups=code.groups, layer_tags=code.layer_tags,
                                 power_scale=code.power_scale)
    assert expansion_I2(moved, 2) == pytest.approx(expansion_I2(code, 2), abs=1e-10)


def test_orthonormal_code_beats_unstructured_basis():
    code = build_silver(4, 2)
    gen = np.random.default_rng(11)
    W = gen.standard_normal((16, 4, 4)) + 1j * gen.standard_normal((16, 4, 4))
    W *= np.sqrt(sum(np.vdot(A, A).real for A in code.scaled_weights) / np.sum(np.abs(W) ** 2))
    other = LinearDispersionCode(n_t=4, T=4, weights=tuple(W), groups=(tuple(range(16)),),
                                 layer_tags=(0,) * 16)
    assert expansion_I1(other, 2) == pytest.approx(expansion_I1(code, 2))
    assert expansion_I2(code, 2) > expansion_I2(other, 2)


@pytest.mark.parametrize("make,nr", [(build_silver2, 2), (lambda: build_rate1_4group(1), 1)])
def test_monte_carlo_fit_matches_coefficients(make, nr):
    code = make()
    c1, c2 = fit_low_snr_series(code, nr, Prng(77), trials=20000)
    assert c1 == pytest.approx(expansion_I1(code, nr), rel=0.02)
    assert c2 == pytest.approx(expansion_I2(code, nr), rel=0.10)
