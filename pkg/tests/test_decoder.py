import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from silverforge.channel import Constellation, Prng, db_to_linear, sample_channel, transmit
from silverforge.decoder import (brute_force_ml, conditional_group_decode, decode, qr_front_end,
                                 r_leak, r_structure_report, sphere_decode)
from silverforge.errors import SearchTooLarge, StructureViolation
from silverforge.silver import build_silver, build_silver2


def _block(code, n_r, snr_db, rng, cons, noiseless=False):
    ch = sample_channel(code.n_t, n_r, rng, snr=db_to_linear(snr_db))
    s = cons.sample(len(code.weights), rng)
    Y = transmit(code.encode(s), ch, None if noiseless else rng, noiseless=noiseless)
    return ch, s, Y


@pytest.mark.parametrize("nt,nr,trials", [(2, 2, 60), (4, 1, 60), (4, 2, 25)])
def test_decoders_agree_with_brute_force(nt, nr, trials, qam4):
    code = build_silver(nt, nr)
    root = Prng(31)
    for t in range(trials):
        ch, s, Y = _block(code, nr, 6.0, root.substream(t), qam4)
        ref = brute_force_ml(Y, ch, code, qam4)
        for method in ("sphere", "conditional"):
            res = decode(Y, ch, code, qam4, method)
            assert np.array_equal(res.symbols, ref.symbols), (t, method)
            assert res.metric == pytest.approx(ref.metric, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("nt,nr", [(2, 2), (4, 2), (8, 1), (8, 2)])
def test_noiseless_recovery(nt, nr, qam4):
    code = build_silver(nt, nr)
    root = Prng(5)
    for t in range(5):
        ch, s, Y = _block(code, nr, 20.0, root.substream(t), qam4, noiseless=True)
        res = decode(Y, ch, code, qam4, "conditional")
        assert np.array_equal(res.symbols, s)
        assert res.metric == pytest.approx(0.0, abs=1e-12)


def test_16qam_noiseless_recovery():
    cons = Constellation("QAM", 16)
    code = build_silver(4, 2)
    ch, s, Y = _block(code, 2, 20.0, Prng(8), cons, noiseless=True)
    assert np.array_equal(decode(Y, ch, code, cons).symbols, s)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.lists(st.floats(0.2, 3), min_size=4, max_size=4))
@settings(max_examples=40)
def test_diagonal_R_is_componentwise_quantization(y, diag):
    cons = Constellation("QAM", 16)
    # ties at decision boundaries are broken lexicographically, not by rounding
    x = np.asarray(y) / cons.scale
    assume(np.abs(x[:, None] - np.array([-2.0, 0.0, 2.0])).min() > 1e-6)
    R = np.diag(diag)
    y = np.asarray(y) * np.asarray(diag)
    res = sphere_decode(y, R, cons, 1.0)
    assert np.array_equal(res.symbols, cons.quantize(y / np.asarray(diag)))


def test_conditional_visits_bounded_nodes(qam4):
    code = build_silver(4, 2)
    root = Prng(3)
    q, k = 2, len(code.weights)
    for t in range(10):
        ch, s, Y = _block(code, 2, 10.0, root.substream(t), qam4)
        res = decode(Y, ch, code, qam4)
        assert 0 < res.nodes_visited <= q ** k


def test_structure_violation_on_dense_R(qam4):
    code = build_silver2()
    R = np.triu(np.ones((8, 8)))
    with pytest.raises(StructureViolation):
        conditional_group_decode(np.zeros(8), R, code, qam4, 10.0)


def test_brute_force_refuses_large_search():
    code = build_silver(4, 4)
    cons = Constellation("QAM", 4)
    ch, s, Y = _block(code, 4, 10.0, Prng(0), cons)
    with pytest.raises(SearchTooLarge):
        brute_force_ml(Y, ch, code, cons)


def test_tie_break_is_lexicographic():
    cons = Constellation("QAM", 4)
    # both candidates are equidistant from the origin
    res = sphere_decode(np.zeros(2), np.eye(2), cons, 1.0)
    assert np.array_equal(res.symbols, cons.pam_points[[0, 0]])


def test_front_end_metric_matches_brute(qam4):
    code = build_silver(4, 1)
    ch, s, Y = _block(code, 1, 3.0, Prng(17), qam4)
    yp, R, resid = qr_front_end(Y, ch, code)
    assert resid >= 0.0
    assert decode(Y, ch, code, qam4).metric == pytest.approx(brute_force_ml(Y, ch, code, qam4).metric)


@pytest.mark.parametrize("nt,nr", [(2, 2), (4, 2)])
def test_conditional_cheaper_than_sphere_on_average(nt, nr, qam4):
    code = build_silver(nt, nr)
    root = Prng(2024)
    cond = sph = 0
    trials = 200
    for t in range(trials):
        ch, s, Y = _block(code, nr, 10.0, root.substream(t), qam4)
        cond += decode(Y, ch, code, qam4, "conditional").nodes_visited
        sph += decode(Y, ch, code, qam4, "sphere").nodes_visited
    assert cond / trials <= sph / trials


@pytest.mark.parametrize("nt,nr", [(nt, nr) for nt in (2, 4, 8) for nr in range(1, nt + 1)])
def test_r_structure(nt, nr):
    rep = r_structure_report(build_silver(nt, nr), 5, Prng(nt * 10 + nr), n_r=nr)
    assert rep.passed and rep.max_leak <= 1e-9


def test_r_structure_negative_control():
    rep = r_structure_report(build_silver(4, 2), 5, Prng(1), n_r=2, permute=True)
    assert not rep.passed and rep.max_leak > 1e-3


def test_r_leak_of_block_diagonal():
    R = np.kron(np.eye(4), np.triu(np.ones((2, 2))))
    assert r_leak(R, 4, 1) == 0.0
    R[0, 5] = 0.3
    assert r_leak(R, 4, 1) == pytest.approx(0.3)
