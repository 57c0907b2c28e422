from fractions import Fraction

import pytest

import dqvalue


def test_ks_support():
    assert dqvalue.exact_support("ks", 4, 4) == [Fraction(k, 35) for k in (1, 8, 27, 35)]


def test_exact_pvalue():
    assert dqvalue.pvalue("wilcoxon", [1, 2, 3, 4], [11, 12, 13, 14]) == pytest.approx(2 / 70)


def test_storey_and_liang():
    p = [1 / 35] * 10 + [8 / 35] * 10 + [27 / 35] * 10 + [1.0] * 20
    ss = dqvalue.pi0(p, "SS")
    assert ss["raw"] == pytest.approx((30 + 1) / 25)
    assert ss["pi0"] == 1.0
    liang = dqvalue.pi0(p, "Liang", support="ks:4:4")
    assert 0 < liang["pi0"] <= 1


def test_qvalues_match_adaptive_bh():
    p = [0.001, 0.02, 0.03, 0.2, 0.5, 0.9, 0.04, 0.011]
    q = dqvalue.qvalues(p, 0.8)
    assert all(0 < v <= 1 for v in q)
    by_q = [i for i, v in enumerate(q) if v <= 0.05]
    assert by_q == dqvalue.adaptive_bh(p, 0.8, 0.05)


def test_analyze():
    p = [1 / 35, 1 / 35, 8 / 35, 1.0, 27 / 35, 1.0, 1 / 35, 1.0, 1.0, 27 / 35, 8 / 35, 1.0]
    out = dqvalue.analyze(p, support="ks:4:4", methods=["SS", "Chen"], alpha=0.2)
    assert set(out) == {"SS", "Chen"}
    assert len(out["SS"]["qvalues"]) == len(p)


def test_simulate_is_reproducible():
    config = {"m": 40, "replicates": 5, "seed": 3}
    first = dqvalue.simulate(config, threads=1)
    assert first == dqvalue.simulate(config, threads=2)
    methods = [r["method"] for r in first["results"]]
    assert "Real" in methods


def test_errors():
    with pytest.raises(ValueError):
        dqvalue.pvalue("nosuch", [1, 2], [3, 4])
    with pytest.raises(dqvalue.Error):
        dqvalue.pvalue("wilcoxon", [1, 1, 2], [3, 4, 5])
    with pytest.raises(dqvalue.Error):
        dqvalue.pi0([0.5, 0.3], "Liang", support="ks:4:4")
