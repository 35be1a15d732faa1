import pytest
from hypothesis import given, settings, strategies as st

from eh_aoi.analytic import aoi_mds_be, aoi_mds_st, aoi_rc_st
from eh_aoi.core import ParameterError, Policy, SystemParams
from eh_aoi.search import (
    best_m,
    best_n,
    default_m_max,
    default_n_max,
    mds_st_monotonicity_violations,
    optimize,
    sweep,
)


def test_defaults():
    params = SystemParams(0.2, 0.3, 100)
    assert default_n_max(params) == 1050
    assert default_m_max(params) == 4050


def test_best_n_lossless_full_energy_is_uncoded():
    opt = best_n(SystemParams(1.0, 0.0, 12), Policy.MDS_BE)
    assert opt.free_param == 12
    assert not opt.at_boundary


@given(st.floats(0.2, 1.0), st.floats(0.0, 0.6), st.integers(1, 12))
@settings(max_examples=15)
def test_best_n_is_discrete_minimum(p, delta, k):
    params = SystemParams(p, delta, k)
    for pol, f in ((Policy.MDS_BE, aoi_mds_be), (Policy.MDS_ST, aoi_mds_st)):
        opt = best_n(params, pol, n_max=6 * k + 20)
        assert opt.aoi == f(params, opt.free_param).aoi
        for nb in (opt.free_param - 1, opt.free_param + 1):
            if k <= nb <= 6 * k + 20:
                assert f(params, nb).aoi >= opt.aoi


@given(st.floats(0.1, 0.95), st.floats(0.0, 0.6), st.integers(1, 10))
@settings(max_examples=15)
def test_best_m_is_discrete_minimum(p, delta, k):
    params = SystemParams(p, delta, k)
    opt = best_m(params)
    assert opt.aoi == aoi_rc_st(params, opt.free_param).aoi
    for mb in (opt.free_param - 1, opt.free_param + 1):
        if mb >= 0:
            assert aoi_rc_st(params, mb).aoi >= opt.aoi


def test_boundary_flag():
    opt = best_m(SystemParams(0.2, 0.3, 100), m_max=40)
    assert opt.free_param == 40 and opt.at_boundary


def test_argument_errors():
    with pytest.raises(ParameterError):
        best_n(SystemParams(0.5, 0.1, 10), Policy.MDS_BE, n_max=9)
    with pytest.raises(ParameterError):
        best_n(SystemParams(0.5, 0.1, 10), Policy.RC_BE)
    with pytest.raises(ParameterError):
        best_m(SystemParams(0.5, 0.1, 10), m_max=-1)
    with pytest.raises(ParameterError):
        best_m(SystemParams(1.0, 0.1, 10))
    with pytest.raises(ParameterError):
        sweep([], [0.3], [10], [Policy.RC_BE])


def test_high_recharge_needs_little_saving():
    assert best_m(SystemParams(0.95, 0.3, 20)).free_param <= best_m(SystemParams(0.3, 0.3, 20)).free_param


def test_sweep_rows_ordered_and_reproducible():
    notes = []
    rows = sweep([0.5, 1.0], [0.3], [8, 4], list(Policy), notes=notes)
    keys = [(r.params.p, r.params.delta, r.params.k, r.policy.value) for r in rows]
    assert keys == sorted(keys)
    # RC_ST is dropped at p = 1
    assert len(rows) == 2 * 4 + 2 * 3
    assert any("RC_ST skipped" in n for n in notes)
    for r in rows:
        assert r.aoi >= r.params.k
        again = optimize(r.params, r.policy)
        assert again.aoi == r.aoi and again.free_param == r.free_param
    assert sweep([0.5, 1.0], [0.3], [8, 4], list(Policy), workers=2) == rows


def test_single_point_single_policy():
    assert len(sweep([0.4], [0.3], [10], [Policy.MDS_ST])) == 1


def test_mds_st_monotone_in_p():
    rows = sweep([0.2, 0.3, 0.5, 0.7, 1.0], [0.3], [10, 30], [Policy.MDS_ST])
    assert mds_st_monotonicity_violations(rows) == []


def test_monotonicity_checker_flags_violation():
    rows = sweep([0.3, 0.6], [0.3], [10], [Policy.MDS_ST])
    flipped = [rows[0].__class__(rows[1].params, r.policy, r.free_param, r.aoi, r.mean_q, r.mean_t)
               for r in rows[:1]] + [rows[1].__class__(rows[0].params, Policy.MDS_ST, 1, rows[1].aoi, 1, 1)]
    assert mds_st_monotonicity_violations(flipped)
