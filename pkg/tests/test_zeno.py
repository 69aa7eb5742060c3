import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenolink.zeno import (
    SuccessPoint,
    bit0_error_bound,
    ground_prob_single,
    sweep,
    sweep_csv,
    theoretical_success,
    zeno_survival,
    zeno_survival_bound,
)

from oracle_numpy import conditional_success


def test_single_step_values():
    assert ground_prob_single(1) == pytest.approx(0.0, abs=1e-30)
    assert ground_prob_single(2) == pytest.approx(0.5, abs=1e-12)
    assert ground_prob_single(10) == pytest.approx(0.9755282581475768, abs=1e-14)


def test_survival_values():
    assert zeno_survival(2) == pytest.approx(0.25, abs=1e-12)
    assert zeno_survival(6) == pytest.approx(0.6596678783944642, abs=1e-14)
    assert zeno_survival(10) == pytest.approx(0.7805460697811408, abs=1e-14)
    assert zeno_survival(2500) == pytest.approx(1.0, abs=1e-3)


def test_survival_rejects_bad_n():
    with pytest.raises(ValueError):
        zeno_survival(0)
    with pytest.raises(ValueError):
        ground_prob_single(-3)
    with pytest.raises(ValueError):
        bit0_error_bound(1)


@given(st.integers(min_value=1, max_value=1000))
def test_survival_is_single_step_power(n):
    # same quantity through two float power paths; drift peaks ~5e-14 near
    # n=951, so the bound here is looser than for direct evaluation
    assert abs(zeno_survival(n) - ground_prob_single(n) ** n) < 1e-12


@given(st.integers(min_value=2, max_value=1000))
def test_survival_dominates_quadratic_bound(n):
    assert zeno_survival(n) >= zeno_survival_bound(n)


def test_survival_monotone_increasing():
    vals = [zeno_survival(n) for n in range(2, 200)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_bit0_error_bound_values():
    assert bit0_error_bound(2) == pytest.approx(0.5, abs=1e-12)
    assert bit0_error_bound(30) == pytest.approx(0.0027390523158633312, abs=1e-14)
    # complements the per-pass survival
    assert bit0_error_bound(7) == pytest.approx(1 - ground_prob_single(7), abs=1e-14)


# -- conditional success -------------------------------------------------------

def test_success_anchor_values():
    pt = theoretical_success(3, 6)
    assert pt.s0 == pytest.approx(0.75, abs=1e-12)
    assert pt.s1 == pytest.approx(0.8717686183984625, abs=1e-12)


def test_success_agrees_with_matrix_oracle():
    for m, n in [(2, 2), (2, 5), (3, 6), (4, 4), (5, 16), (3, 24)]:
        s0, s1 = conditional_success(m, n)
        pt = theoretical_success(m, n)
        assert pt.s0 == pytest.approx(s0, abs=1e-12)
        assert pt.s1 == pytest.approx(s1, abs=1e-12)


def test_success_improves_with_more_inner_loops():
    lo = theoretical_success(3, 2)
    hi = theoretical_success(3, 20)
    assert hi.s1 > lo.s1
    assert 0.0 <= lo.s1 <= 1.0 and 0.0 <= hi.s1 <= 1.0


# -- sweep ----------------------------------------------------------------------

def test_sweep_shape_and_order():
    pts = sweep(range(2, 6), range(2, 17))
    assert len(pts) == 60
    keys = [(p.m, p.n) for p in pts]
    assert keys == sorted(keys)
    assert keys[0] == (2, 2) and keys[-1] == (5, 16)
    for p in pts:
        assert 0.0 <= p.s0 <= 1.0
        assert 0.0 <= p.s1 <= 1.0


def test_sweep_deduplicates_and_rejects_empty():
    pts = sweep([3, 3, 2], [6, 6])
    assert [(p.m, p.n) for p in pts] == [(2, 6), (3, 6)]
    with pytest.raises(ValueError):
        sweep([], [2])


def test_sweep_contains_anchor_row():
    pts = sweep(range(2, 6), range(2, 17))
    row = next(p for p in pts if (p.m, p.n) == (3, 6))
    assert row.s0 == pytest.approx(0.75, abs=1e-12)
    assert row.s1 == pytest.approx(0.8717686183984625, abs=1e-12)


def test_sweep_s1_monotone_in_n_up_to_roundoff():
    # along fixed m, more inner loops never hurt S1 by more than roundoff
    for m in (2, 3, 5):
        pts = sweep([m], range(2, 17))
        s1s = [p.s1 for p in pts]
        for a, b in zip(s1s, s1s[1:]):
            assert b >= a - 1e-6


def test_sweep_csv_format():
    pts = [SuccessPoint(3, 6, 0.75, 0.8717686183984625)]
    text = sweep_csv(pts)
    lines = text.splitlines()
    assert lines[0] == "m,n,s0,s1"
    assert lines[1] == "3,6,0.750000,0.871769"
    assert text.endswith("\n")


def test_sweep_csv_round_trips_through_parser():
    import csv
    import io

    pts = sweep([2, 3], [2, 3])
    rows = list(csv.DictReader(io.StringIO(sweep_csv(pts))))
    assert len(rows) == 4
    for row, pt in zip(rows, pts):
        assert int(row["m"]) == pt.m and int(row["n"]) == pt.n
        assert float(row["s0"]) == pytest.approx(pt.s0, abs=5e-7)
        assert float(row["s1"]) == pytest.approx(pt.s1, abs=5e-7)
