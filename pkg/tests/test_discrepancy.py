"""Exact load-imbalance measurement: counting, full scans, certificates."""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decluster.coloring import LatinColoring, make_baseline
from decluster.discrepancy import (
    Box,
    RangeCounter,
    ScaledValue,
    complement_decompose,
    count_in_box,
    disc_report,
    find_positive_witness,
    fold_box_to_period,
    geometric_discrepancy,
    periodic_box_counts,
    report_to_dict,
    response_time,
    save_report,
)
from decluster.errors import BudgetExceededError, ParameterError
from decluster.nets import net_from_generators, pascal_power_generators
from oracles import naive_box_count, naive_disc, naive_geometric

# -- value and box types -------------------------------------------------------


def test_scaled_value_semantics():
    assert ScaledValue(3, 6) == ScaledValue(1, 2)
    assert ScaledValue(3, 6) < ScaledValue(2, 3)
    assert ScaledValue(5, 4).value == Fraction(5, 4)
    assert str(ScaledValue(15, 6)) == "15/6"
    assert hash(ScaledValue(2, 4)) == hash(ScaledValue(1, 2))
    with pytest.raises(ParameterError):
        ScaledValue(1, 0)


def test_box_basics():
    b = Box(lo=(1, 2), hi=(3, 2))
    assert b.cardinality == 3
    assert b.d == 2
    assert str(b) == "[1..3]x[2..2]"
    assert b.key() == ((1, 2), (3, 2))
    assert Box.empty(3).cardinality == 0
    assert Box.empty(2).is_empty
    assert not b.within(2) and b.within(3)


def test_box_rejects_malformed():
    with pytest.raises(ParameterError):
        Box(lo=(2, 1), hi=(1, 1))  # lo > hi but not canonical empty
    with pytest.raises(ParameterError):
        Box(lo=(0, 1), hi=(1, 1))  # coordinates start at 1
    with pytest.raises(ParameterError):
        Box(lo=(1,), hi=(1, 1))


def test_box_coerces_numpy_ints():
    b = Box(lo=(np.int64(1), np.int64(1)), hi=(np.int64(2), np.int64(2)))
    assert isinstance(b.lo[0], int) and isinstance(b.hi[1], int)


# -- counting -------------------------------------------------------------------


def test_count_worked_examples():
    scheme = make_baseline("cyclic", 4, 2)
    # one full row of the period grid holds each color exactly once
    assert count_in_box(scheme, 4, Box(lo=(1, 1), hi=(1, 4)), 3) == 1
    # the full period box holds each color M^(d-1) times
    full = Box(lo=(1, 1), hi=(4, 4))
    for c in range(1, 5):
        assert count_in_box(scheme, 4, full, c) == 4
    assert response_time(scheme, 4, full) == 4
    assert count_in_box(scheme, 4, Box.empty(2), 2) == 0
    assert response_time(scheme, 4, Box.empty(2)) == 0


def test_counter_rejects_bad_queries():
    counter = RangeCounter(make_baseline("cyclic", 3, 2), 5)
    with pytest.raises(ParameterError):
        counter.count(Box(lo=(1, 1), hi=(6, 2)), 1)  # beyond extent
    with pytest.raises(ParameterError):
        counter.count(Box(lo=(1,), hi=(2,)), 1)  # wrong dimension
    with pytest.raises(ParameterError):
        counter.count(Box(lo=(1, 1), hi=(2, 2)), 4)  # color out of range
    with pytest.raises(ParameterError):
        RangeCounter(np.ones((2, 2), dtype=np.int64), 2)  # raw grid needs M
    with pytest.raises(ParameterError):
        RangeCounter(np.full((2, 2), 5, dtype=np.int64), 2, M=3)  # color > M


@settings(max_examples=80, deadline=None)
@given(
    M=st.integers(min_value=1, max_value=4),
    N=st.integers(min_value=1, max_value=6),
    d=st.integers(min_value=1, max_value=3),
    data=st.data(),
)
def test_counter_matches_cellwise_oracle(M, N, d, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    grid = rng.integers(1, M + 1, size=(N,) * d)
    counter = RangeCounter(grid, N, M=M)
    lo = tuple(data.draw(st.integers(1, N)) for _ in range(d))
    hi = tuple(data.draw(st.integers(lo[i], N)) for i in range(d))
    color = data.draw(st.integers(1, M))
    box = Box(lo=lo, hi=hi)
    assert counter.count(box, color) == naive_box_count(grid, lo, hi, color)


def test_periodic_counts_match_range_counter_inside_period():
    scheme = make_baseline("random", 5, 2, seed=7)
    counter = RangeCounter(scheme, 5)
    for box in [Box(lo=(1, 1), hi=(3, 4)), Box(lo=(2, 2), hi=(5, 5))]:
        assert np.array_equal(periodic_box_counts(scheme, box), counter.counts(box))


def test_periodic_counts_far_from_origin():
    scheme = make_baseline("cyclic", 3, 2)
    # a box congruent to [1..2]x[1..3] shifted by multiples of M=3
    near = periodic_box_counts(scheme, Box(lo=(1, 1), hi=(2, 3)))
    far = periodic_box_counts(scheme, Box(lo=(1 + 300, 1 + 99), hi=(2 + 300, 3 + 99)))
    assert np.array_equal(near, far)
    # full-period boxes are perfectly balanced wherever they sit
    flat = periodic_box_counts(scheme, Box(lo=(10, 20), hi=(12, 22)))
    assert np.array_equal(flat, np.full(3, 3))


def test_periodic_counts_rejects_raw_grid():
    with pytest.raises(ParameterError):
        periodic_box_counts(np.ones((2, 2), dtype=np.int64), Box(lo=(1, 1), hi=(2, 2)))


# -- full-scan reports -----------------------------------------------------------


def test_checkerboard_report_is_half_everywhere():
    for d in (2, 3):
        scheme = make_baseline("checkerboard", 2, d)
        for N in (2, 3, 5, 8):
            rep = disc_report(scheme, N)
            assert rep.disc_plus == ScaledValue(1, 2)
            assert rep.disc == ScaledValue(1, 2)


def test_cyclic_m8_frozen_report():
    rep = disc_report(make_baseline("cyclic", 8, 2), 8)
    assert rep.disc_plus.num == 16 and rep.disc_plus.den == 8  # value 2
    box, color = rep.disc_plus_witness
    assert (box.lo, box.hi, color) == ((1, 1), (4, 4), 8)
    assert rep.disc.num == 16
    abox, acolor = rep.disc_witness
    assert (abox.lo, abox.hi, acolor) == ((1, 1), (4, 4), 4)
    assert rep.M == 8 and rep.d == 2 and rep.extent == 8
    assert rep.elapsed_ms >= 0


def test_constant_grid_diagnostic():
    grid = np.ones((2, 2), dtype=np.int64)
    rep = disc_report(grid, 2, M=2)
    assert rep.disc_plus.value == 2  # the lone color owns all 4 cells
    box, color = rep.disc_plus_witness
    assert (box.lo, box.hi, color) == ((1, 1), (2, 2), 1)
    # the absent color reaches the same deviation in absolute value, but the
    # lex-smallest (lo, hi, color) key keeps color 1 as the reported witness
    assert rep.disc.value == 2
    assert rep.disc_witness[1] == 1
    assert rep.per_color_abs == (4, 4)


def test_positive_only_skips_absolute_track():
    rep = disc_report(make_baseline("cyclic", 5, 2), 5, positive_only=True)
    assert rep.disc is None
    assert rep.disc_witness is None
    assert rep.per_color_abs is None
    assert rep.disc_plus.num > 0


def test_report_invariants_sum_zero_and_sandwich():
    for M, d, N in [(3, 2, 7), (4, 2, 9), (5, 2, 5), (3, 3, 4)]:
        scheme = make_baseline("cyclic", M, d)
        rep = disc_report(scheme, N)
        plus, full = rep.disc_plus.value, rep.disc.value
        assert plus <= full
        if M > 1:
            assert full <= (M - 1) * plus
        # witness recount: deviation at the reported box/color equals the value
        counter = RangeCounter(scheme, N)
        box, color = rep.disc_plus_witness
        dev = M * counter.count(box, color) - box.cardinality
        assert dev == rep.disc_plus.num
        abox, acolor = rep.disc_witness
        adev = M * counter.count(abox, acolor) - abox.cardinality
        assert abs(adev) == rep.disc.num


@settings(max_examples=40, deadline=None)
@given(
    M=st.integers(min_value=1, max_value=4),
    N=st.integers(min_value=1, max_value=6),
    d=st.integers(min_value=2, max_value=3),
    data=st.data(),
)
def test_report_matches_exhaustive_oracle_on_random_grids(M, N, d, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    grid = rng.integers(1, M + 1, size=(N,) * d)
    rep = disc_report(grid, N, M=M)
    want = naive_disc(grid, M)
    assert rep.disc_plus.num == want["plus"]
    box, color = rep.disc_plus_witness
    assert (box.lo, box.hi, color) == want["plus_key"]
    assert rep.disc.num == want["abs"]
    abox, acolor = rep.disc_witness
    assert (abox.lo, abox.hi, acolor) == want["abs_key"]
    assert rep.per_color_plus == want["per_color_plus"]
    assert rep.per_color_abs == want["per_color_abs"]


def test_report_matches_oracle_on_schemes():
    cases = [
        make_baseline("cyclic", 3, 2),
        make_baseline("cyclic", 4, 3),
        make_baseline("random", 4, 2, seed=2),
        make_baseline("checkerboard", 2, 3),
    ]
    for scheme in cases:
        for N in (scheme.coloring.M, scheme.coloring.M + 2):
            from decluster.coloring import color_grid

            rep = disc_report(scheme, N)
            want = naive_disc(color_grid(scheme, N), scheme.coloring.M)
            assert rep.disc_plus.num == want["plus"]
            assert rep.disc.num == want["abs"]
            box, color = rep.disc_plus_witness
            assert (box.lo, box.hi, color) == want["plus_key"]


def test_extent_below_period():
    # N < M is legal; with 3 colors on a 2x2 window some color is absent
    rep = disc_report(make_baseline("cyclic", 3, 2), 2)
    want = naive_disc(np.asarray([[1, 2], [3, 1]])[:2, :2], 3)  # sanity only
    assert rep.disc_plus.num >= 1
    assert rep.extent == 2
    assert want["plus"] >= 1


# -- tiling algebra ---------------------------------------------------------------


def test_fold_examples():
    M = 5
    assert fold_box_to_period(Box(lo=(2,) * 2, hi=(M + 1,) * 2), M).is_empty
    assert fold_box_to_period(Box(lo=(M + 1,) * 2, hi=(2 * M,) * 2), M) == Box(
        lo=(1, 1), hi=(M, M)
    )
    within = Box(lo=(2, 3), hi=(4, 5))
    assert fold_box_to_period(within, M) == within
    assert fold_box_to_period(Box.empty(2), M).is_empty
    with pytest.raises(ParameterError):
        fold_box_to_period(within, 0)


def test_fold_preserves_absolute_deviation():
    scheme = make_baseline("random", 4, 2, seed=9)
    N = 12
    counter = RangeCounter(scheme, N)
    small = RangeCounter(scheme, 4)
    for box in [
        Box(lo=(2, 7), hi=(9, 11)),
        Box(lo=(5, 5), hi=(12, 12)),
        Box(lo=(1, 6), hi=(4, 9)),
        Box(lo=(3, 1), hi=(3, 12)),
    ]:
        folded = fold_box_to_period(box, 4)
        for color in range(1, 5):
            dev = 4 * counter.count(box, color) - box.cardinality
            if folded.is_empty:
                fdev = 0
            else:
                fdev = 4 * small.count(folded, color) - folded.cardinality
            assert abs(dev) == abs(fdev)


def test_complement_decompose_partition():
    box = Box(lo=(2, 3), hi=(4, 5))
    N = 6
    pieces = complement_decompose(box, N)
    assert len(pieces) <= 4
    total = box.cardinality + sum(p.cardinality for p in pieces)
    assert total == N * N
    # disjointness: recount every cell exactly once
    hits = np.zeros((N, N), dtype=np.int64)
    for p in [box, *pieces]:
        hits[p.lo[0] - 1 : p.hi[0], p.lo[1] - 1 : p.hi[1]] += 1
    assert hits.min() == 1 and hits.max() == 1


def test_complement_deviations_sum_to_negation():
    scheme = make_baseline("random", 5, 2, seed=4)
    N = 5
    counter = RangeCounter(scheme, N)
    box = Box(lo=(2, 2), hi=(4, 3))
    color = 3
    dev = 5 * counter.count(box, color) - box.cardinality
    total = 0
    for p in complement_decompose(box, N):
        total += 5 * counter.count(p, color) - p.cardinality
    assert total == -dev  # the full grid is perfectly balanced


def test_complement_of_empty_box_is_everything():
    pieces = complement_decompose(Box.empty(2), 3)
    assert len(pieces) == 1
    assert pieces[0] == Box(lo=(1, 1), hi=(3, 3))


def test_complement_three_dimensional_piece_count():
    box = Box(lo=(2, 2, 2), hi=(2, 2, 2))
    pieces = complement_decompose(box, 3)
    assert len(pieces) == 6
    assert box.cardinality + sum(p.cardinality for p in pieces) == 27


# -- geometric (volume) discrepancy ------------------------------------------------


def test_geometric_empty_point_set():
    geo = geometric_discrepancy([], 4, d=2)
    assert geo.value == 0
    with pytest.raises(ParameterError):
        geometric_discrepancy([], 4)  # dimension cannot be inferred


def test_geometric_single_centre_point():
    geo = geometric_discrepancy([(Fraction(1, 2), Fraction(1, 2))], 2)
    assert geo.value == Fraction(3, 4)
    assert geo.witness_lo == (1, 1) and geo.witness_hi == (2, 2)


def test_geometric_matches_naive():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = int(rng.integers(1, 5))
        pts = [
            (Fraction(int(rng.integers(0, 8)), 8), Fraction(int(rng.integers(0, 8)), 8))
            for _ in range(n)
        ]
        G = int(rng.integers(1, 5))
        geo = geometric_discrepancy(pts, G)
        cells = [tuple(int(x * G) for x in p) for p in pts]
        num, key = naive_geometric(cells, n, G, 2)
        assert geo.scaled_num == num
        assert (geo.witness_lo, geo.witness_hi) == key


def test_geometric_accepts_net_directly():
    net = net_from_generators(pascal_power_generators(2, 2, 2))
    geo = geometric_discrepancy(net, 4)
    assert geo.value <= 1
    assert geo.scale == 16


def test_geometric_rejects_bad_input():
    with pytest.raises(ParameterError):
        geometric_discrepancy([(Fraction(1, 2),)], 0)
    with pytest.raises(ParameterError):
        geometric_discrepancy([(Fraction(3, 2), Fraction(0, 1))], 2)
    with pytest.raises(ParameterError):
        geometric_discrepancy([(Fraction(1, 2), Fraction(1, 2))], 2, d=3)


# -- positive-deviation certificates -----------------------------------------------


def test_witness_cyclic_two_dimensional():
    for M in (8, 16):
        cert = find_positive_witness(make_baseline("cyclic", M, 2))
        assert cert.value.num > 0
        assert cert.side == M
        # claimed deviation is real
        counter = RangeCounter(make_baseline("cyclic", M, 2), M)
        dev = M * counter.count(cert.box, cert.color) - cert.box.cardinality
        assert dev == cert.value.num
        # certificate never exceeds the true optimum
        rep = disc_report(make_baseline("cyclic", M, 2), M, positive_only=True)
        assert cert.value <= rep.disc_plus


def test_witness_three_dimensional_subgrid():
    cert = find_positive_witness(make_baseline("cyclic", 9, 3))
    assert cert.side in (3, 9)  # ceil(9^(1/2)) = 3, escalation allowed
    assert cert.value.num > 0
    assert cert.box.within(cert.side)


def test_witness_single_disk_zero_certificate():
    cert = find_positive_witness(make_baseline("cyclic", 1, 2))
    assert cert.value.num == 0
    assert cert.box == Box(lo=(1, 1), hi=(1, 1))
    assert cert.color == 1


def test_witness_rejects_degenerate_dimensions():
    with pytest.raises(ParameterError):
        find_positive_witness(LatinColoring(M=3, d=1, anchor=(1,)))
    with pytest.raises(ParameterError):
        find_positive_witness(make_baseline("checkerboard", 2, 3))


def test_witness_flips_negative_maximum_through_complement():
    # for this coloring the chosen color's largest |deviation| is attained
    # only by negative boxes, so the certificate must come from a piece of
    # the complement (whose deviations sum to the negation)
    scheme = make_baseline("random", 4, 2, seed=1)
    cert = find_positive_witness(scheme)
    assert cert.box == Box(lo=(2, 1), hi=(3, 1))
    assert cert.color == 1
    assert cert.value == ScaledValue(2, 4)
    counter = RangeCounter(scheme, 4)
    assert 4 * counter.count(cert.box, cert.color) - cert.box.cardinality == 2


def test_witness_prefers_positive_box_on_tied_magnitude():
    # cyclic M=8: |deviation| 16 is reached by both signs; the certificate
    # must take a positive box directly instead of flipping a negative one
    cert = find_positive_witness(make_baseline("cyclic", 8, 2))
    assert cert.box == Box(lo=(2, 1), hi=(5, 4))
    assert cert.value == ScaledValue(16, 8)


def test_witness_random_schemes_agree_with_report():
    for seed in range(4):
        scheme = make_baseline("random", 6, 2, seed=seed)
        cert = find_positive_witness(scheme)
        rep = disc_report(scheme, 6, positive_only=True)
        assert 0 < cert.value.num <= rep.disc_plus.num


# -- budget guard -------------------------------------------------------------------


def test_budget_guard_max_cells():
    scheme = make_baseline("cyclic", 4, 2)
    with pytest.raises(BudgetExceededError, match="cells"):
        disc_report(scheme, 100, max_cells=10)
    with pytest.raises(BudgetExceededError):
        RangeCounter(scheme, 100, max_cells=10)


def test_budget_guard_env_var(monkeypatch):
    monkeypatch.setenv("DECLUSTER_MAX_CELLS", "10")
    with pytest.raises(BudgetExceededError):
        disc_report(make_baseline("cyclic", 4, 2), 100)
    monkeypatch.setenv("DECLUSTER_MAX_CELLS", "not a number")
    with pytest.raises(ParameterError):
        disc_report(make_baseline("cyclic", 4, 2), 4)


# -- serialization --------------------------------------------------------------------


def test_report_dict_shape(tmp_path):
    rep = disc_report(make_baseline("cyclic", 3, 2), 6)
    data = report_to_dict(rep)
    assert data["M"] == 3 and data["d"] == 2 and data["N"] == 6
    assert data["denominator"] == 3
    assert data["disc_plus_num"] == rep.disc_plus.num
    assert data["disc_num"] == rep.disc.num
    assert set(data["witness"]) == {"lo", "hi", "color"}
    assert len(data["per_color"]) == 3
    assert all(set(e) == {"color", "disc_plus_num", "disc_num"} for e in data["per_color"])
    path = tmp_path / "report.json"
    save_report(rep, path)
    assert json.loads(path.read_text()) == json.loads(json.dumps(data))


def test_report_dict_positive_only():
    rep = disc_report(make_baseline("cyclic", 3, 2), 3, positive_only=True)
    data = report_to_dict(rep)
    assert data["disc_num"] is None
    assert "witness_abs" not in data
    assert all(e["disc_num"] is None for e in data["per_color"])
