"""End-to-end scheme generation, regeneration, and the comparison sweep."""

import io

import pytest

from decluster.coloring import (
    DEGENERATE_TWO_DIM,
    TRIVIAL_SINGLE_DISK,
    load_scheme,
    save_scheme,
    scheme_to_json_bytes,
    verify_latin,
)
from decluster.errors import ParameterError, SchemeFormatError
from decluster.schemegen import (
    MODES,
    Factorization,
    SweepRow,
    factorize_canonical,
    generate_scheme,
    regenerate_scheme,
    sweep,
)

# -- factorization ---------------------------------------------------------------


def test_factorize_examples():
    assert factorize_canonical(12) == Factorization(M=12, factors=(3, 4))
    assert factorize_canonical(12).q1 == 3
    assert factorize_canonical(7) == Factorization(M=7, factors=(7,))
    assert factorize_canonical(360).factors == (5, 8, 9)
    assert factorize_canonical(2).factors == (2,)


def test_factorize_rejects_tiny():
    with pytest.raises(ParameterError):
        factorize_canonical(1)
    with pytest.raises(ParameterError):
        factorize_canonical(0)


# -- generation ---------------------------------------------------------------------


def test_modes_tuple():
    assert MODES == ("paper", "smallbase", "cyclic", "random", "checkerboard")


def test_paper_mode_basic():
    scheme = generate_scheme(6, 3, "paper")
    assert scheme.mode == "paper"
    assert verify_latin(scheme.coloring).ok
    assert scheme.coloring.M == 6 and scheme.coloring.d == 3
    prov = scheme.provenance
    assert prov["kind"] == "net"
    assert prov["base"] == 6 and prov["m"] == 2


def test_paper_mode_dimension_cap():
    with pytest.raises(ParameterError, match=r"d=4 > q1\+1=3"):
        generate_scheme(6, 4, "paper")
    # prime M: cap is M+1, so d=6 works for M=5
    scheme = generate_scheme(5, 6, "paper")
    assert verify_latin(scheme.coloring).ok


def test_paper_mode_planar_warning():
    scheme = generate_scheme(3, 2, "paper")
    assert DEGENERATE_TWO_DIM in scheme.warnings
    deep = generate_scheme(3, 3, "paper")
    assert DEGENERATE_TWO_DIM not in deep.warnings


def test_smallbase_mode_picks_smallest_admissible_base():
    scheme = generate_scheme(8, 2, "smallbase")
    assert scheme.provenance["base"] == 2
    assert scheme.provenance["m"] == 3  # k=3 digits, d-1 = 1
    assert verify_latin(scheme.coloring).ok
    # d=4 forces base 8 = 2^3 (need d <= p^s + 1, so 2 and 4 are too small)
    deeper = generate_scheme(8, 4, "smallbase")
    assert deeper.provenance["base"] == 8
    assert verify_latin(deeper.coloring).ok


def test_smallbase_rejects_non_prime_power():
    with pytest.raises(ParameterError, match="prime power"):
        generate_scheme(12, 2, "smallbase")


def test_degenerate_disk_counts_route_to_baselines():
    two = generate_scheme(2, 2, "paper")
    assert two.mode == "checkerboard"
    assert two.disk_of((1, 2)) == 2
    one = generate_scheme(1, 3, "smallbase")
    assert TRIVIAL_SINGLE_DISK in one.warnings
    line = generate_scheme(5, 1, "paper")
    assert line.mode == "cyclic"
    assert line.coloring.d == 1


def test_baseline_modes_pass_through():
    cy = generate_scheme(5, 3, "cyclic")
    assert cy.mode == "cyclic" and verify_latin(cy.coloring).ok
    rn = generate_scheme(5, 2, "random", seed=3)
    rn2 = generate_scheme(5, 2, "random", seed=3)
    assert rn.coloring.anchor == rn2.coloring.anchor
    cb = generate_scheme(2, 2, "checkerboard")
    assert cb.coloring.anchor == (1, 2)


def test_unknown_mode():
    with pytest.raises(ParameterError, match="mode"):
        generate_scheme(4, 2, "spiral")


# -- determinism and regeneration ------------------------------------------------------


def test_generation_is_deterministic():
    for M, d, mode in [(6, 3, "paper"), (8, 2, "smallbase"), (5, 2, "random")]:
        a = generate_scheme(M, d, mode, seed=0)
        b = generate_scheme(M, d, mode, seed=0)
        assert scheme_to_json_bytes(a) == scheme_to_json_bytes(b)


def test_regenerate_matches_for_every_mode():
    cases = [
        generate_scheme(6, 3, "paper"),
        generate_scheme(9, 2, "smallbase"),
        generate_scheme(5, 3, "cyclic"),
        generate_scheme(4, 2, "random", seed=7),
        generate_scheme(2, 3, "checkerboard"),
    ]
    for scheme in cases:
        again = regenerate_scheme(scheme)
        assert again.coloring.anchor == scheme.coloring.anchor


def test_roundtrip_is_byte_identical(tmp_path):
    scheme = generate_scheme(6, 2, "paper")
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_scheme(scheme, p1)
    save_scheme(load_scheme(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_regenerate_rejects_unknown_mode():
    scheme = generate_scheme(5, 2, "cyclic")
    broken = type(scheme)(
        coloring=scheme.coloring,
        mode="mystery",
        provenance=scheme.provenance,
        warnings=scheme.warnings,
    )
    with pytest.raises(SchemeFormatError):
        regenerate_scheme(broken)


# -- sweep -------------------------------------------------------------------------------


def test_sweep_rows():
    rows = sweep(dims=[2], disks=[3, 4], modes=["cyclic"])
    assert [(r.M, r.d, r.N, r.mode) for r in rows] == [
        (3, 2, 3, "cyclic"),
        (4, 2, 4, "cyclic"),
    ]
    assert all(isinstance(r, SweepRow) for r in rows)
    assert all(r.disc_num >= r.disc_plus_num >= 0 for r in rows)
    assert all(r.runtime_ms >= 0 for r in rows)


def test_sweep_extent_multiplier():
    rows = sweep(dims=[2], disks=[3], modes=["cyclic"], extent_multiplier=4)
    assert rows[0].N == 12


def test_sweep_skips_impossible_combinations():
    log = io.StringIO()
    rows = sweep(dims=[4], disks=[6], modes=["paper", "cyclic"], log=log)
    assert [(r.mode) for r in rows] == ["cyclic"]
    note = log.getvalue()
    assert "skipping" in note and "M=6 d=4 mode=paper" in note


def test_sweep_skips_over_budget_combinations():
    log = io.StringIO()
    rows = sweep(dims=[2], disks=[4], modes=["cyclic"], max_cells=3, log=log)
    assert rows == []
    assert "budget" in log.getvalue()


def test_sweep_csv_append(tmp_path):
    path = tmp_path / "rows.csv"
    sweep(dims=[2], disks=[3], modes=["cyclic"], csv_path=path)
    first = path.read_text().strip().split("\n")
    assert first[0] == "M,d,N,mode,disc_num,disc_plus_num,runtime_ms"
    assert len(first) == 2
    sweep(dims=[2], disks=[4], modes=["cyclic"], csv_path=path)
    second = path.read_text().strip().split("\n")
    assert len(second) == 3  # appended without repeating the header
    assert second[2].startswith("4,2,4,cyclic,")
