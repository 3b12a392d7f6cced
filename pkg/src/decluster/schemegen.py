"""End-to-end scheme construction, regeneration, and experiment sweeps.

``generate_scheme`` is the front door: it factors the disk count, checks
the dimensional precondition, builds and verifies the digital net, reads
off the latin coloring, and packages everything with provenance that is
sufficient to rebuild the scheme bit for bit.
"""

from __future__ import annotations

import csv
import itertools
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .coloring import DEGENERATE_TWO_DIM, Scheme, coloring_from_net, make_baseline
from .discrepancy import disc_report
from .errors import BudgetExceededError, DeclusterError, ParameterError, SchemeFormatError
from .gf import prime_power_decompose
from .nets import (
    DigitalNet,
    crt_compose,
    net_from_generators,
    pascal_power_generators,
    regenerate_net,
    verify_net,
)

MODES = ("paper", "smallbase", "cyclic", "random", "checkerboard")


@dataclass(frozen=True)
class Factorization:
    """M written as a product of prime powers of pairwise distinct primes."""

    M: int
    factors: tuple[int, ...]  # ascending; each is p^k for a distinct prime p

    @property
    def q1(self) -> int:
        """Smallest prime-power factor; the binding constraint on dimension."""
        return self.factors[0]


def factorize_canonical(M: int) -> Factorization:
    """Trial-division factorization of M into ascending prime powers."""
    if M < 2:
        raise ParameterError(f"M={M} must be >= 2")
    factors = []
    rem = M
    p = 2
    while p * p <= rem:
        if rem % p == 0:
            pk = 1
            while rem % p == 0:
                rem //= p
                pk *= p
            factors.append(pk)
        p += 1 if p == 2 else 2
    if rem > 1:
        factors.append(rem)
    return Factorization(M=M, factors=tuple(sorted(factors)))


def build_net(b: int, m: int, d: int) -> DigitalNet:
    """Balanced base-b net: per-prime-power generator nets joined by residues.

    Every prime-power factor q of b gets its own generator-matrix net over
    GF(q); the digitwise residue bijection assembles them into one base-b
    point set, which is balance-checked before it is returned.
    """
    fac = factorize_canonical(b)
    if d > fac.q1 + 1:
        raise ParameterError(
            f"d={d} > q1+1={fac.q1 + 1} for base {b} (prime-power factors {fac.factors})"
        )
    components = [
        net_from_generators(pascal_power_generators(q, d, m)) for q in fac.factors
    ]
    return crt_compose(components, b)


def _smallbase_parameters(M: int, d: int) -> tuple[int, int]:
    """Pick the smallest base p with M = p^k and d <= p+1; return (p, k)."""
    decomp = prime_power_decompose(M)
    if decomp is None:
        raise ParameterError(
            f"M={M} is not a prime power (factors "
            f"{factorize_canonical(M).factors}); smallbase requires M = p^k"
        )
    r, j = decomp
    for s in range(1, j + 1):
        if j % s == 0 and d <= r**s + 1:
            return r**s, j // s
    raise ParameterError(f"d={d} > p+1={M + 1} even for the largest base p=M={M}")


def generate_scheme(
    M: int,
    d: int,
    mode: str,
    *,
    seed: int | None = None,
    skews: Sequence[int] | None = None,
) -> Scheme:
    """Build a complete disk-allocation scheme for M disks in dimension d.

    Modes:
      paper       base-M net with m = d-1 digits; requires d <= q1+1 where
                  q1 is the smallest prime-power factor of M.
      smallbase   M must be p^k for a prime power p with d <= p+1; uses the
                  smallest such base with m = k(d-1) digits.
      cyclic      skewed modular anchor (``skews``, default all ones).
      random      cyclic scrambled by seeded per-axis relabelings.
      checkerboard  the two-disk parity scheme (M = 2 only).

    Degenerate corners are routed to the equivalent baseline: M=1 and d=1
    (single disk / single row: every latin coloring coincides), and M=2 for
    the net-backed modes (the parity scheme is the two-disk construction).
    """
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}; choose from {MODES}")
    if M < 1:
        raise ParameterError(f"disk count M={M} must be >= 1")
    if d < 1:
        raise ParameterError(f"dimension d={d} must be >= 1")
    if mode == "checkerboard":
        return make_baseline("checkerboard", M, d)
    if mode == "cyclic":
        return make_baseline("cyclic", M, d, skews=skews)
    if mode == "random":
        return make_baseline("random", M, d, seed=0 if seed is None else seed)

    # net-backed modes: paper / smallbase
    if M == 1 or d == 1:
        return make_baseline("cyclic", M, d)
    if M == 2:
        return make_baseline("checkerboard", M, d)
    if mode == "paper":
        fac = factorize_canonical(M)
        if d > fac.q1 + 1:
            raise ParameterError(f"d={d} > q1+1={fac.q1 + 1} for M={M}")
        base, m = M, d - 1
    else:
        base, k = _smallbase_parameters(M, d)
        m = k * (d - 1)
    net = build_net(base, m, d)
    coloring = coloring_from_net(net, M)
    warnings = (DEGENERATE_TWO_DIM,) if m == 1 else ()
    provenance = {"kind": "net", "base": base, "m": m, "net": net.provenance}
    return Scheme(coloring=coloring, mode=mode, provenance=provenance, warnings=warnings)


def regenerate_scheme(scheme: Scheme) -> Scheme:
    """Rebuild a scheme purely from its mode and provenance record.

    Used by the verifier: the rebuilt anchor map must match the stored one.
    """
    M, d = scheme.M, scheme.d
    prov = scheme.provenance
    if prov.get("kind") == "net":
        net = regenerate_net(prov["net"])
        check = verify_net(net, 0)
        if not check.ok:
            raise SchemeFormatError(
                "provenance net fails its balance check: "
                f"levels={check.violation.levels} offsets={check.violation.offsets}"
            )
        coloring = coloring_from_net(net, M)
        return Scheme(
            coloring=coloring,
            mode=scheme.mode,
            provenance=scheme.provenance,
            warnings=scheme.warnings,
        )
    if scheme.mode == "checkerboard":
        return make_baseline("checkerboard", M, d)
    if scheme.mode == "cyclic":
        return make_baseline("cyclic", M, d, skews=prov.get("skews"))
    if scheme.mode == "random":
        return make_baseline("random", M, d, seed=prov.get("seed", 0))
    raise SchemeFormatError(
        f"cannot regenerate mode {scheme.mode!r} from provenance {prov!r}"
    )


# ---------------------------------------------------------------------------
# Experiment sweeps


@dataclass(frozen=True)
class SweepRow:
    """One measured cell of a sweep: exact numerators over denominator M."""

    M: int
    d: int
    N: int
    mode: str
    disc_num: int
    disc_plus_num: int
    runtime_ms: float


SWEEP_HEADER = ("M", "d", "N", "mode", "disc_num", "disc_plus_num", "runtime_ms")


def sweep(
    dims: Sequence[int],
    disks: Sequence[int],
    modes: Sequence[str],
    extent_multiplier: int = 1,
    csv_path=None,
    *,
    seed: int = 0,
    max_cells: int | None = None,
    log=None,
) -> list[SweepRow]:
    """Measure disc/disc+ for every (M, d, mode) cell at N = multiplier * M.

    Cells whose mode preconditions fail (or that exceed the evaluation
    budget) are skipped with a note on ``log`` (default stderr).  Rows are
    appended to ``csv_path`` if given, writing a header only when the file
    is new or empty.
    """
    if extent_multiplier < 1:
        raise ParameterError(f"extent multiplier {extent_multiplier} must be >= 1")
    log = sys.stderr if log is None else log
    rows: list[SweepRow] = []
    for M, d, mode in itertools.product(disks, dims, modes):
        try:
            scheme = generate_scheme(M, d, mode, seed=seed)
        except DeclusterError as exc:
            print(f"sweep: skipping M={M} d={d} mode={mode}: {exc}", file=log)
            continue
        N = extent_multiplier * M
        start = time.perf_counter()
        try:
            report = disc_report(scheme, N, max_cells=max_cells)
        except BudgetExceededError as exc:
            print(f"sweep: skipping M={M} d={d} mode={mode}: {exc}", file=log)
            continue
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        rows.append(
            SweepRow(
                M=M,
                d=d,
                N=N,
                mode=mode,
                disc_num=report.disc.num,
                disc_plus_num=report.disc_plus.num,
                runtime_ms=elapsed_ms,
            )
        )
    if csv_path is not None:
        _append_rows(csv_path, rows)
    return rows


def _append_rows(csv_path, rows: Sequence[SweepRow]) -> None:
    path = Path(csv_path)
    need_header = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if need_header:
            writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow(
                [row.M, row.d, row.N, row.mode, row.disc_num, row.disc_plus_num,
                 f"{row.runtime_ms:.3f}"]
            )
