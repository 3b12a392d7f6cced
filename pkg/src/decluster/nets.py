"""Digital point sets in [0,1)^d with exact base-b balance checking.

A point set with b^m points is *balanced at level t* if every base-b
box-shaped interval of volume b^(t-m) (an "elementary interval") holds
exactly b^t points.  Point coordinates are carried as digit vectors, most
significant digit first, so every membership test is pure integer
arithmetic -- no floats anywhere.

Construction is by generator matrices over GF(q): coordinate j of point k
is C_j times the base-q digit vector of k.  Composite bases are assembled
digit-by-digit from coprime prime-power components via the Chinese
remainder theorem.  Every constructor re-checks the balance property
before returning and refuses to hand out a defective point set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import NetConstructionError, ParameterError, SchemeFormatError
from .gf import PrimePowerField, field_for_order, field_from_dict


@dataclass(frozen=True)
class NetParams:
    """Shape of a digital point set: base, digit count, dimension, level."""

    b: int
    m: int
    d: int
    t: int = 0

    def __post_init__(self):
        if self.b < 2:
            raise ParameterError(f"base b={self.b} must be >= 2")
        if self.m < 0:
            raise ParameterError(f"digit count m={self.m} must be >= 0")
        if self.d < 1:
            raise ParameterError(f"dimension d={self.d} must be >= 1")
        if not 0 <= self.t <= self.m:
            raise ParameterError(f"level t={self.t} must lie in [0, m]")

    @property
    def n_points(self) -> int:
        return self.b**self.m


@dataclass(frozen=True)
class ElementaryInterval:
    """Axis-aligned base-b interval: per axis [a * b^-l, (a+1) * b^-l)."""

    levels: tuple[int, ...]
    offsets: tuple[int, ...]

    def __post_init__(self):
        if len(self.levels) != len(self.offsets):
            raise ParameterError("levels and offsets must have equal length")
        if any(l < 0 for l in self.levels):
            raise ParameterError("levels must be >= 0")

    def volume(self, b: int) -> Fraction:
        return Fraction(1, b ** sum(self.levels))

    def contains(self, coord_ints: Sequence[int], b: int, m: int) -> bool:
        """Membership of a point given as per-axis m-digit integers."""
        for level, offset, value in zip(self.levels, self.offsets, coord_ints):
            if level <= m:
                if value // b ** (m - level) != offset:
                    return False
            elif value * b ** (level - m) != offset:
                return False
        return True


@dataclass(frozen=True)
class GeneratorSet:
    """Per-coordinate m-by-m generator matrices over one finite field."""

    field: PrimePowerField
    m: int
    d: int
    matrices: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"dimension d={self.d} must be >= 1")
        if self.d > self.field.q + 1:
            raise ParameterError(
                f"d={self.d} > q+1={self.field.q + 1}: at most q+1 coordinates "
                f"are supported over GF({self.field.q})"
            )
        if len(self.matrices) != self.d:
            raise ParameterError("need exactly one matrix per coordinate")
        for mat in self.matrices:
            if len(mat) != self.m or any(len(row) != self.m for row in mat):
                raise ParameterError("generator matrices must be m x m")


@dataclass(frozen=True, eq=False)
class DigitalNet:
    """A digital point set: digits[k, i, r] is digit r of coordinate i of point k.

    Digits are most significant first, so coordinate i of point k has value
    sum(digits[k, i, r] * b**-(r+1) for r in range(m)).
    """

    params: NetParams
    digits: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = (self.params.n_points, self.params.d, self.params.m)
        if self.digits.shape != expected:
            raise ParameterError(
                f"digit array has shape {self.digits.shape}, expected {expected}"
            )

    @property
    def n_points(self) -> int:
        return self.params.n_points

    def coord_ints(self, length: int | None = None) -> np.ndarray:
        """Per-axis digit-prefix integers, shape (n, d).

        With ``length=l`` the first l digits of each coordinate are read as a
        base-b integer; default is all m digits (the exact coordinate value
        scaled by b^m).
        """
        m = self.params.m
        length = m if length is None else length
        if not 0 <= length <= m:
            raise ParameterError(f"prefix length {length} not in [0, {m}]")
        out = np.zeros(self.digits.shape[:2], dtype=np.int64)
        for r in range(length):
            out = out * self.params.b + self.digits[:, :, r]
        return out

    def point_value(self, k: int) -> tuple[Fraction, ...]:
        """Exact coordinates of point k as rationals in [0, 1)."""
        scale = self.params.b**self.params.m
        ints = self.coord_ints()[k]
        return tuple(Fraction(int(v), scale) for v in ints)

    @classmethod
    def from_digit_lists(cls, b: int, points, t: int = 0, provenance=None) -> "DigitalNet":
        """Build from nested lists: points[k][i] is the digit list of coord i."""
        arr = np.asarray(points, dtype=np.int64)
        if arr.ndim == 2:  # m == 0: every coordinate an empty digit list
            arr = arr.reshape(arr.shape[0], arr.shape[1], 0)
        if arr.ndim != 3:
            raise ParameterError("points must be a (n_points, d, m) digit array")
        n, d, m = arr.shape
        params = NetParams(b=b, m=m, d=d, t=t)
        if n != params.n_points:
            raise ParameterError(f"got {n} points, expected b^m = {params.n_points}")
        if arr.size and (arr.min() < 0 or arr.max() >= b):
            raise ParameterError(f"digits must lie in [0, {b})")
        return cls(params=params, digits=arr, provenance=provenance or {})


@dataclass(frozen=True)
class NetCheck:
    """Outcome of a balance check; the first violation, if any, in scan order."""

    ok: bool
    t: int
    intervals_checked: int
    expected_points: int
    violation: ElementaryInterval | None = None
    found_points: int | None = None


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All vectors of `parts` nonnegative ints summing to `total`, ascending lex."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_elementary_intervals(
    b: int, m: int, d: int, s: int
) -> Iterator[ElementaryInterval]:
    """Every elementary interval of [0,1)^d with level sum s, lexicographic.

    Order is by (levels, offsets).  The count is C(s+d-1, d-1) * b**s.
    """
    if b < 2 or d < 1:
        raise ParameterError(f"need b >= 2 and d >= 1, got b={b}, d={d}")
    if not 0 <= s <= m * d:
        raise ParameterError(f"level sum s={s} must lie in [0, m*d={m * d}]")
    for levels in _compositions(s, d):
        sizes = [b**l for l in levels]
        total = b**s
        for rank in range(total):
            offsets = []
            rem = rank
            for size in reversed(sizes):
                offsets.append(rem % size)
                rem //= size
            yield ElementaryInterval(levels=levels, offsets=tuple(reversed(offsets)))


def verify_net(net: DigitalNet, t: int | None = None) -> NetCheck:
    """Check that every elementary interval with level sum m-t holds b^t points.

    Exact integer digit-prefix counting throughout.  On failure the report
    carries the first offending interval in (levels, offsets) order, which
    does not depend on any evaluation schedule.
    """
    params = net.params
    t = params.t if t is None else t
    if not 0 <= t <= params.m:
        raise ParameterError(f"level t={t} must lie in [0, m={params.m}]")
    b, m, d = params.b, params.m, params.d
    s = m - t
    expected = b**t
    # prefix[i][l][k]: the first l digits of coordinate i of point k, as an int.
    prefix = []
    for i in range(d):
        per_level = [np.zeros(net.n_points, dtype=np.int64)]
        for l in range(1, s + 1):
            per_level.append(per_level[-1] * b + net.digits[:, i, l - 1].astype(np.int64))
        prefix.append(per_level)
    n_checked = 0
    for levels in _compositions(s, d):
        key = prefix[0][levels[0]]
        for i in range(1, d):
            if levels[i]:
                key = key * (b ** levels[i]) + prefix[i][levels[i]]
        counts = np.bincount(key, minlength=b**s)
        n_checked += b**s
        if counts.min() != expected or counts.max() != expected:
            bad = int(np.argmax(counts != expected))
            offsets = []
            rem = bad
            for l in reversed(levels):
                offsets.append(rem % b**l)
                rem //= b**l
            interval = ElementaryInterval(levels=levels, offsets=tuple(reversed(offsets)))
            return NetCheck(
                ok=False,
                t=t,
                intervals_checked=n_checked,
                expected_points=expected,
                violation=interval,
                found_points=int(counts[bad]),
            )
    return NetCheck(ok=True, t=t, intervals_checked=n_checked, expected_points=expected)


def pascal_power_generators(q: int, d: int, m: int) -> GeneratorSet:
    """Upper-triangular binomial-power generator matrices over GF(q).

    Matrix j (1-indexed) has entries binom(c, r) * alpha_j^(c-r) for r <= c,
    where alpha_j is the j-th field element in index order (alpha_1 = 0, so
    the first matrix is the identity).  When d == q+1 the last coordinate
    uses the anti-diagonal reversal matrix instead.
    """
    fld = field_for_order(q)
    if d < 1:
        raise ParameterError(f"dimension d={d} must be >= 1")
    if d > q + 1:
        raise ParameterError(
            f"d={d} > q+1={q + 1}: at most q+1 coordinates are supported over GF({q})"
        )
    p = fld.p
    matrices = []
    for j in range(1, min(d, q) + 1):
        alpha = j - 1  # field element with index j-1
        mat = [[0] * m for _ in range(m)]
        for r in range(m):
            for c in range(r, m):
                binom = math.comb(c, r) % p
                mat[r][c] = fld.mul(binom, fld.pow(alpha, c - r)) if c > r else binom
        matrices.append(tuple(tuple(row) for row in mat))
    if d == q + 1:
        rev = [[0] * m for _ in range(m)]
        for r in range(m):
            rev[r][m - 1 - r] = 1
        matrices.append(tuple(tuple(row) for row in rev))
    return GeneratorSet(field=fld, m=m, d=d, matrices=tuple(matrices))


def net_from_generators(gens: GeneratorSet) -> DigitalNet:
    """Digital point set from generator matrices, balance-checked at t=0.

    Point k's index digits (least significant first) are multiplied by each
    coordinate's matrix over GF(q); the resulting digit vector is the
    coordinate, most significant digit first.
    """
    fld = gens.field
    q, m, d = fld.q, gens.m, gens.d
    n = q**m
    ks = np.arange(n, dtype=np.int64)
    # index digits, least significant first: shape (n, m)
    idx_digits = (ks[:, None] // q ** np.arange(m, dtype=np.int64)) % q
    digits = np.zeros((n, d, m), dtype=np.int64)
    for j, mat in enumerate(gens.matrices):
        digits[:, j, :] = _matvec_field(fld, np.asarray(mat, dtype=np.int64), idx_digits)
    provenance = {
        "kind": "generators",
        "field": fld.as_dict(),
        "matrices": [[list(row) for row in mat] for mat in gens.matrices],
    }
    net = DigitalNet(params=NetParams(b=q, m=m, d=d, t=0), digits=digits, provenance=provenance)
    check = verify_net(net, 0)
    if not check.ok:
        raise NetConstructionError(
            f"generator matrices over GF({q}) produced an unbalanced point set: "
            f"interval levels={check.violation.levels} offsets={check.violation.offsets} "
            f"holds {check.found_points} points, expected {check.expected_points}",
            interval=check.violation,
            found=check.found_points,
            expected=check.expected_points,
        )
    return net


def _matvec_field(fld: PrimePowerField, mat: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Row-by-row matrix product over the field, vectorized across many vectors.

    ``vecs`` has shape (n, m) of element indices; returns (n, m) where row k
    is mat @ vecs[k].
    """
    if fld.e == 1:
        return (vecs @ mat.T) % fld.p
    n, m = vecs.shape
    out = np.zeros((n, m), dtype=np.int64)
    mul, add = fld.mul_table, fld.add_table
    if mul is None:  # enormous field: fall back to scalar arithmetic
        for k in range(n):
            for r in range(m):
                acc = 0
                for c in range(m):
                    acc = fld.add(acc, fld.mul(int(mat[r, c]), int(vecs[k, c])))
                out[k, r] = acc
        return out
    for r in range(m):
        acc = np.zeros(n, dtype=np.int64)
        for c in range(m):
            coef = int(mat[r, c])
            if coef:
                acc = add[acc, mul[coef, vecs[:, c]]]
        out[:, r] = acc
    return out


def crt_compose(components: Sequence[DigitalNet], b: int) -> DigitalNet:
    """Assemble a base-b point set from coprime prime-power components.

    All components must share m and d, their bases must be pairwise coprime
    with product b, and each must be balanced at t=0.  Index digits and
    output digits correspond componentwise under the residue bijection
    Z_b = Z_q1 x ... x Z_qu, applied digit by digit.  A single component is
    passed through unchanged.
    """
    if not components:
        raise ParameterError("need at least one component")
    bases = [c.params.b for c in components]
    m, d = components[0].params.m, components[0].params.d
    for c in components:
        if (c.params.m, c.params.d) != (m, d):
            raise ParameterError("components must share m and d")
    prod = math.prod(bases)
    if prod != b:
        raise ParameterError(f"component bases {bases} multiply to {prod}, not {b}")
    for i, bi in enumerate(bases):
        for bj in bases[i + 1 :]:
            if math.gcd(bi, bj) != 1:
                raise ParameterError(f"component bases {bases} are not pairwise coprime")
    if len(components) == 1:
        return components[0]

    # CRT recombination weights: v = sum(residue_i * w_i) mod b
    weights = []
    for qi in bases:
        rest = b // qi
        weights.append(rest * pow(rest, -1, qi))

    n = b**m
    ks = np.arange(n, dtype=np.int64)
    idx_digits = (ks[:, None] // b ** np.arange(m, dtype=np.int64)) % b  # (n, m), LSF
    out = np.zeros((n, d, m), dtype=np.int64)
    for comp, qi, wi in zip(components, bases, weights):
        comp_index = ((idx_digits % qi) * qi ** np.arange(m, dtype=np.int64)).sum(axis=1)
        out += comp.digits[comp_index] * wi
    out %= b
    provenance = {
        "kind": "crt",
        "components": [
            {"b": c.params.b, **c.provenance} for c in components
        ],
    }
    net = DigitalNet(params=NetParams(b=b, m=m, d=d, t=0), digits=out, provenance=provenance)
    check = verify_net(net, 0)
    if not check.ok:
        raise NetConstructionError(
            f"residue composition to base {b} produced an unbalanced point set: "
            f"interval levels={check.violation.levels} offsets={check.violation.offsets} "
            f"holds {check.found_points} points, expected {check.expected_points}",
            interval=check.violation,
            found=check.found_points,
            expected=check.expected_points,
        )
    return net


def permutation_net(perm: Sequence[int], b: int) -> DigitalNet:
    """Two-dimensional one-digit point set {(i/b, perm[i]/b)}; perm is 0-based."""
    perm = [int(v) for v in perm]
    if sorted(perm) != list(range(b)):
        raise ParameterError(f"perm must be a permutation of 0..{b - 1}")
    digits = np.zeros((b, 2, 1), dtype=np.int64)
    digits[:, 0, 0] = np.arange(b)
    digits[:, 1, 0] = perm
    return DigitalNet(
        params=NetParams(b=b, m=1, d=2, t=0),
        digits=digits,
        provenance={"kind": "permutation", "perm": perm},
    )


# ---------------------------------------------------------------------------
# Serialization


def net_to_dict(net: DigitalNet) -> dict:
    return {
        "b": net.params.b,
        "m": net.params.m,
        "d": net.params.d,
        "t": net.params.t,
        "points": net.digits.tolist(),
        "provenance": net.provenance,
    }


def net_from_dict(data: dict) -> DigitalNet:
    try:
        b = int(data["b"])
        m = int(data["m"])
        d = int(data["d"])
        t = int(data["t"])
        points = data["points"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemeFormatError(f"malformed net description: {exc}") from exc
    arr = np.asarray(points, dtype=np.int64)
    if arr.shape != (b**m, d, m):
        # reshape explicitly for m == 0, where nested lists lose the last axis
        if m == 0 and arr.shape[:2] == (b**m, d):
            arr = arr.reshape(b**m, d, 0)
        else:
            raise SchemeFormatError(
                f"points array has shape {arr.shape}, expected {(b**m, d, m)}"
            )
    if arr.size and (arr.min() < 0 or arr.max() >= b):
        raise SchemeFormatError(f"digits must lie in [0, {b})")
    net = DigitalNet(
        params=NetParams(b=b, m=m, d=d, t=t),
        digits=arr,
        provenance=data.get("provenance", {}),
    )
    return net


def save_net(net: DigitalNet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net_to_dict(net), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_net(path) -> DigitalNet:
    with open(path, "r", encoding="utf-8") as fh:
        return net_from_dict(json.load(fh))


def regenerate_net(provenance: dict) -> DigitalNet:
    """Rebuild a point set from its own provenance record."""
    kind = provenance.get("kind")
    if kind == "generators":
        fld = field_from_dict(provenance["field"])
        mats = tuple(tuple(tuple(int(v) for v in row) for row in mat) for mat in provenance["matrices"])
        m = len(mats[0]) if mats else 0
        gens = GeneratorSet(field=fld, m=m, d=len(mats), matrices=mats)
        return net_from_generators(gens)
    if kind == "crt":
        comps = [regenerate_net(c) for c in provenance["components"]]
        b = math.prod(c.params.b for c in comps)
        return crt_compose(comps, b)
    if kind == "permutation":
        perm = provenance["perm"]
        return permutation_net(perm, len(perm))
    raise SchemeFormatError(f"cannot regenerate a net from provenance kind {kind!r}")
