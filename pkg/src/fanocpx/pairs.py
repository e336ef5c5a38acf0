"""Defining pairs: the integral data (A, P) presenting a rational
variety with a torus action of complexity one.

P is an (r+s) x (n+m) integer matrix.  Its first r rows are determined
by the exponent tuples: the columns of block 0 carry -l_{0j} in every
upper row, the columns of block i >= 1 carry l_{ij} in upper row i, and
the m free columns are zero there.  The lower s rows are free integer
data (the d and d' blocks).  A is a 2 x (r+1) rational matrix whose
columns are pairwise linearly independent.

Only the exponents and the lower rows are stored; the upper rows are
always reassembled in normal form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .geometry import Cone, primitive_vector
from .intlinalg import (
    hermite_normal_form,
    invert_unimodular,
    lattice_coordinates,
    matmul,
    reduce_mod_lattice,
    smith_normal_form,
)


class ValidationError(ValueError):
    """Structurally malformed defining-pair data."""


def default_coefficients(r):
    """The default coefficient matrix: column i is (1, i)."""
    return (
        tuple(Fraction(1) for _ in range(r + 1)),
        tuple(Fraction(i) for i in range(r + 1)),
    )


@dataclass(frozen=True)
class DefiningPair:
    exponents: tuple        # r+1 tuples of ints >= 1, lengths n_0..n_r
    d_rows: tuple           # s rows of length n
    free_rows: tuple        # s rows of length m
    coeffs: tuple = None    # 2 x (r+1) Fractions; default column i = (1, i)

    def __post_init__(self):
        exps = tuple(tuple(int(x) for x in block) for block in self.exponents)
        if len(exps) < 2:
            raise ValidationError("need at least two exponent blocks (r >= 1)")
        if any(len(block) == 0 for block in exps):
            raise ValidationError("empty exponent block")
        n = sum(len(block) for block in exps)
        d = tuple(tuple(int(x) for x in row) for row in self.d_rows)
        if not d:
            raise ValidationError("need at least one lower row (s >= 1)")
        if any(len(row) != n for row in d):
            raise ValidationError("d block must be s x n")
        free = tuple(tuple(int(x) for x in row) for row in self.free_rows)
        if len(free) != len(d):
            raise ValidationError("d and dprime must have the same row count")
        m = len(free[0]) if free else 0
        if any(len(row) != m for row in free):
            raise ValidationError("ragged dprime block")
        if self.coeffs is None:
            coeffs = default_coefficients(len(exps) - 1)
        else:
            coeffs = tuple(
                tuple(Fraction(x) for x in row) for row in self.coeffs
            )
            if len(coeffs) != 2 or any(len(row) != len(exps) for row in coeffs):
                raise ValidationError("coefficient matrix must be 2 x (r+1)")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "d_rows", d)
        object.__setattr__(self, "free_rows", free)
        object.__setattr__(self, "coeffs", coeffs)

    # -- shape bookkeeping ---------------------------------------------

    @property
    def r(self):
        return len(self.exponents) - 1

    @property
    def s(self):
        return len(self.d_rows)

    @property
    def n(self):
        return sum(len(block) for block in self.exponents)

    @property
    def m(self):
        return len(self.free_rows[0]) if self.free_rows else 0

    @property
    def block_sizes(self):
        return tuple(len(block) for block in self.exponents)

    @property
    def total_columns(self):
        return self.n + self.m

    @property
    def delta(self):
        """Expected free rank of the class group: n+m-(r+s)."""
        return self.n + self.m - self.r - self.s

    @property
    def dim_x(self):
        return self.s + 1

    def block_spans(self):
        """Column index ranges [(start, stop)] for blocks 0..r."""
        spans = []
        start = 0
        for size in self.block_sizes:
            spans.append((start, start + size))
            start += size
        return tuple(spans)

    def column_labels(self):
        """Per column: ("block", i, j) for T_{ij} or ("free", k)."""
        labels = []
        for i, block in enumerate(self.exponents):
            for j in range(len(block)):
                labels.append(("block", i, j))
        for k in range(self.m):
            labels.append(("free", k))
        return tuple(labels)

    # -- the actual matrix ----------------------------------------------

    def upper_rows(self):
        rows = []
        for i in range(1, self.r + 1):
            row = []
            for b, block in enumerate(self.exponents):
                if b == 0:
                    row.extend(-x for x in block)
                elif b == i:
                    row.extend(block)
                else:
                    row.extend(0 for _ in block)
            row.extend(0 for _ in range(self.m))
            rows.append(tuple(row))
        return tuple(rows)

    def lower_rows(self):
        return tuple(dr + fr for dr, fr in zip(self.d_rows, self.free_rows))

    def matrix(self):
        return self.upper_rows() + self.lower_rows()

    def columns(self):
        mat = self.matrix()
        return tuple(
            tuple(row[j] for row in mat) for j in range(self.total_columns)
        )

    def __repr__(self):
        return (
            f"DefiningPair(exponents={self.exponents}, d={self.d_rows}, "
            f"dprime={self.free_rows})"
        )


@dataclass
class ValidationReport:
    errors: tuple
    warnings: tuple

    @property
    def ok(self):
        return not self.errors

    def redundant_blocks(self):
        return tuple(w[0] for w in self.warnings if w[1] == "redundant block")


def validate(dp):
    """Check the construction invariants; never raises.

    Errors make the pair unusable; a redundant block (a single variable
    with exponent 1) is only a warning since it can be eliminated.
    """
    errors = []
    warnings = []
    if any(x < 1 for block in dp.exponents for x in block):
        errors.append("exponents must be >= 1")
    if not (0 < dp.s < dp.n + dp.m - dp.r):
        errors.append("lower row count s must satisfy 0 < s < n+m-r")
    cols = dp.columns()
    for j, col in enumerate(cols):
        if primitive_vector(col) != col or not any(col):
            errors.append(f"column not primitive: index {j}")
    if len(set(cols)) != len(cols):
        errors.append("columns not pairwise distinct")
    if not errors:
        if not Cone.from_generators(cols, dim=dp.r + dp.s).is_full_space():
            errors.append("columns do not generate the ambient space as a cone")
    a_cols = list(zip(*dp.coeffs))
    for i, j in itertools.combinations(range(len(a_cols)), 2):
        if a_cols[i][0] * a_cols[j][1] - a_cols[i][1] * a_cols[j][0] == 0:
            errors.append(
                f"coefficient columns {i} and {j} are linearly dependent"
            )
    for i, block in enumerate(dp.exponents):
        if len(block) == 1 and block[0] == 1:
            warnings.append((i, "redundant block"))
    return ValidationReport(tuple(errors), tuple(warnings))


# -- admissible operations ---------------------------------------------


@dataclass(frozen=True)
class SwapInBlock:
    block: int
    j1: int
    j2: int


@dataclass(frozen=True)
class SwapBlocks:
    first: int
    second: int


@dataclass(frozen=True)
class AddUpperToLower:
    upper: int      # 1..r
    lower: int      # 0..s-1
    factor: int


@dataclass(frozen=True)
class LowerRowOp:
    matrix: tuple   # s x s, determinant +-1

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", tuple(tuple(int(x) for x in row) for row in self.matrix)
        )


@dataclass(frozen=True)
class SwapFreeColumns:
    k1: int
    k2: int


def _permute_blocks(dp, perm):
    """Reorder the blocks of dp by perm (new position -> old block)."""
    spans = dp.block_spans()
    exps = tuple(dp.exponents[b] for b in perm)
    order = []
    for b in perm:
        order.extend(range(*spans[b]))
    d = tuple(tuple(row[j] for j in order) for row in dp.d_rows)
    coeffs = tuple(tuple(row[b] for b in perm) for row in dp.coeffs)
    return DefiningPair(exps, d, dp.free_rows, coeffs)


def apply_op(dp, op):
    """Apply one admissible operation, returning a new pair.

    The upper rows are reassembled in normal form afterwards, so a
    block swap implicitly performs the unimodular row fix that keeps
    the presentation in shape.
    """
    if isinstance(op, SwapInBlock):
        block = op.block
        if not (0 <= block <= dp.r):
            raise ValueError("block index out of range")
        size = dp.block_sizes[block]
        if not (0 <= op.j1 < size and 0 <= op.j2 < size):
            raise ValueError("column index out of range")
        exps = list(map(list, dp.exponents))
        exps[block][op.j1], exps[block][op.j2] = (
            exps[block][op.j2],
            exps[block][op.j1],
        )
        start = dp.block_spans()[block][0]
        c1, c2 = start + op.j1, start + op.j2
        d = [list(row) for row in dp.d_rows]
        for row in d:
            row[c1], row[c2] = row[c2], row[c1]
        return DefiningPair(tuple(map(tuple, exps)), tuple(map(tuple, d)),
                            dp.free_rows, dp.coeffs)
    if isinstance(op, SwapBlocks):
        if not (0 <= op.first <= dp.r and 0 <= op.second <= dp.r):
            raise ValueError("block index out of range")
        perm = list(range(dp.r + 1))
        perm[op.first], perm[op.second] = perm[op.second], perm[op.first]
        return _permute_blocks(dp, perm)
    if isinstance(op, AddUpperToLower):
        if not (1 <= op.upper <= dp.r):
            raise ValueError("upper row index out of range")
        if not (0 <= op.lower < dp.s):
            raise ValueError("lower row index out of range")
        upper = dp.upper_rows()[op.upper - 1]
        d = [list(row) for row in dp.d_rows]
        for j in range(dp.n):
            d[op.lower][j] += op.factor * upper[j]
        # upper rows vanish on the free columns, so dprime is unchanged
        return DefiningPair(dp.exponents, tuple(map(tuple, d)),
                            dp.free_rows, dp.coeffs)
    if isinstance(op, LowerRowOp):
        w = op.matrix
        if len(w) != dp.s or any(len(row) != dp.s for row in w):
            raise ValueError("row operation matrix must be s x s")
        try:
            invert_unimodular(w)
        except ValueError:
            raise ValueError("row operation matrix is not unimodular")
        d = matmul(w, dp.d_rows)
        free = matmul(w, dp.free_rows) if dp.m else dp.free_rows
        return DefiningPair(dp.exponents, d, free, dp.coeffs)
    if isinstance(op, SwapFreeColumns):
        if not (0 <= op.k1 < dp.m and 0 <= op.k2 < dp.m):
            raise ValueError("free column index out of range")
        free = [list(row) for row in dp.free_rows]
        for row in free:
            row[op.k1], row[op.k2] = row[op.k2], row[op.k1]
        return DefiningPair(dp.exponents, dp.d_rows, tuple(map(tuple, free)),
                            dp.coeffs)
    raise TypeError(f"not an admissible operation: {op!r}")


def apply_ops(dp, ops):
    for op in ops:
        dp = apply_op(dp, op)
    return dp


# -- canonical form ------------------------------------------------------


def _canonical_lower_rows(dp):
    """Deterministic lower rows for a fixed column order.

    The row lattice of P and the span of the upper rows are both
    invariant under the row-type admissible operations, so a lower-row
    representative computed from those two lattices alone is a gauge
    independent choice.  The quotient (row lattice)/(upper-row span) is
    free of rank s; we lift a deterministic basis of it and reduce the
    lifts to minimal nonnegative residues modulo the upper-row lattice.
    """
    p = dp.matrix()
    width = dp.total_columns
    h = hermite_normal_form(p, width=width)
    if len(h) != dp.r + dp.s:
        raise ValueError("defining matrix does not have full row rank")
    upper = dp.upper_rows()
    cl = []
    for row in upper:
        coords = lattice_coordinates(h, row)
        if coords is None:
            raise AssertionError("upper row escaped its own row lattice")
        cl.append(coords)
    u, dmat, v = smith_normal_form(cl, width=dp.r + dp.s)
    if any(dmat[i][i] != 1 for i in range(dp.r)):
        raise ValueError("upper rows are not part of a lattice basis")
    vinv = invert_unimodular(v)
    hprime = matmul(vinv, h)
    upper_h = hermite_normal_form(upper, width=width)
    out = []
    for k in range(dp.r, dp.r + dp.s):
        out.append(reduce_mod_lattice(upper_h, hprime[k]))
    return tuple(out)


def _serialize(dp):
    return (
        dp.block_sizes,
        dp.exponents,
        dp.d_rows,
        dp.free_rows,
        dp.coeffs,
    )


_CANONICAL_GUARD = 20000


def _tie_runs(items, key):
    """Indices of items grouped into runs of equal sort key, in sorted
    key order.  Permuting within runs preserves the sorted order."""
    order = sorted(range(len(items)), key=lambda i: key(items[i]))
    runs = []
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and key(items[order[end + 1]]) == key(items[order[pos]]):
            end += 1
        runs.append(order[pos : end + 1])
        pos = end + 1
    return runs


def _run_count(runs):
    total = 1
    for run in runs:
        for k in range(2, len(run) + 1):
            total *= k
    return total


def _run_permutations(runs):
    """All permutations obtained by permuting each run in place."""
    pools = [list(itertools.permutations(run)) for run in runs]
    out = []
    for combo in itertools.product(*pools):
        perm = []
        for part in combo:
            perm.extend(part)
        out.append(tuple(perm))
    return out


def canonical_form(dp):
    """Deterministic orbit representative under the admissible
    operations.  Column symmetries are searched exhaustively over the
    sort-tie permutations; row freedom is removed by the lattice
    construction in _canonical_lower_rows."""
    blocks = list(range(dp.r + 1))
    block_key = lambda b: (len(dp.exponents[b]), tuple(sorted(dp.exponents[b])))
    block_runs = _tie_runs(blocks, block_key)
    inblock_runs = [
        _tie_runs(list(dp.exponents[b]), lambda x: x) for b in blocks
    ]
    total = _run_count(block_runs)
    for runs in inblock_runs:
        total *= _run_count(runs)
    for k in range(2, dp.m + 1):
        total *= k
    if total > _CANONICAL_GUARD:
        raise RuntimeError("canonical form search space too large")
    block_perms = _run_permutations(block_runs)
    per_block_perms = [_run_permutations(runs) for runs in inblock_runs]
    free_perms = list(itertools.permutations(range(dp.m)))

    best = None
    best_dp = None
    for bperm in block_perms:
        base = _permute_blocks(dp, bperm)
        base_spans = base.block_spans()
        for inblocks in itertools.product(*[per_block_perms[b] for b in bperm]):
            exps = []
            col_order = []
            for newpos, (b, perm) in enumerate(zip(bperm, inblocks)):
                exps.append(tuple(base.exponents[newpos][j] for j in perm))
                start = base_spans[newpos][0]
                col_order.extend(start + j for j in perm)
            d = tuple(tuple(row[j] for j in col_order) for row in base.d_rows)
            for fperm in free_perms:
                free = tuple(
                    tuple(row[k] for k in fperm) for row in base.free_rows
                )
                candidate = DefiningPair(tuple(exps), d, free, base.coeffs)
                lower = _canonical_lower_rows(candidate)
                candidate = DefiningPair(
                    tuple(exps),
                    tuple(row[: dp.n] for row in lower),
                    tuple(row[dp.n :] for row in lower),
                    base.coeffs,
                )
                key = _serialize(candidate)
                if best is None or key < best:
                    best = key
                    best_dp = candidate
    return best_dp


def canonical_key(dp):
    """Hashable serialization of the canonical form."""
    return _serialize(canonical_form(dp))


# -- JSON encoding -------------------------------------------------------

_BIG = 2**53


def _enc_int(x):
    return str(x) if abs(x) > _BIG else x


def _dec_int(x):
    if isinstance(x, bool):
        raise ValidationError("expected an integer, got a boolean")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x, 10)
        except ValueError:
            raise ValidationError(f"not an integer: {x!r}")
    raise ValidationError(f"not an integer: {x!r}")


def to_json_dict(dp):
    return {
        "r": dp.r,
        "ns": [len(b) for b in dp.exponents],
        "m": dp.m,
        "l": [[_enc_int(x) for x in block] for block in dp.exponents],
        "d": [[_enc_int(x) for x in row] for row in dp.d_rows],
        "dprime": [[_enc_int(x) for x in row] for row in dp.free_rows],
        "A": [
            [[_enc_int(x.numerator), _enc_int(x.denominator)] for x in row]
            for row in dp.coeffs
        ],
    }


def from_json_dict(data):
    if not isinstance(data, dict):
        raise ValidationError("top-level JSON value must be an object")
    required = {"r", "ns", "m", "l", "d", "dprime"}
    missing = required - set(data)
    if missing:
        raise ValidationError(f"missing keys: {sorted(missing)}")
    r = _dec_int(data["r"])
    ns = [_dec_int(x) for x in data["ns"]]
    m = _dec_int(data["m"])
    exps = tuple(tuple(_dec_int(x) for x in block) for block in data["l"])
    if len(exps) != r + 1 or [len(b) for b in exps] != ns:
        raise ValidationError("l is inconsistent with r and ns")
    d = tuple(tuple(_dec_int(x) for x in row) for row in data["d"])
    free = tuple(tuple(_dec_int(x) for x in row) for row in data["dprime"])
    if any(len(row) != m for row in free):
        raise ValidationError("dprime is inconsistent with m")
    coeffs = None
    if "A" in data and data["A"] is not None:
        rows = data["A"]
        if len(rows) != 2:
            raise ValidationError("A must have two rows")
        coeffs = tuple(
            tuple(Fraction(_dec_int(p[0]), _dec_int(p[1])) for p in row)
            for row in rows
        )
    try:
        return DefiningPair(exps, d, free, coeffs)
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc))
