"""Bounded search for terminal Fano threefolds with a two-torus action.

The search runs per constellation: a choice of class-group rank, block
sizes and free-variable count.  Within one constellation it proceeds in
three stages.

* Frames.  Each variable is assigned a support pattern, the set of
  coordinates where its weight is allowed to be nonzero, together with
  its relation exponent.  The effective cone is normalized to the
  nonnegative orthant, so patterns are the nonempty coordinate subsets.
  Frames already encode combinatorial minimality (every extremal ray
  must carry at least two weights), the per-block support coverage
  forced by the relation degree being interior, platonicity of every
  elementary exponent tuple, and block irredundancy.

* Values.  Weights are integer vectors supported on their pattern with
  entries in [1, weight_cap].  One block pins the relation degree; the
  remaining blocks are solved against it exactly.  Fast necessary
  filters on the graded data alone (anticanonical class interior,
  full-dimensional weight cones of relevant faces, class-group
  generation along positive-dimensional strata) cut the field before
  any defining matrix is built.

* Lattices.  For a surviving graded system the defining matrices are
  the finite-index row lattices between the exponent rows and the
  saturated kernel of the weight matrix, enumerated in Hermite form.
  Every candidate then runs the full predicate pipeline: validate,
  Fano, Q-factorial, log terminal, factorial positive strata, terminal,
  combinatorially minimal, non-toric.  Output is deduplicated by
  canonical form plus the invariant signature.

The budget is a box, not a proof.  A frontier record is emitted when a
candidate surviving the cheap graded filters sits on the box boundary
or was cut by a hard cap; a survey with a nonempty frontier is marked
exhausted, meaning enlarging the budget could change the answer.  The
search normalizes the effective cone to the standard orthant with
unimodular extremal rays and weights off the origin; systems outside
that normal form are not visited.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from multiprocessing import get_context

from .complexes import (
    build_leaf_complex,
    is_log_terminal,
    platonic_checks,
)
from .geometry import Cone, DescriptionSizeError
from .grading import grading_of, is_combinatorially_minimal, is_fano
from .intlinalg import (
    KElement,
    cokernel_of_rows,
    hermite_normal_form,
    kernel_basis,
    lattice_coordinates,
    reduce_mod_lattice,
)
from .pairs import DefiningPair, _serialize, canonical_form, validate
from .strata import RelevantData
from .table import target_rows


# -- constellations ------------------------------------------------------


@dataclass(frozen=True)
class Constellation:
    """Shape data of one search cell: class-group rank, block sizes in
    weakly decreasing order, and the number of free variables."""

    label: str
    class_rank: int
    block_sizes: tuple
    free_count: int

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(x) for x in self.block_sizes))

    @property
    def r(self):
        return len(self.block_sizes) - 1

    @property
    def n(self):
        return sum(self.block_sizes)

    @property
    def total_slots(self):
        return self.n + self.free_count


_CONSTELLATIONS = (
    Constellation("1a", 3, (3, 3, 1), 0),
    Constellation("1b", 3, (3, 3, 1, 1), 0),
    Constellation("1c", 3, (2, 2, 2, 2), 0),
    Constellation("1d", 3, (2, 2, 2, 2, 1), 0),
    Constellation("1e", 3, (2, 2, 2, 2, 1, 1), 0),
    Constellation("2a", 2, (2, 2, 2), 0),
    Constellation("2b", 2, (2, 2, 2, 1), 0),
    Constellation("2c", 2, (2, 2, 2, 1, 1), 0),
    Constellation("2d", 2, (3, 2, 1), 0),
    Constellation("2e", 2, (3, 2, 1, 1), 0),
    Constellation("2f", 2, (4, 1, 1), 0),
    Constellation("2g", 2, (2, 2, 1), 1),
    Constellation("2h", 2, (2, 2, 1, 1), 1),
    Constellation("2i", 2, (3, 1, 1), 1),
    Constellation("2j", 2, (2, 1, 1), 2),
)


def constellations():
    """All shape cells with threefold dimension and class rank two or
    three; every cell satisfies n + m = r + 2 + rank."""
    return _CONSTELLATIONS


def constellation(label):
    for c in _CONSTELLATIONS:
        if c.label == label:
            return c
    raise KeyError(f"no constellation labelled {label!r}")


# -- budgets -------------------------------------------------------------


@dataclass(frozen=True)
class SearchBudget:
    """Box bounding the search.

    d_cap bounds the absolute value of reduced lower-row entries,
    exponent_cap the relation exponents, weight_cap the weight
    coordinates.  fallback_cap bounds everything else that would
    otherwise be unbounded: the relation-degree coordinates and the
    index of the row lattice.  volume_cap, when set, skips candidates
    whose bounded-part polytope has larger normalized volume, recording
    a frontier entry.  work_cap, when set, stops a survey after that
    many pipeline runs.  A cap of zero makes the box empty: the survey
    returns no classes and is marked exhausted.
    """

    d_cap: int = 20
    exponent_cap: int = 5
    weight_cap: int = 8
    fallback_cap: int = 40
    volume_cap: int | None = None
    work_cap: int | None = None

    def __post_init__(self):
        for name in ("d_cap", "exponent_cap", "weight_cap", "fallback_cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer")
        for name in ("volume_cap", "work_cap"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 0):
                raise ValueError(f"{name} must be None or a nonnegative integer")

    @property
    def degenerate(self):
        return 0 in (self.d_cap, self.exponent_cap, self.weight_cap, self.fallback_cap)


@dataclass(frozen=True)
class FrontierRecord:
    """One boundary event of the search box."""

    constellation: str
    cap: str
    frame: tuple
    note: str


@dataclass(frozen=True)
class SearchStats:
    frames: int = 0
    systems: int = 0
    graded_survivors: int = 0
    lattice_candidates: int = 0
    pipeline_runs: int = 0

    def __add__(self, other):
        return SearchStats(
            self.frames + other.frames,
            self.systems + other.systems,
            self.graded_survivors + other.graded_survivors,
            self.lattice_candidates + other.lattice_candidates,
            self.pipeline_runs + other.pipeline_runs,
        )


@dataclass(frozen=True)
class ConstellationSurvey:
    constellation: Constellation
    budget: SearchBudget
    classes: tuple            # canonical defining pairs, sorted
    frontier: tuple           # FrontierRecord, sorted
    exhausted: bool
    stats: SearchStats


# -- support patterns and frames -----------------------------------------


def _patterns(rank):
    """Nonempty coordinate subsets, rays first."""
    out = []
    for size in range(1, rank + 1):
        out.extend(itertools.combinations(range(rank), size))
    return tuple(out)


@lru_cache(maxsize=None)
def _platonic(sorted_exps):
    return platonic_checks(sorted_exps)[0]


def _platonic_system(exponent_blocks):
    for combo in itertools.product(*exponent_blocks):
        if not _platonic(tuple(sorted(combo, reverse=True))):
            return False
    return True


def _block_pattern_choices(size, rank):
    """Sorted pattern multisets of a block whose union covers every
    coordinate; forced by the relation degree being interior."""
    pats = _patterns(rank)
    out = []
    for combo in itertools.combinations_with_replacement(pats, size):
        cover = set()
        for p in combo:
            cover.update(p)
        if len(cover) == rank:
            out.append(combo)
    return tuple(out)


def _pairings(patterns, exponents):
    """Distinct multisets of (pattern, exponent) slots."""
    seen = set()
    for perm in set(itertools.permutations(exponents)):
        seen.add(tuple(sorted(zip(patterns, perm))))
    return sorted(seen)


def _apply_perm_pattern(pattern, perm):
    return tuple(sorted(perm[c] for c in pattern))


def _frame_key(blocks, free, sizes, perm):
    """Canonical key under one coordinate permutation: equal-size block
    runs are sorted, so swapping same-size blocks never splits a class."""
    mapped = []
    for slots in blocks:
        mapped.append(tuple(sorted((_apply_perm_pattern(p, perm), e) for p, e in slots)))
    key_blocks = []
    i = 0
    while i < len(sizes):
        j = i
        while j < len(sizes) and sizes[j] == sizes[i]:
            j += 1
        key_blocks.extend(sorted(mapped[i:j]))
        i = j
    fr = tuple(sorted(_apply_perm_pattern(p, perm) for p in free))
    return tuple(key_blocks), fr


def _size_runs(sizes):
    runs = []
    i = 0
    while i < len(sizes):
        j = i
        while j < len(sizes) and sizes[j] == sizes[i]:
            j += 1
        runs.append((sizes[i], j - i))
        i = j
    return runs


def _pattern_systems(cst, disposition=None):
    """Per-block covering pattern multisets plus free patterns, with at
    least two slots on every extremal ray, one system per coordinate
    permutation class."""
    rank = cst.class_rank
    sizes = cst.block_sizes
    pats = _patterns(rank)
    interior = tuple(range(rank))
    runs = _size_runs(sizes)
    per_run = [
        itertools.combinations_with_replacement(_block_pattern_choices(s, rank), c)
        for s, c in runs
    ]
    free_opts = list(
        itertools.combinations_with_replacement(pats, cst.free_count)
    )
    perms = list(itertools.permutations(range(rank)))
    seen = set()
    out = []
    for runs_choice in itertools.product(*per_run):
        pblocks = tuple(pc for run in runs_choice for pc in run)
        for free in free_opts:
            counts = [0] * rank
            for pcombo in pblocks:
                for p in pcombo:
                    if len(p) == 1:
                        counts[p[0]] += 1
            for p in free:
                if len(p) == 1:
                    counts[p[0]] += 1
            if any(c < 2 for c in counts):
                continue  # an extremal ray with one weight is removable
            if disposition is not None:
                ints = [
                    (i,)
                    for i, pcombo in enumerate(pblocks)
                    for p in pcombo
                    if p == interior
                ]
                ints += [("free", k) for k, p in enumerate(free) if p == interior]
                want = {1: 0, 2: 1, 3: 2, 4: 2, 5: 2}[disposition]
                if len(ints) != want:
                    continue
                if disposition in (3, 4) and len(set(ints)) != 1:
                    continue
                if disposition == 5 and len(set(ints)) != 2:
                    continue
            key = None
            for perm in perms:
                mapped = [
                    tuple(sorted(_apply_perm_pattern(p, perm) for p in pc))
                    for pc in pblocks
                ]
                kb = []
                i = 0
                for s, c in runs:
                    kb.extend(sorted(mapped[i : i + c]))
                    i += c
                cand = (
                    tuple(kb),
                    tuple(sorted(_apply_perm_pattern(p, perm) for p in free)),
                )
                if key is None or cand < key:
                    key = cand
            if key in seen:
                continue
            seen.add(key)
            out.append((pblocks, free))
    return out


def _exponent_systems(sizes, cap):
    """Per-block sorted exponent multisets with every elementary tuple
    platonic.  Platonicity is closed downward, so partial systems are
    pruned against their padding by ones."""
    opts = {}
    for size in set(sizes):
        opts[size] = [
            ec
            for ec in itertools.combinations_with_replacement(range(1, cap + 1), size)
            if size > 1 or ec[0] > 1
        ]
    total = len(sizes)
    out = []

    def rec(i, chosen, partials):
        if i == total:
            out.append(tuple(chosen))
            return
        for ec in opts[sizes[i]]:
            new = [p + (e,) for p in partials for e in set(ec)]
            pad = (1,) * (total - i - 1)
            if all(_platonic(tuple(sorted(t + pad, reverse=True))) for t in new):
                rec(i + 1, chosen + [ec], new)

    rec(0, [], [()])
    return out


def _frames(cst, budget, disposition=None, configuration=None):
    """All canonical frames of a constellation within the budget."""
    rank = cst.class_rank
    sizes = cst.block_sizes
    psystems = _pattern_systems(cst, disposition=disposition)
    esystems = _exponent_systems(sizes, budget.exponent_cap)
    perms = list(itertools.permutations(range(rank)))
    seen = set()
    frames = []
    for pblocks, free in psystems:
        for eblocks in esystems:
            if configuration == "A" and not any(
                all(e == 1 for e in ec) for ec in eblocks
            ):
                continue
            for slots in itertools.product(
                *[_pairings(pc, ec) for pc, ec in zip(pblocks, eblocks)]
            ):
                key = min(_frame_key(slots, free, sizes, perm) for perm in perms)
                if key in seen:
                    continue
                seen.add(key)
                frames.append((slots, free))
    return frames


# -- value systems -------------------------------------------------------


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _det3(a, b, c):
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


def _pattern_values(pattern, rank, cap):
    """All weights supported exactly on the pattern within the box."""
    ranges = []
    for c in range(rank):
        ranges.append(range(1, cap + 1) if c in pattern else (0,))
    return [tuple(v) for v in itertools.product(*ranges)]


def _enumerate_block(slots, rank, cap, mu_cap):
    """Fully enumerate a block; returns (mu -> [value tuples], clipped)."""
    out = {}
    clipped = False
    values = [_pattern_values(p, rank, cap) for p, _ in slots]
    exps = [e for _, e in slots]
    for combo in itertools.product(*values):
        mu = tuple(
            sum(e * v[c] for e, v in zip(exps, combo)) for c in range(rank)
        )
        if any(x > mu_cap for x in mu):
            clipped = True
            continue
        out.setdefault(mu, []).append(combo)
    return out, clipped


def _solve_block(slots, mu, rank, cap, cache):
    """Value tuples of a block with the given relation degree."""
    key = (slots, mu)
    hit = cache.get(key)
    if hit is not None:
        return hit
    out = []
    exps = [e for _, e in slots]
    pats = [p for p, _ in slots]
    # minimal later contribution per coordinate, for pruning
    reserve = [[0] * rank for _ in slots]
    for i in range(len(slots) - 2, -1, -1):
        for c in range(rank):
            reserve[i][c] = reserve[i + 1][c] + (exps[i + 1] if c in pats[i + 1] else 0)

    def rec(i, remaining, acc):
        if i == len(slots) - 1:
            l = exps[i]
            val = [0] * rank
            for c in range(rank):
                if c in pats[i]:
                    q, rem = divmod(remaining[c], l)
                    if rem or q < 1 or q > cap:
                        return
                    val[c] = q
                elif remaining[c]:
                    return
            out.append(acc + (tuple(val),))
            return
        for v in _pattern_values(pats[i], rank, cap):
            nxt = tuple(remaining[c] - exps[i] * v[c] for c in range(rank))
            if any(nxt[c] < reserve[i][c] for c in range(rank)):
                continue
            rec(i + 1, nxt, acc + (v,))

    rec(0, mu, ())
    cache[key] = out
    return out


def _system_key(blocks, free_values, sizes, rank):
    perms = itertools.permutations(range(rank))
    best = None
    for perm in perms:
        mapped = []
        for slots in blocks:
            mapped.append(
                tuple(
                    sorted(
                        (_apply_perm_pattern(p, perm), e, tuple(v[c] for c in perm))
                        for (p, e), v in slots
                    )
                )
            )
        key_blocks = []
        i = 0
        while i < len(sizes):
            j = i
            while j < len(sizes) and sizes[j] == sizes[i]:
                j += 1
            key_blocks.extend(sorted(mapped[i:j]))
            i = j
        fr = tuple(sorted(tuple(v[c] for c in perm) for v in free_values))
        key = (tuple(key_blocks), fr)
        if best is None or key < best:
            best = key
    return best


# -- graded filters (necessary conditions, free parts only) ---------------


@lru_cache(maxsize=None)
def _f_face_masks(sizes, free_count):
    """Index tuples of the orbit faces for one block layout."""
    spans = []
    start = 0
    for size in sizes:
        spans.append((start, start + size))
        start += size
    total = start + free_count
    masks = []
    for mask in range(1, 1 << total):
        full = 0
        for a, b in spans:
            bits = sum(mask >> j & 1 for j in range(a, b))
            if bits == b - a:
                full += 1
        if full == 0 or len(spans) - full <= 1:
            masks.append(mask)
    return tuple(masks)


def _relint_contains_2d(gens, kappa):
    pos = neg = False
    for g in gens:
        c = _cross(g, kappa)
        if c > 0:
            pos = True
        elif c < 0:
            neg = True
        if pos and neg:
            return True
    if pos or neg:
        return False
    return True  # all generators parallel to kappa, which is nonzero


def _generates_lattice(gens, rank):
    g = 0
    for combo in itertools.combinations(gens, rank):
        det = _cross(*combo) if rank == 2 else _det3(*combo)
        g = math.gcd(g, det)
        if g == 1:
            return True
    return False


def _det(mat):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    if n == 3:
        return _det3(*mat)
    total = 0
    for j in range(n):
        if mat[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
            total += (-1) ** j * mat[0][j] * _det(minor)
    return total


def _face_weights_generate(rows, total, mask):
    """Whether the weight classes of the face generate the full class
    group of Z^total modulo the row lattice: equivalently the rows
    restricted to the complementary columns span that coordinate
    lattice, a gcd of maximal minors."""
    cols = [j for j in range(total) if not mask >> j & 1]
    k = len(cols)
    if k == 0:
        return True
    if k > len(rows):
        return False
    sub = [[row[j] for j in cols] for row in rows]
    g = 0
    for combo in itertools.combinations(sub, k):
        g = math.gcd(g, _det([list(c) for c in combo]))
        if g == 1:
            return True
    return False


def _candidate_strata_factorial(rows, total, relevant, cov_set):
    for mask in relevant:
        if mask in cov_set:
            continue
        if not _face_weights_generate(rows, total, mask):
            return False
    return True


def _graded_filters(weights, kappa, masks, rank):
    """Relevant and covering faces from the weight data alone, with the
    filters that are decided at this level: Q-factoriality (exact) and
    the free-part necessity of the factorial-strata test.  Returns
    (relevant, covering) or None when the system is dead."""
    relevant = []
    for mask in masks:
        gens = [weights[j] for j in range(len(weights)) if mask >> j & 1]
        if rank == 2:
            inside = _relint_contains_2d(gens, kappa)
        else:
            inside = Cone.from_generators(gens, dim=rank).relint_contains(kappa)
        if inside:
            relevant.append((mask, gens))
    for mask, gens in relevant:
        if rank == 2:
            full_dim = any(_cross(gens[0], g) for g in gens[1:])
        else:
            full_dim = any(
                _det3(*combo) for combo in itertools.combinations(gens, 3)
            )
        if not full_dim:
            return None
    rel_masks = [m for m, _ in relevant]
    covering = tuple(
        m
        for m in rel_masks
        if not any(o != m and o & m == o for o in rel_masks)
    )
    cov_set = set(covering)
    for mask, gens in relevant:
        if mask in cov_set:
            continue
        if not _generates_lattice(gens, rank):
            return None
    return tuple(rel_masks), covering


# -- lattice stage --------------------------------------------------------


def _sublattices(index):
    for d in sorted(x for x in range(1, index + 1) if index % x == 0):
        a = index // d
        for b in range(d):
            yield a, b, d


def _upper_rows(exponents, total):
    r = len(exponents) - 1
    rows = []
    for i in range(1, r + 1):
        row = []
        for b, block in enumerate(exponents):
            if b == 0:
                row.extend(-x for x in block)
            elif b == i:
                row.extend(block)
            else:
                row.extend(0 for _ in block)
        row.extend(0 for _ in range(total - len(row)))
        rows.append(tuple(row))
    return tuple(rows)


def _normalized_volume_2d(poly):
    verts = list(poly.vertices)
    if len(verts) < 3:
        return Fraction(0)
    cx = sum(v[0] for v in verts) / len(verts)
    cy = sum(v[1] for v in verts) / len(verts)

    def angle_key(v):
        x, y = v[0] - cx, v[1] - cy
        if x > 0 and y >= 0:
            quad = 0
        elif x <= 0 and y > 0:
            quad = 1
        elif x < 0 and y <= 0:
            quad = 2
        else:
            quad = 3
        return (quad, Fraction(y, x) if x else Fraction(10**9))

    verts.sort(key=angle_key)
    twice = Fraction(0)
    for i, v in enumerate(verts):
        w = verts[(i + 1) % len(verts)]
        twice += v[0] * w[1] - v[1] * w[0]
    return abs(twice)


def _pipeline(dp, budget, flags, f_faces, relevant, covering):
    """Authoritative predicate run for one candidate.  Q-factoriality
    and factoriality along positive strata were already decided exactly
    from the shared graded data, so the candidate-level work is the
    geometry: log terminality, terminality, minimality."""
    rep = validate(dp)
    if not rep.ok or rep.redundant_blocks():
        return None
    g = grading_of(dp)
    if not is_fano(g):
        return None
    rd = RelevantData(
        pair=dp,
        grading=g,
        f_faces=(0,) + f_faces,
        relevant=relevant,
        covering=covering,
    )
    if not is_log_terminal(rd):
        return None
    lc = build_leaf_complex(rd)
    cols = dp.columns()
    lineality_allowed = {(0,) * dp.s}
    for k in range(dp.m):
        lineality_allowed.add(tuple(cols[dp.n + k][dp.r :]))
    try:
        # Lattice points of the bounded part are shared by every leaf,
        # so any one beyond the origin and the free columns already
        # refutes terminality.  The bounded part lives in s coordinates,
        # which keeps this scan cheap even when the leaf hulls are huge.
        for pt in lc.lineality.lattice_points():
            if pt not in lineality_allowed:
                return None
        if budget.volume_cap is not None:
            if _normalized_volume_2d(lc.lineality) > budget.volume_cap:
                flags.add(("volume_cap", "bounded part beyond the volume cap"))
                return None
        for i, poly in enumerate(lc.leaves):
            allowed = lc.allowed_points(i)
            for pt in poly.lattice_points():
                if pt not in allowed:
                    return None
    except DescriptionSizeError:
        flags.add(("work_cap", "lattice enumeration box beyond the built-in guard"))
        return None
    if not is_combinatorially_minimal(dp, g):
        return None
    if dp.r < 2:
        return None
    return class_representative(dp)


def class_representative(dp):
    """Canonical form with the coefficient matrix reset to the default
    normalization.

    Block swaps carry coefficient columns along, so two pairs that agree
    combinatorially can end up with permuted coefficient columns after
    canonicalization.  Every predicate computed here depends on the
    coefficients only through pairwise linear independence, and the
    classification identifies classes combinatorially, so the class
    representative fixes the default coefficients.  The result is again
    a canonical-form fixed point: the identity arrangement realizes the
    minimal key and the default coefficient rows break any ties.
    """
    canon = canonical_form(dp)
    return DefiningPair(canon.exponents, canon.d_rows, canon.free_rows)


def _class_signature(dp):
    g = grading_of(dp)
    inv = g.presentation.invariants()
    weights = tuple(sorted((w.free, w.torsion) for w in g.weights))
    exps = tuple(sorted(x for block in dp.exponents for x in block))
    return inv, weights, exps


# -- per-frame search ------------------------------------------------------


def _search_frame(cst, budget, frame, disposition, chamber, solve_cache, state):
    """Run one frame; classes land in state['classes'], boundary events
    in state['flags']."""
    rank = cst.class_rank
    sizes = cst.block_sizes
    blocks, free = frame
    cap = budget.weight_cap
    mu_cap = budget.fallback_cap
    stats = dict(systems=0, graded=0, lattice=0, pipeline=0)
    flags = state["flags"]

    # pivot: the block with the smallest raw enumeration
    def breadth(slots):
        b = 1
        for p, _ in slots:
            b *= cap ** len(p)
        return b

    pivot = min(range(len(blocks)), key=lambda i: (breadth(blocks[i]), i))
    mu_map, clipped = _enumerate_block(blocks[pivot], rank, cap, mu_cap)
    if clipped:
        flags.add(("fallback_cap", "relation degree beyond the fallback cap"))

    free_groups = []
    for p, group in itertools.groupby(sorted(free)):
        vals = _pattern_values(p, rank, cap)
        size = len(list(group))
        free_groups.append(
            [list(c) for c in itertools.combinations_with_replacement(vals, size)]
        )

    masks = _f_face_masks(sizes, cst.free_count)
    seen = state["system_seen"]

    for mu, pivot_sols in sorted(mu_map.items()):
        others = []
        dead = False
        for i, slots in enumerate(blocks):
            if i == pivot:
                continue
            sols = _solve_block(slots, mu, rank, cap, solve_cache)
            if not sols:
                dead = True
                break
            others.append((i, sols))
        if dead:
            continue
        layout = [None] * len(blocks)
        for pv in pivot_sols:
            layout[pivot] = pv
            for combo in itertools.product(*[s for _, s in others]):
                for (i, _), vals in zip(others, combo):
                    layout[i] = vals
                for freevals in itertools.product(*free_groups):
                    fv = [v for group in freevals for v in group]
                    stats["systems"] += 1
                    block_vals = [
                        tuple(zip(slots, vals)) for slots, vals in zip(blocks, layout)
                    ]
                    result = _run_system(
                        cst, budget, block_vals, fv, mu, masks,
                        disposition, chamber, seen, flags, stats,
                    )
                    if result:
                        for ckey, dp in result:
                            state["classes"].setdefault(ckey, dp)
    state["stats"] = state["stats"] + SearchStats(
        frames=1,
        systems=stats["systems"],
        graded_survivors=stats["graded"],
        lattice_candidates=stats["lattice"],
        pipeline_runs=stats["pipeline"],
    )


def _run_system(
    cst, budget, block_vals, free_values, mu, masks,
    disposition, chamber, seen, flags, stats,
):
    rank = cst.class_rank
    interior = tuple(range(rank))
    weights = []
    exponents = []
    for slots in block_vals:
        exponents.append(tuple(e for (p, e), _ in slots))
        weights.extend(v for _, v in slots)
    weights.extend(free_values)
    total = len(weights)

    kappa = tuple(
        sum(w[c] for w in weights) - (cst.r - 1) * mu[c] for c in range(rank)
    )
    if any(x < 1 for x in kappa):
        return None

    if disposition is not None and rank == 2:
        ints = []
        for i, slots in enumerate(block_vals):
            for (p, e), v in slots:
                if p == interior:
                    ints.append(((i,), v))
        for k, v in enumerate(free_values):
            if all(x >= 1 for x in v):
                ints.append((("free", k), v))
        got = _disposition(ints)
        if got != disposition:
            return None
        if chamber is not None:
            vs = [v for _, v in ints]
            if _cross(vs[0], vs[1]) < 0:
                vs.reverse()
            lo, hi = vs
            tests = {
                "a3": _cross(kappa, lo) > 0,
                "a2": _cross(lo, kappa) > 0 and _cross(kappa, hi) > 0,
                "a1": _cross(hi, kappa) > 0,
            }
            if not tests[chamber]:
                return None

    key = _system_key(block_vals, free_values, cst.block_sizes, rank)
    if key in seen:
        return None
    seen.add(key)

    # boundary contact is recorded for every generated system, dead or
    # alive, since values beyond the box were never explored
    if any(x == budget.weight_cap for w in weights for x in w):
        flags.add(("weight_cap", "generated system on the weight box boundary"))
    if any(e == budget.exponent_cap for block in exponents for e in block):
        flags.add(("exponent_cap", "generated system on the exponent box boundary"))

    graded = _graded_filters(weights, kappa, masks, rank)
    if graded is None:
        return None
    relevant, covering = graded
    stats["graded"] += 1

    # lattice stage
    qmat = tuple(tuple(w[c] for w in weights) for c in range(rank))
    kb = kernel_basis(qmat, width=total)
    kbh = hermite_normal_form(kb)
    upper = _upper_rows(tuple(exponents), total)
    ucoords = []
    for u in upper:
        c = lattice_coordinates(kbh, u)
        if c is None:
            flags.add(("lattice", "exponent row outside the saturated kernel"))
            return None
        ucoords.append(c)
    pres = cokernel_of_rows(tuple(ucoords), len(kbh))
    free_rank, torsion = pres.invariants()
    if free_rank != 2:
        flags.add(("lattice", "exponent rows do not leave rank two in the kernel"))
        return None
    # the exponent rows may sit non-primitively in the kernel; the class
    # group then carries that finite part on top of the chosen index, so
    # the lower rows range over all torsion offsets as well
    offsets = list(itertools.product(*(range(t) for t in torsion)))
    upper_h = hermite_normal_form(upper)
    n = sum(len(b) for b in exponents)
    cov_set = set(covering)

    out = []
    for index in range(1, budget.fallback_cap + 1):
        for a, b, d in _sublattices(index):
            for t1 in offsets:
                for t2 in offsets:
                    stats["lattice"] += 1
                    rows = []
                    for gen, toff in (((a, b), t1), ((0, d), t2)):
                        sec = pres.section(KElement(gen, toff, torsion))
                        amb = tuple(
                            sum(sec[i] * kbh[i][j] for i in range(len(kbh)))
                            for j in range(total)
                        )
                        rows.append(tuple(reduce_mod_lattice(upper_h, amb)))
                    if any(abs(x) > budget.d_cap for row in rows for x in row):
                        flags.add(("d_cap", "lower rows beyond the d-entry cap"))
                        continue
                    if index == budget.fallback_cap:
                        flags.add(
                            ("fallback_cap", "lattice index on the box boundary")
                        )
                    p_rows = upper + tuple(rows)
                    if not _candidate_strata_factorial(
                        p_rows, total, relevant, cov_set
                    ):
                        continue
                    dp = DefiningPair(
                        tuple(exponents),
                        tuple(row[:n] for row in rows),
                        tuple(row[n:] for row in rows),
                    )
                    stats["pipeline"] += 1
                    if (
                        budget.work_cap is not None
                        and stats["pipeline"] > budget.work_cap
                    ):
                        flags.add(("work_cap", "pipeline budget spent"))
                        return out
                    canon = _pipeline(dp, budget, flags, masks, relevant, covering)
                    if canon is not None:
                        out.append((_dedup_key(canon), canon))
    return out


def _disposition(ints):
    """The placement class of the interior weights: 1 none, 2 one,
    3 or 4 two in one block (4 when collinear), 5 two in different
    blocks.  None otherwise."""
    if len(ints) == 0:
        return 1
    if len(ints) == 1:
        return 2
    if len(ints) == 2:
        (b1, v1), (b2, v2) = ints
        if b1 == b2:
            return 4 if _cross(v1, v2) == 0 else 3
        return 5
    return None


def _dedup_key(canon):
    inv, weights, exps = _class_signature(canon)
    return (_serialize(canon), inv, weights, exps)


# -- the public entry points ----------------------------------------------


def _check_restrictions(cst, disposition, configuration, chamber):
    if disposition is not None:
        if cst.class_rank != 2:
            raise ValueError("dispositions are defined for class rank two only")
        if disposition not in (1, 2, 3, 4, 5):
            raise ValueError(f"unknown disposition: {disposition!r}")
    if configuration is not None and configuration != "A":
        raise ValueError(f"unknown configuration label: {configuration!r}")
    if chamber is not None:
        if disposition != 5:
            raise ValueError("chambers refine disposition 5 only")
        if chamber not in ("a1", "a2", "a3"):
            raise ValueError(f"unknown chamber label: {chamber!r}")


def _survey_worker(args):
    cst, budget, frames, disposition, chamber = args
    solve_cache = {}
    state = {
        "classes": {},
        "flags": set(),
        "stats": SearchStats(),
        "system_seen": set(),
    }
    for frame in frames:
        _search_frame(cst, budget, frame, disposition, chamber, solve_cache, state)
        if ("work_cap", "pipeline budget spent") in state["flags"]:
            break
    return state["classes"], state["flags"], state["stats"]


def enumerate_constellation(
    cst,
    budget=None,
    jobs=1,
    disposition=None,
    configuration=None,
    chamber=None,
):
    """Survey one constellation within a budget.

    Optional restrictions narrow the run: a disposition number (the
    placement class of interior weights), the configuration label "A"
    (some block has all exponents one), and for disposition 5 a chamber
    label "a1"/"a2"/"a3" locating the anticanonical class relative to
    the two interior weights.  Results carry the surviving classes in
    canonical form, the frontier of boundary events, and counters.
    """
    if isinstance(cst, str):
        cst = constellation(cst)
    if budget is None:
        budget = SearchBudget()
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    _check_restrictions(cst, disposition, configuration, chamber)
    if budget.degenerate:
        return ConstellationSurvey(
            cst, budget, (), (), exhausted=True, stats=SearchStats()
        )

    frames = _frames(cst, budget, disposition=disposition, configuration=configuration)
    if jobs == 1 or len(frames) < 2:
        results = [_survey_worker((cst, budget, frames, disposition, chamber))]
    else:
        chunks = [frames[i::jobs] for i in range(jobs)]
        chunks = [c for c in chunks if c]
        with get_context("fork").Pool(len(chunks)) as pool:
            results = pool.map(
                _survey_worker,
                [(cst, budget, c, disposition, chamber) for c in chunks],
            )

    classes = {}
    flags = set()
    stats = SearchStats()
    for cls, fl, st in results:
        for key, dp in cls.items():
            classes.setdefault(key, dp)
        flags |= fl
        stats = stats + st
    frontier = tuple(
        FrontierRecord(cst.label, cap, (), note)
        for cap, note in sorted(flags)
    )
    ordered = tuple(classes[k] for k in sorted(classes))
    return ConstellationSurvey(
        cst,
        budget,
        ordered,
        frontier,
        exhausted=bool(frontier),
        stats=stats,
    )


# -- matching against the target table -------------------------------------


def _auto_variants(weights, torsion):
    """Images of (free, torsion) weight pairs under the automorphisms
    of Z^2 + Z/t preserving the orthant: coordinate swap, a unit on the
    torsion factor, and a twist by a homomorphism Z^2 -> Z/t."""
    order = torsion[0] if torsion else 1
    units = [u for u in range(1, order + 1) if math.gcd(u, order) == 1] or [1]
    variants = []
    for swap in (False, True):
        frees = [(w[0][1], w[0][0]) if swap else w[0] for w in weights]
        for u in units:
            for phi in itertools.product(range(order), repeat=2):
                mapped = []
                for fr, w in zip(frees, weights):
                    t = w[1][0] if w[1] else 0
                    tt = (u * t + phi[0] * fr[0] + phi[1] * fr[1]) % order
                    mapped.append((fr, (tt,) if torsion else ()))
                variants.append(tuple(mapped))
    return variants


def _shape_signature(block_sizes, exponents, weights, spans, m):
    blocks = []
    for (a, b), exps in zip(spans, exponents):
        blocks.append(tuple(sorted((exps[j - a],) + weights[j] for j in range(a, b))))
    free = tuple(sorted(weights[len(weights) - m :])) if m else ()
    return tuple(sorted(blocks)), free


def match_table_row(dp, grading=None):
    """The table row presenting the same family, or None.

    Matching compares the graded shape: block sizes, exponent slots and
    their weight classes, up to reordering and the automorphisms of the
    class group preserving the orthant normalization.  The graded shape
    pins down the row lattice of the defining matrix, so agreement here
    is agreement of canonical forms.
    """
    g = grading if grading is not None else grading_of(dp)
    free_rank, torsion = g.presentation.invariants()
    if free_rank != 2:
        return None
    weights = [(w.free, w.torsion) for w in g.weights]
    sizes = sorted(dp.block_sizes, reverse=True)
    exps = sorted(x for block in dp.exponents for x in block)
    for row in target_rows():
        if row.free_count != dp.m or tuple(row.torsion) != tuple(torsion):
            continue
        if sorted(row.block_sizes, reverse=True) != sizes:
            continue
        if sorted(x for block in row.exponents for x in block) != exps:
            continue
        row_sig = _shape_signature(
            row.block_sizes,
            row.exponents,
            [(tuple(f), tuple(t)) for f, t in row.weights()],
            row.block_spans(),
            row.free_count,
        )
        for variant in _auto_variants(weights, torsion):
            sig = _shape_signature(
                dp.block_sizes, dp.exponents, list(variant), dp.block_spans(), dp.m
            )
            if sig == row_sig:
                return row.ident
    return None


@dataclass(frozen=True)
class TableComparison:
    matched: tuple    # (row ident, constellation label) pairs
    missing: tuple    # row idents never produced
    extra: tuple      # (constellation label, canonical pair) pairs
    exhausted: tuple  # constellation labels with a nonempty frontier
    surveys: tuple    # (label, ConstellationSurvey) pairs


def reproduce_table(budget=None, jobs=1, labels=None):
    """Survey every constellation and compare against the target table.

    Surveys with class rank three have no table counterpart, so their
    classes always land in `extra`.  With a degenerate budget every
    survey is exhausted and every row is missing.
    """
    if budget is None:
        budget = SearchBudget()
    todo = constellations() if labels is None else tuple(
        constellation(l) for l in labels
    )
    matched = []
    extra = []
    exhausted = []
    surveys = []
    for cst in todo:
        survey = enumerate_constellation(cst, budget, jobs=jobs)
        surveys.append((cst.label, survey))
        if survey.exhausted:
            exhausted.append(cst.label)
        for dp in survey.classes:
            ident = match_table_row(dp) if cst.class_rank == 2 else None
            if ident is None:
                extra.append((cst.label, dp))
            else:
                matched.append((ident, cst.label))
    found = {ident for ident, _ in matched}
    missing = tuple(
        row.ident for row in target_rows() if row.ident not in found
    )
    return TableComparison(
        matched=tuple(sorted(matched)),
        missing=missing,
        extra=tuple(extra),
        exhausted=tuple(exhausted),
        surveys=tuple(surveys),
    )
