"""Class-group side of a defining pair: weights, relation degree,
anticanonical class, effective and moving cones, and the numerical
bound predicates used to prune the classification search.

Cones live in the free part of the class group; torsion is carried on
the elements themselves and only matters for group generation checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import Cone
from .intlinalg import cokernel_of_rows, kernel_basis, transpose


@dataclass(frozen=True)
class GradingData:
    presentation: object
    weights: tuple          # one KElement per column of P
    relation_degree: object  # common degree of all relation monomials
    anticanonical: object
    effective: Cone
    moving: Cone


def grading_of(dp):
    """Weights and divisor-class cones of a valid pair.

    The common degree of the r+1 monomials T_i^{l_i} is recomputed per
    block and asserted equal; a mismatch would mean the defining matrix
    was assembled wrongly.
    """
    width = dp.total_columns
    pres = cokernel_of_rows(dp.matrix(), width)
    if pres.free_rank != dp.delta:
        raise AssertionError("class group rank disagrees with column count")
    weights = []
    for j in range(width):
        unit = [0] * width
        unit[j] = 1
        weights.append(pres.project(unit))
    weights = tuple(weights)
    degrees = []
    for i, (a, b) in enumerate(dp.block_spans()):
        deg = pres.zero()
        for j in range(a, b):
            deg = deg + weights[j] * dp.exponents[i][j - a]
        degrees.append(deg)
    if any(deg != degrees[0] for deg in degrees[1:]):
        raise AssertionError("relation monomial degrees differ between blocks")
    mu = degrees[0]
    kappa = pres.zero()
    for w in weights:
        kappa = kappa + w
    kappa = kappa - mu * (dp.r - 1)
    frees = [w.free for w in weights]
    effective = Cone.from_generators(frees, dim=pres.free_rank)
    moving = None
    for j in range(width):
        others = [frees[t] for t in range(width) if t != j]
        cone = Cone.from_generators(others, dim=pres.free_rank)
        moving = cone if moving is None else moving.intersect(cone)
    return GradingData(pres, weights, mu, kappa, effective, moving)


def is_fano(g):
    """The anticanonical class sits in the relative interior of the
    moving cone."""
    return g.moving.relint_contains(g.anticanonical.free)


def exceptional_weights(dp):
    """Column indices whose removal still leaves a cone equal to the
    whole space."""
    cols = dp.columns()
    ambient = dp.r + dp.s
    out = set()
    for j in range(len(cols)):
        rest = [cols[t] for t in range(len(cols)) if t != j]
        if Cone.from_generators(rest, dim=ambient).is_full_space():
            out.add(j)
    return out


def _on_ray(vec, gen):
    """vec = lambda * gen with lambda > 0."""
    if not any(vec):
        return False
    pivot = next(i for i, x in enumerate(gen) if x)
    lam = Fraction(vec[pivot], gen[pivot])
    if lam <= 0:
        return False
    return all(vec[i] == lam * gen[i] for i in range(len(gen)))


def _exceptional_by_weights(g):
    """Weight-side criterion: the weight spans an extremal ray of the
    effective cone and no other weight lies on that ray.  Returns None
    when the effective cone is not pointed."""
    try:
        rays = g.effective.extremal_rays()
    except ValueError:
        return None
    frees = [w.free for w in g.weights]
    out = set()
    for j, w in enumerate(frees):
        ray = next((r for r in rays if _on_ray(w, r)), None)
        if ray is None:
            continue
        if not any(
            _on_ray(frees[t], ray) for t in range(len(frees)) if t != j
        ):
            out.add(j)
    return out


def is_combinatorially_minimal(dp, grading=None):
    """No column is removable: equivalently, every extremal ray of the
    effective cone carries at least two weights.  Both sides are
    computed and must agree."""
    exceptional = exceptional_weights(dp)
    g = grading if grading is not None else grading_of(dp)
    by_weights = _exceptional_by_weights(g)
    if by_weights is not None and by_weights != exceptional:
        raise AssertionError(
            "column-side and weight-side exceptionality disagree: "
            f"{sorted(exceptional)} vs {sorted(by_weights)}"
        )
    return not exceptional


@dataclass(frozen=True)
class ClassificationStats:
    class_rank: int          # free rank of the class group
    surplus_rays: int        # extremal rays of Eff beyond that rank
    extremal_variables: int  # T-variables with weight on an extremal ray
    interior_variables: int  # the remaining T-variables


def stats_of(dp, grading=None):
    """Raises ValueError when the effective cone is not pointed."""
    g = grading if grading is not None else grading_of(dp)
    rays = g.effective.extremal_rays()
    delta = g.presentation.free_rank
    eta = 0
    for j in range(dp.n):
        w = g.weights[j].free
        if any(_on_ray(w, ray) for ray in rays):
            eta += 1
    return ClassificationStats(
        class_rank=delta,
        surplus_rays=len(rays) - delta,
        extremal_variables=eta,
        interior_variables=dp.n - eta,
    )


def _content(vec):
    return math.gcd(*(abs(x) for x in vec)) if vec else 0


def grading_signature(dp, grading=None):
    """Basis-independent invariants of the graded data.

    Used as a dedup cross-check next to the canonical form: two pairs
    in the same orbit always share this signature, and differing
    signatures certify distinct classes.
    """
    g = grading if grading is not None else grading_of(dp)
    pres = g.presentation
    delta = pres.free_rank
    frees = [w.free for w in g.weights]

    def det(vectors):
        from .intlinalg import determinant

        return abs(determinant([list(v) for v in vectors]))

    dets = sorted(
        det(combo) for combo in itertools.combinations(frees, delta)
    )
    mu_dets = sorted(
        det((g.relation_degree.free,) + combo)
        for combo in itertools.combinations(frees, delta - 1)
    )
    kappa_dets = sorted(
        det((g.anticanonical.free,) + combo)
        for combo in itertools.combinations(frees, delta - 1)
    )
    return (
        delta,
        pres.torsion,
        tuple(sorted(_content(v) for v in frees)),
        tuple(dets),
        tuple(mu_dets),
        tuple(kappa_dets),
        _content(g.relation_degree.free),
        _content(g.anticanonical.free),
    )


def mu_in_eff_interior(dp, grading=None):
    """The relation degree lies in the interior of the effective cone.

    Also evaluates the equivalent criterion on the free columns of the
    defining matrix (no subset of them positively spans a linear
    subspace) and asserts agreement.
    """
    g = grading if grading is not None else grading_of(dp)
    direct = g.effective.relint_contains(g.relation_degree.free)
    if dp.m <= 12:
        cols = dp.columns()[dp.n :]
        ambient = dp.r + dp.s
        degenerate = False
        for size in range(1, dp.m + 1):
            for combo in itertools.combinations(cols, size):
                cone = Cone.from_generators(combo, dim=ambient)
                if cone.lineality_dimension() == cone.dimension():
                    degenerate = True
                    break
            if degenerate:
                break
        if direct != (not degenerate):
            raise AssertionError(
                "interior test disagrees with the free-column criterion"
            )
    return direct


@dataclass(frozen=True)
class GaleSplit:
    scalars: tuple
    negative: tuple
    zero: tuple
    positive: tuple
    sigma_minus: Cone
    sigma_plus: Cone


def gale_split(vectors):
    """Sign partition of d+1 generators of a pointed full cone.

    The kernel of the generator matrix must be one-dimensional; its
    primitive generator is normalized so the positive part is at least
    as large as the negative part, ties broken by putting the lowest
    nonzero index on the positive side.
    """
    vectors = [tuple(int(x) for x in v) for v in vectors]
    if not vectors:
        raise ValueError("no generators")
    d = len(vectors[0])
    if len(vectors) != d + 1:
        raise ValueError("need exactly d+1 generators in dimension d")
    kernel = kernel_basis(transpose(vectors), width=d + 1)
    if len(kernel) != 1:
        raise ValueError("generators do not span the space")
    cone = Cone.from_generators(vectors, dim=d)
    if not cone.is_pointed():
        raise ValueError("cone is not pointed")
    if len(cone.extremal_rays()) != d + 1:
        raise ValueError("generators are not all extremal")
    w = list(kernel[0])
    pos = sum(1 for x in w if x > 0)
    neg = sum(1 for x in w if x < 0)
    flip = pos < neg
    if pos == neg:
        lead = next(x for x in w if x)
        flip = lead < 0
    if flip:
        w = [-x for x in w]
    positive = tuple(i for i, x in enumerate(w) if x > 0)
    negative = tuple(i for i, x in enumerate(w) if x < 0)
    zero = tuple(i for i, x in enumerate(w) if x == 0)
    sigma_minus = Cone.from_generators(
        [vectors[i] for i in negative + zero], dim=d
    )
    sigma_plus = Cone.from_generators(
        [vectors[i] for i in positive + zero], dim=d
    )
    return GaleSplit(
        scalars=tuple(w),
        negative=negative,
        zero=zero,
        positive=positive,
        sigma_minus=sigma_minus,
        sigma_plus=sigma_plus,
    )


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    hypotheses_met: bool
    holds: object  # True/False, or None when hypotheses are unmet


@dataclass(frozen=True)
class BoundReport:
    stats: object
    dim: int
    free_count: int
    checks: tuple

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def violations(self):
        return tuple(
            c for c in self.checks if c.hypotheses_met and c.holds is False
        )


def bound_predicates(
    dp,
    *,
    grading=None,
    fano=None,
    comb_minimal=None,
    log_terminal=None,
    q_factorial=None,
    big_cone=None,
    mu_interior=None,
):
    """Evaluate the six numerical constraints that every class in the
    target range must satisfy.  Each check records whether its
    hypotheses hold; an inequality is only evaluated under them.

    Expensive inputs (log terminality, factoriality, big-cone
    existence, interiority of the relation degree) are computed on
    demand unless supplied by the caller.
    """
    g = grading if grading is not None else grading_of(dp)
    if fano is None:
        fano = is_fano(g)
    if comb_minimal is None:
        comb_minimal = is_combinatorially_minimal(dp, grading=g)
    try:
        stats = stats_of(dp, grading=g)
    except ValueError:
        stats = None
    dim = dp.dim_x
    m = dp.m
    delta = dp.delta
    r = dp.r
    nontoric = r >= 2

    cache = {
        "log_terminal": log_terminal,
        "q_factorial": q_factorial,
        "big_cone": big_cone,
        "mu_interior": mu_interior,
    }

    def get(key):
        if cache[key] is None:
            if key == "log_terminal":
                from .complexes import is_log_terminal

                cache[key] = is_log_terminal(dp)
            elif key == "q_factorial":
                from .strata import is_q_factorial

                cache[key] = is_q_factorial(dp)
            elif key == "big_cone":
                from .strata import has_big_cone

                cache[key] = has_big_cone(dp)
            else:
                cache[key] = mu_in_eff_interior(dp, grading=g)
        return bool(cache[key])

    checks = []

    hyp = bool(fano and comb_minimal and nontoric and stats is not None)
    holds = None
    if hyp:
        alpha = stats.surplus_rays
        holds = (dim >= delta and m >= 2 * delta - 2) or (
            dim >= alpha + 2 + Fraction(m, 2) and m < 2 * delta - 2
        )
    checks.append(LemmaCheck("dimension_or_free_column_bound", hyp, holds))

    holds = None
    if hyp:
        holds = delta <= (
            dim + r - 1 - stats.interior_variables - 2 * stats.surplus_rays
        )
    checks.append(LemmaCheck("rank_bound_from_extremal_count", hyp, holds))

    hyp3 = bool(fano and nontoric and m < dim)
    if hyp3:
        hyp3 = get("log_terminal")
    holds = get("big_cone") if hyp3 else None
    checks.append(LemmaCheck("big_cone_exists_when_few_free", hyp3, holds))

    hyp4 = bool(fano and nontoric and m < dim)
    if hyp4:
        hyp4 = get("log_terminal") and get("q_factorial")
    holds = (dp.n + m <= 2 * (dim + delta)) if hyp4 else None
    checks.append(LemmaCheck("column_count_bound_when_few_free", hyp4, holds))

    hyp5 = bool(
        fano
        and nontoric
        and stats is not None
        and stats.surplus_rays == 0
        and stats.interior_variables <= r - 2
        and m < dim
    )
    if hyp5:
        hyp5 = get("log_terminal") and get("mu_interior")
    holds = None
    if hyp5:
        zeta = stats.interior_variables
        holds = delta <= Fraction(2 * dim - m - zeta, r - 1 - zeta)
    checks.append(LemmaCheck("simplicial_bound", hyp5, holds))

    hyp6 = bool(
        fano
        and nontoric
        and stats is not None
        and stats.surplus_rays == 1
        and stats.interior_variables <= r - 2
    )
    if hyp6:
        hyp6 = get("log_terminal") and get("mu_interior")
    holds = None
    if hyp6:
        zeta = stats.interior_variables
        holds = delta <= dim + 3 + zeta - r - m
    checks.append(LemmaCheck("near_simplicial_bound", hyp6, holds))

    return BoundReport(stats=stats, dim=dim, free_count=m, checks=tuple(checks))
