"""Contraction of exceptional divisor classes on defining pairs.

A column whose weight is alone on an extremal ray of the effective cone
can be contracted: the column is deleted from P and the class group is
replaced by its quotient modulo that weight.  When the deletion leaves a
block consisting of a single exponent-1 variable, that variable appears
linearly in one relation and is eliminated, so the output pair never
carries redundant blocks (the eliminated presentation only determines
the coefficient matrix up to rescaling, so it is reset to the default).

Repeating the operation drives a pair towards one with no contractible
columns at all; the chain may instead bottom out in a pair with fewer
than two relations, which describes a toric variety and is flagged as
degenerate by the trail summary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grading import (
    exceptional_weights,
    grading_of,
    is_combinatorially_minimal,
    is_fano,
)
from .pairs import DefiningPair, validate


@dataclass(frozen=True)
class ContractionStep:
    """One contraction: `output` is `input` with `column` deleted.

    `eliminated_blocks` lists blocks removed by the redundancy rewrite,
    indexed in the pair they were removed from.  `ops` records the
    induced map on ambient lattices and drives `project`.
    """

    input: DefiningPair
    column: int
    output: DefiningPair
    eliminated_blocks: tuple = ()
    ops: tuple = field(default=(), repr=False)

    def project(self, element):
        """Image of a class of the input pair in the output class group."""
        source = grading_of(self.input).presentation
        target = grading_of(self.output).presentation
        vec = list(source.section(element))
        for op in self.ops:
            if op[0] == "drop":
                i = op[1]
                vec = vec[:i] + vec[i + 1 :]
            else:
                _, col, pivot = op
                f = vec[col] * pivot[col]
                vec = [x - f * p for x, p in zip(vec, pivot)]
                vec = vec[:col] + vec[col + 1 :]
        return target.project(vec)


def _eliminate_block(pair, b):
    """Remove a block consisting of one exponent-1 variable.

    The variable occurs linearly in exactly one relation, so one upper
    row of the matrix has entry +-1 in its column; integer row reduction
    against that row clears the column, and dropping both leaves the
    matrix of a pair with one block less.  The class group is unchanged.
    """
    mat = pair.matrix()
    start, stop = pair.block_spans()[b]
    assert stop - start == 1 and pair.exponents[b] == (1,)
    col = start
    pivot_idx = b - 1 if b >= 1 else 0
    pivot = mat[pivot_idx]
    assert pivot[col] in (1, -1)
    rows = []
    for t, row in enumerate(mat):
        if t == pivot_idx:
            continue
        f = row[col] * pivot[col]
        rows.append(tuple(x - f * p for x, p in zip(row, pivot)))
    rows = [r[:col] + r[col + 1 :] for r in rows]
    exponents = pair.exponents[:b] + pair.exponents[b + 1 :]
    new_n = sum(len(block) for block in exponents)
    lower = rows[-pair.s :]
    d_rows = tuple(r[:new_n] for r in lower)
    free_rows = tuple(r[new_n:] for r in lower)
    out = DefiningPair(exponents, d_rows, free_rows)
    assert out.matrix() == tuple(rows), "row reduction broke the block layout"
    return out, ("pivot_drop", col, pivot)


def contract(dp, column):
    """Delete an exceptional column and project the grading.

    The weight of the deleted column must be removable: the remaining
    columns still have to generate the whole space as a cone.  The image
    of the anticanonical class under the induced projection is checked
    against the anticanonical class of the output, coordinate by
    coordinate, as are the weights of all surviving columns.
    """
    report = validate(dp)
    if report.errors:
        raise ValueError("invalid input pair: " + report.errors[0])
    width = dp.total_columns
    if not 0 <= column < width:
        raise ValueError(f"column index {column} out of range")
    if column not in exceptional_weights(dp):
        raise ValueError(
            f"column {column} does not carry an exceptional weight: the "
            "remaining columns must still generate the whole space as a cone"
        )
    gin = grading_of(dp)
    ops = [("drop", column)]
    label = dp.column_labels()[column]
    if label[0] == "free":
        k = label[1]
        free = tuple(row[:k] + row[k + 1 :] for row in dp.free_rows)
        working = DefiningPair(dp.exponents, dp.d_rows, free, dp.coeffs)
    else:
        b, j = label[1], label[2]
        # a singleton block's column never passes the exceptionality
        # test, so the block keeps at least one variable
        assert len(dp.exponents[b]) >= 2
        exponents = (
            dp.exponents[:b]
            + (dp.exponents[b][:j] + dp.exponents[b][j + 1 :],)
            + dp.exponents[b + 1 :]
        )
        tpos = dp.block_spans()[b][0] + j
        d_rows = tuple(row[:tpos] + row[tpos + 1 :] for row in dp.d_rows)
        working = DefiningPair(exponents, d_rows, dp.free_rows, dp.coeffs)
    eliminated = []
    while working.r >= 2:
        redundant = [
            i
            for i, block in enumerate(working.exponents)
            if block == (1,)
        ]
        if not redundant:
            break
        b = redundant[0]
        working, op = _eliminate_block(working, b)
        ops.append(op)
        eliminated.append(b)
    out_report = validate(working)
    if out_report.errors:
        raise ValueError(
            "contraction produced invalid defining data: "
            + out_report.errors[0]
        )
    step = ContractionStep(
        input=dp,
        column=column,
        output=working,
        eliminated_blocks=tuple(eliminated),
        ops=tuple(ops),
    )
    gout = grading_of(working)
    assert step.project(gin.anticanonical) == gout.anticanonical, (
        "anticanonical class does not survive the projection"
    )
    survivors = list(range(width))
    for op in step.ops:
        del survivors[op[1]]
    for t, j in enumerate(survivors):
        assert step.project(gin.weights[j]) == gout.weights[t], (
            "weight of a surviving column does not survive the projection"
        )
    return step


def contract_to_minimal(dp):
    """Contract exceptional columns until none remain.

    Among the contractible columns, a step that keeps at least one
    defining relation (two or more blocks after the redundancy rewrite,
    that is r >= 2) is preferred, lowest column index first; columns
    whose contraction collapses every relation are taken only as a last
    resort.  Each step removes at least one column, so the chain always
    terminates.
    """
    report = validate(dp)
    if report.errors:
        raise ValueError("invalid input pair: " + report.errors[0])
    if not is_fano(grading_of(dp)):
        raise ValueError("contraction chains need a Fano input")
    steps = []
    current = dp
    while True:
        candidates = sorted(exceptional_weights(current))
        if not candidates:
            break
        best = None
        for j in candidates:
            try:
                step = contract(current, j)
            except ValueError:
                continue
            score = 0 if step.output.r >= 2 else 1
            if best is None or (score, j) < best[0]:
                best = ((score, j), step)
            if score == 0:
                break
        if best is None:
            break
        steps.append(best[1])
        current = best[1].output
    return steps


def trail_summary(dp, steps):
    """Endpoint data of a contraction chain, for reporting.

    The final pair either has no exceptional weight left, or the chain
    stopped early because every remaining candidate produced invalid
    data; pairs with fewer than two relations, or with blocks the
    redundancy rewrite could not remove, describe toric varieties and
    are flagged.
    """
    final = steps[-1].output if steps else dp
    redundant = validate(final).redundant_blocks()
    return {
        "steps": len(steps),
        "final": final,
        "combinatorially_minimal": is_combinatorially_minimal(final),
        "toric_degenerate": final.r < 2 or bool(redundant),
        "exceptional_remaining": tuple(sorted(exceptional_weights(final))),
    }
