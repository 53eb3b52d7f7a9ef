"""Per-array data-reuse analysis for scalar replacement.

For every array the analyzer determines the carrier loop (the outermost
loop whose consecutive iterations re-access overlapping elements), the
register count needed for full scalar replacement (the overlap of two
consecutive carrier working sets), the dynamic access counts before and
after full replacement, and the benefit/cost ratio used by the greedy
allocators.

Working sets are evaluated over the sub-box of loops whose indices
actually occur in the array's subscripts, so the analysis stays cheap
relative to a full iteration-space walk; the brute-force oracle module
recomputes the same quantities from exhaustive traces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .kernel import ArrayRef, Kernel


@dataclass(frozen=True)
class ReuseInfo:
    """Reuse summary for one array (all its static references pooled)."""

    array: str
    ref_ids: tuple[int, ...]
    carrier: int | None
    required_regs: int
    total_accesses: int
    after_accesses: int
    save: int
    bc: Fraction
    forwarded_store: bool  # a later statement reads the written element back

    @property
    def reusable(self) -> bool:
        return self.save > 0


def forwarded_read_ids(kernel: Kernel) -> frozenset[int]:
    """Reads that a strictly earlier statement writes with identical subscripts.

    Such reads are satisfied by value forwarding inside the iteration and
    never touch memory under any allocation.
    """
    writes: dict[tuple[str, tuple], int] = {}
    out = set()
    for stmt in kernel.statements:
        for r in stmt.reads:
            key = (r.array, r.subscripts)
            if key in writes and writes[key] < stmt.stmt_id:
                out.add(r.ref_id)
        writes[(stmt.write.array, stmt.write.subscripts)] = stmt.stmt_id
    return frozenset(out)


# ---------------------------------------------------------------------------
# working-set machinery

def _pattern_footprint(kernel: Kernel, patterns) -> set[tuple[int, ...]]:
    """Distinct elements touched by the given subscript patterns over the nest."""
    relevant = set().union(*(e.indices() for p in patterns for e in p)) if patterns else set()
    loops = [lp for lp in kernel.loops if lp.index in relevant]
    names = [lp.index for lp in loops]
    out: set[tuple[int, ...]] = set()
    for point in itertools.product(*(lp.range for lp in loops)):
        env = dict(zip(names, point))
        for p in patterns:
            out.add(tuple(e.eval(env) for e in p))
    return out


def _consecutive_overlap(kernel: Kernel, patterns, level: int) -> int:
    """Max |WS(t) & WS(t+1)| over consecutive iterations of loops[level].

    A loop is enumerated only where it can change the answer: inner loops
    that appear in some subscript, and outer loops on which the patterns
    disagree (identical outer coefficients only translate both windows).
    """
    loops = kernel.loops
    carrier = loops[level]
    if carrier.trip < 2:
        return 0
    relevant = set().union(*(e.indices() for p in patterns for e in p))

    def uniform(index: str) -> bool:
        coeffs = {tuple(e.coeff(index) for e in p) for p in patterns}
        return len(coeffs) == 1

    outer = [lp for lp in loops[:level] if lp.index in relevant and not uniform(lp.index)]
    inner = [lp for lp in loops[level + 1:] if lp.index in relevant]
    fixed = {lp.index: lp.lower for lp in loops if lp.index in relevant
             and lp is not carrier and lp not in outer and lp not in inner}

    # identical carrier coefficients only translate consecutive windows, so
    # one pair of windows decides the overlap
    carrier_values = carrier.range
    if uniform(carrier.index):
        carrier_values = range(carrier.lower, carrier.lower + 2 * carrier.step, carrier.step)

    best = 0
    for outer_vals in itertools.product(*(lp.range for lp in outer)):
        env = dict(fixed)
        env.update(zip((lp.index for lp in outer), outer_vals))
        prev: set | None = None
        for t in carrier_values:
            env[carrier.index] = t
            ws: set[tuple[int, ...]] = set()
            for inner_vals in itertools.product(*(lp.range for lp in inner)):
                env.update(zip((lp.index for lp in inner), inner_vals))
                for p in patterns:
                    ws.add(tuple(e.eval(env) for e in p))
            if prev is not None and len(prev & ws) > best:
                best = len(prev & ws)
            prev = ws
    return best


def _carrier_and_regs(kernel: Kernel, patterns) -> tuple[int | None, int]:
    for level, lp in enumerate(kernel.loops):
        if lp.trip < 2:
            continue
        overlap = _consecutive_overlap(kernel, patterns, level)
        if overlap > 0:
            return level, overlap
    return None, 1


# ---------------------------------------------------------------------------
# per-reference operations

def carrier_loop(kernel: Kernel, ref: ArrayRef) -> int | None:
    """Outermost loop level at which consecutive iterations re-access elements of ref."""
    return _carrier_and_regs(kernel, [ref.subscripts])[0]


def required_registers(kernel: Kernel, ref: ArrayRef) -> int:
    """Registers for full scalar replacement: consecutive working-set overlap."""
    return _carrier_and_regs(kernel, [ref.subscripts])[1]


def saved_accesses(kernel: Kernel, ref: ArrayRef) -> tuple[int, int, int]:
    """(total, after, save) for one static reference under full replacement.

    Each distinct element costs one residual access: the single load of a
    read reference, or the final store of a write reference (intermediate
    stores of a re-written element are deferred).  A write that never
    re-writes an element keeps all of its stores.
    """
    total = 1
    for lp in kernel.loops:
        total *= lp.trip
    after = len(_pattern_footprint(kernel, [ref.subscripts]))
    return total, after, total - after


def benefit_cost(info: ReuseInfo) -> Fraction:
    """Saved accesses per required register; floors at 1 when nothing is saved."""
    return _bc(info.save, info.required_regs)


def _bc(save: int, required_regs: int) -> Fraction:
    if save <= 0:
        return Fraction(1)
    return Fraction(save, required_regs)


# ---------------------------------------------------------------------------
# whole-kernel driver

def analyze_all(kernel: Kernel) -> dict[str, ReuseInfo]:
    """ReuseInfo per array, keyed by name, in first-reference order.

    Static references to one array share a register pool, so identical
    write/read subscript pairs collapse into a single record; forwarded
    reads contribute no memory accesses.
    """
    forwarded = forwarded_read_ids(kernel)
    per_array: dict[str, list[ArrayRef]] = {}
    for r in kernel.refs:
        per_array.setdefault(r.array, []).append(r)

    iter_points = 1
    for lp in kernel.loops:
        iter_points *= lp.trip

    out: dict[str, ReuseInfo] = {}
    for array, members in per_array.items():
        patterns = sorted({m.subscripts for m in members},
                          key=lambda p: tuple(str(e) for e in p))
        level, regs = _carrier_and_regs(kernel, patterns)

        counted = [m for m in members if m.ref_id not in forwarded]
        total = iter_points * len(counted)
        read_pats = sorted({m.subscripts for m in counted if m.access == "read"},
                           key=lambda p: tuple(str(e) for e in p))
        write_pats = sorted({m.subscripts for m in counted if m.access == "write"},
                            key=lambda p: tuple(str(e) for e in p))
        after = len(_pattern_footprint(kernel, read_pats)) if read_pats else 0
        after += len(_pattern_footprint(kernel, write_pats)) if write_pats else 0
        save = total - after

        out[array] = ReuseInfo(
            array=array,
            ref_ids=tuple(m.ref_id for m in members),
            carrier=level,
            required_regs=regs,
            total_accesses=total,
            after_accesses=after,
            save=save,
            bc=_bc(save, regs),
            forwarded_store=any(m.ref_id in forwarded for m in members),
        )
    return out


def bc_order(reuse: dict[str, ReuseInfo]) -> list[str]:
    """Array names by descending benefit/cost; ties keep source order."""
    names = list(reuse)
    return sorted(names, key=lambda a: (-reuse[a].bc, names.index(a)))
