"""Incumbent refinement phase: diagonal ray mutation from the best cell
vertex, a rotational sweep over the remaining diagonal directions, and
midpoint crossover of the cell edges around each accepted candidate.

The ray and rotation lengths carry a mesh scale that halves whenever a full
sweep fails to improve the incumbent; without that refinement the fixed
sweep lengths quantize the reachable points and stall at a lattice distance
from optima that do not sit on the grid.  The scale stops halving at
SCALE_MIN, which (together with the stall rule and the evaluation budget)
bounds every run.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core import BudgetExceeded, EvalContext, Sense, SgmConfig, better
from .subdivision import GridCell, Phase1Outcome

DIR_FULL_MAX_DIM = 6
SCALE_MIN = 2.0 ** -24
STALL_LIMIT = 3


@dataclass
class RefineState:
    s: np.ndarray
    s_value: float
    cell: GridCell
    rotations_used: int = 0
    crossovers_used: int = 0
    last_ray: Optional[Tuple[tuple, float]] = None
    scale: float = 1.0


def select_best_vertex(outcome: Phase1Outcome, sense: Sense):
    """Vertex with the best cached value; ties go to the lowest relative
    coordinates in lexicographic order."""
    if not outcome.vertices:
        raise ValueError("phase-1 outcome has no labeled vertices")
    ordered = min if sense is Sense.MIN else max
    best = None
    for v in outcome.vertices:
        if best is None:
            best = v
        elif v.value == best.value:
            if v.rel < best.rel:
                best = v
        elif better(v.value, best.value, sense):
            best = v
    return best.as_array(), best.value


def diagonal_directions(n: int) -> List[tuple]:
    """All 2^n sign vectors, lexicographic with +1 before -1 (all-ones first)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return [tuple(p) for p in itertools.product((1, -1), repeat=n)]


def sweep_directions(n: int, s=None, center=None) -> List[tuple]:
    """Directions a sweep actually iterates: the full diagonal set for small
    n, else the two main diagonals, the diagonal pointing from s toward the
    domain center, and the single-axis flips of both main diagonals."""
    if n <= DIR_FULL_MAX_DIM:
        return diagonal_directions(n)
    dirs = [tuple([1] * n), tuple([-1] * n)]
    if s is not None and center is not None:
        inward = np.sign(np.asarray(center, dtype=float) - np.asarray(s, dtype=float))
        inward = np.where(inward == 0, 1.0, inward)
        dirs.append(tuple(int(v) for v in inward))
    for j in range(n):
        flip = [1] * n
        flip[j] = -1
        dirs.append(tuple(flip))
        flip2 = [-1] * n
        flip2[j] = 1
        dirs.append(tuple(flip2))
    seen = set()
    out = []
    for d in dirs:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def ray_mutate(s, direction, alpha: float) -> np.ndarray:
    """Endpoint of the ray from s along a sign vector: every component moves
    by alpha, so the step has max-norm alpha and Euclidean norm alpha*sqrt(n)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return np.asarray(s, dtype=float) + alpha * np.asarray(direction, dtype=float)


def alpha_sweep(state: RefineState, ctx: EvalContext, config: SgmConfig,
                direction) -> Optional[Tuple[np.ndarray, float]]:
    """Try rays of length 1x..10x alpha_base (times the mesh scale) along one
    direction; the first strictly better feasible endpoint wins.  Endpoints
    outside the box are skipped without costing an evaluation."""
    for m in range(1, 11):
        alpha = m * config.alpha_base * state.scale
        p = ray_mutate(state.s, direction, alpha)
        state.last_ray = (tuple(direction), alpha)
        if not ctx.feasible(p):
            continue
        v = ctx.value(p)
        if better(v, state.s_value, ctx.sense):
            return p, v
    return None


def rotational_sweep(state: RefineState, ctx: EvalContext, config: SgmConfig,
                     directions) -> Optional[Tuple[np.ndarray, float]]:
    """Rotate through the remaining diagonals at each beta length (times the
    mesh scale).  Every evaluated candidate counts against trm_max; the
    first strict improvement is returned."""
    if state.rotations_used >= config.trm_max:
        return None
    skip = state.last_ray[0] if state.last_ray is not None else None
    for beta in config.beta_sweep:
        for e in directions:
            if skip is not None and tuple(e) == skip:
                continue
            if state.rotations_used >= config.trm_max:
                return None
            p = ray_mutate(state.s, e, beta * state.scale)
            if not ctx.feasible(p):
                continue
            v = ctx.value(p)
            state.rotations_used += 1
            if better(v, state.s_value, ctx.sense):
                return p, v
    return None


def crossover_midpoint(p1, p2) -> np.ndarray:
    """Componentwise midpoint of two parents."""
    a = np.asarray(p1, dtype=float)
    b = np.asarray(p2, dtype=float)
    if a.size != b.size:
        raise ValueError("parents must share a dimension")
    return 0.5 * (a + b)


def nearest_corner_index(cell: GridCell, p) -> int:
    """Corner of the cell nearest to p (per-axis; exact ties pick the lower
    corner, which is the lexicographically smaller point)."""
    p = np.asarray(p, dtype=float)
    mid = cell.center
    index = 0
    for j in range(cell.dim):
        if p[j] > mid[j]:
            index |= 1 << j
    return index


def crossover_adjacent_sides(cell: GridCell, ray_end) -> List[np.ndarray]:
    """Midpoints of the n cell edges incident to the corner nearest ray_end."""
    idx = nearest_corner_index(cell, ray_end)
    corner = cell.corner(idx)
    step = cell.step
    mids = []
    for j in range(cell.dim):
        other = corner.copy()
        if (idx >> j) & 1:
            other[j] -= step[j]
        else:
            other[j] += step[j]
        mids.append(crossover_midpoint(corner, other))
    return mids


def run_phase2(outcome: Phase1Outcome, obj, config: SgmConfig, ctx: EvalContext,
               trace_sink=None, trace_offset: int = 0):
    """Refine the best phase-1 vertex.

    Each outer iteration: (a) ray sweeps over the diagonal directions,
    all-ones first; (b) on failure, the rotational sweep; (c) on success at
    p, midpoint crossover around p and the incumbent moves to the best of
    {s, p, midpoints}.  A fully failed iteration halves the mesh scale.
    Termination: the scale bottoms out with nothing better, three
    consecutive sub-tolerance improvements, or budget exhaustion.

    Returns (state, generations, trace_rows).
    """
    s, s_value = select_best_vertex(outcome, ctx.sense)
    state = RefineState(s=s, s_value=s_value, cell=outcome.cell)
    trace = []
    gens = 0
    if config.trm_max == 0 and config.tc_max == 0:
        return state, 0, trace
    n = obj.dim
    static_dirs = sweep_directions(n) if n <= DIR_FULL_MAX_DIM else None
    floor_value = s_value
    floor_point = s
    stall = 0
    try:
        while True:
            ctx.new_epoch()
            state.s_value = ctx.value(state.s)
            dirs = static_dirs if static_dirs is not None else \
                sweep_directions(n, state.s, obj.domain.center)
            found = None
            for d in dirs:
                found = alpha_sweep(state, ctx, config, d)
                if found is not None:
                    break
            if found is None:
                found = rotational_sweep(state, ctx, config, dirs)
            gens += 1
            if found is None:
                if trace_sink is not None:
                    trace_sink(gens, state.s, None, False)
                trace.append((trace_offset + gens, floor_value,
                              tuple(float(c) for c in floor_point)))
                if state.scale <= SCALE_MIN:
                    break
                state.scale *= 0.5
                continue
            p, pv = found
            pool = [(p, pv)]
            if state.crossovers_used < config.tc_max:
                state.crossovers_used += 1
                for mid in crossover_adjacent_sides(state.cell, p):
                    if ctx.feasible(mid):
                        pool.append((mid, ctx.value(mid)))
            new_s, new_v = state.s, state.s_value
            for q, qv in pool:
                if better(qv, new_v, ctx.sense):
                    new_s, new_v = q, qv
            improvement = abs(new_v - state.s_value)
            state.s, state.s_value = np.asarray(new_s, dtype=float), new_v
            if better(new_v, floor_value, ctx.sense):
                floor_value, floor_point = new_v, state.s
            if trace_sink is not None:
                trace_sink(gens, state.s, p, True)
            trace.append((trace_offset + gens, floor_value,
                          tuple(float(c) for c in floor_point)))
            if improvement < config.tolerance:
                stall += 1
                if stall >= STALL_LIMIT:
                    break
            else:
                stall = 0
    except BudgetExceeded:
        gens += 1
        trace.append((trace_offset + gens, floor_value,
                      tuple(float(c) for c in floor_point)))
    return state, gens, trace
