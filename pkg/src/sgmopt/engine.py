"""Public SGM solver entry point: phase 1 (subdivision) feeding phase 2
(refinement) under one evaluation counter and one rng stream."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .core import (EvalContext, EvalCounter, Objective, RngStream, RunResult,
                   SgmConfig, better, deviation)
from .refinement import run_phase2
from .subdivision import run_phase1

# Best-performing settings per De Jong function (budget/tolerance are ours).
_FUNCTION_SETTINGS = {
    "F1": dict(tf_rounds=2, trm_max=15, tc_max=3, eval_budget=20_000),
    "F2": dict(tf_rounds=2, trm_max=16, tc_max=11, eval_budget=20_000),
    "F3": dict(tf_rounds=2, trm_max=25, tc_max=5, eval_budget=60_000),
    "F4": dict(tf_rounds=2, trm_max=75, tc_max=30, eval_budget=60_000),
    "F5": dict(tf_rounds=8, trm_max=9, tc_max=2, eval_budget=30_000),
}
_GENERIC_SETTINGS = dict(tf_rounds=3, trm_max=50, tc_max=20, eval_budget=10_000)


def default_config(obj_or_name, seed: int = 0) -> SgmConfig:
    """Per-function tuned settings for F1-F5, generic defaults otherwise."""
    name = obj_or_name.name if isinstance(obj_or_name, Objective) else str(obj_or_name)
    settings = _FUNCTION_SETTINGS.get(name.strip().upper(), _GENERIC_SETTINGS)
    return SgmConfig(seed=seed, **settings)


@dataclass
class SolverHandle:
    """An objective paired with a validated configuration."""

    objective: Objective
    config: SgmConfig

    def __post_init__(self):
        self.config.validate(self.objective)

    def run(self, rng: Optional[RngStream] = None) -> RunResult:
        return solve(self.objective, self.config, rng=rng)


def solve(obj: Objective, config: SgmConfig, rng: Optional[RngStream] = None,
          phase1_sink=None, phase2_sink=None) -> RunResult:
    """Run both SGM phases and report the result.

    Deterministic objectives report the best point over every evaluation
    made.  Stochastic objectives report the final incumbent (the point the
    geometric search settled on) with its latest evaluation, because the
    minimum over noisy draws identifies the luckiest noise sample rather
    than a good point.
    """
    config.validate(obj)
    t0 = time.perf_counter()
    if rng is None:
        rng = RngStream(config.seed)
    counter = EvalCounter(config.eval_budget)
    ctx = EvalContext(obj, counter, rng, config.sense)
    outcome = run_phase1(obj, config, ctx, trace_sink=phase1_sink)
    trace = list(outcome.trace)
    gens = outcome.rounds_completed
    if outcome.vertices and counter.remaining > 0:
        state, p2_gens, p2_trace = run_phase2(
            outcome, obj, config, ctx,
            trace_sink=phase2_sink, trace_offset=len(trace) - 1)
        gens += p2_gens
        trace.extend(p2_trace)
        final_point, final_value = state.s, state.s_value
    else:
        final_point, final_value = ctx.best_point, ctx.best_value
    if obj.stochastic:
        best_point = tuple(float(c) for c in final_point)
        best_value = float(final_value)
    else:
        best_point = tuple(float(c) for c in ctx.best_point)
        best_value = float(ctx.best_value)
        last = trace[-1] if trace else None
        if last is None or better(best_value, last[1], config.sense):
            trace.append((gens, best_value, best_point))
    # trace rows carry the running best (phase-2 anchors to its incumbent,
    # which can start above phase-1's best-seen point)
    mono = []
    cur_v, cur_p = None, None
    for g, v, p in trace:
        if cur_v is None or better(v, cur_v, config.sense):
            cur_v, cur_p = v, p
        mono.append((g, cur_v, cur_p))
    trace = mono
    sd, _ = deviation(best_point, obj.known_optimum)
    wallclock_ms = (time.perf_counter() - t0) * 1000.0
    return RunResult(
        best_point=best_point,
        best_value=best_value,
        evaluations=counter.count,
        generations=gens,
        sd=sd,
        trace=trace,
        wallclock_ms=wallclock_ms,
    )
