"""Greedy compression learner over the penalized unigram objective.

Each iteration scores every candidate n-gram by the exact change the
compression would cause to

    nll(unigram ML) + sign * (types/2) * ln N + penalty

and applies the minimizer while it is negative.  The change decomposes into
a candidate-local part (component counts, occurrence count, lengths) and a
global part that depends only on the current token total M.  The global
part grows as M shrinks, so a heap entry scored at an older, larger M is a
valid lower bound for the candidate's current score: popping entries,
re-scoring them at the current M, and re-inserting until the top is exact
yields the true minimizer without rescoring the whole candidate table.
"""

from __future__ import annotations

import heapq
import math
import time
from collections import Counter
from dataclasses import dataclass
from math import fsum, log
from typing import Callable, Sequence

from .corpus import GoldSegmentation, RawCorpus
from .lexmodel import (CandidateIndex, Lexicon, TokenSequence, TokenTuple,
                       init_from_corpus)

PENALTY_KINDS = ("xlogx", "xsquared")


@dataclass(frozen=True)
class PenaltyParams:
    """Per-token intercept weight and super-additive length-cost weight."""

    alpha: float = 0.0
    beta: float = 0.0
    kind: str = "xlogx"

    def __post_init__(self) -> None:
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"penalty kind must be one of {PENALTY_KINDS}")
        for v in (self.alpha, self.beta):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("alpha and beta must be finite and >= 0")


def length_cost(kind: str) -> Callable[[int], float]:
    """Super-additive per-token length cost g(x)."""
    if kind == "xlogx":
        return lambda x: x * log(x)
    if kind == "xsquared":
        return lambda x: float(x * x)
    raise ValueError(f"unknown penalty kind {kind!r}")


@dataclass(frozen=True)
class LearnerOptions:
    n_max: int = 2
    max_iters: int | None = None       # default: one per input character
    stop_at: int | None = None         # forced early stop (lab control)
    trace_interval: int = 100
    trace_mode: str = "light"          # none | light | criteria
    trace_boundaries: bool = False
    complexity_sign: int = 1           # -1: read the model-size term literally
    literal_stop: bool = False         # stop on improvement, as printed
    validate_every: int = 0            # 0 = off; else audit objective every K

    def __post_init__(self) -> None:
        if self.trace_mode not in ("none", "light", "criteria"):
            raise ValueError("trace_mode must be none|light|criteria")
        if self.complexity_sign not in (1, -1):
            raise ValueError("complexity_sign must be +1 or -1")


@dataclass
class TraceRecord:
    iteration: int
    objective: float
    n_tokens: int
    n_types: int
    n_boundaries: int
    criteria: dict[str, float] | None = None
    token_f: float | None = None
    boundaries: frozenset[int] | None = None


@dataclass
class CompressionEvent:
    iteration: int
    token: TokenTuple
    fresh_id: int
    occurrences: int
    delta: float
    objective: float


@dataclass
class SegmentationHypothesis:
    """A finished (or traced) segmentation over a corpus' character stream."""

    boundaries: frozenset[int]
    n_chars: int
    seq: TokenSequence | None = None
    lexicon: Lexicon | None = None


@dataclass
class RunResult:
    hypothesis: SegmentationHypothesis
    iterations: int
    stopped: str                        # converged | stop_at | iteration_cap
    objective: float
    trace: list[TraceRecord]
    wall_time: float
    state: "LearnerState"


def penalty(seq: TokenSequence, params: PenaltyParams) -> float:
    """Sum over token occurrences of -alpha + beta * g(length), in nats."""
    g = length_cost(params.kind)
    glen = fsum(c * g(seq.lengths[t]) for t, c in seq.active_items())
    return params.beta * glen - params.alpha * seq.total


def penalized_likelihood(seq: TokenSequence, params: PenaltyParams,
                         complexity_sign: int = 1) -> float:
    """Unigram ML cross-entropy + model-size term + penalty, in nats."""
    m_total = seq.total
    if m_total < 1:
        raise ValueError("empty sequence")
    nll = fsum(-c * log(c / m_total) for _, c in seq.active_items())
    k = seq.n_types()
    return nll + complexity_sign * 0.5 * k * log(seq.n_chars) + penalty(
        seq, params)


class LearnerState:
    """One in-progress compression run: sequence, lexicon, scores, heap."""

    def __init__(self, seq: TokenSequence, lex: Lexicon,
                 params: PenaltyParams,
                 options: LearnerOptions | None = None) -> None:
        self.options = options or LearnerOptions()
        self.seq = seq
        self.lex = lex
        self.params = params
        self.iteration = 0
        self.trace: list[TraceRecord] = []
        self.index = CandidateIndex(seq, self.options.n_max)
        self._ln_n = log(seq.n_chars)
        self._sign = self.options.complexity_sign
        self._g = length_cost(params.kind)
        self._glen = [self._g(x) for x in seq.lengths]
        self.objective = penalized_likelihood(seq, params, self._sign)
        self._heap: list[tuple[float, int, int, TokenTuple]] = []
        self._version: dict[TokenTuple, int] = {}
        self._local: dict[TokenTuple, float] = {}
        self._entry_key: dict[TokenTuple, tuple[float, int]] = {}
        self._vnext = 0
        _, fresh = self.index.consume_dirty()
        self._rescore(fresh)

    # -- scoring -------------------------------------------------------

    def _phi(self, m: int, n: int, total: int) -> float:
        after = total - m * (n - 1)
        drop = after * log(after) if after > 0 else 0.0
        return drop - total * log(total)

    def _local_term(self, t: TokenTuple, m: int) -> float:
        counts = self.seq.counts
        if len(t) == 2:
            a, b = t
            comp = ((a, 2),) if a == b else ((a, 1), (b, 1))
        else:
            comp = tuple(Counter(t).items())
        acc = 0.0
        d_types = 1
        for w, r in comp:
            c = counts[w]
            c2 = c - m * r
            acc += (c2 * log(c2) if c2 > 0 else 0.0) - c * log(c)
            if c2 == 0:
                d_types -= 1
        out = -acc - m * log(m) + self._sign * 0.5 * d_types * self._ln_n
        p = self.params
        if p.alpha:
            out += p.alpha * m * (len(t) - 1)
        if p.beta:
            glen = self._glen
            lengths = self.seq.lengths
            whole = 0
            parts = 0.0
            for w in t:
                whole += lengths[w]
                parts += glen[w]
            out += p.beta * m * (self._g(whole) - parts)
        return out

    def _rescore(self, tuples) -> None:
        """Refresh local terms; re-insert only candidates whose key dropped.

        An untouched heap entry scored at an older state is kept whenever the
        candidate's key did not decrease: the global term only grows as the
        sequence shrinks, so the old entry stays a valid lower bound and the
        pop loop re-verifies it against current counts anyway.
        """
        index_m = self.index.m
        total = self.seq.total
        local = self._local
        version = self._version
        entry_key = self._entry_key
        heap = self._heap
        local_term = self._local_term
        base = -total * log(total)
        for t in tuples:
            m = index_m[t]
            a = local_term(t, m)
            local[t] = a
            after = total - m * (len(t) - 1)
            d = a + base + (after * log(after) if after > 0 else 0.0)
            key = (d, -m)
            old = entry_key.get(t)
            if old is not None and old <= key:
                continue
            v = self._vnext
            self._vnext = v + 1
            version[t] = v
            entry_key[t] = key
            heapq.heappush(heap, (d, -m, v, t))
        if len(heap) > 32768 and len(heap) > 6 * len(version):
            self._compact()

    def _compact(self) -> None:
        index_m = self.index.m
        total = self.seq.total
        local = self._local
        entry_key = self._entry_key
        base = -total * log(total)
        heap = []
        for t, v in self._version.items():
            m = index_m[t]
            after = total - m * (len(t) - 1)
            d = local[t] + base + (after * log(after) if after > 0 else 0.0)
            entry_key[t] = (d, -m)
            heap.append((d, -m, v, t))
        heapq.heapify(heap)
        self._heap = heap

    def _select(self) -> tuple[float, int, TokenTuple] | None:
        """Exact minimizer of the candidate scores under current counts."""
        heap = self._heap
        version = self._version
        local = self._local
        index = self.index
        total = self.seq.total
        best_key: tuple[float, int] | None = None
        best: list[TokenTuple] = []
        pending: list[tuple[float, int, int, TokenTuple]] = []
        while heap:
            entry = heap[0]
            if best_key is not None and (entry[0], entry[1]) > best_key:
                break
            heapq.heappop(heap)
            d_st, negm_st, ver, t = entry
            if version.get(t) != ver:
                continue
            m = index.m[t]
            d_now = local[t] + self._phi(m, len(t), total)
            if d_now == d_st:
                pending.append(entry)
                key = (d_now, -m)
                if best_key is None or key < best_key:
                    best_key = key
                    best = [t]
                elif key == best_key:
                    best.append(t)
            else:
                self._entry_key[t] = (d_now, -m)
                heapq.heappush(heap, (d_now, -m, ver, t))
        for entry in pending:
            heapq.heappush(heap, entry)
        if best_key is None:
            return None
        if len(best) > 1:
            best.sort(key=lambda u: (index.first_position(u), u))
        return best_key[0], -best_key[1], best[0]

    def score_candidate(self, s: Sequence[int]) -> float:
        """Exact objective change if ``s`` were compressed now."""
        t = tuple(s)
        m = self.index.m.get(t)
        if m is None:
            raise ValueError(f"{t} is not a live candidate")
        return self._local_term(t, m) + self._phi(m, len(t), self.seq.total)

    # -- stepping ------------------------------------------------------

    def _apply(self, t: TokenTuple, delta: float) -> CompressionEvent:
        cd = self.index.apply(t, self.lex)
        self._glen.append(self._g(self.seq.lengths[cd.fresh_id]))
        self.objective += delta
        self.iteration += 1
        dead, affected = self.index.consume_dirty()
        for td in dead:
            self._version.pop(td, None)
            self._local.pop(td, None)
            self._entry_key.pop(td, None)
        self._rescore(affected)
        opts = self.options
        if opts.validate_every and self.iteration % opts.validate_every == 0:
            self.check_objective()
        return CompressionEvent(self.iteration, t, cd.fresh_id,
                                cd.occurrences, delta, self.objective)

    def check_objective(self, rel_tol: float = 1e-6) -> None:
        fresh = penalized_likelihood(self.seq, self.params, self._sign)
        if abs(fresh - self.objective) > rel_tol * max(1.0, abs(fresh)):
            raise AssertionError(
                f"objective drift: incremental {self.objective!r} "
                f"vs recomputed {fresh!r}")

    def hypothesis(self) -> SegmentationHypothesis:
        return SegmentationHypothesis(frozenset(self.seq.boundary_set()),
                                      self.seq.n_chars, self.seq, self.lex)


def init_state(corpus: RawCorpus, params: PenaltyParams,
               options: LearnerOptions | None = None) -> LearnerState:
    seq, lex = init_from_corpus(corpus)
    return LearnerState(seq, lex, params, options)


def step(state: LearnerState) -> CompressionEvent | None:
    """One iteration: apply the best candidate, or report convergence (None)."""
    found = state._select()
    if found is None:
        return None
    delta, _, t = found
    if state.options.literal_stop:
        if delta < 0:
            return None
    elif delta >= 0:
        return None
    return state._apply(t, delta)


def run(corpus: RawCorpus, params: PenaltyParams,
        options: LearnerOptions | None = None,
        gold: GoldSegmentation | None = None) -> RunResult:
    """Loop ``step`` to convergence or an iteration cap, recording a trace."""
    options = options or LearnerOptions()
    t0 = time.perf_counter()
    state = init_state(corpus, params, options)
    cap = options.max_iters if options.max_iters is not None else corpus.n_chars
    if options.stop_at is not None:
        cap = min(cap, options.stop_at)
    stopped = "converged"
    while True:
        if state.iteration >= cap:
            stopped = ("stop_at" if options.stop_at is not None
                       and state.iteration >= options.stop_at else
                       "iteration_cap")
            break
        ev = step(state)
        if ev is None:
            break
        iv = options.trace_interval
        if options.trace_mode != "none" and iv > 0 and ev.iteration % iv == 0:
            state.trace.append(_trace_record(state, corpus, gold))
    if options.trace_mode != "none" and (
            not state.trace or state.trace[-1].iteration != state.iteration):
        state.trace.append(_trace_record(state, corpus, gold))
    hyp = state.hypothesis()
    return RunResult(hyp, state.iteration, stopped, state.objective,
                     state.trace, time.perf_counter() - t0, state)


def _trace_record(state: LearnerState, corpus: RawCorpus,
                  gold: GoldSegmentation | None) -> TraceRecord:
    seq = state.seq
    rec = TraceRecord(
        iteration=state.iteration,
        objective=state.objective,
        n_tokens=seq.total,
        n_types=seq.n_types(),
        n_boundaries=seq.total - 1 if seq.total else 0,
    )
    opts = state.options
    if opts.trace_mode == "criteria" or opts.trace_boundaries:
        bounds = frozenset(seq.boundary_set())
        if opts.trace_boundaries:
            rec.boundaries = bounds
        if opts.trace_mode == "criteria":
            from . import criteria as _criteria
            from . import metrics as _metrics
            vals = _criteria.evaluate_boundaries(corpus, bounds)
            rec.criteria = {cid: cv.value for cid, cv in vals.items()}
            if gold is not None:
                rec.token_f = _metrics.token_prf(
                    bounds, gold.boundaries, corpus.n_chars).f
    return rec
