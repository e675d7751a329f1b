"""Segmentation accuracy metrics and rank-correlation analysis.

Scores are percentages (one decimal when formatted, matching the usual
reporting convention).  Boundary metrics cover internal positions only:
block edges are given to every method, not predicted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import GoldSegmentation, RawCorpus


@dataclass(frozen=True)
class PRF:
    p: float
    r: float
    f: float
    degenerate: bool = False  # some denominator was 0/0, reported as 0.0

    def rounded(self) -> tuple[float, float, float]:
        return round(self.p, 1), round(self.r, 1), round(self.f, 1)


def _prf(correct: int, n_hyp: int, n_gold: int) -> PRF:
    degenerate = n_hyp == 0 or n_gold == 0
    p = 100.0 * correct / n_hyp if n_hyp else 0.0
    r = 100.0 * correct / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f, degenerate)


def _spans(bounds: Iterable[int], n_chars: int) -> list[tuple[int, int]]:
    cuts = [0] + sorted(set(bounds)) + [n_chars]
    return [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]


def token_prf(hyp: Iterable[int], gold: Iterable[int], n_chars: int) -> PRF:
    """Exact word matches: a hypothesized word is correct iff its whole span
    coincides with a gold word."""
    hyp_spans = _spans(hyp, n_chars)
    gold_spans = _spans(gold, n_chars)
    correct = len(set(hyp_spans) & set(gold_spans))
    return _prf(correct, len(hyp_spans), len(gold_spans))


def boundary_prf(hyp: Iterable[int], gold: Iterable[int],
                 block_edges: Iterable[int]) -> PRF:
    edges = set(block_edges)
    h = set(hyp) - edges
    g = set(gold) - edges
    return _prf(len(h & g), len(h), len(g))


def lexicon_prf(hyp: Iterable[int], gold: Iterable[int], n_chars: int,
                chars: str) -> PRF:
    hyp_types = {chars[a:b] for a, b in _spans(hyp, n_chars)}
    gold_types = {chars[a:b] for a, b in _spans(gold, n_chars)}
    correct = len(hyp_types & gold_types)
    return _prf(correct, len(hyp_types), len(gold_types))


@dataclass(frozen=True)
class SegReport:
    token: PRF
    boundary: PRF
    lexicon: PRF

    def as_dict(self) -> dict:
        return {
            level: {"p": prf.p, "r": prf.r, "f": prf.f,
                    "degenerate": prf.degenerate}
            for level, prf in (("token", self.token),
                               ("boundary", self.boundary),
                               ("lexicon", self.lexicon))
        }


def evaluate_segmentation(corpus: RawCorpus, gold: GoldSegmentation,
                          hyp_boundaries: Iterable[int]) -> SegReport:
    n = corpus.n_chars
    if gold.n_chars != n:
        raise ValueError("gold and corpus disagree on character count")
    given = set(hyp_boundaries)
    bad = [p for p in given if not 0 < p < n]
    if bad:
        raise ValueError(f"boundary positions out of range: {bad[:3]}")
    edges = corpus.block_edges()
    hyp = given | edges  # block edges are given, not predicted
    chars = corpus.char_string()
    return SegReport(
        token=token_prf(hyp, gold.boundaries, n),
        boundary=boundary_prf(hyp, gold.boundaries, edges),
        lexicon=lexicon_prf(hyp, gold.boundaries, n, chars),
    )


def fractional_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n with ties averaged."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    sv = v[order]
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of fractional ranks; nan when either ranking has
    zero variance."""
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    if len(xs) < 2:
        raise ValueError("need at least two observations")
    rx = fractional_ranks(xs)
    ry = fractional_ranks(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        return float("nan")
    return float((dx * dy).sum() / (sx * sy))


@dataclass
class CorrelationReport:
    population: str
    n: int
    rho: dict[str, float]
    scatter: dict[str, list[tuple[float, float]]] = field(default_factory=dict)


def correlation_report(rows: Sequence[Mapping[str, float]],
                       criteria: Sequence[str],
                       population: str = "outputs",
                       with_scatter: bool = True) -> CorrelationReport:
    """Spearman's rho between token F and each criterion over ``rows``.

    Each row must carry ``token_f`` and one value per requested criterion.
    Scatter data pairs each row's criterion rank with its F score.
    """
    fs = [float(r["token_f"]) for r in rows]
    rho: dict[str, float] = {}
    scatter: dict[str, list[tuple[float, float]]] = {}
    for cid in criteria:
        vals = [float(r[cid]) for r in rows]
        rho[cid] = spearman_rho(vals, fs)
        if with_scatter:
            ranks = fractional_ranks(vals)
            scatter[cid] = [(float(rk), f) for rk, f in zip(ranks, fs)]
    return CorrelationReport(population, len(rows), rho, scatter)
