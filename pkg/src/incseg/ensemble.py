"""Majority-vote combination of segmentation outputs."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence


def majority_vote(boundary_sets: Sequence[Iterable[int]],
                  block_edges: Iterable[int],
                  n_chars: int) -> frozenset[int]:
    """Keep a position iff strictly more than half of the inputs contain it.

    Block edges do not vote: they are given boundaries and always present in
    the result.  Even splits resolve to no-boundary.
    """
    k = len(boundary_sets)
    if k < 1:
        raise ValueError("need at least one input")
    edges = set(block_edges)
    votes: Counter[int] = Counter()
    for bs in boundary_sets:
        s = set(bs)
        bad = [p for p in s if not 0 < p < n_chars]
        if bad:
            raise ValueError(
                f"boundary position {bad[0]} outside 1..{n_chars - 1}; "
                "inputs must cover the same character stream")
        votes.update(s - edges)
    voted = {p for p, v in votes.items() if 2 * v > k}
    return frozenset(voted | edges)
