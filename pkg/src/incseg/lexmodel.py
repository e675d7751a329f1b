"""Evolving token sequence, lexicon, and incremental n-gram bookkeeping.

The sequence is stored as a doubly linked list over the original character
positions: merging a span keeps its leftmost position alive and unlinks the
rest, so a live position doubles as the global character offset where its
token starts.  Links never cross block edges, which is what keeps candidate
n-grams inside blocks.

Candidate occurrence counts follow greedy left-to-right non-overlapping
semantics; substitution consumes exactly the occurrences that were counted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

from .corpus import RawCorpus

TokenTuple = tuple[int, ...]


@dataclass
class LexEntry:
    surface: str
    components: TokenTuple | None = None  # None for base characters


class Lexicon:
    """Token id -> definition; records the order compressions happened."""

    def __init__(self) -> None:
        self.entries: list[LexEntry] = []
        self.creation_order: list[int] = []

    def define_base(self, surface: str) -> int:
        self.entries.append(LexEntry(surface))
        return len(self.entries) - 1

    def define(self, components: TokenTuple, surface: str) -> int:
        if len(components) < 2:
            raise ValueError("composed entry needs >= 2 components")
        tid = len(self.entries)
        self.entries.append(LexEntry(surface, tuple(components)))
        self.creation_order.append(tid)
        return tid

    def surface(self, tid: int) -> str:
        return self.entries[tid].surface

    def expand(self, tid: int) -> str:
        """Recursively expand an entry down to base characters."""
        e = self.entries[tid]
        if e.components is None:
            return e.surface
        return "".join(self.expand(c) for c in e.components)

    def __len__(self) -> int:
        return len(self.entries)


class TokenSequence:
    """Per-block token lists with maintained counts, total, and lengths."""

    __slots__ = ("tok", "nxt", "prv", "counts", "lengths", "total", "n_chars",
                 "block_starts")

    def __init__(self, tok, nxt, prv, counts, lengths, total, n_chars,
                 block_starts):
        self.tok: list[int] = tok
        self.nxt: list[int] = nxt
        self.prv: list[int] = prv
        self.counts: list[int] = counts
        self.lengths: list[int] = lengths
        self.total: int = total
        self.n_chars: int = n_chars
        self.block_starts: list[int] = block_starts

    def new_token(self, length: int) -> int:
        self.counts.append(0)
        self.lengths.append(length)
        return len(self.counts) - 1

    def merge_site(self, positions: Sequence[int], fresh: int) -> None:
        """Collapse one occurrence (given live positions) into ``fresh``."""
        tok, nxt, prv, counts = self.tok, self.nxt, self.prv, self.counts
        for p in positions:
            counts[tok[p]] -= 1
        counts[fresh] += 1
        self.total -= len(positions) - 1
        p1 = positions[0]
        pn = positions[-1]
        tok[p1] = fresh
        after = nxt[pn]
        nxt[p1] = after
        if after != -1:
            prv[after] = p1

    def iter_positions(self, start: int) -> Iterator[int]:
        p = start
        nxt = self.nxt
        while p != -1:
            yield p
            p = nxt[p]

    def to_blocks(self) -> list[list[int]]:
        return [[self.tok[p] for p in self.iter_positions(s)]
                for s in self.block_starts]

    def boundary_set(self) -> set[int]:
        """All word-boundary character positions, block edges included."""
        out: set[int] = set()
        for s in self.block_starts:
            out.update(self.iter_positions(s))
        out.discard(0)
        return out

    def n_types(self) -> int:
        return sum(1 for c in self.counts if c > 0)

    def active_items(self) -> Iterator[tuple[int, int]]:
        """(token id, count) over types with count >= 1."""
        return ((t, c) for t, c in enumerate(self.counts) if c > 0)


def init_from_corpus(corpus: RawCorpus) -> tuple[TokenSequence, Lexicon]:
    """Character-level starting state: one token per character."""
    n_base = len(corpus.charmap)
    tok: list[int] = []
    nxt: list[int] = []
    prv: list[int] = []
    starts: list[int] = []
    for block in corpus.blocks:
        base = len(tok)
        starts.append(base)
        last = base + len(block) - 1
        for j, cid in enumerate(block):
            p = base + j
            tok.append(cid)
            prv.append(p - 1 if p > base else -1)
            nxt.append(p + 1 if p < last else -1)
    counts = [0] * n_base
    for t in tok:
        counts[t] += 1
    lengths = [1] * n_base
    seq = TokenSequence(tok, nxt, prv, counts, lengths, len(tok), len(tok),
                        starts)
    lex = Lexicon()
    for ch in corpus.charmap.chars:
        lex.define_base(ch)
    return seq, lex


def count_occurrences(seq: TokenSequence, s: Sequence[int]) -> int:
    """Greedy left-to-right non-overlapping occurrences of ``s`` per block."""
    if len(s) < 2:
        raise ValueError("candidate must have >= 2 tokens")
    s = tuple(s)
    n = len(s)
    tok, nxt = seq.tok, seq.nxt
    count = 0
    for start in seq.block_starts:
        p = start
        while p != -1:
            q = p
            k = 0
            while k < n and q != -1 and tok[q] == s[k]:
                q = nxt[q]
                k += 1
            if k == n:
                count += 1
                p = q  # jump past the match
            else:
                p = nxt[p]
    return count


@dataclass
class CompressionDelta:
    """Exact bookkeeping of one compression for delta scoring and audit."""

    fresh_id: int
    token: TokenTuple
    occurrences: int
    count_changes: dict[int, tuple[int, int]]  # token id -> (old, new)
    old_total: int
    new_total: int


def apply_compression(
    seq: TokenSequence,
    lex: Lexicon,
    s: Sequence[int],
    fresh_id: int | None = None,
) -> CompressionDelta:
    """Replace all greedy non-overlapping occurrences of ``s`` by a new token.

    Standalone path (no candidate index); the learner goes through
    ``CandidateIndex.apply`` which performs the same mutation with index
    maintenance.
    """
    s = tuple(s)
    sites = _scan_sites(seq, s)
    if not sites:
        raise ValueError(f"candidate {s} does not occur")
    if fresh_id is None:
        fresh_id = len(seq.counts)
    elif fresh_id != len(seq.counts):
        raise ValueError("fresh_id must be the next dense token id")
    old_counts = {w: seq.counts[w] for w in set(s)}
    old_total = seq.total
    seq.new_token(sum(seq.lengths[w] for w in s))
    lex.define(s, "".join(lex.entries[w].surface for w in s))
    for site in sites:
        seq.merge_site(site, fresh_id)
    changes = {w: (old_counts[w], seq.counts[w]) for w in set(s)}
    changes[fresh_id] = (0, len(sites))
    return CompressionDelta(fresh_id, s, len(sites), changes, old_total,
                            seq.total)


def _scan_sites(seq: TokenSequence, s: TokenTuple) -> list[list[int]]:
    n = len(s)
    tok, nxt = seq.tok, seq.nxt
    sites: list[list[int]] = []
    for start in seq.block_starts:
        p = start
        while p != -1:
            site = []
            q = p
            k = 0
            while k < n and q != -1 and tok[q] == s[k]:
                site.append(q)
                q = nxt[q]
                k += 1
            if k == n:
                sites.append(site)
                p = q
            else:
                p = nxt[p]
    return sites


@dataclass
class NgramStats:
    n: int
    counts: dict[TokenTuple, int]

    @property
    def distinct(self) -> int:
        return len(self.counts)


def ngram_stats(seq: TokenSequence, n: int) -> NgramStats:
    """ML n-gram counts per block, no padding, no cross-block grams."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter[TokenTuple] = Counter()
    for start in seq.block_starts:
        block = [seq.tok[p] for p in seq.iter_positions(start)]
        for i in range(n - 1, len(block)):
            counts[tuple(block[i - n + 1:i + 1])] += 1
    return NgramStats(n, dict(counts))


class CandidateIndex:
    """Incrementally maintained position index of all within-block n-grams.

    For every n-gram (2 <= n <= n_max) present in the sequence, ``positions``
    holds the start positions of its adjacent occurrences and ``m`` its
    greedy non-overlapping count.  ``containing`` maps a token id to the
    tuples it participates in, so the learner can rescore everything whose
    component counts changed.  Mutations go through ``apply``, which
    deregisters the n-grams overlapping each substitution site, merges the
    site, and re-registers the n-grams of the new neighborhood.
    """

    def __init__(self, seq: TokenSequence, n_max: int = 2) -> None:
        if not 2 <= n_max <= 4:
            raise ValueError("n_max must be in 2..4")
        self.seq = seq
        self.n_max = n_max
        self.positions: dict[TokenTuple, set[int]] = {}
        self.m: dict[TokenTuple, int] = {}
        self.containing: dict[int, set[TokenTuple]] = {}
        self.pos_dirty: set[TokenTuple] = set()
        self.count_dirty: set[int] = set()
        for start in seq.block_starts:
            for p in seq.iter_positions(start):
                self._register_at(p)

    # -- registration ------------------------------------------------

    def _register_at(self, p: int) -> None:
        seq = self.seq
        tok, nxt = seq.tok, seq.nxt
        t = [tok[p]]
        q = p
        for _ in range(self.n_max - 1):
            q = nxt[q]
            if q == -1:
                break
            t.append(tok[q])
            key = tuple(t)
            posset = self.positions.get(key)
            if posset is None:
                posset = set()
                self.positions[key] = posset
                for w in set(key):
                    self.containing.setdefault(w, set()).add(key)
            posset.add(p)
            self.pos_dirty.add(key)

    def _deregister_at(self, p: int) -> None:
        seq = self.seq
        tok, nxt = seq.tok, seq.nxt
        t = [tok[p]]
        q = p
        for _ in range(self.n_max - 1):
            q = nxt[q]
            if q == -1:
                break
            t.append(tok[q])
            key = tuple(t)
            self.positions[key].remove(p)
            self.pos_dirty.add(key)

    # -- greedy occurrence semantics ----------------------------------

    @staticmethod
    def _self_overlapping(t: TokenTuple) -> bool:
        n = len(t)
        if n == 2:
            return t[0] == t[1]
        return any(t[d:] == t[:n - d] for d in range(1, n))

    def greedy_count(self, t: TokenTuple) -> int:
        pos = self.positions[t]
        if not self._self_overlapping(t):
            return len(pos)
        nxt = self.seq.nxt
        hops = len(t) - 1
        count = 0
        frontier = -1
        for p in sorted(pos):
            if p > frontier:
                q = p
                for _ in range(hops):
                    q = nxt[q]
                frontier = q
                count += 1
        return count

    def _greedy_sites(self, t: TokenTuple) -> list[list[int]]:
        nxt = self.seq.nxt
        hops = len(t) - 1
        sites: list[list[int]] = []
        frontier = -1
        for p in sorted(self.positions[t]):
            if p <= frontier:
                continue
            site = [p]
            q = p
            for _ in range(hops):
                q = nxt[q]
                site.append(q)
            sites.append(site)
            frontier = site[-1]
        return sites

    def first_position(self, t: TokenTuple) -> int:
        return min(self.positions[t])

    # -- mutation ------------------------------------------------------

    def apply(self, t: TokenTuple, lex: Lexicon) -> CompressionDelta:
        """Compress all greedy occurrences of ``t``, keeping the index exact."""
        seq = self.seq
        sites = self._greedy_sites(t)
        if not sites:
            raise ValueError(f"candidate {t} does not occur")
        fresh = seq.new_token(sum(seq.lengths[w] for w in t))
        lex.define(t, "".join(lex.entries[w].surface for w in t))
        old_counts = {w: seq.counts[w] for w in set(t)}
        old_total = seq.total
        ctx = self.n_max - 1
        prv = seq.prv
        for site in sites:
            p1 = site[0]
            lctx = []
            q = prv[p1]
            while q != -1 and len(lctx) < ctx:
                lctx.append(q)
                q = prv[q]
            for s0 in lctx:
                self._deregister_at(s0)
            for s0 in site:
                self._deregister_at(s0)
            seq.merge_site(site, fresh)
            for s0 in lctx:
                self._register_at(s0)
            self._register_at(p1)
        self.count_dirty.update(set(t))
        self.count_dirty.add(fresh)
        changes = {w: (old_counts[w], seq.counts[w]) for w in set(t)}
        changes[fresh] = (0, len(sites))
        return CompressionDelta(fresh, t, len(sites), changes, old_total,
                                seq.total)

    def consume_dirty(self) -> tuple[list[TokenTuple], set[TokenTuple]]:
        """Flush dirt accumulated by ``apply``.

        Returns (dead tuples, tuples needing rescoring).  Greedy counts of
        position-dirty tuples are refreshed here; tuples whose component
        counts changed keep their counts but still need rescoring.
        """
        pos_d = self.pos_dirty
        cnt_d = self.count_dirty
        self.pos_dirty = set()
        self.count_dirty = set()
        dead: list[TokenTuple] = []
        for t in pos_d:
            if not self.positions[t]:
                dead.append(t)
                del self.positions[t]
                self.m.pop(t, None)
                for w in set(t):
                    s = self.containing.get(w)
                    if s:
                        s.discard(t)
        for t in dead:
            pos_d.discard(t)
        for t in pos_d:
            self.m[t] = self.greedy_count(t)
        affected = set(pos_d)
        for w in cnt_d:
            affected.update(self.containing.get(w, ()))
        return dead, affected


def verify_sequence(seq: TokenSequence, lex: Lexicon,
                    corpus: RawCorpus | None = None) -> None:
    """Assert maintained statistics against a from-scratch recount."""
    recount: Counter[int] = Counter()
    total = 0
    for start in seq.block_starts:
        for p in seq.iter_positions(start):
            recount[seq.tok[p]] += 1
            total += 1
    assert total == seq.total, (total, seq.total)
    for tid, c in enumerate(seq.counts):
        assert recount.get(tid, 0) == c, (tid, recount.get(tid, 0), c)
    conserved = sum(c * seq.lengths[t] for t, c in enumerate(seq.counts))
    assert conserved == seq.n_chars, (conserved, seq.n_chars)
    for tid in recount:
        expanded = lex.expand(tid)
        assert expanded == lex.surface(tid)
        assert len(expanded) == seq.lengths[tid]
    if corpus is not None:
        expanded = "".join(
            lex.surface(seq.tok[p])
            for start in seq.block_starts
            for p in seq.iter_positions(start))
        assert expanded == corpus.char_string()
