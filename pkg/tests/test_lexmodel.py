"""Token sequence bookkeeping: greedy counts, compression, n-gram stats."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incseg.lexmodel import (CandidateIndex, apply_compression,
                             count_occurrences, init_from_corpus, ngram_stats,
                             verify_sequence)

from conftest import make_corpus, random_gold_text


def seq_for(text, tmp_path=None):
    corpus, _ = make_corpus(text, tmp_path=tmp_path)
    seq, lex = init_from_corpus(corpus)
    return corpus, seq, lex


def ids(corpus, s):
    return tuple(corpus.charmap.ids[c] for c in s)


def test_init_counts():
    corpus, seq, lex = seq_for("abab\n")
    a, b = ids(corpus, "ab")
    assert seq.total == 4
    assert seq.counts[a] == 2 and seq.counts[b] == 2
    assert seq.to_blocks() == [[a, b, a, b]]
    assert lex.surface(a) == "a"


def test_init_single_char():
    _, seq, _ = seq_for("a\n")
    assert seq.total == 1 and seq.n_chars == 1


def test_greedy_count_overlap():
    corpus, seq, _ = seq_for("aaaa\n")
    (a,) = ids(corpus, "a")
    assert count_occurrences(seq, (a, a)) == 2
    corpus, seq, _ = seq_for("aaa\n")
    (a,) = ids(corpus, "a")
    assert count_occurrences(seq, (a, a)) == 1


def test_no_cross_block_candidates():
    corpus, seq, _ = seq_for("ab\nab\n")
    a, b = ids(corpus, "ab")
    assert count_occurrences(seq, (b, a)) == 0
    assert count_occurrences(seq, (a, b)) == 2


def test_count_rejects_unigram():
    corpus, seq, _ = seq_for("ab\n")
    with pytest.raises(ValueError):
        count_occurrences(seq, (0,))


def test_apply_compression_abab():
    corpus, seq, lex = seq_for("abab\n")
    a, b = ids(corpus, "ab")
    delta = apply_compression(seq, lex, (a, b))
    s2 = delta.fresh_id
    assert delta.occurrences == 2
    assert seq.to_blocks() == [[s2, s2]]
    assert seq.counts[s2] == 2 and seq.counts[a] == 0 and seq.counts[b] == 0
    assert seq.total == 2
    assert seq.lengths[s2] == 2
    assert delta.count_changes[a] == (2, 0)
    assert delta.count_changes[s2] == (0, 2)
    assert lex.surface(s2) == "ab"
    verify_sequence(seq, lex, corpus)


def test_apply_compression_partial():
    corpus, seq, lex = seq_for("aab\n")
    a, b = ids(corpus, "ab")
    delta = apply_compression(seq, lex, (a, b))
    s2 = delta.fresh_id
    assert seq.to_blocks() == [[a, s2]]
    assert seq.counts[a] == 1 and seq.counts[s2] == 1
    assert seq.total == 2
    verify_sequence(seq, lex, corpus)


def test_apply_compression_requires_occurrence():
    corpus, seq, lex = seq_for("ab\n")
    a, b = ids(corpus, "ab")
    with pytest.raises(ValueError):
        apply_compression(seq, lex, (b, a))


def test_fresh_id_must_be_dense():
    corpus, seq, lex = seq_for("abab\n")
    a, b = ids(corpus, "ab")
    with pytest.raises(ValueError):
        apply_compression(seq, lex, (a, b), fresh_id=99)


def test_ngram_stats_basics():
    corpus, seq, _ = seq_for("aba\n")
    a, b = ids(corpus, "ab")
    st2 = ngram_stats(seq, 2)
    assert st2.counts == {(a, b): 1, (b, a): 1}
    assert st2.distinct == 2
    assert ngram_stats(seq, 3).counts == {(a, b, a): 1}


def test_ngram_stats_short_block_and_unigram():
    corpus, seq, _ = seq_for("a\nabab\n")
    a, b = ids(corpus, "ab")
    assert ngram_stats(seq, 3).counts == {(a, b, a): 1, (b, a, b): 1}
    st1 = ngram_stats(seq, 1)
    assert st1.counts == {(a,): 3, (b,): 2}
    # no cross-block bigrams: per-block sums are len - 1
    st2 = ngram_stats(seq, 2)
    assert sum(st2.counts.values()) == 0 + 3


def test_expand_composed_chain():
    corpus, seq, lex = seq_for("abcabc\n")
    a, b, c = ids(corpus, "abc")
    d1 = apply_compression(seq, lex, (a, b))
    d2 = apply_compression(seq, lex, (d1.fresh_id, c))
    assert lex.surface(d2.fresh_id) == "abc"
    assert lex.expand(d2.fresh_id) == "abc"
    assert seq.lengths[d2.fresh_id] == 3
    verify_sequence(seq, lex, corpus)


def test_boundary_set_tracks_merges():
    corpus, seq, lex = seq_for("abab\ncd\n")
    a, b = ids(corpus, "ab")
    assert seq.boundary_set() == {1, 2, 3, 4, 5}
    apply_compression(seq, lex, (a, b))
    assert seq.boundary_set() == {2, 4, 5}


def test_index_matches_scan_counts():
    rng = random.Random(5)
    for trial in range(20):
        text = random_gold_text(rng, rng.randint(20, 200), rng.randint(2, 5),
                                structured=False)
        corpus, seq, lex = seq_for(text)
        n_max = rng.randint(2, 4)
        index = CandidateIndex(seq, n_max)
        index.consume_dirty()
        for t, m in index.m.items():
            assert m == count_occurrences(seq, t), (text, t)
        # every possible n-gram with an occurrence is indexed
        for n in range(2, n_max + 1):
            for t in ngram_stats(seq, n).counts:
                assert t in index.positions


def test_index_stays_exact_under_compressions():
    rng = random.Random(9)
    for trial in range(12):
        text = random_gold_text(rng, rng.randint(30, 250), rng.randint(2, 4),
                                structured=trial % 2 == 0)
        corpus, seq, lex = seq_for(text)
        n_max = rng.randint(2, 3)
        index = CandidateIndex(seq, n_max)
        index.consume_dirty()
        for _ in range(12):
            live = [t for t, s in index.positions.items() if s]
            if not live:
                break
            t = rng.choice(sorted(live))
            index.apply(t, lex)
            index.consume_dirty()
            verify_sequence(seq, lex, corpus)
            # recount every candidate from scratch
            for u, m in index.m.items():
                assert m == count_occurrences(seq, u)
            for n in range(2, n_max + 1):
                stats = ngram_stats(seq, n)
                live_keys = {k for k, s in index.positions.items()
                             if len(k) == n}
                assert live_keys == set(stats.counts)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_conservation_random(seed):
    rng = random.Random(seed)
    text = random_gold_text(rng, 150, rng.randint(2, 6))
    corpus, seq, lex = seq_for(text)
    index = CandidateIndex(seq, 2)
    index.consume_dirty()
    n = corpus.n_chars
    for _ in range(6):
        live = sorted(t for t, s in index.positions.items() if s)
        if not live:
            break
        index.apply(rng.choice(live), lex)
        index.consume_dirty()
        assert sum(c * seq.lengths[t]
                   for t, c in enumerate(seq.counts)) == n
