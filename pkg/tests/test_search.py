"""Grid execution, resumable ledger, selection, heat maps, staged search."""

import json

import pytest

from incseg.search import (GridSpec, RunRecord, export_heatmap, load_boundaries,
                           load_ledger, parse_range, run_grid,
                           select_family_minimum, select_top_k, staged_search,
                           save_boundaries, write_heatmap_csv)

from conftest import make_corpus, toy_text


def small_grid_spec():
    return GridSpec(alphas=(0.0, 0.4), betas=(0.0, 0.4), kinds=("xlogx",))


@pytest.fixture
def toy(tmp_path):
    return make_corpus(toy_text(80, seed=2), tmp_path=tmp_path)


def test_parse_range():
    assert parse_range("0:5:0.1") == tuple(round(0.1 * i, 10)
                                           for i in range(51))
    assert len(parse_range("0:5:0.1")) == 51
    assert parse_range("0:5:5") == (0.0, 5.0)
    assert parse_range("2.0") == (2.0,)
    with pytest.raises(ValueError):
        parse_range("5:0:1")
    with pytest.raises(ValueError):
        parse_range("0:1:0")
    with pytest.raises(ValueError):
        parse_range("0:1")


def test_grid_cell_count():
    spec = GridSpec(parse_range("0:5:0.1"), parse_range("0:5:0.1"),
                    ("xlogx",))
    assert len(spec.cells()) == 2601
    assert len(GridSpec((0.0, 5.0), (0.0, 5.0), ("xlogx",)).cells()) == 4


def test_run_grid_records_everything(toy, tmp_path):
    corpus, gold = toy
    out = tmp_path / "grid"
    records = run_grid(corpus, gold, small_grid_spec(), out)
    assert len(records) == 4
    for rec in records:
        assert set(rec.criteria) == {"aic1", "aic2", "aic3",
                                     "mdl1", "mdl2", "mdl3"}
        assert rec.metrics is not None
        assert (out / rec.boundary_file).exists()
        bounds = load_boundaries(out / rec.boundary_file)
        assert len(bounds) == rec.n_boundaries
    assert (out / "runs.jsonl").exists()


def test_grid_resume_skips_done(toy, tmp_path):
    corpus, gold = toy
    out = tmp_path / "grid"
    first = run_grid(corpus, gold, small_grid_spec(), out)
    ledger_before = (out / "runs.jsonl").read_text()
    second = run_grid(corpus, gold, small_grid_spec(), out)
    assert (out / "runs.jsonl").read_text() == ledger_before
    assert [r.key() for r in first] == [r.key() for r in second]
    # a widened grid only runs the new cells
    widened = GridSpec((0.0, 0.4, 0.8), (0.0, 0.4), ("xlogx",))
    third = run_grid(corpus, gold, widened, out)
    assert len(third) == 6
    assert len(load_ledger(out)) == 6


def test_grid_parallel_matches_serial(toy, tmp_path):
    corpus, gold = toy
    serial = run_grid(corpus, gold, small_grid_spec(), tmp_path / "s")
    parallel = run_grid(corpus, gold, small_grid_spec(), tmp_path / "p",
                        jobs=2)
    for a, b in zip(serial, parallel):
        assert a.key() == b.key()
        assert a.criteria == b.criteria
        assert a.boundary_digest == b.boundary_digest
        assert a.metrics == b.metrics


def test_select_family_minimum_and_ties(toy, tmp_path):
    corpus, gold = toy
    records = run_grid(corpus, gold, small_grid_spec(), tmp_path / "g")
    best = select_family_minimum(records, "mdl2")
    assert best.criteria["mdl2"] == min(r.criteria["mdl2"] for r in records)
    only = select_family_minimum([records[0]], "mdl2")
    assert only is records[0]
    with pytest.raises(ValueError):
        select_family_minimum([], "mdl2")
    with pytest.raises(ValueError):
        select_family_minimum(records, "mdl9")


def test_select_tie_break_lexicographic():
    def rec(alpha, beta, value):
        return RunRecord(alpha=alpha, beta=beta, penalty="xlogx", n_max=2,
                         iterations=0, stopped="converged", objective=0.0,
                         n_tokens=1, n_types=1, n_boundaries=0,
                         criteria={"mdl2": value}, metrics=None,
                         boundary_digest="", boundary_file="",
                         trace_file=None, wall_time=0.0)

    records = [rec(1.0, 0.0, 5.0), rec(0.5, 9.0, 5.0), rec(0.5, 1.0, 5.0)]
    assert select_family_minimum(records, "mdl2").beta == 1.0
    top = select_top_k(records, "mdl2", 3)
    assert [(r.alpha, r.beta) for r in top] == [(0.5, 1.0), (0.5, 9.0),
                                                (1.0, 0.0)]


def test_select_top_k(toy, tmp_path):
    corpus, gold = toy
    records = run_grid(corpus, gold, small_grid_spec(), tmp_path / "g")
    top = select_top_k(records, "aic3", 3)
    vals = [r.criteria["aic3"] for r in top]
    assert vals == sorted(vals)
    assert select_top_k(records, "aic3", 1)[0] == select_family_minimum(
        records, "aic3")
    with pytest.raises(ValueError):
        select_top_k(records, "aic3", 99)


def test_export_heatmap(toy, tmp_path):
    corpus, gold = toy
    records = run_grid(corpus, gold, small_grid_spec(), tmp_path / "g")
    alphas, betas, rows = export_heatmap(records, "tokenF")
    assert alphas == [0.0, 0.4] and betas == [0.0, 0.4]
    assert len(rows) == 2 and len(rows[0]) == 2
    # log transform keeps the argmin cell
    _, _, raw = export_heatmap(records, "mdl2")
    _, _, logged = export_heatmap(records, "mdl2", log_transform=True)
    flat = [v for row in raw for v in row]
    flat_log = [v for row in logged for v in row]
    assert flat.index(min(flat)) == flat_log.index(min(flat_log))
    out = tmp_path / "hm.csv"
    write_heatmap_csv(alphas, betas, rows, out)
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 3 and lines[0].startswith("beta/alpha,")


def test_export_heatmap_rejects_ragged(toy, tmp_path):
    corpus, gold = toy
    records = run_grid(corpus, gold, small_grid_spec(), tmp_path / "g")
    with pytest.raises(ValueError):
        export_heatmap(records[:-1], "tokenF")
    mixed = records + run_grid(corpus, gold,
                               GridSpec((0.0,), (0.0,), ("xsquared",)),
                               tmp_path / "g2")
    with pytest.raises(ValueError):
        export_heatmap(mixed, "tokenF")


def test_heatmap_requires_gold_for_f(toy, tmp_path):
    corpus, _ = toy
    records = run_grid(corpus, None, small_grid_spec(), tmp_path / "g")
    with pytest.raises(ValueError):
        export_heatmap(records, "tokenF")
    export_heatmap(records, "mdl2")  # criteria never need gold


def test_staged_search(toy, tmp_path):
    corpus, gold = toy
    final, records = staged_search(corpus, gold, "mdl2",
                                   alphas=(0.0, 0.3, 0.6), betas=(0.0, 0.3),
                                   out_dir=tmp_path / "st", beta0=0.3)
    stage1 = [r for r in records if r.beta == 0.3 and r.stage is None]
    assert final.criteria["mdl2"] <= min(
        r.criteria["mdl2"] for r in records if r.alpha == final.alpha)
    # the final record came from the beta sweep at the stage-1 winner alpha
    assert final.beta in (0.0, 0.3)
    with pytest.raises(ValueError):
        staged_search(corpus, gold, "nope", (0.0,), (0.0,),
                      tmp_path / "st2")


def test_staged_degenerate_single_point(toy, tmp_path):
    corpus, gold = toy
    final, records = staged_search(corpus, gold, "mdl2", (0.2,), (0.2,),
                                   tmp_path / "st3", beta0=0.2)
    assert final.alpha == 0.2 and final.beta == 0.2


def test_boundary_file_roundtrip(tmp_path):
    bounds = {3, 10, 11, 500}
    digest, rel = save_boundaries(bounds, tmp_path)
    assert load_boundaries(tmp_path / rel) == frozenset(bounds)
    digest2, rel2 = save_boundaries(bounds, tmp_path)
    assert digest == digest2 and rel == rel2


def test_ledger_roundtrip(toy, tmp_path):
    corpus, gold = toy
    records = run_grid(corpus, gold, small_grid_spec(), tmp_path / "g")
    loaded = load_ledger(tmp_path / "g")
    assert [r.key() for r in loaded] == [r.key() for r in records]
    assert loaded[0].criteria == records[0].criteria


def test_failed_cell_recorded_and_retried(toy, tmp_path, monkeypatch):
    import incseg.search as search_mod
    corpus, gold = toy
    out = tmp_path / "g"
    real = search_mod._execute_cell

    def flaky(corpus_, gold_, options, out_dir, trace, kind, alpha, beta,
              stage=None):
        if alpha == 0.4 and beta == 0.0:
            raise RuntimeError("injected failure")
        return real(corpus_, gold_, options, out_dir, trace, kind, alpha,
                    beta, stage)

    monkeypatch.setattr(search_mod, "_execute_cell", flaky)
    records = run_grid(corpus, gold, small_grid_spec(), out)
    assert len(records) == 3  # grid continued past the failure
    errors = (out / "errors.jsonl").read_text()
    assert "injected failure" in errors
    # the failed cell is not marked done: a later resume completes it
    monkeypatch.setattr(search_mod, "_execute_cell", real)
    records = run_grid(corpus, gold, small_grid_spec(), out)
    assert len(records) == 4
