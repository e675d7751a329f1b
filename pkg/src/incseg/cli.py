"""Command-line interface: segment, search, combine, and evaluate.

Configuration precedence is flags > config file > defaults.  The config
file is flat ``key = value`` text; keys are long option names with dashes
or underscores.  Every command that writes outputs drops a JSON manifest
(flags, corpus digest, tool version) next to them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import criteria as _criteria
from . import ensemble as _ensemble
from . import learner as _learner
from . import metrics as _metrics
from . import search as _search
from .corpus import (CorpusError, RawCorpus, default_punctuation, load_gold,
                     write_segmentation)
from .learner import LearnerOptions, PenaltyParams

_PENALTY_NAMES = {"xlogx": "xlogx", "x2": "xsquared", "xsquared": "xsquared"}


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("corpus", help="gold-segmented input file")
    p.add_argument("--format", choices=("brent", "sighan"), default="brent")
    p.add_argument("--punct-hard", action="store_true",
                   help="treat punctuation runs as hard boundaries")
    p.add_argument("--punct-set", default=None,
                   help="characters to treat as punctuation "
                        "(default: Unicode category P*)")


def _add_learner_flags(p: argparse.ArgumentParser,
                       with_penalty: bool = True) -> None:
    if with_penalty:
        p.add_argument("--penalty", default="xlogx",
                       choices=tuple(_PENALTY_NAMES),
                       help="length penalty kind")
    p.add_argument("--nmax", type=int, default=2,
                   help="longest candidate n-gram (2..4)")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--stop-at", type=int, default=None,
                   help="force stop after this many iterations")
    p.add_argument("--trace-every", type=int, default=100)
    p.add_argument("--eq3-literal-sign", action="store_true",
                   help="subtract the model-size term instead of adding it")
    p.add_argument("--paper-literal-stop", action="store_true",
                   help="stop as soon as an improving candidate exists")


def _load_corpus(ns: argparse.Namespace):
    punct = None
    if ns.punct_hard:
        if ns.punct_set is not None:
            punct = set(ns.punct_set)
        else:
            punct = default_punctuation(
                Path(ns.corpus).read_text(encoding="utf-8"))
    return load_gold(ns.corpus, ns.format, hard_punct=punct)


def _learner_options(ns: argparse.Namespace, trace_mode="light",
                     trace_boundaries=False) -> LearnerOptions:
    return LearnerOptions(
        n_max=ns.nmax,
        max_iters=ns.max_iters,
        stop_at=ns.stop_at,
        trace_interval=ns.trace_every,
        trace_mode=trace_mode,
        trace_boundaries=trace_boundaries,
        complexity_sign=-1 if ns.eq3_literal_sign else 1,
        literal_stop=ns.paper_literal_stop,
    )


def _params(ns: argparse.Namespace, alpha=None, beta=None) -> PenaltyParams:
    return PenaltyParams(alpha=ns.alpha if alpha is None else alpha,
                         beta=ns.beta if beta is None else beta,
                         kind=_PENALTY_NAMES[ns.penalty])


def _write_manifest(target: Path, ns: argparse.Namespace,
                    corpus: RawCorpus | None) -> None:
    flags = {k: v for k, v in vars(ns).items()
             if k not in ("func", "config") and not callable(v)}
    manifest = {"tool": "incseg", "version": __version__, "flags": flags}
    if corpus is not None:
        manifest["corpus"] = {
            "sha256": corpus.source_digest,
            "n_chars": corpus.n_chars,
            "n_blocks": len(corpus.blocks),
        }
    if target.is_dir():
        out = target / "manifest.json"
    else:
        out = target.with_suffix(target.suffix + ".manifest.json")
    out.write_text(json.dumps(manifest, indent=2, default=str),
                   encoding="utf-8")


def _cmd_segment(ns: argparse.Namespace) -> int:
    corpus, gold = _load_corpus(ns)
    trace_mode = "light" if ns.trace_out else "none"
    options = _learner_options(ns, trace_mode=trace_mode,
                               trace_boundaries=bool(ns.trace_out
                                                     and ns.trace_snapshots))
    result = _learner.run(corpus, _params(ns), options, gold=gold)
    write_segmentation(result.hypothesis.boundaries, corpus, ns.out)
    if ns.trace_out:
        with open(ns.trace_out, "w", encoding="utf-8") as fh:
            for i, tr in enumerate(result.trace):
                row = {"iteration": tr.iteration, "objective": tr.objective,
                       "n_tokens": tr.n_tokens, "n_types": tr.n_types,
                       "n_boundaries": tr.n_boundaries}
                if tr.boundaries is not None:
                    snap = Path(ns.trace_out).with_suffix(f".snap{i}.json")
                    snap.write_text(json.dumps(sorted(tr.boundaries)))
                    row["boundary_snapshot"] = str(snap)
                fh.write(json.dumps(row) + "\n")
    _write_manifest(Path(ns.out), ns, corpus)
    print(f"segmented {corpus.n_chars} chars in {result.iterations} "
          f"iterations ({result.stopped}); objective {result.objective:.3f}")
    return 0


def _cmd_dump_lexicon(ns: argparse.Namespace) -> int:
    corpus, _ = _load_corpus(ns)
    result = _learner.run(corpus, _params(ns),
                          _learner_options(ns, trace_mode="none"))
    seq, lex = result.state.seq, result.state.lex
    rows = [{"id": tid, "surface": e.surface,
             "components": list(e.components) if e.components else None,
             "count": seq.counts[tid]}
            for tid, e in enumerate(lex.entries)]
    Path(ns.out).write_text(json.dumps(rows, ensure_ascii=False, indent=1),
                            encoding="utf-8")
    _write_manifest(Path(ns.out), ns, corpus)
    print(f"wrote {len(rows)} lexicon entries to {ns.out}")
    return 0


def _cmd_grid(ns: argparse.Namespace) -> int:
    corpus, gold = _load_corpus(ns)
    kinds = tuple(_PENALTY_NAMES[k] for k in ns.penalty)
    spec = _search.GridSpec(_search.parse_range(ns.alpha),
                            _search.parse_range(ns.beta), kinds)
    options = _learner_options(ns, trace_mode="none")
    records = _search.run_grid(corpus, gold, spec, ns.out, options=options,
                               jobs=ns.jobs, trace=ns.trace,
                               resume=not ns.no_resume)
    _write_manifest(Path(ns.out), ns, corpus)
    n_cells = len(spec.cells())
    print(f"{len(records)}/{n_cells} grid cells complete in {ns.out}")
    if len(records) < n_cells:
        print(f"incseg: {n_cells - len(records)} cells failed; "
              f"see {Path(ns.out) / 'errors.jsonl'}", file=sys.stderr)
    return 0


def _cmd_staged(ns: argparse.Namespace) -> int:
    corpus, gold = _load_corpus(ns)
    options = _learner_options(ns, trace_mode="none")
    final, _records = _search.staged_search(
        corpus, gold, ns.criterion, _search.parse_range(ns.alpha),
        _search.parse_range(ns.beta), ns.out, beta0=ns.beta0,
        kind=_PENALTY_NAMES[ns.penalty], options=options, jobs=ns.jobs)
    _write_manifest(Path(ns.out), ns, corpus)
    print(json.dumps({"alpha": final.alpha, "beta": final.beta,
                      "criterion": ns.criterion,
                      "value": final.criteria[ns.criterion],
                      "boundary_file": final.boundary_file}))
    return 0


def _cmd_select(ns: argparse.Namespace) -> int:
    records = _search.load_ledger(Path(ns.ledger))
    if not records:
        raise RuntimeError(f"no records in {ns.ledger}")
    chosen = _search.select_top_k(records, ns.criterion, ns.top)
    scale = _criteria.in_bits if ns.bits else (lambda v: v)
    rows = [{"alpha": r.alpha, "beta": r.beta, "penalty": r.penalty,
             "value": scale(r.criteria[ns.criterion]),
             "unit": "bits" if ns.bits else "nats",
             "boundary_file": r.boundary_file} for r in chosen]
    text = json.dumps(rows, indent=1)
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
        _write_manifest(Path(ns.out), ns, None)
    print(text)
    return 0


def _cmd_ensemble(ns: argparse.Namespace) -> int:
    loaded = [load_gold(p, ns.format,
                        hard_punct=set(ns.punct_set) if ns.punct_set else None)
              for p in ns.inputs]
    base_corpus, _ = loaded[0]
    stream = base_corpus.char_string()
    edges = base_corpus.block_edges()
    sets = []
    for path, (corpus, gold) in zip(ns.inputs, loaded):
        if corpus.char_string() != stream or corpus.block_edges() != edges:
            raise RuntimeError(
                f"{path}: character stream differs from {ns.inputs[0]}")
        sets.append(gold.boundaries)
    voted = _ensemble.majority_vote(sets, edges, base_corpus.n_chars)
    write_segmentation(voted, base_corpus, ns.out)
    _write_manifest(Path(ns.out), ns, base_corpus)
    print(f"voted {len(sets)} inputs -> {len(voted)} boundaries")
    return 0


def _cmd_eval(ns: argparse.Namespace) -> int:
    punct = set(ns.punct_set) if ns.punct_set else None
    if ns.punct_hard and punct is None:
        punct = default_punctuation(
            Path(ns.gold).read_text(encoding="utf-8"))
    gold_corpus, gold = load_gold(ns.gold, ns.format, hard_punct=punct)
    hyp_corpus, hyp = load_gold(ns.hyp, ns.format, hard_punct=punct)
    if hyp_corpus.char_string() != gold_corpus.char_string():
        raise RuntimeError("hypothesis and gold character streams differ")
    report = _metrics.evaluate_segmentation(gold_corpus, gold, hyp.boundaries)
    if ns.report == "json":
        print(json.dumps(report.as_dict(), indent=1))
    else:
        print("level\tP\tR\tF")
        for level, prf in (("token", report.token),
                           ("boundary", report.boundary),
                           ("lexicon", report.lexicon)):
            p, r, f = prf.rounded()
            print(f"{level}\t{p}\t{r}\t{f}")
    return 0


def _cmd_correlate(ns: argparse.Namespace) -> int:
    out_dir = Path(ns.ledger)
    records = _search.load_ledger(out_dir)
    if not records:
        raise RuntimeError(f"no records in {ns.ledger}")
    rows = []
    if ns.population == "outputs":
        for r in records:
            if r.metrics is None:
                raise RuntimeError("records lack gold metrics")
            rows.append({"token_f": r.metrics["token"]["f"], **r.criteria})
    else:
        for r in records:
            if not r.trace_file:
                continue
            with (out_dir / r.trace_file).open(encoding="utf-8") as fh:
                for line in fh:
                    row = json.loads(line)
                    if row.get("criteria") and row.get("token_f") is not None:
                        rows.append({"token_f": row["token_f"],
                                     **row["criteria"]})
        if not rows:
            raise RuntimeError("no traced snapshots found; run grid --trace")
    rep = _metrics.correlation_report(rows, list(_criteria.CRITERIA),
                                      ns.population)
    print(f"population={rep.population} n={rep.n}")
    for cid, rho in rep.rho.items():
        print(f"{cid}\t{rho:+.2f}")
    if ns.scatter_out:
        sd = Path(ns.scatter_out)
        sd.mkdir(parents=True, exist_ok=True)
        for cid, pts in rep.scatter.items():
            with (sd / f"{cid}.csv").open("w", encoding="utf-8") as fh:
                fh.write("rank,token_f\n")
                for rk, f in pts:
                    fh.write(f"{rk},{f}\n")
        _write_manifest(sd, ns, None)
    return 0


def _cmd_heatmap(ns: argparse.Namespace) -> int:
    records = [r for r in _search.load_ledger(Path(ns.ledger))
               if r.penalty == _PENALTY_NAMES[ns.penalty]]
    if not records:
        raise RuntimeError("no records for that penalty kind")
    alphas, betas, rows = _search.export_heatmap(records, ns.quantity,
                                                 log_transform=ns.log)
    _search.write_heatmap_csv(alphas, betas, rows, ns.out)
    _write_manifest(Path(ns.out), ns, None)
    print(f"wrote {len(betas)}x{len(alphas)} grid to {ns.out}")
    return 0


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8")
                             .splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CorpusError(f"{path}:{i}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="incseg")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="run one compression segmentation")
    _add_corpus_flags(p)
    _add_learner_flags(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--out", default="segmented.txt")
    p.add_argument("--trace-out", default=None, help="JSON-lines trace path")
    p.add_argument("--trace-snapshots", action="store_true",
                   help="also write boundary snapshots per trace record")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("dump-lexicon", help="run and dump the learned lexicon")
    _add_corpus_flags(p)
    _add_learner_flags(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--out", default="lexicon.json")
    p.set_defaults(func=_cmd_dump_lexicon)

    p = sub.add_parser("grid", help="grid search over alpha and beta")
    _add_corpus_flags(p)
    _add_learner_flags(p, with_penalty=False)
    p.add_argument("--alpha", default="0:5:0.1", help="lo:hi:step")
    p.add_argument("--beta", default="0:5:0.1", help="lo:hi:step")
    p.add_argument("--penalty", nargs="+", default=["xlogx"],
                   choices=tuple(_PENALTY_NAMES))
    p.add_argument("--criteria", default="all",
                   help="criteria to report (always all six internally)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action="store_true",
                   help="trace criteria/F every --trace-every iterations")
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("staged", help="alpha sweep, then beta sweep")
    _add_corpus_flags(p)
    _add_learner_flags(p, with_penalty=False)
    p.add_argument("--penalty", default="xlogx", choices=tuple(_PENALTY_NAMES))
    p.add_argument("--alpha", required=True, help="lo:hi:step")
    p.add_argument("--beta", required=True, help="lo:hi:step")
    p.add_argument("--beta0", type=float, default=1.0,
                   help="beta held fixed during the alpha sweep")
    p.add_argument("--criterion", default="mdl2", choices=_criteria.CRITERIA)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_staged)

    p = sub.add_parser("select", help="pick minimum/top-k runs from a ledger")
    p.add_argument("--ledger", required=True, help="grid output directory")
    p.add_argument("--criterion", required=True, choices=_criteria.CRITERIA)
    p.add_argument("--top", type=int, default=1)
    p.add_argument("--bits", action="store_true",
                   help="report criterion values in bits instead of nats")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("ensemble", help="majority-vote segmentation files")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--format", choices=("brent", "sighan"), default="brent")
    p.add_argument("--punct-set", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("eval", help="score a segmentation against gold")
    p.add_argument("--hyp", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--format", choices=("brent", "sighan"), default="brent")
    p.add_argument("--punct-hard", action="store_true")
    p.add_argument("--punct-set", default=None)
    p.add_argument("--report", choices=("json", "tsv"), default="json")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("correlate",
                       help="rank correlation of criteria vs token F")
    p.add_argument("--ledger", required=True)
    p.add_argument("--population", choices=("outputs", "trace"),
                   default="outputs")
    p.add_argument("--scatter-out", default=None)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("heatmap", help="export a grid quantity as CSV")
    p.add_argument("--ledger", required=True)
    p.add_argument("--quantity", default="tokenF")
    p.add_argument("--penalty", default="xlogx", choices=tuple(_PENALTY_NAMES))
    p.add_argument("--log", action="store_true",
                   help="log-transform the quantity")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_heatmap)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None,
                        help="flat key=value defaults file")
    return top


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        ns, _ = parser.parse_known_args(argv)
        sub = next(a for a in parser._subparsers._group_actions
                   if isinstance(a, argparse._SubParsersAction))
        sp = sub.choices[ns.command]
        known = {a.dest for a in sp._actions}
        cfg = {k: v for k, v in _read_config(cfg_path).items() if k in known}
        for a in sp._actions:
            if a.dest in cfg and a.type is not None:
                cfg[a.dest] = a.type(cfg[a.dest])
            elif a.dest in cfg and isinstance(a.const, bool):
                cfg[a.dest] = cfg[a.dest].lower() in ("1", "true", "yes")
        sp.set_defaults(**cfg)
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (CorpusError, RuntimeError, ValueError, OSError) as e:
        print(f"incseg: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
