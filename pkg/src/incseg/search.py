"""Parameter grid search, selection, heat-map export, and staged search.

Results are persisted incrementally as a JSON-lines ledger (one run per
line) so an interrupted grid resumes by skipping completed cells.  Boundary
sets are stored out-of-line as delta-encoded uint32 arrays referenced by
content digest.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import criteria as _criteria
from . import learner as _learner
from . import metrics as _metrics
from .corpus import GoldSegmentation, RawCorpus
from .criteria import CRITERIA
from .learner import LearnerOptions, PenaltyParams


def parse_range(spec: str) -> tuple[float, ...]:
    """'lo:hi:step' (inclusive endpoints) or a single value."""
    parts = spec.split(":")
    if len(parts) == 1:
        return (round(float(parts[0]), 10),)
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:step, got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("step must be > 0")
    if lo > hi:
        raise ValueError("range low end exceeds high end")
    count = int((hi - lo) / step + 1e-9) + 1
    return tuple(round(lo + i * step, 10) for i in range(count))


@dataclass(frozen=True)
class GridSpec:
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    kinds: tuple[str, ...] = ("xlogx",)
    criteria: tuple[str, ...] = CRITERIA

    def __post_init__(self) -> None:
        if not self.alphas or not self.betas or not self.kinds:
            raise ValueError("empty grid axis")

    def cells(self) -> list[tuple[str, float, float]]:
        return [(k, a, b) for k in self.kinds for a in self.alphas
                for b in self.betas]


@dataclass
class RunRecord:
    alpha: float
    beta: float
    penalty: str
    n_max: int
    iterations: int
    stopped: str
    objective: float
    n_tokens: int
    n_types: int
    n_boundaries: int
    criteria: dict[str, float]
    metrics: dict | None
    boundary_digest: str
    boundary_file: str
    trace_file: str | None
    wall_time: float
    stage: str | None = None

    def key(self) -> tuple[str, float, float]:
        return (self.penalty, self.alpha, self.beta)


def save_boundaries(boundaries: Iterable[int], directory: Path) -> tuple[str, str]:
    """Delta-encode sorted positions; file is named by content digest."""
    arr = np.fromiter(sorted(boundaries), dtype=np.uint32)
    deltas = np.diff(arr, prepend=np.uint32(0)).astype(np.uint32)
    digest = hashlib.sha256(arr.tobytes()).hexdigest()
    directory.mkdir(parents=True, exist_ok=True)
    rel = f"{digest[:24]}.npy"
    fp = directory / rel
    if not fp.exists():
        np.save(fp, deltas)
    return digest, rel


def load_boundaries(path: Path) -> frozenset[int]:
    deltas = np.load(path)
    return frozenset(int(x) for x in np.cumsum(deltas))


# Per-process state for grid workers (populated by fork initializer).
_WORK: dict = {}


def _init_worker(corpus, gold, options, out_dir, trace) -> None:
    _WORK.update(corpus=corpus, gold=gold, options=options,
                 out_dir=out_dir, trace=trace)


def _run_cell(cell: tuple[str, float, float]) -> dict:
    kind, alpha, beta = cell
    try:
        return _execute_cell(_WORK["corpus"], _WORK["gold"], _WORK["options"],
                             Path(_WORK["out_dir"]), _WORK["trace"], kind,
                             alpha, beta)
    except Exception as e:  # recorded per-cell; the grid keeps going
        return {"error": f"{type(e).__name__}: {e}", "penalty": kind,
                "alpha": alpha, "beta": beta}


def _execute_cell(corpus: RawCorpus, gold: GoldSegmentation | None,
                  options: LearnerOptions, out_dir: Path, trace: bool,
                  kind: str, alpha: float, beta: float,
                  stage: str | None = None) -> dict:
    t0 = time.perf_counter()
    params = PenaltyParams(alpha=alpha, beta=beta, kind=kind)
    opts = options
    if trace:
        opts = _learner.LearnerOptions(
            **{**asdict(options), "trace_mode": "criteria"})
    result = _learner.run(corpus, params, opts, gold=gold)
    bounds = result.hypothesis.boundaries
    crit = {cid: cv.value
            for cid, cv in _criteria.evaluate_boundaries(corpus, bounds).items()}
    metrics = None
    if gold is not None:
        metrics = _metrics.evaluate_segmentation(corpus, gold, bounds).as_dict()
    digest, rel = save_boundaries(bounds, out_dir / "boundaries")
    trace_rel = None
    if trace:
        trace_rel = f"traces/{kind}_a{alpha:g}_b{beta:g}.jsonl"
        tp = out_dir / trace_rel
        tp.parent.mkdir(parents=True, exist_ok=True)
        with tp.open("w", encoding="utf-8") as fh:
            for tr in result.trace:
                row = {"iteration": tr.iteration, "objective": tr.objective,
                       "n_tokens": tr.n_tokens, "n_types": tr.n_types,
                       "n_boundaries": tr.n_boundaries,
                       "criteria": tr.criteria, "token_f": tr.token_f}
                fh.write(json.dumps(row) + "\n")
    rec = RunRecord(
        alpha=alpha, beta=beta, penalty=kind, n_max=options.n_max,
        iterations=result.iterations, stopped=result.stopped,
        objective=result.objective, n_tokens=result.hypothesis.seq.total,
        n_types=result.hypothesis.seq.n_types(),
        n_boundaries=len(bounds), criteria=crit, metrics=metrics,
        boundary_digest=digest, boundary_file=f"boundaries/{rel}",
        trace_file=trace_rel, wall_time=time.perf_counter() - t0, stage=stage)
    return asdict(rec)


def load_ledger(out_dir: Path) -> list[RunRecord]:
    path = Path(out_dir) / "runs.jsonl"
    records: list[RunRecord] = []
    if not path.exists():
        return records
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord(**json.loads(line)))
    return records


def run_grid(corpus: RawCorpus, gold: GoldSegmentation | None,
             spec: GridSpec, out_dir: str | Path,
             options: LearnerOptions | None = None,
             jobs: int = 1, trace: bool = False,
             resume: bool = True) -> list[RunRecord]:
    """One learner run per (penalty kind, alpha, beta); resumable ledger."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    options = options or LearnerOptions()
    done: dict[tuple[str, float, float], RunRecord] = {}
    if resume:
        for rec in load_ledger(out):
            if rec.stage is None:
                done[rec.key()] = rec
    todo = [c for c in spec.cells() if c not in done]
    failures: list[dict] = []

    def _record(row: dict) -> None:
        if "error" in row:
            failures.append(row)
            with (out / "errors.jsonl").open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(row) + "\n")
            return
        ledger.write(json.dumps(row) + "\n")
        ledger.flush()
        done[(row["penalty"], row["alpha"], row["beta"])] = RunRecord(**row)

    ledger = (out / "runs.jsonl").open("a", encoding="utf-8")
    try:
        if jobs <= 1 or len(todo) <= 1:
            for cell in todo:
                try:
                    row = _execute_cell(corpus, gold, options, out, trace,
                                        *cell)
                except Exception as e:
                    row = {"error": f"{type(e).__name__}: {e}",
                           "penalty": cell[0], "alpha": cell[1],
                           "beta": cell[2]}
                _record(row)
        else:
            ctx = get_context("fork")
            with ctx.Pool(jobs, initializer=_init_worker,
                          initargs=(corpus, gold, options, str(out),
                                    trace)) as pool:
                for row in pool.imap_unordered(_run_cell, todo):
                    _record(row)
    finally:
        ledger.close()
    # failed cells stay out of the ledger, so a resume retries them
    return [done[c] for c in spec.cells() if c in done]


def _tie_key(rec: RunRecord) -> tuple:
    return (rec.alpha, rec.beta, rec.penalty)


def select_family_minimum(records: Sequence[RunRecord],
                          criterion: str) -> RunRecord:
    """The run minimizing one criterion; ties broken by (alpha, beta)."""
    if not records:
        raise ValueError("no records")
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    return min(records, key=lambda r: (r.criteria[criterion], _tie_key(r)))


def select_top_k(records: Sequence[RunRecord], criterion: str,
                 k: int) -> list[RunRecord]:
    if k > len(records):
        raise ValueError(f"k={k} exceeds {len(records)} records")
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    ordered = sorted(records,
                     key=lambda r: (r.criteria[criterion], _tie_key(r)))
    return ordered[:k]


_F_QUANTITIES = {"tokenF": "token", "boundaryF": "boundary",
                 "lexiconF": "lexicon"}


def record_quantity(rec: RunRecord, quantity: str) -> float:
    if quantity in _F_QUANTITIES:
        if rec.metrics is None:
            raise ValueError(
                f"{quantity} requires gold labels; none recorded for this run")
        return rec.metrics[_F_QUANTITIES[quantity]]["f"]
    if quantity in CRITERIA:
        return rec.criteria[quantity]
    if quantity in ("iterations", "n_tokens", "n_types", "objective",
                    "wall_time", "n_boundaries"):
        return float(getattr(rec, quantity))
    raise ValueError(f"unknown quantity {quantity!r}")


def export_heatmap(records: Sequence[RunRecord], quantity: str,
                   log_transform: bool = False
                   ) -> tuple[list[float], list[float], list[list[float]]]:
    """Grid table of one quantity: rows = beta ascending, cols = alpha."""
    kinds = {r.penalty for r in records}
    if len(kinds) != 1:
        raise ValueError("heat map requires records of a single penalty kind")
    alphas = sorted({r.alpha for r in records})
    betas = sorted({r.beta for r in records})
    table = {(r.alpha, r.beta): r for r in records}
    if len(table) != len(records) or len(records) != len(alphas) * len(betas):
        raise ValueError("records do not form a rectangular grid")
    rows = []
    for b in betas:
        row = []
        for a in alphas:
            v = record_quantity(table[(a, b)], quantity)
            if log_transform:
                if not v > 0:
                    raise ValueError("log transform needs positive values")
                v = float(np.log(v))
            row.append(v)
        rows.append(row)
    return alphas, betas, rows


def write_heatmap_csv(alphas: Sequence[float], betas: Sequence[float],
                      rows: Sequence[Sequence[float]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("beta/alpha," + ",".join(repr(a) for a in alphas) + "\n")
        for b, row in zip(betas, rows):
            fh.write(repr(b) + "," + ",".join(repr(v) for v in row) + "\n")


def staged_search(corpus: RawCorpus, gold: GoldSegmentation | None,
                  criterion: str, alphas: Sequence[float],
                  betas: Sequence[float], out_dir: str | Path,
                  beta0: float = 1.0, kind: str = "xlogx",
                  options: LearnerOptions | None = None,
                  jobs: int = 1) -> tuple[RunRecord, list[RunRecord]]:
    """Sweep alpha at fixed beta0, fix the best alpha, then sweep beta.

    Both stages select by the same criterion; the stage-2 winner is the
    final record.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    out = Path(out_dir)
    stage1 = run_grid(corpus, gold,
                      GridSpec(tuple(alphas), (round(beta0, 10),), (kind,)),
                      out / "stage1", options=options, jobs=jobs)
    best_alpha = select_family_minimum(stage1, criterion).alpha
    stage2 = run_grid(corpus, gold,
                      GridSpec((best_alpha,), tuple(betas), (kind,)),
                      out / "stage2", options=options, jobs=jobs)
    final = select_family_minimum(stage2, criterion)
    return final, stage1 + stage2
