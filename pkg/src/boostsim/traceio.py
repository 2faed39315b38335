"""Line-oriented text serialization for datasets, universes, and run traces.

Weights are written exactly: rational-mode values as ``num/den`` (plain
integers stay bare) and float-mode values as shortest round-trip
decimals, so a parsed trace reproduces the original bit for bit.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import TextIO

from .datasets import (
    INFINITE,
    RATIONAL,
    PromptMultiset,
    Weight,
    WeightedDataset,
    check_mode,
    weighted_union,
)
from .engine import BoostConfig, IterationTrace, RunResult
from .oracles import BUDGET_A, BUDGET_B, LabelerSpec, NoFallback, learner
from .worlds import parse_universe, serialize_universe

FORMAT_HEADER = "boostsim-trace 1"


class TraceFormatError(ValueError):
    """The text being parsed is not a valid trace/dataset serialization."""


def format_weight(value: Weight) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


def parse_weight(text: str, mode: str):
    if text == "inf":
        return INFINITE
    if mode == RATIONAL:
        return Fraction(text)
    return float(text)


def dump_dataset(dataset: WeightedDataset) -> str:
    """One ``x<TAB>y<TAB>weight`` line per entry, sorted by key."""
    return "".join(
        f"{x}\t{y}\t{format_weight(w)}\n" for (x, y), w in dataset.entries()
    )


def parse_dataset(text: str, mode: str) -> WeightedDataset:
    check_mode(mode)
    entries = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        xs, ys, ws = ln.split("\t")
        entries[(int(xs), int(ys))] = parse_weight(ws, mode)
    return WeightedDataset(entries, mode)


def dump_multiset(prompts: PromptMultiset) -> str:
    return "".join(f"{x}\t{c}\n" for x, c in prompts.items())


def parse_multiset(text: str) -> PromptMultiset:
    counts = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        xs, cs = ln.split("\t")
        counts[int(xs)] = int(cs)
    return PromptMultiset(counts)


def _write_block(fh: TextIO, name: str, body: str) -> None:
    fh.write(f"{name}\n")
    fh.write(body)
    fh.write(".\n")


def write_trace(path: str | Path, result: RunResult) -> Path:
    """Dump a full run: config, initial quality, universe, one record per round."""
    path = Path(path)
    cfg = result.config
    with open(path, "w") as fh:
        fh.write(FORMAT_HEADER + "\n")
        fh.write("[config]\n")
        fh.write(f"variant={cfg.variant}\n")
        fh.write(f"mode={cfg.mode}\n")
        fh.write(f"alpha={format_weight(cfg.alpha)}\n")
        fh.write(f"beta={format_weight(cfg.beta)}\n")
        fh.write(f"gamma={format_weight(cfg.gamma)}\n")
        fh.write(f"k={cfg.k}\n")
        fh.write(f"rounds={cfg.rounds}\n")
        fh.write(f"seed={cfg.seed}\n")
        fh.write(f"trial={result.trial}\n")
        fh.write(f"fallback={cfg.fallback}\n")
        fh.write(f"raw_counts={int(cfg.keep_raw_counts)}\n")
        if cfg.labeler is not None:
            fh.write(f"labeler={cfg.labeler.kind}\n")
            fh.write(f"labeler_beta={format_weight(cfg.labeler.beta)}\n")
            fh.write(f"labeler_budget={cfg.labeler.budget}\n")
        fh.write("[initial-quality]\n")
        for x in sorted(result.initial_quality):
            fh.write(f"{x}\t{format_weight(result.initial_quality[x])}\n")
        fh.write(".\n")
        fh.write("[universe]\n")
        fh.write(serialize_universe(result.universe))
        fh.write(".\n")
        for tr in result.traces:
            fh.write(f"[round {tr.t}]\n")
            fh.write(
                "summary\t"
                f"t={tr.t}\t"
                f"p_minus={tr.failed.total()}\t"
                f"lambda={format_weight(tr.label_weight)}\t"
                f"success={format_weight(tr.success)}\t"
                f"event_violated={int(tr.event_violated)}\n"
            )
            _write_block(fh, "synthetic", dump_dataset(tr.synthetic))
            _write_block(fh, "kept", dump_dataset(tr.kept))
            _write_block(fh, "labeled", dump_dataset(tr.labeled))
            _write_block(fh, "failed", dump_multiset(tr.failed))
            _write_block(fh, "passed", dump_multiset(tr.passed))
        fh.write("[end]\n")
    return path


class _Lines:
    def __init__(self, text: str):
        self._lines = text.splitlines()
        self._pos = 0

    def peek(self) -> str | None:
        return self._lines[self._pos] if self._pos < len(self._lines) else None

    def next(self) -> str:
        ln = self.peek()
        if ln is None:
            raise TraceFormatError("unexpected end of trace file")
        self._pos += 1
        return ln

    def block(self) -> str:
        out = []
        while True:
            ln = self.next()
            if ln == ".":
                return "\n".join(out) + ("\n" if out else "")
            out.append(ln)


def _parse_kv(lines: _Lines) -> dict[str, str]:
    out = {}
    while True:
        ln = lines.peek()
        if ln is None or ln.startswith("["):
            return out
        lines.next()
        key, _, value = ln.partition("=")
        out[key] = value


def read_trace(path: str | Path) -> RunResult:
    """Rebuild a RunResult from a trace file.

    Mixtures and quality maps are recomputed with the same fold order the
    engine used, so rational traces reproduce exactly and float traces
    bit-for-bit.
    """
    from .engine import mixture_quality_map

    text = Path(path).read_text()
    lines = _Lines(text)
    if lines.next() != FORMAT_HEADER:
        raise TraceFormatError(f"{path}: not a {FORMAT_HEADER!r} file")
    if lines.next() != "[config]":
        raise TraceFormatError("expected [config] section")
    kv = _parse_kv(lines)
    mode = kv["mode"]
    check_mode(mode)
    labeler = None
    if "labeler" in kv:
        kind = kv["labeler"]
        labeler = LabelerSpec(
            kind=kind,
            beta=parse_weight(kv["labeler_beta"], mode),
            budget=int(kv.get("labeler_budget", "0")),
            accuracy={} if kind in (BUDGET_A, BUDGET_B) else None,
        )
    cfg = BoostConfig(
        alpha=parse_weight(kv["alpha"], mode),
        beta=parse_weight(kv["beta"], mode),
        gamma=parse_weight(kv["gamma"], mode),
        k=int(kv["k"]),
        rounds=int(kv["rounds"]),
        variant=kv["variant"],
        labeler=labeler,
        mode=mode,
        seed=int(kv["seed"]),
        fallback=kv.get("fallback", "echo-init"),
        keep_raw_counts=bool(int(kv.get("raw_counts", "0"))),
    )
    if lines.next() != "[initial-quality]":
        raise TraceFormatError("expected [initial-quality] section")
    initial_quality = {}
    for ln in lines.block().splitlines():
        xs, qs = ln.split("\t")
        initial_quality[int(xs)] = parse_weight(qs, mode)
    if lines.next() != "[universe]":
        raise TraceFormatError("expected [universe] section")
    universe = parse_universe(lines.block())
    traces: list[IterationTrace] = []
    mixture = WeightedDataset.empty(mode)
    while True:
        header = lines.next()
        if header == "[end]":
            break
        if not header.startswith("[round "):
            raise TraceFormatError(f"unexpected section {header!r}")
        summary = lines.next().split("\t")
        if summary[0] != "summary":
            raise TraceFormatError("round is missing its summary line")
        fields = dict(part.partition("=")[::2] for part in summary[1:])
        t = int(fields["t"])
        label_weight = parse_weight(fields["lambda"], mode)
        success = parse_weight(fields["success"], mode)
        event_violated = bool(int(fields["event_violated"]))
        blocks = {}
        for name in ("synthetic", "kept", "labeled", "failed", "passed"):
            got = lines.next()
            if got != name:
                raise TraceFormatError(f"expected block {name!r}, got {got!r}")
            blocks[name] = lines.block()
        synthetic = parse_dataset(blocks["synthetic"], mode)
        kept = parse_dataset(blocks["kept"], mode)
        labeled = parse_dataset(blocks["labeled"], mode)
        failed = parse_multiset(blocks["failed"])
        passed = parse_multiset(blocks["passed"])
        mixture = weighted_union(1, mixture, label_weight, labeled)
        mixture = weighted_union(1, mixture, 1, kept)
        traces.append(
            IterationTrace(
                t=t,
                synthetic=synthetic,
                kept=kept,
                labeled=labeled,
                failed=failed,
                passed=passed,
                label_weight=label_weight,
                mixture=mixture,
                avg_quality=mixture_quality_map(mixture, universe),
                success=success,
                event_violated=event_violated,
            )
        )
    if not traces:
        raise TraceFormatError("trace has no rounds")
    final_model = learner(mixture, NoFallback())
    return RunResult(
        config=cfg,
        universe=universe,
        trial=int(kv.get("trial", "0")),
        initial_quality=initial_quality,
        traces=tuple(traces),
        final_model=final_model,
        final_success=traces[-1].success,
    )
