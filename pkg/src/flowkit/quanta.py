"""Random-draw simulation of how content spreads along flows.

A model's information content is abstracted into ``n_quanta``
distinguishable units, all held initially by a chosen source store
whose holdings serve as the reference for correctness.  Each step,
every content flow copies ``draws_per_step`` uniform draws (with
replacement) from its source node's previous holdings into its target;
drawing never removes a unit from its holder, and receiving a unit
twice changes nothing.  A draw can independently be garbled into a
fresh wrong unit or lost outright, and wrong units travel onward
exactly like correct ones.  Units are unitless ids; correct ones are
``0 .. n_quanta-1``, wrong ones are numbered upward from ``n_quanta``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    AggregateState,
    Attachment,
    FlowModel,
    Severity,
    validate,
)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class QuantaConfig:
    """Knobs for one simulation run.

    retention is the per-step survival probability of a unit held by a
    liquid store; the default 1.0 turns forgetting off entirely, and
    solid stores never forget.
    """

    n_quanta: int
    draws_per_step: int
    steps: int
    seed: int
    falsify_prob: float = 0.0
    omit_prob: float = 0.0
    retention: float = 1.0

    def __post_init__(self) -> None:
        if self.n_quanta < 1:
            raise ValueError("n_quanta must be at least 1")
        if self.draws_per_step < 1:
            raise ValueError(
                "draws_per_step must be at least 1; to transfer nothing, "
                "use steps=0"
            )
        if self.steps < 0:
            raise ValueError("steps must not be negative")
        for name in ("falsify_prob", "omit_prob", "retention"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.falsify_prob + self.omit_prob > 1.0:
            raise ValueError("falsify_prob + omit_prob must not exceed 1")


@dataclass(frozen=True)
class NodeTrace:
    """Coverage and contamination per step for one node, plus its final
    holdings.  Index 0 is the state before the first step."""

    node: str
    coverage: tuple[float, ...]
    contamination: tuple[int, ...]
    correct: frozenset[int]
    wrong: frozenset[int]

    def __post_init__(self) -> None:
        if len(self.coverage) != len(self.contamination):
            raise ValueError("coverage and contamination must align")
        if any(not 0.0 <= c <= 1.0 for c in self.coverage):
            raise ValueError("coverage must lie in [0, 1]")
        if self.correct & self.wrong:
            raise ValueError("a unit cannot be both correct and wrong")


@dataclass(frozen=True)
class SimReport:
    config: QuantaConfig
    source: str
    traces: tuple[NodeTrace, ...]

    def trace(self, node: str) -> NodeTrace:
        for t in self.traces:
            if t.node == node:
                return t
        raise KeyError(node)

    def coverage(self, node: str, step: int = -1) -> float:
        return self.trace(node).coverage[step]

    def contamination(self, node: str, step: int = -1) -> int:
        return self.trace(node).contamination[step]

    def to_jsonl(self) -> str:
        """One record per node and step, stable across identical runs."""
        lines = []
        for t in self.traces:
            for step, (cov, bad) in enumerate(zip(t.coverage, t.contamination)):
                lines.append(
                    json.dumps(
                        {
                            "node": t.node,
                            "step": step,
                            "coverage": cov,
                            "contamination": bad,
                        },
                        sort_keys=True,
                    )
                )
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        """Final coverage and wrong-unit count per node as a text table."""
        width = max(max((len(t.node) for t in self.traces), default=0), len("node"))
        lines = [f"{'node':<{width}}  coverage  wrong"]
        for t in self.traces:
            lines.append(
                f"{t.node:<{width}}  {t.coverage[-1]:>8.3f}  {t.contamination[-1]:>5d}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean: float
    std_error: float


def simulate(m: FlowModel, cfg: QuantaConfig, source_store: str) -> SimReport:
    """Spread cfg.n_quanta units from source_store through m.

    Content flows carry units along their direction, an undirected flow
    carries both ways, and null flows as well as control and support
    attachments carry nothing.  Activities pass content on like stores
    but are exempt from forgetting.  Transfers within one step all read
    the previous step's holdings, so flow order does not matter.
    Identical inputs produce an identical report.
    """
    _check_model(m)
    _check_source(m, source_store)
    rng = np.random.Generator(np.random.PCG64(_entropy(cfg.seed)))
    final, history = _run(m, cfg, source_store, rng)
    traces = []
    for node in sorted(final):
        held = final[node]
        traces.append(
            NodeTrace(
                node=node,
                coverage=tuple(c for c, _ in history[node]),
                contamination=tuple(b for _, b in history[node]),
                correct=frozenset(q for q in held if q < cfg.n_quanta),
                wrong=frozenset(q for q in held if q >= cfg.n_quanta),
            )
        )
    return SimReport(config=cfg, source=source_store, traces=tuple(traces))


def run_trials(
    m: FlowModel,
    cfg: QuantaConfig,
    source_store: str,
    target_store: str,
    *,
    trials: int,
) -> TrialStats:
    """Mean and standard error of the number of distinct correct units
    at target_store after a full run, over independently seeded trials."""
    if trials < 2:
        raise ValueError("trials must be at least 2 for a standard error")
    _check_model(m)
    _check_source(m, source_store)
    if target_store not in m.node_ids():
        raise ValueError(f"unknown target {target_store!r}")
    children = np.random.SeedSequence(_entropy(cfg.seed)).spawn(trials)
    counts = np.empty(trials)
    for i, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        final, _ = _run(m, cfg, source_store, rng)
        counts[i] = sum(1 for q in final[target_store] if q < cfg.n_quanta)
    return TrialStats(
        trials=trials,
        mean=float(counts.mean()),
        std_error=float(counts.std(ddof=1) / math.sqrt(trials)),
    )


def expected_distinct(n: int, k: int) -> float:
    """Average number of different units hit by k uniform draws with
    replacement from a pool of n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if k < 0:
        raise ValueError("k must not be negative")
    return n * (1.0 - (1.0 - 1.0 / n) ** k)


def _entropy(seed: int) -> int:
    return seed & _SEED_MASK


def _check_model(m: FlowModel) -> None:
    problems = [v for v in validate(m) if v.severity is Severity.ERROR]
    if problems:
        raise ValueError(f"cannot simulate an invalid model: {problems[0]}")


def _check_source(m: FlowModel, source: str) -> None:
    if any(s.id == source for s in m.stores):
        return
    if any(a.id == source for a in m.activities):
        raise ValueError(
            f"source {source!r} is an activity, not an information store"
        )
    raise ValueError(f"unknown source store {source!r}")


def _conduits(m: FlowModel) -> list[tuple[str, str]]:
    hops = []
    for f in sorted(m.flows, key=lambda f: f.id):
        if f.is_null_flow or f.attachment is not Attachment.CONTENT:
            continue
        hops.append((f.source, f.target))
        if not f.directed:
            hops.append((f.target, f.source))
    return hops


def _run(
    m: FlowModel, cfg: QuantaConfig, source: str, rng: np.random.Generator
) -> tuple[dict[str, set[int]], dict[str, list[tuple[float, int]]]]:
    liquid = {s.id for s in m.stores if s.state is AggregateState.LIQUID}
    nodes = sorted(m.node_ids())
    hops = _conduits(m)
    state: dict[str, set[int]] = {n: set() for n in nodes}
    state[source] = set(range(cfg.n_quanta))
    history: dict[str, list[tuple[float, int]]] = {n: [] for n in nodes}

    def record() -> None:
        for n in nodes:
            correct = sum(1 for q in state[n] if q < cfg.n_quanta)
            history[n].append((correct / cfg.n_quanta, len(state[n]) - correct))

    record()
    cut = cfg.falsify_prob + cfg.omit_prob
    next_wrong = cfg.n_quanta
    for _ in range(cfg.steps):
        incoming: dict[str, set[int]] = {n: set() for n in nodes}
        for src, dst in hops:
            pool = sorted(state[src])
            if not pool:
                continue
            picks = rng.integers(0, len(pool), size=cfg.draws_per_step)
            fate = rng.random(size=cfg.draws_per_step)
            falsified = int((fate < cfg.falsify_prob).sum())
            if falsified:
                incoming[dst].update(range(next_wrong, next_wrong + falsified))
                next_wrong += falsified
            for i in np.unique(picks[fate >= cut]):
                incoming[dst].add(pool[i])
        for n in nodes:
            held = state[n]
            if cfg.retention < 1.0 and n in liquid and held:
                order = sorted(held)
                kept = rng.random(len(order)) < cfg.retention
                held = {q for q, keep in zip(order, kept) if keep}
            state[n] = held | incoming[n]
        record()
    return state, history
