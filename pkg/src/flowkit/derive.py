"""Deriving flow models from other sources.

Three routes into a flow model live here: deriving document flows from
a conventional process model (documents are usually the only
information carriers such models know about), filling in liquid flows
from the process model's role assignments, and turning filled-in
elicitation sheets into single-activity models ready for merging.

The integration cut answers a planning question on an existing model:
which products sit between a set of source products and a set of
target products, and which further products depend on those
intermediates.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable

from .model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    ModelKind,
    ObservationScope,
    make_id,
    reachability_edges,
)


class RoleKind(str, enum.Enum):
    RESPONSIBLE = "responsible"
    PARTICIPATING = "participating"


@dataclass(frozen=True)
class ProcessActivity:
    id: str
    name: str = ""
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    roles: tuple[tuple[str, RoleKind], ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class ProcessModel:
    """A control-flow process skeleton with per-activity document I/O."""

    activities: tuple[ProcessActivity, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        ids = [a.id for a in self.activities]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate activity ids: {', '.join(dupes)}")
        known = set(ids)
        for a, b in self.edges:
            for end in (a, b):
                if end not in known:
                    raise ValueError(f"edge references unknown activity {end!r}")
        overlap = known & set(self.documents())
        if overlap:
            raise ValueError(
                "ids used both for activities and documents: "
                + ", ".join(sorted(overlap))
            )
        self.topological_order()

    def documents(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.activities:
            for doc in a.outputs + a.inputs:
                seen.setdefault(doc)
        return tuple(seen)

    def activity_map(self) -> dict[str, ProcessActivity]:
        return {a.id: a for a in self.activities}

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {a.id: [] for a in self.activities}
        for a, b in self.edges:
            if b not in succ[a]:
                succ[a].append(b)
        return succ

    def predecessors(self) -> dict[str, list[str]]:
        pred: dict[str, list[str]] = {a.id: [] for a in self.activities}
        for a, b in self.edges:
            if a not in pred[b]:
                pred[b].append(a)
        return pred

    def topological_order(self) -> tuple[str, ...]:
        # Kahn's algorithm, keeping declaration order for determinism.
        # A leftover node means the control graph has a cycle.
        pred = self.predecessors()
        succ = self.successors()
        missing = {a: len(pred[a]) for a in pred}
        ready = [a.id for a in self.activities if missing[a.id] == 0]
        order: list[str] = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            for nxt in succ[node]:
                missing[nxt] -= 1
                if missing[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(self.activities):
            stuck = sorted(a for a in missing if missing[a] > 0)
            raise ValueError(
                "control flow has a cycle through: " + ", ".join(stuck)
            )
        return tuple(order)


def parse_process(text: str) -> ProcessModel:
    """Read the line-oriented process format.

    `activity <id> ["<name>"]`, `edge <a> -> <b>`, `in <act> <doc>`,
    `out <act> <doc>`, `role <act> <name> [responsible|participating]`.
    Activities must be declared before they are referenced; `#` starts
    a comment.
    """
    order: list[str] = []
    names: dict[str, str] = {}
    inputs: dict[str, list[str]] = {}
    outputs: dict[str, list[str]] = {}
    roles: dict[str, list[tuple[str, RoleKind]]] = {}
    edges: list[tuple[str, str]] = []

    def fail(line_no: int, message: str) -> ValueError:
        return ValueError(f"line {line_no}: {message}")

    def known(line_no: int, act: str) -> str:
        if act not in names:
            raise fail(line_no, f"unknown activity {act!r}")
        return act

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = _split_quoted(line, line_no)
        keyword = parts[0]
        if keyword == "activity":
            if len(parts) not in (2, 3):
                raise fail(line_no, "expected: activity <id> [\"<name>\"]")
            act = parts[1]
            if act in names:
                raise fail(line_no, f"duplicate activity {act!r}")
            order.append(act)
            names[act] = parts[2] if len(parts) == 3 else act
            inputs[act], outputs[act], roles[act] = [], [], []
        elif keyword == "edge":
            if len(parts) != 4 or parts[2] != "->":
                raise fail(line_no, "expected: edge <a> -> <b>")
            edges.append((known(line_no, parts[1]), known(line_no, parts[3])))
        elif keyword in ("in", "out"):
            if len(parts) != 3:
                raise fail(line_no, f"expected: {keyword} <activity> <document>")
            act = known(line_no, parts[1])
            bucket = inputs[act] if keyword == "in" else outputs[act]
            if parts[2] not in bucket:
                bucket.append(parts[2])
        elif keyword == "role":
            if len(parts) not in (3, 4):
                raise fail(
                    line_no,
                    "expected: role <activity> <name> [responsible|participating]",
                )
            act = known(line_no, parts[1])
            kind = RoleKind.PARTICIPATING
            if len(parts) == 4:
                try:
                    kind = RoleKind(parts[3])
                except ValueError:
                    raise fail(line_no, f"unknown role kind {parts[3]!r}") from None
            entry = (parts[2], kind)
            if entry not in roles[act]:
                roles[act].append(entry)
        else:
            raise fail(line_no, f"unknown statement {keyword!r}")
    activities = tuple(
        ProcessActivity(
            id=act,
            name=names[act],
            inputs=tuple(inputs[act]),
            outputs=tuple(outputs[act]),
            roles=tuple(roles[act]),
        )
        for act in order
    )
    return ProcessModel(activities=activities, edges=tuple(edges))


def _split_quoted(line: str, line_no: int) -> list[str]:
    parts: list[str] = []
    i, n = 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == '"':
            end = line.find('"', i + 1)
            if end < 0:
                raise ValueError(f"line {line_no}: unterminated quote")
            parts.append(line[i + 1 : end])
            i = end + 1
        else:
            j = i
            while j < n and not line[j].isspace():
                j += 1
            parts.append(line[i:j])
            i = j
    return parts


@dataclass(frozen=True)
class Finding:
    """A problem noticed while deriving, not a failure."""

    rule: str
    activity: str
    document: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} [{self.activity}/{self.document}]: {self.message}"


ORPHAN_INPUT = "orphan-input"


@dataclass(frozen=True)
class DeriveResult:
    model: FlowModel
    findings: tuple[Finding, ...]


def document_pairs(p: ProcessModel) -> set[tuple[str, str, str]]:
    """(producer, consumer, document) triples: for every consumer, the
    closest preceding producers of the document along control flow.

    A producer that re-outputs a document supersedes earlier producers
    on that path; an activity's own output never feeds its own input.
    """
    preds = p.predecessors()
    by_id = p.activity_map()
    # reaching producers per document, solved in topological order
    out_sets: dict[str, dict[str, frozenset[str]]] = {}
    pairs: set[tuple[str, str, str]] = set()
    for act_id in p.topological_order():
        act = by_id[act_id]
        incoming: dict[str, set[str]] = defaultdict(set)
        for pred in preds[act_id]:
            for doc, producers in out_sets[pred].items():
                incoming[doc] |= producers
        for doc in act.inputs:
            for producer in incoming.get(doc, ()):
                pairs.add((producer, act_id, doc))
        outgoing = {doc: frozenset(v) for doc, v in incoming.items()}
        for doc in act.outputs:
            outgoing[doc] = frozenset({act_id})
        out_sets[act_id] = outgoing
    return pairs


def derive_document_flows(p: ProcessModel) -> DeriveResult:
    """Turn a process model into a planned flow model over its documents.

    Every activity becomes a flow activity; every document becomes a
    solid store fed by the producers whose version some consumer reads
    and read by those consumers.  A document nobody consumes keeps its
    producer flows so the dead end stays visible.  A consumer no
    producer precedes yields an orphan-input finding and no flow.
    """
    pairs = document_pairs(p)
    paired_docs = {doc for _, _, doc in pairs}
    producer_edges: set[tuple[str, str]] = set()
    consumer_edges: set[tuple[str, str]] = set()
    for producer, consumer, doc in pairs:
        producer_edges.add((producer, doc))
        consumer_edges.add((doc, consumer))
    stores: dict[str, None] = {}
    for producer, doc in producer_edges:
        stores.setdefault(doc)
    # a document that never reaches a consumer still materializes
    for act in p.activities:
        for doc in act.outputs:
            if doc not in paired_docs:
                stores.setdefault(doc)
                producer_edges.add((act.id, doc))
    findings = []
    consumed_ok = {(consumer, doc) for _, consumer, doc in pairs}
    for act in p.activities:
        for doc in act.inputs:
            if (act.id, doc) not in consumed_ok:
                findings.append(
                    Finding(
                        ORPHAN_INPUT,
                        act.id,
                        doc,
                        f"{act.id!r} reads {doc!r}, but no activity before it"
                        " writes that document",
                    )
                )
    flows: list[Flow] = []
    for doc in sorted(stores):
        for producer, d in sorted(producer_edges):
            if d == doc:
                flows.append(
                    Flow(
                        id=f"f{len(flows) + 1}",
                        source=producer,
                        target=doc,
                        state=AggregateState.SOLID,
                        content=doc,
                    )
                )
        for d, consumer in sorted(consumer_edges):
            if d == doc:
                flows.append(
                    Flow(
                        id=f"f{len(flows) + 1}",
                        source=doc,
                        target=consumer,
                        state=AggregateState.SOLID,
                        content=doc,
                    )
                )
    model = FlowModel(
        kind=ModelKind.SOLL,
        stores=tuple(
            InformationStore(doc, AggregateState.SOLID) for doc in sorted(stores)
        ),
        activities=tuple(Activity(a.id, a.name) for a in p.activities),
        flows=tuple(flows),
    )
    findings.sort(key=lambda f: (f.document, f.activity))
    return DeriveResult(model, tuple(findings))


def augment_role_flows(p: ProcessModel, m: FlowModel) -> FlowModel:
    """Add the liquid flows implied by the process model's roles.

    Each distinct role becomes a liquid role store; responsible roles
    steer their activities (control flows), participating roles back
    them (support flows).  Roles sharing an activity talk to each
    other: one undirected liquid flow per such pair of roles.
    """
    role_names: dict[str, None] = {}
    for act in p.activities:
        for name, _ in act.roles:
            role_names.setdefault(name)
    if not role_names:
        return m
    activity_ids = m.activity_map()
    for act in p.activities:
        if act.roles and act.id not in activity_ids:
            raise ValueError(
                f"model has no activity {act.id!r}; derive it from the"
                " same process first"
            )
    taken = m.node_ids() | set(m.flow_map())
    store_ids: dict[str, str] = {}
    new_stores = []
    for name in role_names:
        candidate = make_id(name)
        if candidate in taken:
            candidate = f"{candidate}_role"
        n = 2
        base = candidate
        while candidate in taken:
            candidate = f"{base}_{n}"
            n += 1
        taken.add(candidate)
        store_ids[name] = candidate
        new_stores.append(
            InformationStore(
                candidate, AggregateState.LIQUID, name=name, is_role=True
            )
        )
    directed: list[tuple[str, str, Attachment]] = []
    undirected: set[tuple[str, str]] = set()
    for act in p.activities:
        for name, kind in act.roles:
            attachment = (
                Attachment.CONTROL
                if kind is RoleKind.RESPONSIBLE
                else Attachment.SUPPORT
            )
            directed.append((store_ids[name], act.id, attachment))
        partners = sorted({store_ids[name] for name, _ in act.roles})
        for i, a in enumerate(partners):
            for b in partners[i + 1 :]:
                undirected.add((a, b))
    flows = list(m.flows)
    counter = 1
    for source, target, attachment in sorted(
        set(directed), key=lambda e: (e[0], e[1], e[2].value)
    ):
        while f"r{counter}" in taken:
            counter += 1
        taken.add(f"r{counter}")
        flows.append(
            Flow(
                id=f"r{counter}",
                source=source,
                target=target,
                state=AggregateState.LIQUID,
                attachment=attachment,
            )
        )
    for a, b in sorted(undirected):
        while f"r{counter}" in taken:
            counter += 1
        taken.add(f"r{counter}")
        flows.append(
            Flow(
                id=f"r{counter}",
                source=a,
                target=b,
                state=AggregateState.LIQUID,
                directed=False,
            )
        )
    return replace(
        m,
        is_map=m.is_map or bool(undirected),
        stores=m.stores + tuple(new_stores),
        flows=tuple(flows),
    )


@dataclass(frozen=True)
class ElicitationEntry:
    who: str
    content: str
    state: AggregateState
    medium: str = ""

    def __post_init__(self) -> None:
        if not self.who:
            raise ValueError("elicitation entry needs a function or person")
        if self.state not in (AggregateState.SOLID, AggregateState.LIQUID):
            raise ValueError(
                f"elicitation records know solid and liquid only, not"
                f" {self.state.value!r}"
            )


@dataclass(frozen=True)
class ElicitationRecord:
    """One filled-in activity sheet from an elicitation interview."""

    task_name: str
    organization: str = ""
    respondent: str = ""
    date: str = ""
    interviewee: str = ""
    context: str = ""
    inputs: tuple[ElicitationEntry, ...] = ()
    outputs: tuple[ElicitationEntry, ...] = ()
    steering: tuple[ElicitationEntry, ...] = ()
    support: tuple[ElicitationEntry, ...] = ()

    def __post_init__(self) -> None:
        if not self.task_name:
            raise ValueError("elicitation record needs a task name")


_STATE_WORDS = {
    "solid": AggregateState.SOLID,
    "fest": AggregateState.SOLID,
    "liquid": AggregateState.LIQUID,
    "flüssig": AggregateState.LIQUID,
    "fluessig": AggregateState.LIQUID,
}


def records_from_jsonl(text: str) -> list[ElicitationRecord]:
    """Read line-delimited JSON elicitation records.

    Entries are [who, content, state, medium] arrays or objects with
    those keys; state is solid/fest or liquid/flüssig.
    """
    records = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"record {line_no}: not valid JSON: {exc}") from exc
        try:
            records.append(_record_from_obj(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"record {line_no}: {exc}") from exc
    return records


def _record_from_obj(obj: dict) -> ElicitationRecord:
    def entries(key: str) -> tuple[ElicitationEntry, ...]:
        out = []
        for item in obj.get(key, ()):
            if isinstance(item, dict):
                who = item["who"]
                content = item.get("content", "")
                state = item["state"]
                medium = item.get("medium", "")
            else:
                who, content, state, medium = (list(item) + ["", "", "", ""])[:4]
            word = str(state).strip().casefold()
            if word not in _STATE_WORDS:
                raise ValueError(f"unknown aggregate state {state!r} in {key}")
            out.append(
                ElicitationEntry(who, content, _STATE_WORDS[word], medium)
            )
        return tuple(out)

    return ElicitationRecord(
        task_name=obj["task_name"],
        organization=obj.get("organization", ""),
        respondent=obj.get("respondent", ""),
        date=obj.get("date", ""),
        interviewee=obj.get("interviewee", ""),
        context=obj.get("context", ""),
        inputs=entries("inputs"),
        outputs=entries("outputs"),
        steering=entries("steering"),
        support=entries("support"),
    )


def ingest_elicitation(records: Iterable[ElicitationRecord]) -> list[FlowModel]:
    """One single-activity model per sheet, ready for merging.

    Inputs enter the activity as content, steering enters as control,
    support as support, outputs leave as content.  Each named function
    or person becomes a store with the recorded state.
    """
    return [_record_model(i, r) for i, r in enumerate(records, start=1)]


def _record_model(index: int, record: ElicitationRecord) -> FlowModel:
    activity_id = make_id(record.task_name)
    stores: dict[str, InformationStore] = {}

    def store_for(entry: ElicitationEntry) -> str:
        store_id = make_id(entry.who)
        if store_id == activity_id:
            store_id += "_store"
        known = stores.get(store_id)
        if known is None:
            stores[store_id] = InformationStore(
                store_id, entry.state, name=entry.who
            )
        elif known.state is not entry.state:
            raise ValueError(
                f"record {index} ({record.task_name!r}): {entry.who!r} appears"
                f" both {known.state.value} and {entry.state.value}"
            )
        return store_id

    flows: list[Flow] = []

    def add(entries, attachment: Attachment, into_activity: bool) -> None:
        for entry in entries:
            store_id = store_for(entry)
            source, target = (
                (store_id, activity_id) if into_activity else (activity_id, store_id)
            )
            flows.append(
                Flow(
                    id=f"f{len(flows) + 1}",
                    source=source,
                    target=target,
                    state=entry.state,
                    content=entry.content or None,
                    attachment=attachment,
                )
            )

    add(record.inputs, Attachment.CONTENT, True)
    add(record.steering, Attachment.CONTROL, True)
    add(record.support, Attachment.SUPPORT, True)
    add(record.outputs, Attachment.CONTENT, False)
    scope = (
        ObservationScope(
            persons=(record.interviewee,),
            start=record.date or None,
            end=record.date or None,
        )
        if record.interviewee
        else None
    )
    return FlowModel(
        name=record.task_name,
        kind=ModelKind.IST,
        stores=tuple(stores[k] for k in sorted(stores)),
        activities=(Activity(activity_id, record.task_name),),
        flows=tuple(flows),
        scope=scope,
    )


@dataclass(frozen=True)
class CutResult:
    intermediates: frozenset[str] = frozenset()
    extra_targets: frozenset[str] = frozenset()
    no_path: bool = False

    def __post_init__(self) -> None:
        if self.intermediates & self.extra_targets:
            raise ValueError("intermediates and extra targets must not overlap")


def integration_cut(
    m: FlowModel, sources: Iterable[str], targets: Iterable[str]
) -> CutResult:
    """Products between sources and targets, plus dependent products.

    Intermediates are the stores strictly inside some simple directed
    path from a source to a target (null flows never count, activities
    are passed through but not reported).  Stores that depend on an
    intermediate without being one become additional targets, and the
    search repeats until nothing changes.
    """
    source_set, target_set = frozenset(sources), frozenset(targets)
    store_ids = set(m.store_map())
    for sid in sorted((source_set | target_set) - store_ids):
        raise ValueError(f"no store with id {sid!r}")
    succ: dict[str, list[str]] = defaultdict(list)
    for a, b in reachability_edges(m):
        succ[a].append(b)
    activity_ids = set(m.activity_map())

    all_targets = set(target_set)
    extra: set[str] = set()
    no_path = False
    first_round = True
    while True:
        on_paths = _stores_on_paths(succ, source_set, frozenset(all_targets), store_ids)
        if first_round:
            no_path = not on_paths
            first_round = False
        intermediates = on_paths - source_set - all_targets
        new_targets = set()
        for store in intermediates:
            for dep in _store_successors(store, succ, activity_ids):
                if dep not in intermediates and dep not in all_targets:
                    new_targets.add(dep)
        if not new_targets:
            return CutResult(
                intermediates=frozenset(intermediates),
                extra_targets=frozenset(extra),
                no_path=no_path,
            )
        extra |= new_targets
        all_targets |= new_targets


def _stores_on_paths(
    succ: dict[str, list[str]],
    sources: frozenset[str],
    targets: frozenset[str],
    store_ids: set[str],
) -> set[str]:
    """Every node on some simple path from a source to a target,
    restricted to stores."""
    # Prune with plain reachability first; exact membership still needs
    # path-by-path search because a node can reach a target only back
    # through nodes already on the path.
    reaches_target = _reverse_reachable(succ, targets)
    on_path: set[str] = set()

    def walk(node: str, path: list[str], visited: set[str]) -> None:
        if node in targets:
            on_path.update(path)
            # a simple path may continue through one target to another
        for nxt in succ.get(node, ()):
            if nxt in visited or nxt not in reaches_target:
                continue
            visited.add(nxt)
            path.append(nxt)
            walk(nxt, path, visited)
            path.pop()
            visited.remove(nxt)

    for source in sorted(sources):
        if source in reaches_target:
            walk(source, [source], {source})
    return {n for n in on_path if n in store_ids}


def _reverse_reachable(
    succ: dict[str, list[str]], targets: frozenset[str]
) -> set[str]:
    pred: dict[str, list[str]] = defaultdict(list)
    for a, nexts in succ.items():
        for b in nexts:
            pred[b].append(a)
    seen = set(targets)
    queue = list(targets)
    while queue:
        node = queue.pop()
        for back in pred.get(node, ()):
            if back not in seen:
                seen.add(back)
                queue.append(back)
    return seen


def _store_successors(
    store: str, succ: dict[str, list[str]], activity_ids: set[str]
) -> set[str]:
    """Stores directly downstream of a store, looking through activities."""
    found: set[str] = set()
    queue = list(succ.get(store, ()))
    seen: set[str] = set()
    while queue:
        node = queue.pop()
        if node in seen or node == store:
            continue
        seen.add(node)
        if node in activity_ids:
            queue.extend(succ.get(node, ()))
        else:
            found.add(node)
    return found
