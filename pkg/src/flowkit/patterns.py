"""Pattern templates and subgraph search over flow models.

A template describes a small constellation of stores, activities and
flows.  Matching finds every injective assignment of template nodes to
model elements that satisfies all node, edge, path and chain rules.
Templates are plain data, so the built-in catalog can be corrected or
extended without code changes (see templates_from_json).

Null flows mark information that is available but not moving; they are
invisible to matching: they count toward no degree bound and satisfy no
edge, path or chain rule.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .model import (
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
)
from .transform import TransformError, _checked


class Polarity(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


class NodeKind(str, enum.Enum):
    STORE = "store"
    ACTIVITY = "activity"


class Direction(str, enum.Enum):
    IN = "in"
    OUT = "out"
    ANY = "any"


def _states(values) -> Optional[frozenset[AggregateState]]:
    if values is None:
        return None
    return frozenset(AggregateState(v) for v in values)


def _attachments(values) -> Optional[frozenset[Attachment]]:
    if values is None:
        return None
    return frozenset(Attachment(v) for v in values)


@dataclass(frozen=True)
class DegreeRule:
    """Bounds on the number of incident flows matching the filters.

    Directed flows count as `in` at their target and `out` at their
    source; undirected flows count only under `any`.
    """

    direction: Direction = Direction.ANY
    min_count: int = 0
    max_count: Optional[int] = None
    states: Optional[frozenset[AggregateState]] = None
    attachments: Optional[frozenset[Attachment]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "states", _states(self.states))
        object.__setattr__(self, "attachments", _attachments(self.attachments))
        if self.min_count < 0:
            raise ValueError("degree bound: min_count must be >= 0")
        if self.max_count is not None and self.max_count < self.min_count:
            raise ValueError("degree bound: max_count must be >= min_count")

    def counts(self, flow: Flow, element_id: str) -> bool:
        if self.direction is Direction.IN:
            if not (flow.directed and flow.target == element_id):
                return False
        elif self.direction is Direction.OUT:
            if not (flow.directed and flow.source == element_id):
                return False
        if self.states is not None and flow.state not in self.states:
            return False
        if self.attachments is not None and flow.attachment not in self.attachments:
            return False
        return True


@dataclass(frozen=True)
class NodeRule:
    """What a single template node may bind to.

    Unset fields do not constrain; a state or experience requirement
    implies the element must be a store.
    """

    id: str
    kind: Optional[NodeKind] = None
    states: Optional[frozenset[AggregateState]] = None
    experience: Optional[bool] = None
    degrees: tuple[DegreeRule, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node rule needs an id")
        if self.kind is not None:
            object.__setattr__(self, "kind", NodeKind(self.kind))
        object.__setattr__(self, "states", _states(self.states))
        object.__setattr__(self, "degrees", tuple(self.degrees))


@dataclass(frozen=True)
class EdgeRule:
    """A flow that must run between two bound nodes.

    Every edge rule binds its own flow; two rules never share one.
    Rules carrying the same content_group must bind flows with equal
    content labels, where an absent label equals only an absent label.
    """

    source: str
    target: str
    directed: bool = True
    states: Optional[frozenset[AggregateState]] = None
    attachments: Optional[frozenset[Attachment]] = None
    content_group: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", _states(self.states))
        object.__setattr__(self, "attachments", _attachments(self.attachments))

    def admits(self, flow: Flow, source_id: str, target_id: str) -> bool:
        if self.directed:
            if not flow.directed or (flow.source, flow.target) != (source_id, target_id):
                return False
        else:
            if flow.directed or {flow.source, flow.target} != {source_id, target_id}:
                return False
        if self.states is not None and flow.state not in self.states:
            return False
        if self.attachments is not None and flow.attachment not in self.attachments:
            return False
        return True


@dataclass(frozen=True)
class PathRule:
    """A simple directed path of at least min_length flows must lead
    from source to target.

    Activities on the path are passed through.  When via_states is set,
    the path must pass at least one intermediate store, and every
    intermediate store must carry one of the listed states.
    """

    source: str
    target: str
    min_length: int = 2
    via_states: Optional[frozenset[AggregateState]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "via_states", _states(self.via_states))
        if self.min_length < 1:
            raise ValueError("path rule: min_length must be >= 1")


@dataclass(frozen=True)
class ChainRule:
    """A maximal relay of liquid stores passing one content label on.

    The chain starts at the binding of `head` and follows directed
    liquid flows between liquid stores whose content labels are all
    equal.  Only maximal chains count: a relay of four stores is one
    match, not one per sub-chain.
    """

    head: str
    min_length: int = 3

    def __post_init__(self) -> None:
        if self.min_length < 2:
            raise ValueError("chain rule: min_length must be >= 2")


@dataclass(frozen=True)
class RewriteSpec:
    """How to repair a match.

    `drop` removes the listed bound nodes with their incident flows;
    `bridge` replaces a matched chain's relay by one direct flow.
    """

    kind: str
    drop: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "drop", tuple(self.drop))
        if self.kind not in ("drop", "bridge"):
            raise ValueError(f"unknown rewrite kind {self.kind!r}")
        if self.kind == "drop" and not self.drop:
            raise ValueError("drop rewrite needs at least one node id")
        if self.kind == "bridge" and self.drop:
            raise ValueError("bridge rewrite takes no node ids")


@dataclass(frozen=True)
class PatternTemplate:
    name: str
    polarity: Polarity
    nodes: tuple[NodeRule, ...]
    edges: tuple[EdgeRule, ...] = ()
    paths: tuple[PathRule, ...] = ()
    chain: Optional[ChainRule] = None
    replacement: Optional[RewriteSpec] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("pattern template needs a name")
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.nodes:
            raise ValueError(f"template {self.name!r}: needs at least one node rule")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"template {self.name!r}: duplicate node ids")
        known = set(ids)

        def check(end: str, where: str) -> None:
            if end not in known:
                raise ValueError(
                    f"template {self.name!r}: {where} references unknown node {end!r}"
                )

        for e in self.edges:
            check(e.source, "edge")
            check(e.target, "edge")
        for p in self.paths:
            check(p.source, "path")
            check(p.target, "path")
        if self.chain is not None:
            check(self.chain.head, "chain")
        if self.replacement is not None:
            for node_id in self.replacement.drop:
                check(node_id, "replacement")
            if self.replacement.kind == "bridge" and self.chain is None:
                raise ValueError(
                    f"template {self.name!r}: bridge rewrite needs a chain rule"
                )


@dataclass(frozen=True)
class MatchResult:
    """One injective binding of template nodes to model elements.

    `binding` is sorted by template node id; `chain` lists the stores
    of a matched relay in flow order (its first entry is the bound
    chain head).
    """

    pattern: str
    polarity: Polarity
    binding: tuple[tuple[str, str], ...]
    chain: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "binding", tuple(sorted(self.binding)))
        object.__setattr__(self, "chain", tuple(self.chain))
        values = [e for _, e in self.binding]
        if len(set(values)) != len(values):
            raise ValueError(f"match for {self.pattern!r}: binding is not injective")
        if len(set(self.chain)) != len(self.chain):
            raise ValueError(f"match for {self.pattern!r}: chain repeats a store")
        overlap = set(values) & set(self.chain)
        if overlap - set(self.chain[:1]):
            raise ValueError(
                f"match for {self.pattern!r}: chain overlaps other bound nodes"
            )

    @property
    def mapping(self) -> dict[str, str]:
        return dict(self.binding)

    def element(self, node_id: str) -> str:
        return self.mapping[node_id]


# --- matching ---------------------------------------------------------------


def match_pattern(m: FlowModel, t: PatternTemplate) -> list[MatchResult]:
    """All matches of the template, sorted by binding and chain."""
    stores = m.store_map()
    incident = _incidence(m)
    elements = sorted(m.node_ids())
    candidates = {
        n.id: [e for e in elements if _node_ok(e, n, stores, incident)]
        for n in t.nodes
    }
    node_ids = [n.id for n in t.nodes]
    results: list[MatchResult] = []
    binding: dict[str, str] = {}

    def assign(i: int) -> None:
        if i == len(node_ids):
            finish()
            return
        node_id = node_ids[i]
        used = set(binding.values())
        for element in candidates[node_id]:
            if element in used:
                continue
            binding[node_id] = element
            assign(i + 1)
            del binding[node_id]

    def finish() -> None:
        if not _edges_satisfiable(m, t.edges, binding):
            return
        for p in t.paths:
            if not _path_exists(m, binding[p.source], binding[p.target], p, stores):
                return
        if t.chain is None:
            results.append(MatchResult(t.name, t.polarity, tuple(binding.items())))
            return
        blocked = set(binding.values()) - {binding[t.chain.head]}
        for chain in _maximal_chains(m, binding[t.chain.head], t.chain.min_length):
            if not set(chain[1:]) & blocked:
                results.append(
                    MatchResult(t.name, t.polarity, tuple(binding.items()), chain)
                )

    assign(0)
    results.sort(key=lambda r: (r.binding, r.chain))
    return results


def scan_catalog(
    m: FlowModel, catalog: Optional[Iterable[PatternTemplate]] = None
) -> list[MatchResult]:
    """Run every template of the catalog; plain union of the results."""
    templates = builtin_catalog() if catalog is None else tuple(catalog)
    out: list[MatchResult] = []
    for t in templates:
        out.extend(match_pattern(m, t))
    return out


def _incidence(m: FlowModel) -> dict[str, list[Flow]]:
    incident: dict[str, list[Flow]] = defaultdict(list)
    for f in m.flows:
        if f.is_null_flow:
            continue
        incident[f.source].append(f)
        if f.target != f.source:
            incident[f.target].append(f)
    return incident


def _node_ok(
    element_id: str,
    rule: NodeRule,
    stores: dict[str, InformationStore],
    incident: dict[str, list[Flow]],
) -> bool:
    store = stores.get(element_id)
    if rule.kind is NodeKind.STORE and store is None:
        return False
    if rule.kind is NodeKind.ACTIVITY and store is not None:
        return False
    if rule.states is not None and (store is None or store.state not in rule.states):
        return False
    if rule.experience is not None and (
        store is None or store.is_experience is not rule.experience
    ):
        return False
    flows = incident.get(element_id, [])
    for d in rule.degrees:
        n = sum(1 for f in flows if d.counts(f, element_id))
        if n < d.min_count or (d.max_count is not None and n > d.max_count):
            return False
    return True


def _edges_satisfiable(
    m: FlowModel, edges: tuple[EdgeRule, ...], binding: dict[str, str]
) -> bool:
    """Can distinct flows be assigned to all edge rules at once?"""
    if not edges:
        return True
    flows = [f for f in m.flows if not f.is_null_flow]

    def solve(i: int, used: frozenset[str], groups: dict[str, str]) -> bool:
        if i == len(edges):
            return True
        rule = edges[i]
        a, b = binding[rule.source], binding[rule.target]
        for f in flows:
            if f.id in used or not rule.admits(f, a, b):
                continue
            if rule.content_group is not None:
                label = f.content or ""
                seen = groups.get(rule.content_group)
                if seen is not None and seen != label:
                    continue
                next_groups = {**groups, rule.content_group: label}
            else:
                next_groups = groups
            if solve(i + 1, used | {f.id}, next_groups):
                return True
        return False

    return solve(0, frozenset(), {})


def _path_exists(
    m: FlowModel,
    start: str,
    goal: str,
    rule: PathRule,
    stores: dict[str, InformationStore],
) -> bool:
    succ: dict[str, set[str]] = defaultdict(set)
    for f in m.flows:
        if f.is_null_flow:
            continue
        succ[f.source].add(f.target)
        if not f.directed:
            succ[f.target].add(f.source)

    def via_ok(intermediates: list[str]) -> bool:
        if rule.via_states is None:
            return True
        inner = [stores[n] for n in intermediates if n in stores]
        return bool(inner) and all(s.state in rule.via_states for s in inner)

    def walk(node: str, path: list[str]) -> bool:
        if node == goal:
            return len(path) - 1 >= rule.min_length and via_ok(path[1:-1])
        for nxt in sorted(succ.get(node, ())):
            if nxt in path:
                continue
            path.append(nxt)
            if walk(nxt, path):
                return True
            path.pop()
        return False

    return walk(start, [start])


def _maximal_chains(m: FlowModel, head: str, k: int) -> list[tuple[str, ...]]:
    stores = m.store_map()
    liquid = {
        sid for sid, s in stores.items() if s.state is AggregateState.LIQUID
    }
    if head not in liquid:
        return []
    succ: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    pred: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
    for f in m.flows:
        if f.is_null_flow or not f.directed or f.state is not AggregateState.LIQUID:
            continue
        if f.source in liquid and f.target in liquid:
            label = f.content or ""
            succ[label][f.source].add(f.target)
            pred[label][f.target].add(f.source)
    found: set[tuple[str, ...]] = set()
    for label in succ:
        nexts_of = succ[label]
        front = pred[label].get(head, set())

        def extend(path: list[str]) -> None:
            nexts = [n for n in sorted(nexts_of.get(path[-1], ())) if n not in path]
            if not nexts:
                # nothing can extend the back; maximal iff the front
                # extension candidates all lie on the path already
                if len(path) >= k and all(t in path for t in front):
                    found.add(tuple(path))
                return
            for n in nexts:
                path.append(n)
                extend(path)
                path.pop()

        extend([head])
    return sorted(found)


# --- the stock catalog ------------------------------------------------------

_SOLID = frozenset({AggregateState.SOLID})
_LIQUID = frozenset({AggregateState.LIQUID})
_CONTENT = frozenset({Attachment.CONTENT})


def builtin_catalog() -> tuple[PatternTemplate, ...]:
    """The five stock patterns as structural conventions.

    The classic names describe habits, not graphs; these templates pin
    one testable structure per name and can be overridden with a user
    catalog where a different reading fits better.
    """
    return (
        PatternTemplate(
            name="Totes Dokument",
            polarity=Polarity.NEGATIVE,
            nodes=(
                NodeRule(
                    "doc",
                    kind=NodeKind.STORE,
                    states=_SOLID,
                    degrees=(
                        DegreeRule(Direction.IN, min_count=1),
                        DegreeRule(Direction.OUT, max_count=0),
                    ),
                ),
            ),
            replacement=RewriteSpec("drop", drop=("doc",)),
        ),
        PatternTemplate(
            name="Stille Post",
            polarity=Polarity.NEGATIVE,
            nodes=(NodeRule("erster", kind=NodeKind.STORE, states=_LIQUID),),
            chain=ChainRule(head="erster", min_length=3),
            replacement=RewriteSpec("bridge"),
        ),
        PatternTemplate(
            name="Bürokratie",
            polarity=Polarity.NEGATIVE,
            nodes=(
                NodeRule(
                    "amt",
                    kind=NodeKind.ACTIVITY,
                    degrees=(
                        DegreeRule(
                            Direction.IN,
                            min_count=3,
                            states=_SOLID,
                            attachments=_CONTENT,
                        ),
                        DegreeRule(Direction.OUT, min_count=2, states=_SOLID),
                        DegreeRule(
                            Direction.ANY,
                            max_count=0,
                            states=_LIQUID,
                            attachments=_CONTENT,
                        ),
                    ),
                ),
            ),
        ),
        PatternTemplate(
            name="Osmose",
            polarity=Polarity.NEUTRAL,
            nodes=(
                NodeRule("quelle", kind=NodeKind.STORE),
                NodeRule("senke", kind=NodeKind.STORE),
            ),
            edges=(EdgeRule("quelle", "senke", states=_LIQUID),),
            paths=(
                PathRule("quelle", "senke", min_length=2, via_states=_SOLID),
            ),
        ),
        PatternTemplate(
            name="Leichtgewichtige Dokumentation",
            polarity=Polarity.POSITIVE,
            nodes=(
                NodeRule("quelle", kind=NodeKind.STORE, states=_LIQUID),
                NodeRule(
                    "ablage",
                    kind=NodeKind.STORE,
                    states=_SOLID,
                    degrees=(DegreeRule(Direction.OUT, min_count=1),),
                ),
            ),
            edges=(EdgeRule("quelle", "ablage", states=_LIQUID),),
        ),
    )


# --- replacement ------------------------------------------------------------


def replace_pattern(
    model: FlowModel,
    template_name: str,
    *,
    match_index: int = 0,
    catalog: Optional[Iterable[PatternTemplate]] = None,
) -> FlowModel:
    """Apply a template's repair rewrite to one of its matches."""
    templates = builtin_catalog() if catalog is None else tuple(catalog)
    by_name = {t.name: t for t in templates}
    template = by_name.get(template_name)
    if template is None:
        known = ", ".join(sorted(by_name))
        raise TransformError(
            f"no pattern template named {template_name!r} (known: {known})"
        )
    if template.replacement is None:
        raise TransformError(f"pattern {template.name!r} has no replacement rule")
    matches = match_pattern(model, template)
    if not 0 <= match_index < len(matches):
        raise TransformError(
            f"pattern {template.name!r}: no match with index {match_index}"
            f" ({len(matches)} found)"
        )
    match = matches[match_index]
    if template.replacement.kind == "drop":
        victims = {match.element(n) for n in template.replacement.drop}
        rewritten = _drop_nodes(model, victims)
    else:
        rewritten = _bridge_chain(model, match.chain)
    return _checked(rewritten, f"replacing {template.name!r}")


def _drop_nodes(model: FlowModel, victims: set[str]) -> FlowModel:
    return replace(
        model,
        stores=tuple(s for s in model.stores if s.id not in victims),
        activities=tuple(a for a in model.activities if a.id not in victims),
        flows=tuple(
            f
            for f in model.flows
            if f.source not in victims and f.target not in victims
        ),
    )


def _bridge_chain(model: FlowModel, chain: tuple[str, ...]) -> FlowModel:
    if len(chain) < 3:
        raise TransformError("chain of two stores has nothing to bridge")
    label_sets = []
    for a, b in zip(chain, chain[1:]):
        hops = [
            f
            for f in model.flows
            if f.directed
            and not f.is_null_flow
            and f.state is AggregateState.LIQUID
            and (f.source, f.target) == (a, b)
        ]
        label_sets.append({f.content or "" for f in hops})
    # the matcher guarantees at least one label valid along every hop
    label = min(set.intersection(*label_sets))
    removed = {
        f.id
        for f in model.flows
        if f.directed
        and not f.is_null_flow
        and f.state is AggregateState.LIQUID
        and (f.content or "") == label
        and (f.source, f.target) in set(zip(chain, chain[1:]))
    }
    for store_id in chain[1:-1]:
        extra = [f.id for f in model.incident_flows(store_id) if f.id not in removed]
        if extra:
            raise TransformError(
                f"store {store_id!r} carries flows besides the relay"
                f" ({', '.join(sorted(extra))}); shortcut them first"
            )
    taken = model.node_ids() | set(model.flow_map())
    n = 1
    while f"f{n}" in taken:
        n += 1
    bridge = Flow(
        id=f"f{n}",
        source=chain[0],
        target=chain[-1],
        state=AggregateState.LIQUID,
        content=label or None,
    )
    middle = set(chain[1:-1])
    return replace(
        model,
        stores=tuple(s for s in model.stores if s.id not in middle),
        flows=tuple(f for f in model.flows if f.id not in removed) + (bridge,),
    )


# --- template files ---------------------------------------------------------


def templates_from_json(text: str) -> tuple[PatternTemplate, ...]:
    """Read a JSON list of templates mirroring the template fields.

    States and attachments are lists of their value names; degree
    bounds use `min`/`max`.  See builtin_catalog for the semantics.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ValueError("expected a JSON list of templates")
    out = []
    for i, obj in enumerate(data, start=1):
        if not isinstance(obj, dict):
            raise ValueError(f"template {i}: expected an object")
        where = repr(obj["name"]) if isinstance(obj.get("name"), str) else str(i)
        try:
            out.append(_template_from_obj(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"template {where}: {exc}") from exc
    return tuple(out)


def _template_from_obj(obj: dict) -> PatternTemplate:
    nodes = tuple(
        NodeRule(
            id=n["id"],
            kind=n.get("kind"),
            states=n.get("states"),
            experience=n.get("experience"),
            degrees=tuple(
                DegreeRule(
                    direction=d.get("direction", "any"),
                    min_count=d.get("min", 0),
                    max_count=d.get("max"),
                    states=d.get("states"),
                    attachments=d.get("attachments"),
                )
                for d in n.get("degrees", ())
            ),
        )
        for n in obj.get("nodes", ())
    )
    edges = tuple(
        EdgeRule(
            source=e["source"],
            target=e["target"],
            directed=e.get("directed", True),
            states=e.get("states"),
            attachments=e.get("attachments"),
            content_group=e.get("content_group"),
        )
        for e in obj.get("edges", ())
    )
    paths = tuple(
        PathRule(
            source=p["source"],
            target=p["target"],
            min_length=p.get("min_length", 2),
            via_states=p.get("via_states"),
        )
        for p in obj.get("paths", ())
    )
    chain = obj.get("chain")
    if chain is not None:
        chain = ChainRule(head=chain["head"], min_length=chain.get("min_length", 3))
    rewrite = obj.get("replacement")
    if rewrite is not None:
        rewrite = RewriteSpec(
            kind=rewrite["kind"], drop=tuple(rewrite.get("drop", ()))
        )
    return PatternTemplate(
        name=obj["name"],
        polarity=obj.get("polarity", "neutral"),
        nodes=nodes,
        edges=edges,
        paths=paths,
        chain=chain,
        replacement=rewrite,
    )
