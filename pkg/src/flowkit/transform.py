"""Structural rewrites that improve a model.

Each rewrite takes a model and returns a new one; inputs are never
mutated.  Preconditions are checked up front and violations raise
:class:`TransformError` naming the offending element, so a failed
rewrite cannot leave a half-applied result.  Every successful rewrite
yields a model that passes :func:`flowkit.model.validate`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    Multiplicity,
    Severity,
    boundary_signature,
    interface_signature,
    validate,
)


class TransformKind(str, enum.Enum):
    SOLIDIFY = "solidify"
    LIQUEFY = "liquefy"
    SHORTCUT = "shortcut"
    DETOUR = "detour"
    BRANCH = "branch"
    MERGE = "merge"
    INTERFACE_ADAPTATION = "interface-adaptation"
    ACTIVITY_ADAPTATION = "activity-adaptation"
    PATTERN_REPLACEMENT = "pattern-replacement"


class TransformError(Exception):
    """A rewrite precondition does not hold."""


@dataclass(frozen=True)
class Transformation:
    """A rewrite request: what to do, to which element(s), with which
    kind-specific arguments."""

    kind: TransformKind
    target: tuple[str, ...]
    args: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if isinstance(self.target, str):
            object.__setattr__(self, "target", (self.target,))
        if not self.target:
            raise ValueError("transformation needs at least one target")


def apply_transformation(model: FlowModel, t: Transformation) -> FlowModel:
    """Dispatch a rewrite request to the matching function."""
    handlers = {
        TransformKind.SOLIDIFY: lambda: solidify(model, t.target[0], **t.args),
        TransformKind.LIQUEFY: lambda: liquefy(model, t.target[0], **t.args),
        TransformKind.SHORTCUT: lambda: shortcut(model, t.target[0], **t.args),
        TransformKind.DETOUR: lambda: detour(model, t.target[0], **t.args),
        TransformKind.BRANCH: lambda: branch(model, t.target[0], **t.args),
        TransformKind.MERGE: lambda: consolidate(model, t.target, **t.args),
        TransformKind.INTERFACE_ADAPTATION: lambda: adapt_interface(
            model, t.target[0], **t.args
        ),
        TransformKind.ACTIVITY_ADAPTATION: lambda: adapt_activity(
            model, t.target[0], **t.args
        ),
        TransformKind.PATTERN_REPLACEMENT: lambda: _replace_pattern(
            model, t.target[0], **t.args
        ),
    }
    try:
        handler = handlers[t.kind]
    except KeyError:  # pragma: no cover - enum is closed
        raise TransformError(f"unknown transformation kind {t.kind!r}") from None
    try:
        return handler()
    except TypeError as exc:
        # surfaces missing/unexpected kind-specific arguments uniformly
        raise TransformError(f"{t.kind.value}: {exc}") from exc


def _replace_pattern(model: FlowModel, template_name: str, **args) -> FlowModel:
    from . import patterns

    return patterns.replace_pattern(model, template_name, **args)


def _flow_or_fail(model: FlowModel, flow_id: str) -> Flow:
    flow = model.flow_map().get(flow_id)
    if flow is None:
        raise TransformError(f"no flow with id {flow_id!r}")
    return flow


def _store_or_fail(model: FlowModel, store_id: str) -> InformationStore:
    store = model.store_map().get(store_id)
    if store is None:
        raise TransformError(f"no store with id {store_id!r}")
    return store


def _activity_or_fail(model: FlowModel, activity_id: str) -> Activity:
    activity = model.activity_map().get(activity_id)
    if activity is None:
        raise TransformError(f"no activity with id {activity_id!r}")
    return activity


def _unique_id(model: FlowModel, candidate: str) -> str:
    taken = model.node_ids() | set(model.flow_map())
    if candidate not in taken:
        return candidate
    n = 2
    while f"{candidate}_{n}" in taken:
        n += 1
    return f"{candidate}_{n}"


def _checked(model: FlowModel, what: str) -> FlowModel:
    problems = [v for v in validate(model) if v.severity is Severity.ERROR]
    if problems:
        details = "; ".join(str(v) for v in problems)
        raise TransformError(f"{what} would break the model: {details}")
    return model


def solidify(
    model: FlowModel,
    flow_id: str,
    *,
    doc_id: str,
    doc_name: str = "",
) -> FlowModel:
    """Capture a liquid flow in a new document store.

    The flow source keeps a liquid flow into the document; the consumer
    reads the document through a solid flow.
    """
    flow = _flow_or_fail(model, flow_id)
    if flow.state is not AggregateState.LIQUID:
        raise TransformError(f"flow {flow_id!r} is not liquid")
    if not flow.directed or flow.is_null_flow:
        raise TransformError(f"flow {flow_id!r} is not a directed content exchange")
    if doc_id in model.node_ids():
        raise TransformError(f"id {doc_id!r} is already taken")
    doc = InformationStore(id=doc_id, state=AggregateState.SOLID, name=doc_name)
    attachment = flow.attachment
    if attachment is not Attachment.CONTENT and flow.target not in model.activity_map():
        attachment = Attachment.CONTENT
    into_doc = Flow(
        id=_unique_id(model, f"{flow.id}_in"),
        source=flow.source,
        target=doc_id,
        state=AggregateState.LIQUID,
        content=flow.content,
        is_experience=flow.is_experience,
        intensity=flow.intensity,
    )
    out_of_doc = Flow(
        id=_unique_id(model, f"{flow.id}_out"),
        source=doc_id,
        target=flow.target,
        state=AggregateState.SOLID,
        content=flow.content,
        is_experience=flow.is_experience,
        intensity=flow.intensity,
        attachment=attachment,
    )
    flows = tuple(f for f in model.flows if f.id != flow_id) + (into_doc, out_of_doc)
    result = replace(model, stores=model.stores + (doc,), flows=flows)
    return _checked(result, "solidify")


def liquefy(model: FlowModel, store_id: str) -> FlowModel:
    """Replace a single-writer, single-reader document hop by direct talk."""
    store = _store_or_fail(model, store_id)
    if store.state is not AggregateState.SOLID:
        raise TransformError(f"store {store_id!r} is not a document (not solid)")
    incident = model.incident_flows(store_id)
    inbound = [f for f in incident if f.target == store_id and f.directed]
    outbound = [f for f in incident if f.source == store_id and f.directed]
    if len(inbound) != 1 or len(outbound) != 1 or len(incident) != 2:
        raise TransformError(
            f"store {store_id!r} is not a simple hop"
            f" ({len(inbound)} writers, {len(outbound)} readers)"
        )
    (first,) = inbound
    (second,) = outbound
    producer = model.store_map().get(first.source)
    if producer is not None and producer.state is not AggregateState.LIQUID:
        raise TransformError(
            f"producer {producer.id!r} is a {producer.state.value} store;"
            " a direct flow from it cannot be liquid"
        )
    direct = Flow(
        id=_unique_id(model, f"{second.id}_direct"),
        source=first.source,
        target=second.target,
        state=AggregateState.LIQUID,
        content=second.content if second.content is not None else first.content,
        is_experience=first.is_experience or second.is_experience,
        intensity=second.intensity,
        attachment=second.attachment,
    )
    result = replace(
        model,
        stores=tuple(s for s in model.stores if s.id != store_id),
        flows=tuple(f for f in model.flows if f.id not in (first.id, second.id))
        + (direct,),
    )
    return _checked(result, "liquefy")


def shortcut(model: FlowModel, store_id: str) -> FlowModel:
    """Remove a relay store, connecting its producer straight to its reader."""
    store = _store_or_fail(model, store_id)
    incident = model.incident_flows(store_id)
    inbound = [f for f in incident if f.target == store_id and f.directed]
    outbound = [f for f in incident if f.source == store_id and f.directed]
    if len(inbound) != 1 or len(outbound) != 1 or len(incident) != 2:
        raise TransformError(
            f"store {store_id!r} is not a relay with one producer and one reader"
        )
    (first,) = inbound
    (second,) = outbound
    if first.source == store_id:
        raise TransformError(f"store {store_id!r} feeds itself")
    direct = Flow(
        id=_unique_id(model, f"{second.id}_direct"),
        source=first.source,
        target=second.target,
        state=first.state,
        content=second.content if second.content is not None else first.content,
        is_experience=first.is_experience or second.is_experience,
        intensity=second.intensity,
        attachment=second.attachment,
    )
    result = replace(
        model,
        stores=tuple(s for s in model.stores if s.id != store_id),
        flows=tuple(f for f in model.flows if f.id not in (first.id, second.id))
        + (direct,),
    )
    return _checked(result, "shortcut")


def detour(
    model: FlowModel,
    flow_id: str,
    *,
    via_id: str,
    via_state: AggregateState,
    via_name: str = "",
) -> FlowModel:
    """Route a flow through a new intermediate store."""
    flow = _flow_or_fail(model, flow_id)
    if not flow.directed or flow.is_null_flow:
        raise TransformError(f"flow {flow_id!r} is not a directed content exchange")
    if via_id in model.node_ids():
        raise TransformError(f"id {via_id!r} is already taken")
    via = InformationStore(id=via_id, state=via_state, name=via_name)
    attachment = flow.attachment
    if attachment is not Attachment.CONTENT and flow.target not in model.activity_map():
        attachment = Attachment.CONTENT
    first = Flow(
        id=_unique_id(model, f"{flow.id}_in"),
        source=flow.source,
        target=via_id,
        state=flow.state,
        content=flow.content,
        is_experience=flow.is_experience,
        intensity=flow.intensity,
    )
    second = Flow(
        id=_unique_id(model, f"{flow.id}_out"),
        source=via_id,
        target=flow.target,
        state=via_state,
        content=flow.content,
        is_experience=flow.is_experience,
        intensity=flow.intensity,
        attachment=attachment,
    )
    flows = tuple(f for f in model.flows if f.id != flow_id) + (first, second)
    result = replace(model, stores=model.stores + (via,), flows=flows)
    return _checked(result, "detour")


def branch(model: FlowModel, flow_id: str, *, to: str) -> FlowModel:
    """Send an existing flow's information to one more receiver."""
    flow = _flow_or_fail(model, flow_id)
    if not flow.directed:
        raise TransformError(f"flow {flow_id!r} is undirected")
    if to not in model.node_ids():
        raise TransformError(f"no node with id {to!r} to branch to")
    if to == flow.source:
        raise TransformError(f"branching {flow_id!r} back to its source")
    attachment = flow.attachment
    if attachment is not Attachment.CONTENT and to not in model.activity_map():
        raise TransformError(
            f"{attachment.value} flows must end at an activity, {to!r} is a store"
        )
    copy = replace(
        flow,
        id=_unique_id(model, f"{flow.id}_branch"),
        target=to,
        attachment=attachment,
        span=None,
    )
    result = model.with_flows(model.flows + (copy,))
    return _checked(result, "branch")


def consolidate(
    model: FlowModel,
    store_ids: tuple[str, ...],
    *,
    merged_name: str,
    merged_id: Optional[str] = None,
) -> FlowModel:
    """Fuse several stores of the same state into one.

    Flows between the fused stores disappear; all other flows are
    re-pointed at the merged store, with structural duplicates dropped.
    """
    if len(store_ids) < 2:
        raise TransformError("consolidation needs at least two stores")
    stores = [_store_or_fail(model, sid) for sid in store_ids]
    states = {s.state for s in stores}
    if len(states) > 1:
        raise TransformError(
            "cannot consolidate stores of different states: "
            + ", ".join(f"{s.id}={s.state.value}" for s in stores)
        )
    keep_id = merged_id if merged_id is not None else stores[0].id
    other_ids = set(model.node_ids()) - set(store_ids)
    if keep_id in other_ids:
        raise TransformError(f"id {keep_id!r} is already taken")
    merged = InformationStore(
        id=keep_id,
        state=stores[0].state,
        name=merged_name,
        multiplicity=(
            Multiplicity.MULTIPLE
            if any(s.multiplicity is Multiplicity.MULTIPLE for s in stores)
            else Multiplicity.SINGLE
        ),
        is_experience=any(s.is_experience for s in stores),
        is_role=any(s.is_role for s in stores),
        site=next((s.site for s in stores if s.site is not None), None),
    )
    old = set(store_ids)

    def repoint(node: str) -> str:
        return keep_id if node in old else node

    seen: set[tuple] = set()
    flows: list[Flow] = []
    for f in model.flows:
        source, target = repoint(f.source), repoint(f.target)
        if source == keep_id and target == keep_id:
            continue
        moved = replace(f, source=source, target=target)
        key = (
            source,
            target,
            moved.directed,
            moved.state,
            moved.content,
            moved.attachment,
            moved.is_experience,
            moved.is_null_flow,
        )
        if key in seen:
            continue
        seen.add(key)
        flows.append(moved)
    result = replace(
        model,
        stores=tuple(s for s in model.stores if s.id not in old) + (merged,),
        flows=tuple(flows),
    )
    return _checked(result, "consolidation")


def adapt_interface(
    model: FlowModel,
    activity_id: str,
    *,
    add: tuple[Flow, ...] = (),
    remove: tuple[str, ...] = (),
) -> FlowModel:
    """Change the flows docking onto an activity.

    Only activities without a detail model can be adapted this way;
    with a detail model the interface is fixed by its boundary and must
    be changed through :func:`adapt_activity`.
    """
    activity = _activity_or_fail(model, activity_id)
    if activity.sub_model is not None:
        raise TransformError(
            f"activity {activity_id!r} has a detail model; adapt that instead"
        )
    flow_map = model.flow_map()
    for flow_id in remove:
        flow = flow_map.get(flow_id)
        if flow is None:
            raise TransformError(f"no flow with id {flow_id!r}")
        if activity_id not in flow.endpoints():
            raise TransformError(
                f"flow {flow_id!r} does not dock onto activity {activity_id!r}"
            )
    taken = model.node_ids() | set(flow_map)
    for flow in add:
        if activity_id not in flow.endpoints():
            raise TransformError(
                f"new flow {flow.id!r} does not dock onto activity {activity_id!r}"
            )
        if flow.id in taken:
            raise TransformError(f"id {flow.id!r} is already taken")
        taken.add(flow.id)
    flows = tuple(f for f in model.flows if f.id not in set(remove)) + tuple(add)
    return _checked(model.with_flows(flows), "interface adaptation")


def adapt_activity(
    model: FlowModel,
    activity_id: str,
    *,
    sub_model: FlowModel,
) -> FlowModel:
    """Swap an activity's detail model while keeping its interface.

    The new detail model must present the same boundary as the flows
    docking onto the activity from outside.
    """
    _activity_or_fail(model, activity_id)
    outside = interface_signature(model, activity_id)
    inside = boundary_signature(sub_model)
    if outside != inside:
        raise TransformError(
            f"detail model boundary does not match the interface of {activity_id!r}"
        )
    activities = tuple(
        replace(a, sub_model=sub_model) if a.id == activity_id else a
        for a in model.activities
    )
    return _checked(replace(model, activities=activities), "activity adaptation")
