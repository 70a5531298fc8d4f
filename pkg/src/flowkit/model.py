"""Core types for information-flow models.

A flow model is a directed graph of information stores, activities, and
flows.  Stores carry an aggregate state: solid information is written down
and retrievable by anyone at any time, liquid information is bound to
people, and undefined marks a state that is still open (in a planned model)
or unknown (in an observed one).  Activities may carry a nested sub-model;
the flows attached to the activity from outside form its interface and must
agree with the sub-model's boundary.

Everything here is immutable.  Semantic checks live in :func:`validate`,
which returns violations instead of raising, so that partially broken
models (fresh from elicitation, say) can still be inspected and repaired.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Union


class AggregateState(str, enum.Enum):
    SOLID = "solid"
    LIQUID = "liquid"
    UNDEFINED = "undefined"


class Multiplicity(str, enum.Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"


class Attachment(str, enum.Enum):
    """Where a flow docks onto an activity: content flows enter and leave
    at the sides, steering information comes in at the top, supporting
    information at the bottom."""

    CONTENT = "content"
    CONTROL = "control"
    SUPPORT = "support"


class ModelKind(str, enum.Enum):
    SOLL = "soll"
    IST = "ist"


@dataclass(frozen=True)
class SourceSpan:
    """Position of an element in a text document (1-based)."""

    line: int
    column: int
    length: int

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError("source span coordinates must be positive")


@dataclass(frozen=True)
class Site:
    """A development location on a map."""

    id: str
    label: str = ""
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        _require_id(self.id)
        if not self.label:
            object.__setattr__(self, "label", self.id)


@dataclass(frozen=True)
class InformationStore:
    id: str
    state: AggregateState
    name: str = ""
    multiplicity: Multiplicity = Multiplicity.SINGLE
    is_experience: bool = False
    # Distinguishes a role ("Analyst") from an individual; only meaningful
    # for liquid stores.
    is_role: bool = False
    site: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        _require_id(self.id)
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class Flow:
    id: str
    source: str
    target: str
    state: AggregateState
    content: Optional[str] = None
    is_experience: bool = False
    directed: bool = True
    intensity: Optional[float] = None
    attachment: Attachment = Attachment.CONTENT
    # Marks information that is available but deliberately not flowing.
    # Null flows are skipped by every reachability-based computation.
    is_null_flow: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        _require_id(self.id)
        _require_id(self.source)
        _require_id(self.target)
        if self.intensity is not None and self.intensity < 0:
            raise ValueError(f"flow {self.id}: intensity must be non-negative")

    def endpoints(self) -> tuple[str, str]:
        return (self.source, self.target)


@dataclass(frozen=True)
class Activity:
    id: str
    name: str = ""
    sub_model: Optional["FlowModel"] = None
    site: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        _require_id(self.id)
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class ObservationScope:
    """The persons and time span relative to which solidity is judged."""

    persons: tuple[str, ...]
    start: Optional[str] = None
    end: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.persons:
            raise ValueError("observation scope needs at least one person")
        if self.start is not None and self.end is not None and self.start > self.end:
            raise ValueError("observation scope start must not be after end")


@dataclass(frozen=True)
class FlowModel:
    name: str = ""
    kind: ModelKind = ModelKind.IST
    # Maps extend the notation with sites, intensities, and undirected
    # flows; plain models reject undirected flows.
    is_map: bool = False
    sites: tuple[Site, ...] = ()
    stores: tuple[InformationStore, ...] = ()
    activities: tuple[Activity, ...] = ()
    flows: tuple[Flow, ...] = ()
    scope: Optional[ObservationScope] = None

    def store_map(self) -> dict[str, InformationStore]:
        return {s.id: s for s in self.stores}

    def activity_map(self) -> dict[str, Activity]:
        return {a.id: a for a in self.activities}

    def node_ids(self) -> set[str]:
        return {s.id for s in self.stores} | {a.id for a in self.activities}

    def flow_map(self) -> dict[str, Flow]:
        return {f.id: f for f in self.flows}

    def with_flows(self, flows: Iterable[Flow]) -> "FlowModel":
        return replace(self, flows=tuple(flows))

    def node_kind(self, node_id: str) -> Optional[str]:
        if any(s.id == node_id for s in self.stores):
            return "store"
        if any(a.id == node_id for a in self.activities):
            return "activity"
        return None

    def incident_flows(self, node_id: str) -> tuple[Flow, ...]:
        return tuple(
            f for f in self.flows if node_id in (f.source, f.target)
        )


Node = Union[InformationStore, Activity]

_ID_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-")


def _require_id(value: str) -> None:
    if not value or any(c not in _ID_CHARS for c in value):
        raise ValueError(f"invalid identifier: {value!r}")


def make_id(text: str) -> str:
    """Turn arbitrary text into a usable identifier."""
    cleaned = "".join(c if c in _ID_CHARS else "_" for c in text.strip())
    return cleaned or "_"


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    rule: str
    element_id: str
    message: str
    severity: Severity = Severity.ERROR

    def __str__(self) -> str:
        return f"{self.rule} [{self.element_id}]: {self.message}"


# Rule identifiers, named after what each rule checks.
DANGLING = "dangling-reference"
LIQUID_STORE_FLOW = "liquid-store-flow"
SOLID_STORE_FLOW = "solid-store-flow"
UNDEFINED_STORE_FLOW = "undefined-store-flow"
ATTACHMENT_ENDPOINT = "attachment-endpoint"
UNDIRECTED_OUTSIDE_MAP = "undirected-outside-map"
INTERFACE_MISMATCH = "interface-mismatch"
DUPLICATE_ID = "duplicate-id"
ROLE_FLAG_STATE = "role-flag-on-nonliquid"

_STATE_RULE = {
    AggregateState.LIQUID: LIQUID_STORE_FLOW,
    AggregateState.SOLID: SOLID_STORE_FLOW,
    AggregateState.UNDEFINED: UNDEFINED_STORE_FLOW,
}


def validate(model: FlowModel) -> tuple[Violation, ...]:
    """Check every notation rule and return the violations, dangling
    references first, then everything else ordered by element id.

    An empty result means the model is well-formed.  All notation rules are
    errors; style hints (a role flag on a non-liquid store) are warnings.
    """
    found: list[Violation] = []
    _validate_into(model, set(), found)
    dangling = sorted(
        (v for v in found if v.rule == DANGLING),
        key=lambda v: (v.element_id, v.message),
    )
    rest = sorted(
        (v for v in found if v.rule != DANGLING),
        key=lambda v: (v.element_id, v.rule, v.message),
    )
    return tuple(dangling) + tuple(rest)


def _validate_into(
    model: FlowModel, outer_ids: set[str], found: list[Violation]
) -> None:
    local_ids = model.node_ids()
    visible = outer_ids | local_ids

    for seq, what in (
        ([s.id for s in model.stores] + [a.id for a in model.activities], "node"),
        ([s.id for s in model.sites], "site"),
        ([f.id for f in model.flows], "flow"),
    ):
        for dup, n in sorted(Counter(seq).items()):
            if n > 1:
                found.append(
                    Violation(DUPLICATE_ID, dup, f"{what} id used {n} times")
                )

    site_ids = {s.id for s in model.sites}
    stores = model.store_map()
    activities = model.activity_map()

    for store in model.stores:
        if store.is_role and store.state is not AggregateState.LIQUID:
            found.append(
                Violation(
                    ROLE_FLAG_STATE,
                    store.id,
                    "role flag set on a non-liquid store",
                    Severity.WARNING,
                )
            )
        if store.site is not None and store.site not in site_ids:
            found.append(
                Violation(DANGLING, store.id, f"unknown site {store.site!r}")
            )

    for flow in model.flows:
        for end in flow.endpoints():
            if end not in visible:
                found.append(
                    Violation(DANGLING, flow.id, f"unknown endpoint {end!r}")
                )
        source = stores.get(flow.source)
        if source is not None and flow.state is not source.state:
            found.append(
                Violation(
                    _STATE_RULE[source.state],
                    flow.id,
                    f"{source.state.value} store {source.id!r} must emit "
                    f"{source.state.value} flows, not {flow.state.value}",
                )
            )
        if flow.attachment is not Attachment.CONTENT and not (
            flow.source in activities or flow.target in activities
        ):
            found.append(
                Violation(
                    ATTACHMENT_ENDPOINT,
                    flow.id,
                    f"{flow.attachment.value} attachment needs an activity "
                    "endpoint",
                )
            )
        if not flow.directed and not model.is_map:
            found.append(
                Violation(
                    UNDIRECTED_OUTSIDE_MAP,
                    flow.id,
                    "undirected flows are only allowed on maps",
                )
            )

    for activity in model.activities:
        if activity.site is not None and activity.site not in site_ids:
            found.append(
                Violation(DANGLING, activity.id, f"unknown site {activity.site!r}")
            )
        if activity.sub_model is None:
            continue
        outer = interface_signature(model, activity.id)
        inner = boundary_signature(activity.sub_model)
        if outer != inner:
            found.append(
                Violation(
                    INTERFACE_MISMATCH,
                    activity.id,
                    "activity interface differs from its sub-model boundary: "
                    f"outside {_format_signature(outer)}, "
                    f"inside {_format_signature(inner)}",
                )
            )
        _validate_into(activity.sub_model, visible, found)


def is_valid(model: FlowModel) -> bool:
    return not any(v.severity is Severity.ERROR for v in validate(model))


InterfaceSignature = Counter  # of (direction, state, content) triples


def interface_signature(model: FlowModel, activity_id: str) -> InterfaceSignature:
    """The multiset of (direction, state, content) triples of the flows
    attached to an activity from the outside."""
    sig: Counter = Counter()
    for f in model.flows:
        if not f.directed and activity_id in (f.source, f.target):
            sig[("both", f.state, f.content)] += 1
        elif f.target == activity_id:
            sig[("in", f.state, f.content)] += 1
        elif f.source == activity_id:
            sig[("out", f.state, f.content)] += 1
    return sig


def boundary_signature(sub_model: FlowModel) -> InterfaceSignature:
    """The multiset of (direction, state, content) triples of a sub-model's
    boundary flows, i.e. flows with one endpoint defined outside it."""
    inside = sub_model.node_ids()
    sig: Counter = Counter()
    for f in sub_model.flows:
        src_in, dst_in = f.source in inside, f.target in inside
        if src_in and dst_in:
            continue
        if not f.directed:
            sig[("both", f.state, f.content)] += 1
        elif not src_in:
            sig[("in", f.state, f.content)] += 1
        elif not dst_in:
            sig[("out", f.state, f.content)] += 1
    return sig


def _format_signature(sig: InterfaceSignature) -> str:
    parts = []
    for (direction, state, content), n in sorted(
        sig.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2] or "")
    ):
        label = f"{direction} {state.value} {content or '-'}"
        parts.append(label if n == 1 else f"{label} x{n}")
    return "{" + ", ".join(parts) + "}"


def flatten(model: FlowModel) -> FlowModel:
    """Expand every activity that carries a sub-model.

    The activity disappears; its sub-model's elements are inlined with ids
    prefixed by the activity id, and boundary flows keep their outside
    endpoint.  Because the interface and the boundary agree on well-formed
    models, the multiset of flows seen from outside is preserved.  Requires
    a model without interface mismatches.
    """
    stores = list(model.stores)
    activities: list[Activity] = []
    flows = [f for f in model.flows]
    for activity in model.activities:
        if activity.sub_model is None:
            activities.append(activity)
            continue
        sub = flatten(activity.sub_model)
        outer = interface_signature(model, activity.id)
        inner = boundary_signature(sub)
        if outer != inner:
            raise ValueError(
                f"cannot flatten {activity.id!r}: interface and sub-model "
                "boundary differ"
            )
        prefix = activity.id + "."
        inside = sub.node_ids()
        rename = {node_id: prefix + node_id for node_id in inside}
        stores.extend(_rename_store(s, rename) for s in sub.stores)
        activities.extend(_rename_activity(a, rename) for a in sub.activities)
        # Boundary flows replace the outside flows that docked onto the
        # activity; interior flows come along renamed.
        flows = [f for f in flows if activity.id not in (f.source, f.target)]
        for f in sub.flows:
            flows.append(
                replace(
                    f,
                    id=prefix + f.id,
                    source=rename.get(f.source, f.source),
                    target=rename.get(f.target, f.target),
                )
            )
    return replace(
        model,
        stores=tuple(stores),
        activities=tuple(activities),
        flows=tuple(flows),
    )


def _rename_store(store: InformationStore, rename: dict[str, str]) -> InformationStore:
    return replace(store, id=rename[store.id])


def _rename_activity(activity: Activity, rename: dict[str, str]) -> Activity:
    return replace(activity, id=rename[activity.id])


def reachability_edges(
    model: FlowModel, content_only: bool = False
) -> Iterator[tuple[str, str]]:
    """Directed edges for reachability walks: null flows are skipped and
    undirected flows count in both directions."""
    for f in model.flows:
        if f.is_null_flow:
            continue
        if content_only and f.attachment is not Attachment.CONTENT:
            continue
        yield (f.source, f.target)
        if not f.directed:
            yield (f.target, f.source)
