"""Assembly of partial models into one picture.

Interviews produce one small model per activity; merging stitches them
together at shared stores.  Two stores are considered the same connection
point when their normalized names match and they agree on the aggregate
state.  A name that shows up with different states is a genuine open
question for the modeler (someone calls "Spezifikation" a document, someone
else a conversation), so those stores are kept apart and reported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Sequence

from .model import (
    Activity,
    AggregateState,
    Flow,
    FlowModel,
    InformationStore,
    Multiplicity,
    Severity,
    Site,
    validate,
)

_WS = re.compile(r"\s+")


def normalize_name(name: str) -> str:
    """Trim, casefold, and collapse internal whitespace."""
    return _WS.sub(" ", name.strip()).casefold()


@dataclass(frozen=True)
class ConnectionIssue:
    name: str
    store_ids: tuple[str, ...]
    states: tuple[AggregateState, ...]

    def __str__(self) -> str:
        pairs = ", ".join(
            f"{sid} ({state.value})" for sid, state in zip(self.store_ids, self.states)
        )
        return f"stores named {self.name!r} disagree on state: {pairs}"


class MergeError(ValueError):
    pass


def merge_models(
    parts: Sequence[FlowModel],
) -> tuple[FlowModel, tuple[ConnectionIssue, ...]]:
    """Unify the parts into one model plus a report of open questions.

    Stores with equal normalized names and equal states become one store;
    every activity appears exactly once.  The same activity id occurring in
    two parts with different content is ambiguous and rejected.
    """
    for i, part in enumerate(parts):
        problems = [v for v in validate(part) if v.severity is Severity.ERROR]
        if problems:
            raise MergeError(
                f"part {i} ({part.name or 'unnamed'}) is invalid: "
                + "; ".join(str(v) for v in problems)
            )

    unified: dict[tuple[str, AggregateState], InformationStore] = {}
    taken_ids: set[str] = set()
    sites: dict[str, Site] = {}
    activities: dict[str, Activity] = {}
    flows: list[Flow] = []
    seen_flows: set[tuple] = set()
    by_name: dict[str, list[tuple[str, AggregateState]]] = {}

    for part in parts:
        id_map: dict[str, str] = {}
        for store in part.stores:
            key = (normalize_name(store.name), store.state)
            if key in unified:
                existing = unified[key]
                unified[key] = _combine(existing, store)
                id_map[store.id] = existing.id
            else:
                new_id = _fresh_id(store.id, taken_ids)
                taken_ids.add(new_id)
                unified[key] = replace(store, id=new_id)
                id_map[store.id] = new_id
                by_name.setdefault(key[0], []).append(key)
        for activity in part.activities:
            known = activities.get(activity.id)
            if known is None:
                if activity.id in taken_ids:
                    raise MergeError(
                        f"activity id {activity.id!r} collides with a store id"
                    )
                activities[activity.id] = activity
                taken_ids.add(activity.id)
            elif known != activity:
                raise MergeError(
                    f"activity id {activity.id!r} appears in several parts "
                    "with different content"
                )
        for site in part.sites:
            sites.setdefault(site.id, site)
        for flow in part.flows:
            moved = replace(
                flow,
                id="pending",
                source=id_map.get(flow.source, flow.source),
                target=id_map.get(flow.target, flow.target),
            )
            key = (
                moved.source,
                moved.target,
                moved.directed,
                moved.state,
                moved.content,
                moved.attachment,
                moved.is_experience,
                moved.is_null_flow,
                moved.intensity,
            )
            if key in seen_flows:
                continue
            seen_flows.add(key)
            flows.append(moved)

    issues = []
    for name in sorted(by_name):
        keys = by_name[name]
        if len(keys) < 2:
            continue
        stores = [unified[k] for k in keys]
        issues.append(
            ConnectionIssue(
                name,
                tuple(s.id for s in stores),
                tuple(s.state for s in stores),
            )
        )

    merged = FlowModel(
        name=parts[0].name if parts else "",
        kind=parts[0].kind if parts else FlowModel().kind,
        is_map=any(p.is_map for p in parts),
        sites=tuple(sites[k] for k in sorted(sites)),
        stores=tuple(
            sorted(unified.values(), key=lambda s: s.id)
        ),
        activities=tuple(activities[k] for k in sorted(activities)),
        flows=tuple(
            replace(f, id=f"f{i}") for i, f in enumerate(flows, start=1)
        ),
    )
    return merged, tuple(issues)


def _combine(a: InformationStore, b: InformationStore) -> InformationStore:
    """Join the attributes of two occurrences of the same store."""
    return replace(
        a,
        multiplicity=(
            Multiplicity.MULTIPLE
            if Multiplicity.MULTIPLE in (a.multiplicity, b.multiplicity)
            else Multiplicity.SINGLE
        ),
        is_experience=a.is_experience or b.is_experience,
        is_role=a.is_role or b.is_role,
        site=a.site if a.site is not None else b.site,
    )


def _fresh_id(wanted: str, taken: set[str]) -> str:
    if wanted not in taken:
        return wanted
    n = 2
    while f"{wanted}_{n}" in taken:
        n += 1
    return f"{wanted}_{n}"
