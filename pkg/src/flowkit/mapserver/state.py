"""Durable state of the map service and the views computed from it.

All changes (events, yellow-pages updates, plan, planned map) land as
one JSON line each in an append-only log; replaying that log from an
empty directory rebuilds the exact same state, so the log is the only
thing worth backing up.  Views (observed map, conformance, snapshot)
are pure functions over immutable copies and never hold the lock while
computing.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from .. import dsl
from ..analysis import Deviation, DeviationKind, DeviationReport, diff_maps
from ..model import (
    Activity,
    AggregateState,
    Flow,
    FlowModel,
    InformationStore,
    ModelKind,
    Site,
)
from .records import (
    CommunicationEvent,
    CommunicationPlan,
    ConflictError,
    ParticipantProfile,
    PlanActivity,
    PlanKind,
    RecordError,
    event_from_dict,
    event_to_dict,
    model_to_dict,
    plan_from_dict,
    plan_to_dict,
    profile_from_dict,
    profile_to_dict,
    report_to_dict,
)

_ZERO = dt.timedelta(0)


def _utc_now() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)


class ServerState:
    """Single-writer state behind the HTTP endpoints.

    now_fn exists so tests can pin the clock; everything else reads and
    writes real files under data_dir.
    """

    def __init__(
        self,
        data_dir: str | Path,
        *,
        live_window_minutes: float = 60.0,
        grace_minutes: float = 15.0,
        now_fn: Optional[Callable[[], dt.datetime]] = None,
    ) -> None:
        if live_window_minutes <= 0:
            raise ValueError("live_window_minutes must be positive")
        if grace_minutes < 0:
            raise ValueError("grace_minutes must not be negative")
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / "events.jsonl"
        self.live_window = dt.timedelta(minutes=live_window_minutes)
        self.grace = dt.timedelta(minutes=grace_minutes)
        self._now = now_fn or _utc_now
        self._lock = threading.Lock()
        self._events: dict[str, CommunicationEvent] = {}
        self._profiles: dict[str, ParticipantProfile] = {}
        self._plan: Optional[CommunicationPlan] = None
        self._soll_text: Optional[str] = None
        self._soll: Optional[FlowModel] = None
        self._replay()

    # --- ingestion --------------------------------------------------------

    def ingest_event(self, payload: object) -> tuple[str, bool]:
        """Store one communication event; returns (id, freshly stored).

        Re-sending a stored record unchanged is acknowledged without a
        second log line; an open-ended event may be completed by the
        same record with the end filled in; anything else clashing on
        the id is rejected.
        """
        with self._lock:
            event, stored = self._apply_event(payload)
            if stored:
                self._append("communication", event_to_dict(event))
            return event.id, stored

    def upsert_participant(self, payload: object) -> ParticipantProfile:
        with self._lock:
            profile = self._apply_participant(payload)
            self._append("participant", profile_to_dict(profile))
            return profile

    def set_plan(self, payload: object) -> CommunicationPlan:
        with self._lock:
            plan = self._apply_plan(payload)
            self._append("plan", plan_to_dict(plan))
            return plan

    def set_soll_map(self, text: str) -> FlowModel:
        with self._lock:
            model = self._apply_soll({"text": text})
            self._append("soll-map", {"text": text})
            return model

    # --- views ------------------------------------------------------------

    def participants(self) -> list[ParticipantProfile]:
        with self._lock:
            return sorted(self._profiles.values(), key=lambda p: p.id)

    def event_count(self) -> int:
        with self._lock:
            return len(self._events)

    def build_ist_map(self, start: dt.datetime, end: dt.datetime) -> FlowModel:
        events, profiles, _, _ = self._view()
        _checked_window(start, end)
        return build_map(events, profiles, start, end)

    def conformance(self, start: dt.datetime, end: dt.datetime) -> DeviationReport:
        events, profiles, plan, soll = self._view()
        _checked_window(start, end)
        found: list[Deviation] = []
        if plan is not None:
            found.extend(check_plan(plan, events, profiles, start, end, self.grace))
        if soll is not None:
            ist = build_map(events, profiles, start, end)
            found.extend(diff_maps(soll, ist).deviations)
        return DeviationReport(tuple(found))

    def snapshot(
        self,
        mode: str,
        start: Optional[dt.datetime] = None,
        end: Optional[dt.datetime] = None,
    ) -> dict:
        """Everything the UI needs for one screen, as plain JSON data."""
        if mode not in ("live", "history"):
            raise RecordError(f"mode must be live or history, got {mode!r}")
        events, profiles, _, soll = self._view()
        if mode == "live":
            now = self._now()
            start, end = now - self.live_window, now
        else:
            if start is None or end is None:
                raise RecordError("history mode needs explicit start and end")
        _checked_window(start, end)
        ist = build_map(events, profiles, start, end)
        if mode == "live":
            active = [
                e
                for e in events
                if _is_conference(e)
                and e.start <= end
                and (e.end is None or e.end >= end)
            ]
        else:
            active = [e for e in events if _is_conference(e) and _included(e, start, end)]
        deviations = None
        if soll is not None:
            deviations = report_to_dict(diff_maps(soll, ist))
        return {
            "mode": mode,
            "window": {"start": start.isoformat(), "end": end.isoformat()},
            "map": model_to_dict(ist),
            "active_conferences": [
                event_to_dict(e) for e in sorted(active, key=lambda e: e.id)
            ],
            "profiles": [
                profile_to_dict(p)
                for p in sorted(profiles.values(), key=lambda p: p.id)
            ],
            "deviations": deviations,
        }

    def snapshot_json(self, mode: str, start=None, end=None) -> str:
        return json.dumps(self.snapshot(mode, start, end), sort_keys=True)

    def soll_map(self) -> Optional[FlowModel]:
        with self._lock:
            return self._soll

    def plan(self) -> Optional[CommunicationPlan]:
        with self._lock:
            return self._plan

    # --- log --------------------------------------------------------------

    def _view(self):
        with self._lock:
            return (
                sorted(self._events.values(), key=lambda e: e.id),
                dict(self._profiles),
                self._plan,
                self._soll,
            )

    def _append(self, kind: str, data: dict) -> None:
        line = json.dumps({"type": kind, "data": data}, sort_keys=True)
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        appliers = {
            "communication": self._apply_event,
            "participant": self._apply_participant,
            "plan": self._apply_plan,
            "soll-map": self._apply_soll,
        }
        with self.log_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    appliers[record["type"]](record["data"])
                except (KeyError, ValueError) as exc:
                    raise ValueError(
                        f"{self.log_path}:{lineno}: broken log record: {exc}"
                    ) from exc

    # --- appliers (hold the lock; raise RecordError/ConflictError) ---------

    def _apply_event(self, payload: object) -> tuple[CommunicationEvent, bool]:
        event = event_from_dict(payload)
        for p in sorted(event.participants):
            if p not in self._profiles:
                raise RecordError(f"unknown participant {p!r}")
        known = self._events.get(event.id)
        if known is not None:
            if known == event:
                return event, False
            closes_open = (
                known.end is None
                and event.end is not None
                and replace(known, end=event.end) == event
            )
            if not closes_open:
                raise ConflictError(
                    f"event {event.id!r} is already stored with different content"
                )
        self._events[event.id] = event
        return event, True

    def _apply_participant(self, payload: object) -> ParticipantProfile:
        profile = profile_from_dict(payload)
        partner_id = profile.pair_partner
        if partner_id is not None:
            if partner_id == profile.id:
                raise RecordError(f"{profile.id!r} cannot pair with itself")
            if partner_id not in self._profiles:
                raise RecordError(f"unknown pair partner {partner_id!r}")
        previous = self._profiles.get(profile.id)
        self._profiles[profile.id] = profile
        if (
            previous is not None
            and previous.pair_partner is not None
            and previous.pair_partner != partner_id
        ):
            self._release_pair(previous.pair_partner, profile.id)
        if partner_id is not None:
            partner = self._profiles[partner_id]
            if partner.pair_partner != profile.id:
                if partner.pair_partner is not None:
                    self._release_pair(partner.pair_partner, partner_id)
                self._profiles[partner_id] = replace(
                    partner, pair_partner=profile.id
                )
        return profile

    def _release_pair(self, holder_id: str, expected_partner: str) -> None:
        holder = self._profiles.get(holder_id)
        if holder is not None and holder.pair_partner == expected_partner:
            self._profiles[holder_id] = replace(holder, pair_partner=None)

    def _apply_plan(self, payload: object) -> CommunicationPlan:
        plan = plan_from_dict(payload)
        self._plan = plan
        return plan

    def _apply_soll(self, payload: object) -> FlowModel:
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise RecordError("soll-map record needs a 'text' field")
        try:
            model = dsl.parse(payload["text"])
        except ValueError as exc:
            raise RecordError(f"planned map does not parse: {exc}")
        if model.kind is not ModelKind.SOLL:
            raise RecordError("the planned map must declare kind soll")
        self._soll_text = payload["text"]
        self._soll = model
        return model


# --- pure view functions ------------------------------------------------------


def overlap_within(
    event: CommunicationEvent, start: dt.datetime, end: dt.datetime
) -> dt.timedelta:
    """How long the event ran inside [start, end]; open events count
    until the window closes."""
    effective_end = event.end if event.end is not None else end
    clipped = min(effective_end, end) - max(event.start, start)
    return max(clipped, _ZERO)


def _included(event, start, end) -> bool:
    # positive overlap, or an instant event inside the half-open window
    return overlap_within(event, start, end) > _ZERO or start <= event.start < end


def _is_conference(event: CommunicationEvent) -> bool:
    return event.artifact is None and len(event.participants) >= 3


def build_map(
    events: list[CommunicationEvent],
    profiles: dict[str, ParticipantProfile],
    start: dt.datetime,
    end: dt.datetime,
) -> FlowModel:
    """Observed map for the window: participants as liquid stores at
    their sites, pairwise talk as undirected flows weighted by minutes,
    group events as conference activities, document changes as directed
    flows weighted by change count."""
    minutes: dict[tuple[str, str], dt.timedelta] = {}
    changes: dict[tuple[str, str], int] = {}
    conferences: list[tuple[CommunicationEvent, dt.timedelta]] = []
    for event in sorted(events, key=lambda e: e.id):
        if not _included(event, start, end):
            continue
        if event.artifact is not None:
            for p in sorted(event.participants):
                key = (p, event.artifact)
                changes[key] = changes.get(key, 0) + 1
        elif len(event.participants) == 2:
            a, b = sorted(event.participants)
            span = overlap_within(event, start, end)
            minutes[(a, b)] = minutes.get((a, b), _ZERO) + span
        elif len(event.participants) >= 3:
            conferences.append((event, overlap_within(event, start, end)))

    stores = [
        InformationStore(
            p.id, AggregateState.LIQUID, name=p.name, site=p.site, is_role=False
        )
        for p in sorted(profiles.values(), key=lambda p: p.id)
    ]
    documents = sorted(
        {artifact for _, artifact in changes} - set(profiles)
    )
    stores.extend(
        InformationStore(doc, AggregateState.SOLID, name=doc) for doc in documents
    )
    sites = sorted({p.site for p in profiles.values() if p.site is not None})
    activities = tuple(
        Activity(f"konferenz-{event.id}", name=event.channel)
        for event, _ in conferences
    )

    flows: list[Flow] = []

    def fresh_id() -> str:
        return f"f{len(flows) + 1}"

    for (a, b), span in sorted(minutes.items()):
        flows.append(
            Flow(
                fresh_id(),
                a,
                b,
                AggregateState.LIQUID,
                directed=False,
                intensity=span / dt.timedelta(minutes=1),
            )
        )
    for (person, artifact), count in sorted(changes.items()):
        flows.append(
            Flow(
                fresh_id(),
                person,
                artifact,
                AggregateState.LIQUID,
                intensity=float(count),
            )
        )
    for event, span in conferences:
        for p in sorted(event.participants):
            flows.append(
                Flow(
                    fresh_id(),
                    p,
                    f"konferenz-{event.id}",
                    AggregateState.LIQUID,
                    directed=False,
                    intensity=span / dt.timedelta(minutes=1),
                )
            )
    return FlowModel(
        name="Ist-Map",
        kind=ModelKind.IST,
        is_map=True,
        sites=tuple(Site(s, label=s) for s in sites),
        stores=tuple(stores),
        activities=activities,
        flows=tuple(flows),
    )


def check_plan(
    plan: CommunicationPlan,
    events: list[CommunicationEvent],
    profiles: dict[str, ParticipantProfile],
    start: dt.datetime,
    end: dt.datetime,
    grace: dt.timedelta,
) -> list[Deviation]:
    """Missed occurrences of scheduled activities; event-based entries
    are only reported as unverifiable."""
    found: list[Deviation] = []
    for activity in plan.activities:
        if activity.kind is PlanKind.EVENT_BASED:
            found.append(Deviation(DeviationKind.UNVERIFIABLE, (activity.name,)))
            continue
        for occurrence in activity.schedule.occurrences(start, end):
            if not any(
                _satisfies(event, activity, occurrence, grace, profiles)
                for event in events
            ):
                found.append(
                    Deviation(
                        DeviationKind.MISSED_OCCURRENCE,
                        (activity.name, occurrence.isoformat()),
                    )
                )
    return found


def _satisfies(
    event: CommunicationEvent,
    activity: PlanActivity,
    occurrence: dt.datetime,
    grace: dt.timedelta,
    profiles: dict[str, ParticipantProfile],
) -> bool:
    if activity.media and event.channel not in activity.media:
        return False
    if abs(event.start - occurrence) > grace:
        return False
    for wanted in activity.participants:
        if wanted in profiles:
            if wanted not in event.participants:
                return False
        else:
            # a planned name that is no participant id is read as a role
            covered = any(
                profiles[p].role == wanted
                for p in event.participants
                if p in profiles
            )
            if not covered:
                return False
    return True


def _checked_window(start: dt.datetime, end: dt.datetime) -> None:
    if start.tzinfo is None or end.tzinfo is None:
        raise RecordError("window bounds must be timezone-aware")
    if start > end:
        raise RecordError("window start must not be after its end")
