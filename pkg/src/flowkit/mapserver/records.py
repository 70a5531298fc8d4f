"""Wire records of the map service: participants, events, and plans.

Every record crosses a trust boundary (HTTP body or log line), so
parsing is strict: a missing or mistyped field is rejected with a
message naming the key, never guessed at.  Timestamps must carry a UTC
offset; the trailing "Z" shorthand is accepted.  Participant, event,
and artifact ids double as model element ids and are limited to the
same character set.
"""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass
from typing import Any, Optional
from zoneinfo import ZoneInfo

from ..analysis import DeviationReport
from ..model import FlowModel, _require_id


class RecordError(ValueError):
    """A payload that cannot be accepted."""


class ConflictError(ValueError):
    """A payload that clashes with already stored content."""


class Status(str, enum.Enum):
    AVAILABLE = "available"
    BUSY = "busy"
    OFFLINE = "offline"


@dataclass(frozen=True)
class ContactEntry:
    scheme: str
    address: str


@dataclass(frozen=True)
class ParticipantProfile:
    """Yellow-pages entry: who someone is, where, and how to reach them."""

    id: str
    name: str = ""
    site: Optional[str] = None
    contacts: tuple[ContactEntry, ...] = ()
    photo: Optional[str] = None
    timezone: str = "UTC"
    status: Status = Status.AVAILABLE
    role: str = ""
    skills: tuple[str, ...] = ()
    current_task: str = ""
    current_artifact: str = ""
    pair_partner: Optional[str] = None

    def __post_init__(self) -> None:
        _checked_id(self.id, "participant id")
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _checked_zone(self.timezone)


@dataclass(frozen=True)
class CommunicationEvent:
    """One observed act of communication or document change."""

    id: str
    channel: str
    participants: frozenset[str]
    start: dt.datetime
    end: Optional[dt.datetime] = None
    artifact: Optional[str] = None
    note: Optional[str] = None

    def __post_init__(self) -> None:
        _checked_id(self.id, "event id")
        if not self.channel:
            raise RecordError("event channel must not be empty")
        if not self.participants:
            raise RecordError("an event needs at least one participant")
        for p in self.participants:
            _checked_id(p, "participant id")
        if self.artifact is not None:
            _checked_id(self.artifact, "artifact id")
        _checked_aware(self.start, "start")
        if self.end is not None:
            _checked_aware(self.end, "end")
            if self.end < self.start:
                raise RecordError("event end must not precede its start")


class PlanKind(str, enum.Enum):
    SCHEDULED = "scheduled"
    EVENT_BASED = "event-based"


_WEEKDAYS = {"mon": 0, "tue": 1, "wed": 2, "thu": 3, "fri": 4, "sat": 5, "sun": 6}


@dataclass(frozen=True)
class Schedule:
    """Recurring clock-time in a fixed zone: "daily", "weekdays", or a
    comma list of weekday names like "mon,thu"."""

    recurrence: str
    time_of_day: dt.time
    timezone: str

    def __post_init__(self) -> None:
        self.weekdays()
        _checked_zone(self.timezone)

    def weekdays(self) -> frozenset[int]:
        if self.recurrence == "daily":
            return frozenset(range(7))
        if self.recurrence == "weekdays":
            return frozenset(range(5))
        days = set()
        for token in self.recurrence.split(","):
            day = _WEEKDAYS.get(token.strip().casefold())
            if day is None:
                raise RecordError(
                    f"unknown recurrence {token.strip()!r}; use daily, "
                    "weekdays, or weekday names"
                )
            days.add(day)
        return frozenset(days)

    def occurrences(
        self, start: dt.datetime, end: dt.datetime
    ) -> list[dt.datetime]:
        """Planned instants within [start, end], chronological."""
        zone = ZoneInfo(self.timezone)
        days = self.weekdays()
        day = start.astimezone(zone).date()
        last = end.astimezone(zone).date()
        found = []
        while day <= last:
            if day.weekday() in days:
                instant = dt.datetime.combine(day, self.time_of_day, zone)
                if start <= instant <= end:
                    found.append(instant)
            day += dt.timedelta(days=1)
        return found


@dataclass(frozen=True)
class PlanActivity:
    name: str
    kind: PlanKind
    participants: tuple[str, ...] = ()
    media: tuple[str, ...] = ()
    schedule: Optional[Schedule] = None
    trigger: str = ""
    map_ref: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise RecordError("plan activity name must not be empty")
        if self.kind is PlanKind.SCHEDULED and self.schedule is None:
            raise RecordError(f"scheduled activity {self.name!r} needs a schedule")
        if self.kind is PlanKind.EVENT_BASED and not self.trigger:
            raise RecordError(
                f"event-based activity {self.name!r} needs a trigger description"
            )


@dataclass(frozen=True)
class CommunicationPlan:
    activities: tuple[PlanActivity, ...]

    def __post_init__(self) -> None:
        names = [a.name for a in self.activities]
        if len(set(names)) != len(names):
            raise RecordError("plan activity names must be unique")


# --- JSON codecs -------------------------------------------------------------


def parse_timestamp(value: Any, key: str) -> dt.datetime:
    if not isinstance(value, str):
        raise RecordError(f"{key} must be an ISO 8601 string")
    text = value[:-1] + "+00:00" if value.endswith("Z") else value
    try:
        stamp = dt.datetime.fromisoformat(text)
    except ValueError:
        raise RecordError(f"{key} is not a valid ISO 8601 timestamp: {value!r}")
    if stamp.tzinfo is None:
        raise RecordError(f"{key} must carry a UTC offset")
    return stamp


def event_from_dict(data: Any) -> CommunicationEvent:
    data = _object(data, "event")
    raw = dict(data)
    participants = raw.get("participants")
    if not isinstance(participants, list):
        raise RecordError("participants must be a list of ids")
    end = raw.get("end")
    return CommunicationEvent(
        id=_text(raw, "id"),
        channel=_text(raw, "channel"),
        participants=frozenset(_str_items(participants, "participants")),
        start=parse_timestamp(raw.get("start"), "start"),
        end=None if end is None else parse_timestamp(end, "end"),
        artifact=_opt_text(raw, "artifact"),
        note=_opt_text(raw, "note"),
    )


def event_to_dict(e: CommunicationEvent) -> dict:
    return {
        "id": e.id,
        "channel": e.channel,
        "participants": sorted(e.participants),
        "start": e.start.isoformat(),
        "end": None if e.end is None else e.end.isoformat(),
        "artifact": e.artifact,
        "note": e.note,
    }


def profile_from_dict(data: Any) -> ParticipantProfile:
    data = _object(data, "participant")
    contacts = data.get("contacts", [])
    if not isinstance(contacts, list):
        raise RecordError("contacts must be a list")
    entries = []
    for c in contacts:
        c = _object(c, "contact entry")
        entries.append(ContactEntry(_text(c, "scheme"), _text(c, "address")))
    status_text = data.get("status", Status.AVAILABLE.value)
    try:
        status = Status(status_text)
    except ValueError:
        allowed = ", ".join(s.value for s in Status)
        raise RecordError(f"unknown status {status_text!r}; use one of {allowed}")
    return ParticipantProfile(
        id=_text(data, "id"),
        name=data.get("name", "") or "",
        site=_opt_text(data, "site"),
        contacts=tuple(entries),
        photo=_opt_text(data, "photo"),
        timezone=data.get("timezone", "UTC"),
        status=status,
        role=data.get("role", "") or "",
        skills=tuple(_str_items(data.get("skills", []), "skills")),
        current_task=data.get("current_task", "") or "",
        current_artifact=data.get("current_artifact", "") or "",
        pair_partner=_opt_text(data, "pair_partner"),
    )


def profile_to_dict(p: ParticipantProfile) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "site": p.site,
        "contacts": [{"scheme": c.scheme, "address": c.address} for c in p.contacts],
        "photo": p.photo,
        "timezone": p.timezone,
        "status": p.status.value,
        "role": p.role,
        "skills": list(p.skills),
        "current_task": p.current_task,
        "current_artifact": p.current_artifact,
        "pair_partner": p.pair_partner,
    }


def plan_from_dict(data: Any) -> CommunicationPlan:
    data = _object(data, "plan")
    raw_activities = data.get("activities")
    if not isinstance(raw_activities, list):
        raise RecordError("plan needs an 'activities' list")
    activities = []
    for raw in raw_activities:
        raw = _object(raw, "plan activity")
        kind_text = raw.get("kind")
        try:
            kind = PlanKind(kind_text)
        except ValueError:
            allowed = ", ".join(k.value for k in PlanKind)
            raise RecordError(f"unknown plan kind {kind_text!r}; use one of {allowed}")
        schedule = None
        if raw.get("schedule") is not None:
            s = _object(raw["schedule"], "schedule")
            schedule = Schedule(
                recurrence=_text(s, "recurrence"),
                time_of_day=_parse_clock(_text(s, "time")),
                timezone=_text(s, "timezone"),
            )
        activities.append(
            PlanActivity(
                name=_text(raw, "name"),
                kind=kind,
                participants=tuple(_str_items(raw.get("participants", []), "participants")),
                media=tuple(_str_items(raw.get("media", []), "media")),
                schedule=schedule,
                trigger=raw.get("trigger", "") or "",
                map_ref=_opt_text(raw, "map_ref"),
            )
        )
    return CommunicationPlan(activities=tuple(activities))


def plan_to_dict(plan: CommunicationPlan) -> dict:
    out = []
    for a in plan.activities:
        schedule = None
        if a.schedule is not None:
            schedule = {
                "recurrence": a.schedule.recurrence,
                "time": a.schedule.time_of_day.isoformat(timespec="minutes"),
                "timezone": a.schedule.timezone,
            }
        out.append(
            {
                "name": a.name,
                "kind": a.kind.value,
                "participants": list(a.participants),
                "media": list(a.media),
                "schedule": schedule,
                "trigger": a.trigger,
                "map_ref": a.map_ref,
            }
        )
    return {"activities": out}


def model_to_dict(m: FlowModel) -> dict:
    """The map as plain JSON data for clients, element lists sorted by id."""
    return {
        "name": m.name,
        "kind": m.kind.value,
        "is_map": m.is_map,
        "sites": [
            {"id": s.id, "label": s.label} for s in sorted(m.sites, key=lambda s: s.id)
        ],
        "stores": [
            {
                "id": s.id,
                "name": s.name,
                "state": s.state.value,
                "site": s.site,
                "multiplicity": s.multiplicity.value,
                "is_experience": s.is_experience,
                "is_role": s.is_role,
            }
            for s in sorted(m.stores, key=lambda s: s.id)
        ],
        "activities": [
            {"id": a.id, "name": a.name, "site": a.site}
            for a in sorted(m.activities, key=lambda a: a.id)
        ],
        "flows": [
            {
                "id": f.id,
                "source": f.source,
                "target": f.target,
                "state": f.state.value,
                "directed": f.directed,
                "intensity": f.intensity,
                "attachment": f.attachment.value,
                "is_null_flow": f.is_null_flow,
                "content": f.content,
            }
            for f in sorted(m.flows, key=lambda f: f.id)
        ],
    }


def report_to_dict(report: DeviationReport) -> dict:
    return {
        "deviations": [
            {
                "kind": d.kind.value,
                "subject": list(d.subject),
                "planned": d.planned,
                "actual": d.actual,
            }
            for d in report.deviations
        ]
    }


# --- helpers -----------------------------------------------------------------

_CLOCK = re.compile(r"^(\d{2}):(\d{2})$")


def _parse_clock(text: str) -> dt.time:
    m = _CLOCK.match(text)
    if m is None:
        raise RecordError(f"time must look like HH:MM, got {text!r}")
    hour, minute = int(m.group(1)), int(m.group(2))
    if hour > 23 or minute > 59:
        raise RecordError(f"time out of range: {text!r}")
    return dt.time(hour, minute)


def _object(data: Any, what: str) -> dict:
    if not isinstance(data, dict):
        raise RecordError(f"{what} must be a JSON object")
    return data


def _text(data: dict, key: str) -> str:
    value = data.get(key)
    if not isinstance(value, str) or not value:
        raise RecordError(f"{key} must be a non-empty string")
    return value


def _opt_text(data: dict, key: str) -> Optional[str]:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise RecordError(f"{key} must be a string when present")
    return value


def _str_items(values: Any, key: str) -> list[str]:
    if not isinstance(values, list) or any(not isinstance(v, str) for v in values):
        raise RecordError(f"{key} must be a list of strings")
    return values


def _checked_id(value: str, what: str) -> None:
    try:
        _require_id(value)
    except ValueError:
        raise RecordError(
            f"{what} {value!r} must use only letters, digits, '_', '.', or '-'"
        )


def _checked_zone(name: str) -> None:
    try:
        ZoneInfo(name)
    except Exception:
        raise RecordError(f"unknown timezone {name!r}")


def _checked_aware(stamp: dt.datetime, key: str) -> None:
    if not isinstance(stamp, dt.datetime) or stamp.tzinfo is None:
        raise RecordError(f"{key} must be a timezone-aware timestamp")
