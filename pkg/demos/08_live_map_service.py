"""A day of team communication, turned into a map while it happens.

The map service keeps one append-only log of communication events and
derives everything else from it: who currently talks to whom and how
intensely, which planned contacts did not happen, and a yellow-pages
style directory.  This demo drives the service object directly; the
same state sits behind the HTTP API started by `flowkit serve`.
"""

import datetime as dt
import json
import tempfile

from flowkit import dsl
from flowkit.mapserver.state import ServerState

UTC = dt.timezone.utc
DAY = dt.datetime(2026, 8, 12, tzinfo=UTC)  # a Wednesday


def at(hour: int, minute: int = 0) -> str:
    return (DAY + dt.timedelta(hours=hour, minutes=minute)).isoformat()


workdir = tempfile.mkdtemp(prefix="flow-demo-")
state = ServerState(workdir, now_fn=lambda: DAY + dt.timedelta(hours=18))

for name, site in (("alice", "Berlin"), ("bob", "Berlin"), ("carol", "Lund")):
    state.upsert_participant(
        {"id": name, "name": name.capitalize(), "site": site}
    )

# What the team agreed on: a daily voice standup at 09:30 Berlin time,
# and a planned exchange between Alice and Carol.
state.set_plan(
    {
        "activities": [
            {
                "name": "standup",
                "kind": "scheduled",
                "participants": ["alice", "bob", "carol"],
                "media": ["voice-conference"],
                "schedule": {
                    "recurrence": "weekdays",
                    "time": "09:30",
                    "timezone": "Europe/Berlin",
                },
            }
        ],
    }
)
state.set_soll_map(
    dsl.serialize(
        dsl.parse(
            "model Plan soll map\n"
            "site Berlin\n"
            "site Lund\n"
            "store Alice liquid @Berlin\n"
            "store Bob liquid @Berlin\n"
            "store Carol liquid @Lund\n"
            "flow Alice -- Bob liquid intensity 30.0\n"
            "flow Alice -- Carol liquid intensity 15.0\n"
        )
    )
)

# What actually happened, as it trickles in from chat and VCS adapters.
events = [
    {"id": "e1", "participants": ["alice", "bob", "carol"],
     "channel": "voice-conference", "start": at(7, 30), "end": at(7, 45)},
    {"id": "e2", "participants": ["alice", "bob"], "channel": "text-chat",
     "start": at(10), "end": at(10, 40)},
    {"id": "e3", "participants": ["bob"], "channel": "vcs-commit",
     "artifact": "Handbuch", "start": at(11), "end": at(11)},
    {"id": "e4", "participants": ["bob"], "channel": "vcs-commit",
     "artifact": "Handbuch", "start": at(14), "end": at(14)},
    {"id": "e5", "participants": ["alice", "bob", "carol"],
     "channel": "video-conference", "start": at(16)},  # still running
]
for event in events:
    print("stored", state.ingest_event(event))
# delivered twice by a flaky adapter: recognized, not duplicated
print("resent", state.ingest_event(dict(events[1])))

ist = state.build_ist_map(DAY, DAY + dt.timedelta(hours=18))
print()
print("observed flows of the day:")
for flow in ist.flows:
    arrow = "--" if not flow.directed else "->"
    print(f"  {flow.source} {arrow} {flow.target}  {flow.intensity:g}")
print("conferences below the map:", [a.name for a in ist.activities])

# The plan says standup every weekday at 09:30 Berlin time; the log
# only has one at 09:30 (07:30 UTC) today, and none yesterday.
report = state.conformance(DAY - dt.timedelta(days=1), DAY + dt.timedelta(hours=18))
print()
print("deviations from the plan:")
for deviation in report.deviations:
    print(f"  {deviation.kind.value}: {deviation.subject}")

snapshot = json.loads(state.snapshot_json("live"))
print()
print("live snapshot keys:", sorted(snapshot))
print("active right now:", [c["id"] for c in snapshot["active_conferences"]])
