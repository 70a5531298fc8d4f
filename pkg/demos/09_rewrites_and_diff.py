"""Rewriting a model step by step, and measuring the gap to the plan.

Transformations are small, checked rewrites: solidify turns a spoken
exchange into a document hop, shortcut removes a pure relay, and each
result is validated before it is returned.  diff_maps then compares a
planned map against an observed one, with a relative tolerance for
intensity noise, and metrics condenses a model into a few numbers.
"""

from flowkit import dsl
from flowkit.analysis import diff_maps, metrics
from flowkit.transform import solidify, shortcut

model = dsl.parse(
    "model Uebergabe ist\n"
    "store Ana liquid\n"
    "store Bert liquid\n"
    "flow Ana -> Bert liquid\n"
)

# Ana's handover knowledge should survive her vacation: capture the
# spoken flow in a document, then drop the relay again to compare.
documented = solidify(model, "f1", doc_id="Notiz", doc_name="Uebergabenotiz")
print(dsl.serialize(documented))

back = shortcut(documented, "Notiz")
assert [(f.source, f.target) for f in back.flows] == [("Ana", "Bert")]
print("shortcut undoes the detour:", len(back.flows), "direct flow again")

m = metrics(documented)
print(f"stores={m.store_count} flows={m.flow_count}"
      f" solidity={m.solidity_ratio:.2f}")

# Planned vs observed: same pair of people, but the observed exchange
# runs hotter than planned and one planned contact never happened.
soll = dsl.parse(
    "model Plan soll map\n"
    "store Ana liquid\n"
    "store Bert liquid\n"
    "store Carla liquid\n"
    "flow Ana -- Bert liquid intensity 30.0\n"
    "flow Ana -- Carla liquid intensity 20.0\n"
)
ist = dsl.parse(
    "model Beobachtet ist map\n"
    "store Ana liquid\n"
    "store Bert liquid\n"
    "store Carla liquid\n"
    "flow Ana -- Bert liquid intensity 55.0\n"
)

print()
for tolerance in (0.0, 1.0):
    report = diff_maps(soll, ist, intensity_rel=tolerance)
    kinds = [d.kind.value for d in report.deviations]
    print(f"with {tolerance:.0%} intensity tolerance: {kinds}")
