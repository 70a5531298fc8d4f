"""Finding known good and bad structures in a model, then fixing one.

The builtin catalog ships a handful of recurring structures: a report
nobody reads, a long person-to-person relay, documentation detours,
and their positive counterparts.  scan_catalog finds all of them in
one pass; replace_pattern applies the repair a template carries.
"""

from flowkit import dsl
from flowkit.patterns import builtin_catalog, replace_pattern, scan_catalog

MODEL = """\
model Projektalltag ist
store Kunde liquid
store Ana liquid
store Bert liquid
store Chris liquid
store Dora liquid
store Bericht "Wochenbericht" solid
activity Berichten
flow Kunde -> Ana liquid
flow Ana -> Bert liquid
flow Bert -> Chris liquid
flow Chris -> Dora liquid
flow Dora -> Berichten liquid
flow Berichten -> Bericht solid
"""

model = dsl.parse(MODEL)
print("templates in the builtin catalog:")
for template in builtin_catalog():
    print(f"  {template.name} ({template.polarity.value})")

print()
print("matches in", model.name + ":")
for match in scan_catalog(model):
    where = dict(match.binding)
    if match.chain:
        where["chain"] = " -> ".join(match.chain)
    print(f"  {match.pattern}: {where}")

# The relay from Kunde to Dora loses information at every hop.  The
# template's repair bridges the chain: the head talks to the tail
# directly and the pure relays in between drop out.
repaired = replace_pattern(model, "Stille Post")
print()
print("after bridging the relay:")
print(dsl.serialize(repaired))
print("remaining matches:", [m.pattern for m in scan_catalog(repaired)])
