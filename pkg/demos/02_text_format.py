"""The text format: write models as plain text, get them back intact.

Models survive a serialize/parse round trip with nothing lost, so text
files work as the storage format: diffable, mergeable, editable in any
editor.  The DOT export at the end renders the same model for Graphviz.
"""

from flowkit import dot, dsl

SOURCE = """\
model Wochenbericht
store Team "Entwicklungsteam" liquid multi
store Leitung liquid role
store Bericht "Statusbericht" solid
activity Berichten
flow Team -> Berichten liquid
flow Berichten -> Bericht solid
flow Bericht -> Leitung solid
flow Leitung -> Team liquid experience
"""

model = dsl.parse(SOURCE)
print("parsed:", model.name)
print("stores:", [s.id for s in model.stores])
print("flows:  ", [(f.source, f.target) for f in model.flows])

# serialize() renders canonical text; parsing that text again yields an
# equivalent model, which fingerprint() makes checkable in one line.
canonical = dsl.serialize(model)
print()
print(canonical)
assert dsl.fingerprint(dsl.parse(canonical)) == dsl.fingerprint(model)
print("round trip preserves the model: True")

# Parse errors arrive in bulk, not one at a time, with line numbers.
try:
    dsl.parse("model Kaputt\nstore A fluessig\nflow A -> B -> C\n")
except dsl.ParseFailure as exc:
    print()
    print("rejected input:")
    print(exc)

print()
print(dot.export_dot(model))
