"""From a process model to information flows.

Process notations say which activities read and write which documents.
That already implies the document logistics: each reader receives the
document from the closest producer upstream.  derive_document_flows
extracts exactly those flows, augment_role_flows adds the people, and
integration_cut answers which documents sit between two others.
"""

from flowkit import dsl
from flowkit.derive import (
    augment_role_flows,
    derive_document_flows,
    integration_cut,
    parse_process,
)

PROCESS = """\
activity Melden "Aenderung melden"
activity Bewerten
activity Freigeben
activity Auswerten
edge Melden -> Bewerten
edge Bewerten -> Freigeben
edge Bewerten -> Auswerten
out Melden Antrag
in Bewerten Antrag
out Bewerten Bewertung
in Freigeben Bewertung
out Freigeben Freigabe
in Auswerten Bewertung
out Auswerten Statistik
role Melden Kunde responsible
role Bewerten Pruefer responsible
role Bewerten Entwickler participating
"""

process = parse_process(PROCESS)
derived = derive_document_flows(process)
print("derived flows (document logistics only):")
for flow in derived.model.flows:
    print(f"  {flow.source} -> {flow.target}")
for finding in derived.findings:
    print("noticed:", finding)

full = augment_role_flows(process, derived.model)
print()
print("with the people attached:")
print(dsl.serialize(full))

# Suppose a new tool should sit on everything that turns the Antrag
# into the Freigabe.  The cut lists the documents all such paths pass
# through, plus documents that depend on those and would be affected.
cut = integration_cut(full, sources={"Antrag"}, targets={"Freigabe"})
print("every path runs through:", sorted(cut.intermediates))
print("depends on those as well:", sorted(cut.extra_targets))
