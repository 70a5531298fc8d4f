"""Merging the maps from several interviews into one picture.

Different interviewees describe overlapping fragments of the same
flows.  merge_models unifies stores by name and state, keeps every
flow, and reports where the fragments disagree instead of silently
picking a side.
"""

from flowkit import dsl
from flowkit.merge import merge_models

ANNA = """\
model Interview-Anna ist
store Anna liquid
store Protokoll "Sitzungsprotokoll" solid
activity Sitzung
flow Anna -> Sitzung liquid
flow Sitzung -> Protokoll solid
"""

BERT = """\
model Interview-Bert ist
store Bert liquid
store Protokoll "Sitzungsprotokoll" solid
store Archiv solid
activity Ablegen
flow Protokoll -> Bert solid
flow Bert -> Ablegen liquid
flow Ablegen -> Archiv solid
"""

# Bert remembers the Wiki as a searchable store, Anna as a printout:
# same name, different aggregate state.  Both statements survive the
# merge as two stores, and the disagreement is reported.
ANNA_WIKI = """\
model Anna-Wiki ist
store Anna liquid
store Wiki liquid
flow Anna -> Wiki liquid
"""

BERT_WIKI = """\
model Bert-Wiki ist
store Bert liquid
store Wiki solid
flow Wiki -> Bert solid
"""

merged, issues = merge_models(
    [dsl.parse(t) for t in (ANNA, BERT, ANNA_WIKI, BERT_WIKI)]
)
print(dsl.serialize(merged))
print("open questions for the next interview round:")
for issue in issues:
    print(" ", issue)
