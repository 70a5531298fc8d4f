"""A first model: who holds which information, and in which state.

A small requirements effort: the customer explains their needs, an
analysis activity distills them into a specification document, and the
developers work from that document.  Spoken knowledge is "liquid",
documents are "solid", and the validator enforces that a store only
emits flows matching its own state.
"""

from flowkit.model import (
    Activity,
    AggregateState,
    Flow,
    FlowModel,
    InformationStore,
    validate,
)

LIQUID = AggregateState.LIQUID
SOLID = AggregateState.SOLID

model = FlowModel(
    name="Anforderungsanalyse",
    stores=(
        InformationStore("Kunde", LIQUID),
        InformationStore("Entwickler", LIQUID),
        InformationStore("Spezifikation", SOLID),
    ),
    activities=(Activity("Analyse"),),
    flows=(
        Flow("f1", "Kunde", "Analyse", LIQUID, content="Anforderungen"),
        Flow("f2", "Analyse", "Spezifikation", SOLID, content="Spezifikation"),
        Flow("f3", "Spezifikation", "Entwickler", SOLID),
    ),
)

print("violations in the clean model:", list(validate(model)))

# Now break the state rule on purpose: a person cannot emit a document
# directly; writing one is an activity of its own.
broken = FlowModel(
    stores=model.stores,
    activities=model.activities,
    flows=model.flows + (Flow("f4", "Kunde", "Spezifikation", SOLID),),
)
for violation in validate(broken):
    print("found:", violation)

# Attachments distinguish what a flow does to an activity: content goes
# in and out, control steers, support backs it up.  Control and support
# only make sense against an activity, which the validator checks too.
from flowkit.model import Attachment

steered = FlowModel(
    stores=model.stores + (InformationStore("Projektleiter", LIQUID),),
    activities=model.activities,
    flows=model.flows
    + (
        Flow(
            "f5",
            "Projektleiter",
            "Analyse",
            LIQUID,
            attachment=Attachment.CONTROL,
        ),
    ),
)
print("steered model is clean:", not validate(steered))
