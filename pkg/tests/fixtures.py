"""Hand-built models shared across the test suite."""

from flowkit.model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    ModelKind,
    Multiplicity,
)

LIQUID = AggregateState.LIQUID
SOLID = AggregateState.SOLID
UNDEFINED = AggregateState.UNDEFINED


def showcase_model() -> FlowModel:
    """A model that uses every notation element: both store symbols plus
    the undefined combination, single and multiple stores, all three flow
    states, experience coloring, content labels, a null flow, control and
    support attachments, and an activity with a consistent sub-model."""
    sub = FlowModel(
        name="Analyse-Detail",
        kind=ModelKind.IST,
        stores=(InformationStore("Notizen", LIQUID),),
        activities=(Activity("Schreiben"),),
        flows=(
            Flow("s1", "Kunde", "Notizen", LIQUID, content="Anforderungen"),
            Flow(
                "s2",
                "Berater",
                "Schreiben",
                LIQUID,
                is_experience=True,
                attachment=Attachment.CONTROL,
            ),
            Flow(
                "s3",
                "Altdokumente",
                "Schreiben",
                SOLID,
                attachment=Attachment.SUPPORT,
            ),
            Flow("s4", "Notizen", "Schreiben", LIQUID),
            Flow("s5", "Schreiben", "Spezifikation", SOLID, content="Spezifikation"),
        ),
    )
    return FlowModel(
        name="Beispiel",
        kind=ModelKind.IST,
        stores=(
            InformationStore("Kunde", LIQUID),
            InformationStore(
                "Entwickler", LIQUID, multiplicity=Multiplicity.MULTIPLE
            ),
            InformationStore("Berater", LIQUID, is_role=True, is_experience=True),
            InformationStore("Spezifikation", SOLID),
            InformationStore(
                "Altdokumente", SOLID, multiplicity=Multiplicity.MULTIPLE
            ),
            InformationStore("Erfahrungsbericht", SOLID, is_experience=True),
            InformationStore("Projektwissen", UNDEFINED),
            InformationStore(
                "Randnotizen", UNDEFINED, multiplicity=Multiplicity.MULTIPLE
            ),
        ),
        activities=(Activity("Analyse", sub_model=sub),),
        flows=(
            Flow("f1", "Kunde", "Analyse", LIQUID, content="Anforderungen"),
            Flow(
                "f2",
                "Berater",
                "Analyse",
                LIQUID,
                is_experience=True,
                attachment=Attachment.CONTROL,
            ),
            Flow(
                "f3",
                "Altdokumente",
                "Analyse",
                SOLID,
                attachment=Attachment.SUPPORT,
            ),
            Flow("f4", "Analyse", "Spezifikation", SOLID, content="Spezifikation"),
            Flow("f5", "Spezifikation", "Entwickler", SOLID),
            Flow("f6", "Projektwissen", "Entwickler", UNDEFINED),
            Flow("f7", "Entwickler", "Randnotizen", LIQUID),
            Flow(
                "f8",
                "Erfahrungsbericht",
                "Entwickler",
                SOLID,
                is_experience=True,
            ),
            Flow(
                "f9",
                "Kunde",
                "Entwickler",
                LIQUID,
                content="Feedback",
                is_null_flow=True,
            ),
        ),
    )


def two_store_model(**kwargs) -> FlowModel:
    """Smallest useful model: a liquid person feeding a solid document."""
    return FlowModel(
        name="klein",
        stores=(
            InformationStore("Kunde", LIQUID),
            InformationStore("Spez", SOLID),
        ),
        flows=(Flow("f1", "Kunde", "Spez", LIQUID, content="Anforderungen"),),
        **kwargs,
    )
