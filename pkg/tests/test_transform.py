"""Structural rewrites: preconditions, results, purity."""

import pytest
from hypothesis import given, strategies as st

from flowkit.model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    Multiplicity,
    is_valid,
    validate,
)
from flowkit.transform import (
    TransformError,
    TransformKind,
    Transformation,
    adapt_activity,
    adapt_interface,
    apply_transformation,
    branch,
    consolidate,
    detour,
    liquefy,
    shortcut,
    solidify,
)

from fixtures import LIQUID, SOLID, UNDEFINED, showcase_model
from gen import random_model


def handoff_model() -> FlowModel:
    """Developer explains verbally, tester also reads an old report."""
    return FlowModel(
        name="uebergabe",
        stores=(
            InformationStore("Dev", LIQUID),
            InformationStore("Tester", LIQUID),
            InformationStore("Altbericht", SOLID),
        ),
        activities=(Activity("Testen"),),
        flows=(
            Flow("f1", "Dev", "Tester", LIQUID, content="Testhinweise"),
            Flow("f2", "Altbericht", "Testen", SOLID, attachment=Attachment.SUPPORT),
            Flow("f3", "Tester", "Testen", LIQUID),
        ),
    )


def test_solidify_inserts_document():
    model = handoff_model()
    out = solidify(model, "f1", doc_id="Testnotizen", doc_name="Testnotizen")
    assert is_valid(out)
    assert "Testnotizen" in out.store_map()
    doc = out.store_map()["Testnotizen"]
    assert doc.state is SOLID
    assert "f1" not in out.flow_map()
    into = [f for f in out.flows if f.target == "Testnotizen"]
    outof = [f for f in out.flows if f.source == "Testnotizen"]
    assert [(f.source, f.state, f.content) for f in into] == [
        ("Dev", LIQUID, "Testhinweise")
    ]
    assert [(f.target, f.state, f.content) for f in outof] == [
        ("Tester", SOLID, "Testhinweise")
    ]
    # the input is untouched
    assert model == handoff_model()


def test_solidify_preconditions():
    model = handoff_model()
    with pytest.raises(TransformError, match="'f2'"):
        solidify(model, "f2", doc_id="X")
    with pytest.raises(TransformError, match="'nope'"):
        solidify(model, "nope", doc_id="X")
    with pytest.raises(TransformError, match="'Dev'"):
        solidify(model, "f1", doc_id="Dev")
    null = model.with_flows(
        model.flows + (Flow("f9", "Dev", "Testen", LIQUID, is_null_flow=True),)
    )
    with pytest.raises(TransformError, match="'f9'"):
        solidify(null, "f9", doc_id="X")


def test_liquefy_reverses_solidify():
    model = handoff_model()
    solidified = solidify(model, "f1", doc_id="Testnotizen")
    back = liquefy(solidified, "Testnotizen")
    assert is_valid(back)
    assert "Testnotizen" not in back.store_map()
    (direct,) = [f for f in back.flows if f.source == "Dev"]
    assert direct.target == "Tester"
    assert direct.state is LIQUID
    assert direct.content == "Testhinweise"


def test_liquefy_rejects_busy_or_solid_fed_stores():
    model = handoff_model()
    with pytest.raises(TransformError, match="not a document"):
        liquefy(model, "Dev")
    # a second reader makes the hop ambiguous
    solidified = solidify(model, "f1", doc_id="Notiz")
    busy = solidified.with_flows(
        solidified.flows + (Flow("fx", "Notiz", "Testen", SOLID),)
    )
    with pytest.raises(TransformError, match="not a simple hop"):
        liquefy(busy, "Notiz")
    # a document filled from a document cannot become a liquid flow
    archive = FlowModel(
        stores=(
            InformationStore("Quelle", SOLID),
            InformationStore("Kopie", SOLID),
            InformationStore("Leser", LIQUID),
        ),
        flows=(
            Flow("f1", "Quelle", "Kopie", SOLID),
            Flow("f2", "Kopie", "Leser", SOLID),
        ),
    )
    with pytest.raises(TransformError, match="'Quelle'"):
        liquefy(archive, "Kopie")


def test_shortcut_removes_relay():
    model = FlowModel(
        stores=(InformationStore("Protokoll", SOLID),),
        activities=(Activity("Planen"), Activity("Bauen")),
        flows=(
            Flow("f1", "Planen", "Protokoll", SOLID, content="Plan"),
            Flow("f2", "Protokoll", "Bauen", SOLID, content="Plan"),
        ),
    )
    out = shortcut(model, "Protokoll")
    assert is_valid(out)
    assert "Protokoll" not in out.store_map()
    (direct,) = out.flows
    assert (direct.source, direct.target) == ("Planen", "Bauen")
    assert direct.state is SOLID
    assert direct.content == "Plan"


def test_shortcut_requires_exactly_one_producer_and_reader():
    model = handoff_model()
    extra = model.with_flows(
        model.flows + (Flow("f4", "Altbericht", "Tester", SOLID),)
    )
    with pytest.raises(TransformError, match="not a relay"):
        shortcut(extra, "Altbericht")
    with pytest.raises(TransformError, match="'fehlt'"):
        shortcut(model, "fehlt")


def test_detour_routes_through_new_store():
    model = handoff_model()
    out = detour(model, "f1", via_id="Protokoll", via_state=SOLID)
    assert is_valid(out)
    assert out.store_map()["Protokoll"].state is SOLID
    hops = [f for f in out.flows if "Protokoll" in (f.source, f.target)]
    states = {(f.source, f.target): f.state for f in hops}
    assert states[("Dev", "Protokoll")] is LIQUID
    assert states[("Protokoll", "Tester")] is SOLID
    with pytest.raises(TransformError, match="'Dev'"):
        detour(model, "f1", via_id="Dev", via_state=SOLID)


def test_branch_duplicates_flow_to_new_target():
    model = handoff_model()
    out = branch(model, "f1", to="Testen")
    assert is_valid(out)
    copies = [f for f in out.flows if f.source == "Dev"]
    assert {f.target for f in copies} == {"Tester", "Testen"}
    states = {f.state for f in copies}
    assert states == {LIQUID}

    with pytest.raises(TransformError, match="'niemand'"):
        branch(model, "f1", to="niemand")
    with pytest.raises(TransformError, match="source"):
        branch(model, "f1", to="Dev")
    # support information must still end at an activity
    with pytest.raises(TransformError, match="'Tester'"):
        branch(model, "f2", to="Tester")


def test_consolidate_fuses_stores():
    model = FlowModel(
        stores=(
            InformationStore("NotizA", SOLID),
            InformationStore("NotizB", SOLID, multiplicity=Multiplicity.MULTIPLE),
            InformationStore("Leser", LIQUID),
        ),
        activities=(Activity("Schreiben"),),
        flows=(
            Flow("f1", "Schreiben", "NotizA", SOLID, content="Ergebnis"),
            Flow("f2", "Schreiben", "NotizB", SOLID, content="Ergebnis"),
            Flow("f3", "NotizA", "Leser", SOLID),
            Flow("f4", "NotizA", "NotizB", SOLID),
        ),
    )
    out = consolidate(model, ("NotizA", "NotizB"), merged_name="Notizen")
    assert is_valid(out)
    merged = out.store_map()["NotizA"]
    assert merged.name == "Notizen"
    assert merged.multiplicity is Multiplicity.MULTIPLE
    assert "NotizB" not in out.store_map()
    # the two writes collapse into one, the internal flow disappears
    assert [(f.source, f.target) for f in out.flows] == [
        ("Schreiben", "NotizA"),
        ("NotizA", "Leser"),
    ]


def test_consolidate_preconditions():
    model = handoff_model()
    with pytest.raises(TransformError, match="different states"):
        consolidate(model, ("Dev", "Altbericht"), merged_name="X")
    with pytest.raises(TransformError, match="at least two"):
        consolidate(model, ("Dev",), merged_name="X")
    with pytest.raises(TransformError, match="'Testen'"):
        consolidate(
            model, ("Dev", "Tester"), merged_name="X", merged_id="Testen"
        )


def test_adapt_interface_adds_and_removes_flows():
    model = handoff_model()
    out = adapt_interface(
        model,
        "Testen",
        add=(Flow("f5", "Dev", "Testen", LIQUID, content="Rückfragen"),),
        remove=("f2",),
    )
    assert is_valid(out)
    assert "f2" not in out.flow_map()
    assert out.flow_map()["f5"].content == "Rückfragen"

    with pytest.raises(TransformError, match="'f1'"):
        adapt_interface(model, "Testen", remove=("f1",))
    with pytest.raises(TransformError, match="dock"):
        adapt_interface(
            model, "Testen", add=(Flow("f6", "Dev", "Tester", LIQUID),)
        )
    # rewrites may not introduce rule violations
    with pytest.raises(TransformError, match="would break"):
        adapt_interface(
            model, "Testen", add=(Flow("f7", "Altbericht", "Testen", LIQUID),)
        )


def test_adapt_interface_refuses_detailed_activities():
    model = showcase_model()
    with pytest.raises(TransformError, match="detail model"):
        adapt_interface(model, "Analyse", remove=("f1",))


def test_adapt_activity_swaps_detail_model():
    model = showcase_model()
    old_sub = model.activity_map()["Analyse"].sub_model
    new_sub = FlowModel(
        name="Analyse-Neu",
        stores=(InformationStore("Merkzettel", LIQUID),),
        activities=(Activity("Formulieren"),),
        flows=(
            Flow("s1", "Kunde", "Merkzettel", LIQUID, content="Anforderungen"),
            Flow(
                "s2",
                "Berater",
                "Formulieren",
                LIQUID,
                is_experience=True,
                attachment=Attachment.CONTROL,
            ),
            Flow("s3", "Altdokumente", "Formulieren", SOLID, attachment=Attachment.SUPPORT),
            Flow("s4", "Merkzettel", "Formulieren", LIQUID),
            Flow("s5", "Formulieren", "Spezifikation", SOLID, content="Spezifikation"),
        ),
    )
    out = adapt_activity(model, "Analyse", sub_model=new_sub)
    assert is_valid(out)
    assert out.activity_map()["Analyse"].sub_model == new_sub
    # external flows are untouched
    assert out.flows == model.flows
    assert model.activity_map()["Analyse"].sub_model == old_sub

    smaller = FlowModel(
        stores=(InformationStore("Merkzettel", LIQUID),),
        flows=(Flow("s1", "Kunde", "Merkzettel", LIQUID, content="Anforderungen"),),
    )
    with pytest.raises(TransformError, match="boundary"):
        adapt_activity(model, "Analyse", sub_model=smaller)


def test_apply_transformation_dispatch():
    model = handoff_model()
    direct = solidify(model, "f1", doc_id="Notiz", doc_name="Notiz")
    request = Transformation(
        TransformKind.SOLIDIFY, ("f1",), {"doc_id": "Notiz", "doc_name": "Notiz"}
    )
    assert apply_transformation(model, request) == direct

    with pytest.raises(TransformError, match="doc_id"):
        apply_transformation(model, Transformation(TransformKind.SOLIDIFY, ("f1",)))
    with pytest.raises(ValueError):
        Transformation(TransformKind.SOLIDIFY, ())


def test_transformation_normalizes_single_target():
    request = Transformation(TransformKind.SHORTCUT, "Altbericht")
    assert request.target == ("Altbericht",)


@given(st.integers(min_value=0, max_value=4000))
def test_solidify_output_always_validates(seed):
    import random

    model = random_model(random.Random(seed), allow_map=False, allow_submodel=False)
    liquid_flows = [
        f
        for f in model.flows
        if f.state is LIQUID and f.directed and not f.is_null_flow
    ]
    for n, flow in enumerate(liquid_flows[:3]):
        out = solidify(model, flow.id, doc_id=f"doc_{n}", doc_name=f"Ablage {n}")
        assert not [v for v in validate(out) if v.severity.value == "error"]


@given(st.integers(min_value=0, max_value=4000))
def test_branch_output_always_validates(seed):
    import random

    rng = random.Random(seed)
    model = random_model(rng, allow_map=False, allow_submodel=False)
    stores = list(model.store_map())
    for flow in model.flows[:3]:
        if not flow.directed or flow.attachment is not Attachment.CONTENT:
            continue
        candidates = [s for s in stores if s not in (flow.source, flow.target)]
        if not candidates:
            continue
        out = branch(model, flow.id, to=rng.choice(candidates))
        assert not [v for v in validate(out) if v.severity.value == "error"]
