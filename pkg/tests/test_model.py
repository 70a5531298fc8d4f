import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowkit.model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    Multiplicity,
    Severity,
    Violation,
    boundary_signature,
    flatten,
    interface_signature,
    is_valid,
    validate,
)

from fixtures import LIQUID, SOLID, UNDEFINED, showcase_model
from gen import random_model


def rules(violations):
    return [v.rule for v in violations]


class TestStateRules:
    def test_liquid_store_must_emit_liquid(self):
        m = FlowModel(
            stores=(
                InformationStore("Analyst", LIQUID),
                InformationStore("Spez", SOLID),
            ),
            flows=(Flow("f1", "Analyst", "Spez", SOLID),),
        )
        assert rules(validate(m)) == ["liquid-store-flow"]

    def test_solid_store_must_emit_solid(self):
        m = FlowModel(
            stores=(
                InformationStore("Doku", SOLID),
                InformationStore("Kunde", LIQUID),
            ),
            flows=(Flow("f1", "Doku", "Kunde", LIQUID),),
        )
        assert rules(validate(m)) == ["solid-store-flow"]

    def test_undefined_store_must_emit_undefined(self):
        m = FlowModel(
            stores=(
                InformationStore("Wissen", UNDEFINED),
                InformationStore("Kunde", LIQUID),
            ),
            flows=(Flow("f1", "Wissen", "Kunde", LIQUID),),
        )
        assert rules(validate(m)) == ["undefined-store-flow"]

    def test_flow_into_store_is_unconstrained(self):
        # Only the source side fixes the flow state: reading a document is
        # a solid flow even when a person receives it.
        m = FlowModel(
            stores=(
                InformationStore("Doku", SOLID),
                InformationStore("Kunde", LIQUID),
            ),
            flows=(Flow("f1", "Doku", "Kunde", SOLID),),
        )
        assert validate(m) == ()


class TestStructuralRules:
    def test_attachment_needs_activity_endpoint(self):
        m = FlowModel(
            stores=(
                InformationStore("Kunde", LIQUID),
                InformationStore("Team", LIQUID),
            ),
            flows=(
                Flow("f1", "Kunde", "Team", LIQUID, attachment=Attachment.CONTROL),
            ),
        )
        assert rules(validate(m)) == ["attachment-endpoint"]

    def test_attachment_on_activity_is_fine(self):
        m = FlowModel(
            stores=(InformationStore("Kunde", LIQUID),),
            activities=(Activity("Analyse"),),
            flows=(
                Flow("f1", "Kunde", "Analyse", LIQUID, attachment=Attachment.SUPPORT),
            ),
        )
        assert validate(m) == ()

    def test_undirected_flow_needs_map(self):
        m = FlowModel(
            stores=(
                InformationStore("Alice", LIQUID),
                InformationStore("Bob", LIQUID),
            ),
            flows=(Flow("f1", "Alice", "Bob", LIQUID, directed=False),),
        )
        assert rules(validate(m)) == ["undirected-outside-map"]
        assert validate(FlowModel(
            is_map=True, stores=m.stores, flows=m.flows
        )) == ()

    def test_interface_must_match_sub_model_boundary(self):
        sub = FlowModel(name="leer")
        m = FlowModel(
            stores=(InformationStore("Kunde", LIQUID),),
            activities=(Activity("Analyse", sub_model=sub),),
            flows=(Flow("f1", "Kunde", "Analyse", LIQUID),),
        )
        assert rules(validate(m)) == ["interface-mismatch"]

    def test_duplicate_ids(self):
        m = FlowModel(
            stores=(
                InformationStore("Kunde", LIQUID),
                InformationStore("Kunde", SOLID),
            ),
        )
        assert rules(validate(m)) == ["duplicate-id"]

    def test_dangling_reference(self):
        m = FlowModel(
            stores=(InformationStore("Kunde", LIQUID),),
            flows=(Flow("f1", "Kunde", "Nirgendwo", LIQUID),),
        )
        assert rules(validate(m)) == ["dangling-reference"]

    def test_dangling_reported_first(self):
        m = FlowModel(
            stores=(
                InformationStore("Analyst", LIQUID),
                InformationStore("Spez", SOLID),
            ),
            flows=(
                Flow("a1", "Analyst", "Spez", SOLID),
                Flow("z9", "Analyst", "Fehlt", LIQUID),
            ),
        )
        assert rules(validate(m)) == ["dangling-reference", "liquid-store-flow"]

    def test_unknown_site_is_dangling(self):
        m = FlowModel(
            is_map=True,
            stores=(InformationStore("Alice", LIQUID, site="GER"),),
        )
        assert rules(validate(m)) == ["dangling-reference"]


class TestValidateBasics:
    def test_empty_model(self):
        assert validate(FlowModel()) == ()

    def test_showcase_model_is_clean(self):
        assert validate(showcase_model()) == ()

    def test_role_flag_on_solid_store_is_a_warning(self):
        m = FlowModel(stores=(InformationStore("Spez", SOLID, is_role=True),))
        violations = validate(m)
        assert rules(violations) == ["role-flag-on-nonliquid"]
        assert violations[0].severity is Severity.WARNING
        assert is_valid(m)

    def test_validate_is_deterministic(self):
        m = FlowModel(
            stores=(
                InformationStore("b", LIQUID),
                InformationStore("a", SOLID),
            ),
            flows=(
                Flow("f2", "b", "a", SOLID),
                Flow("f1", "a", "b", LIQUID),
                Flow("f3", "a", "weg", SOLID),
            ),
        )
        first = validate(m)
        assert first == validate(m)
        assert [(v.rule, v.element_id) for v in first] == [
            ("dangling-reference", "f3"),
            ("solid-store-flow", "f1"),
            ("liquid-store-flow", "f2"),
        ]

    def test_violation_formatting(self):
        v = Violation("liquid-store-flow", "f1", "boom")
        assert str(v) == "liquid-store-flow [f1]: boom"


class TestHierarchy:
    def test_interface_signature_directions(self):
        m = showcase_model()
        sig = interface_signature(m, "Analyse")
        assert sig[("in", LIQUID, "Anforderungen")] == 1
        assert sig[("out", SOLID, "Spezifikation")] == 1
        assert sig == boundary_signature(m.activity_map()["Analyse"].sub_model)

    def test_flatten_preserves_interface_multiset(self):
        m = showcase_model()
        flat = flatten(m)
        assert all(a.sub_model is None for a in flat.activities)
        assert validate(flat) == ()
        # The nested elements are inlined under a prefixed id.
        assert "Analyse.Notizen" in {s.id for s in flat.stores}
        assert "Analyse.Schreiben" in {a.id for a in flat.activities}
        # Boundary flows survive with their outside endpoints.
        flat_flows = {(f.source, f.target) for f in flat.flows}
        assert ("Kunde", "Analyse.Notizen") in flat_flows
        assert ("Analyse.Schreiben", "Spezifikation") in flat_flows
        assert not any("Analyse" in (f.source, f.target) for f in flat.flows)

    def test_flatten_rejects_mismatch(self):
        sub = FlowModel(name="leer")
        m = FlowModel(
            stores=(InformationStore("Kunde", LIQUID),),
            activities=(Activity("Analyse", sub_model=sub),),
            flows=(Flow("f1", "Kunde", "Analyse", LIQUID),),
        )
        with pytest.raises(ValueError):
            flatten(m)


class TestConstruction:
    def test_bad_identifier_rejected(self):
        with pytest.raises(ValueError):
            InformationStore("has space", LIQUID)
        with pytest.raises(ValueError):
            InformationStore("", LIQUID)

    def test_negative_intensity_rejected(self):
        with pytest.raises(ValueError):
            Flow("f1", "a", "b", LIQUID, intensity=-1.0)

    def test_store_name_defaults_to_id(self):
        assert InformationStore("Kunde", LIQUID).name == "Kunde"

    def test_immutability(self):
        store = InformationStore("Kunde", LIQUID)
        with pytest.raises(AttributeError):
            store.state = SOLID


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_generated_models_are_valid(seed):
    m = random_model(random.Random(seed))
    assert validate(m) == ()


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_generated_store_flows_match_store_state(seed):
    m = random_model(random.Random(seed))
    stores = m.store_map()
    for f in m.flows:
        if f.source in stores:
            assert f.state is stores[f.source].state
