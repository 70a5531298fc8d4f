"""Soll/Ist map comparison and model metrics."""

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from flowkit.analysis import (
    Deviation,
    DeviationKind,
    DeviationReport,
    ModelMetrics,
    diff_maps,
    metrics,
)
from flowkit.model import (
    Activity,
    Flow,
    FlowModel,
    InformationStore,
    ModelKind,
    is_valid,
)

from fixtures import LIQUID, SOLID, UNDEFINED, showcase_model


def soll_map(flows, stores=("Alice", "Bob", "Carol"), **kw):
    return FlowModel(
        kind=ModelKind.SOLL,
        is_map=True,
        stores=tuple(InformationStore(s, LIQUID) for s in stores),
        flows=tuple(flows),
        **kw,
    )


def ist_map(flows, stores=("Alice", "Bob", "Carol"), **kw):
    return FlowModel(
        kind=ModelKind.IST,
        is_map=True,
        stores=tuple(InformationStore(s, LIQUID) for s in stores),
        flows=tuple(flows),
        **kw,
    )


def talk(fid, a, b, minutes=None, directed=False):
    return Flow(fid, a, b, LIQUID, directed=directed, intensity=minutes)


# --- diff_maps --------------------------------------------------------------


def test_identical_maps_are_clean():
    m = soll_map([talk("f1", "Alice", "Bob", 3)])
    report = diff_maps(m, replace(m, kind=ModelKind.IST))
    assert report.deviations == ()


def test_missing_planned_flow():
    soll = soll_map([talk("f1", "Alice", "Bob", 3)])
    report = diff_maps(soll, ist_map([]))
    (dev,) = report.deviations
    assert dev.kind is DeviationKind.MISSING_FLOW
    assert dev.subject == ("Alice", "Bob")
    assert report.missing_flows == (dev,)
    assert report.unplanned_flows == ()


def test_unplanned_observed_flow():
    report = diff_maps(soll_map([]), ist_map([talk("f1", "Bob", "Carol", 10)]))
    (dev,) = report.deviations
    assert dev.kind is DeviationKind.UNPLANNED_FLOW
    assert dev.subject == ("Bob", "Carol")


def test_intensity_deviation_respects_tolerance():
    soll = soll_map([talk("f1", "Alice", "Bob", 30)])
    ist = ist_map([talk("f1", "Alice", "Bob", 45)])
    strict = diff_maps(soll, ist, intensity_rel=0.25)
    (dev,) = strict.deviations
    assert dev.kind is DeviationKind.INTENSITY_DEVIATION
    assert (dev.planned, dev.actual) == (30, 45)
    assert "planned 30" in str(dev)
    lax = diff_maps(soll, ist, intensity_rel=0.5)
    assert lax.deviations == ()


def test_undirected_plan_matches_either_direction():
    soll = soll_map([talk("f1", "Alice", "Bob")])
    observed = ist_map([talk("f1", "Bob", "Alice", directed=True)])
    assert diff_maps(soll, observed).deviations == ()


def test_directed_flows_must_agree_on_direction():
    soll = soll_map([talk("f1", "Alice", "Bob", directed=True)])
    observed = ist_map([talk("f1", "Bob", "Alice", directed=True)])
    report = diff_maps(soll, observed)
    assert [d.kind for d in report.deviations] == [
        DeviationKind.MISSING_FLOW,
        DeviationKind.UNPLANNED_FLOW,
    ]


def test_names_are_normalized_for_matching():
    soll = FlowModel(
        kind=ModelKind.SOLL,
        is_map=True,
        stores=(
            InformationStore("a1", LIQUID, name="Alice"),
            InformationStore("b1", LIQUID, name="Bob  Maier"),
        ),
        flows=(Flow("f1", "a1", "b1", LIQUID, directed=False),),
    )
    ist = FlowModel(
        kind=ModelKind.IST,
        is_map=True,
        stores=(
            InformationStore("p9", LIQUID, name="  alice"),
            InformationStore("q9", LIQUID, name="bob maier "),
        ),
        flows=(Flow("z1", "p9", "q9", LIQUID, directed=False),),
    )
    assert diff_maps(soll, ist).deviations == ()


def test_participant_differences_are_listed_separately():
    soll = soll_map([], stores=("Alice", "Bob", "Carol"))
    ist = ist_map([], stores=("Alice", "Bob", "Dave"))
    report = diff_maps(soll, ist)
    assert [d.subject for d in report.missing_stores] == [("Carol",)]
    assert [d.subject for d in report.extra_stores] == [("Dave",)]


def test_duplicate_flows_match_one_to_one():
    soll = soll_map([talk("f1", "Alice", "Bob"), talk("f2", "Alice", "Bob")])
    observed = ist_map([talk("f1", "Alice", "Bob")])
    report = diff_maps(soll, observed)
    assert [d.kind for d in report.deviations] == [DeviationKind.MISSING_FLOW]


def test_conference_nodes_compare_by_name():
    soll = FlowModel(
        kind=ModelKind.SOLL,
        is_map=True,
        stores=(InformationStore("Alice", LIQUID),),
        activities=(Activity("k1", name="Standup"),),
        flows=(Flow("f1", "Alice", "k1", LIQUID, directed=False),),
    )
    ist = FlowModel(
        kind=ModelKind.IST,
        is_map=True,
        stores=(InformationStore("Alice", LIQUID),),
        activities=(Activity("konferenz-7", name="Standup"),),
        flows=(Flow("e1", "Alice", "konferenz-7", LIQUID, directed=False),),
    )
    assert diff_maps(soll, ist).deviations == ()


def test_missing_intensity_is_not_compared():
    soll = soll_map([talk("f1", "Alice", "Bob", 30)])
    observed = ist_map([talk("f1", "Alice", "Bob")])
    assert diff_maps(soll, observed).deviations == ()


def test_kind_checks():
    plain = soll_map([])
    observed = ist_map([])
    with pytest.raises(ValueError, match="must be planned"):
        diff_maps(observed, observed)
    with pytest.raises(ValueError, match="must be observed"):
        diff_maps(plain, plain)
    with pytest.raises(ValueError, match="non-negative"):
        diff_maps(plain, observed, intensity_rel=-0.1)


def random_map(rng, kind):
    people = ["Alice", "Bob", "Carol", "Dave"][: rng.randint(1, 4)]
    flows = []
    for i in range(rng.randint(0, 5)):
        if len(people) < 2:
            break
        a, b = rng.sample(people, 2)
        flows.append(
            Flow(
                f"f{i}",
                a,
                b,
                LIQUID,
                directed=rng.random() < 0.3,
                intensity=rng.choice([None, 5, 30, 90]),
            )
        )
    return FlowModel(
        kind=kind,
        is_map=True,
        stores=tuple(InformationStore(p, LIQUID) for p in people),
        flows=tuple(flows),
    )


@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=0, max_value=100_000))
def test_map_diffed_against_itself_is_clean(seed):
    rng = random.Random(seed)
    soll = random_map(rng, ModelKind.SOLL)
    assert is_valid(soll)
    report = diff_maps(soll, replace(soll, kind=ModelKind.IST))
    assert report.deviations == ()


def test_report_filters_cover_all_kinds():
    soll = soll_map(
        [talk("f1", "Alice", "Bob", 30), talk("f2", "Alice", "Carol", 10)],
        stores=("Alice", "Bob", "Carol", "Erna"),
    )
    ist = ist_map(
        [talk("e1", "Alice", "Bob", 90), talk("e2", "Bob", "Carol", 5)],
        stores=("Alice", "Bob", "Carol", "Dave"),
    )
    report = diff_maps(soll, ist, intensity_rel=0.25)
    kinds = [d.kind for d in report.deviations]
    assert kinds == [
        DeviationKind.MISSING_FLOW,
        DeviationKind.UNPLANNED_FLOW,
        DeviationKind.INTENSITY_DEVIATION,
        DeviationKind.MISSING_STORE,
        DeviationKind.EXTRA_STORE,
    ]
    assert len(report.of_kind(DeviationKind.MISSING_FLOW)) == 1
    assert str(report.deviations[0]).startswith("missing-flow: Alice / Carol")


# --- metrics ----------------------------------------------------------------


def test_solidity_ratio():
    m = FlowModel(
        stores=(
            InformationStore("Quelle", SOLID),
            InformationStore("Person", LIQUID),
            InformationStore("Ziel", SOLID),
        ),
        flows=(
            Flow("f1", "Quelle", "Ziel", SOLID),
            Flow("f2", "Quelle", "Ziel", SOLID),
            Flow("f3", "Quelle", "Ziel", SOLID),
            Flow("f4", "Person", "Ziel", LIQUID),
        ),
    )
    got = metrics(m)
    assert got.solidity_ratio == 0.75
    assert got.flow_count == 4
    assert got.store_count == 3
    assert got.undefined_count == 0


def test_undefined_flows_do_not_skew_the_ratio():
    m = FlowModel(
        stores=(
            InformationStore("Nebel", UNDEFINED),
            InformationStore("Ziel", LIQUID),
        ),
        flows=(
            Flow("f1", "Nebel", "Ziel", UNDEFINED),
            Flow("f2", "Nebel", "Ziel", UNDEFINED),
        ),
    )
    got = metrics(m)
    assert got.solidity_ratio is None
    assert got.undefined_count == got.flow_count == 2


def test_empty_model_metrics():
    got = metrics(FlowModel())
    assert got == ModelMetrics(
        flow_count=0,
        store_count=0,
        activity_count=0,
        undefined_count=0,
        solidity_ratio=None,
        experience_share=None,
    )


def test_experience_share():
    got = metrics(showcase_model())
    # f2 and f8 of nine flows carry experience
    assert got.experience_share == pytest.approx(2 / 9)
    assert got.activity_count == 1
    assert got.store_count == 8
    assert got.undefined_count == 1
