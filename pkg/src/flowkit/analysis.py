"""Comparing planned against observed maps, and model statistics.

diff_maps matches elements of the two maps by normalized display name,
so the planned "Alice" and the observed " alice " are the same
participant.  A flow pair matches orientation-free as soon as either
side is undirected; two directed flows must agree on direction.
Duplicate flows between the same endpoints are matched one to one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .merge import normalize_name
from .model import AggregateState, FlowModel, ModelKind


class DeviationKind(str, enum.Enum):
    MISSING_FLOW = "missing-flow"
    UNPLANNED_FLOW = "unplanned-flow"
    INTENSITY_DEVIATION = "intensity-deviation"
    MISSING_STORE = "missing-store"
    EXTRA_STORE = "extra-store"
    # produced by schedule conformance checks, never by diff_maps
    MISSED_OCCURRENCE = "missed-occurrence"
    UNVERIFIABLE = "unverifiable"


@dataclass(frozen=True)
class Deviation:
    kind: DeviationKind
    subject: tuple[str, ...]
    planned: Optional[float] = None
    actual: Optional[float] = None

    def __str__(self) -> str:
        text = f"{self.kind.value}: {' / '.join(self.subject)}"
        if self.planned is not None or self.actual is not None:
            text += f" (planned {self.planned}, observed {self.actual})"
        return text


@dataclass(frozen=True)
class DeviationReport:
    deviations: tuple[Deviation, ...]

    def of_kind(self, kind: DeviationKind) -> tuple[Deviation, ...]:
        return tuple(d for d in self.deviations if d.kind is kind)

    @property
    def missing_flows(self) -> tuple[Deviation, ...]:
        return self.of_kind(DeviationKind.MISSING_FLOW)

    @property
    def unplanned_flows(self) -> tuple[Deviation, ...]:
        return self.of_kind(DeviationKind.UNPLANNED_FLOW)

    @property
    def intensity_deviations(self) -> tuple[Deviation, ...]:
        return self.of_kind(DeviationKind.INTENSITY_DEVIATION)

    @property
    def missing_stores(self) -> tuple[Deviation, ...]:
        return self.of_kind(DeviationKind.MISSING_STORE)

    @property
    def extra_stores(self) -> tuple[Deviation, ...]:
        return self.of_kind(DeviationKind.EXTRA_STORE)


def diff_maps(
    soll: FlowModel, ist: FlowModel, *, intensity_rel: float = 0.0
) -> DeviationReport:
    """What the observed map does differently from the planned one.

    Planned flows without an observed counterpart are missing, observed
    flows without a planned one are unplanned, and a matched pair whose
    intensities differ relatively by more than intensity_rel deviates.
    A pair missing an intensity on either side is not compared.
    Participants present on only one side are reported separately.
    """
    if soll.kind is not ModelKind.SOLL:
        raise ValueError(
            f"left model must be planned (soll), got {soll.kind.value!r}"
        )
    if ist.kind is not ModelKind.IST:
        raise ValueError(
            f"right model must be observed (ist), got {ist.kind.value!r}"
        )
    if intensity_rel < 0:
        raise ValueError("intensity_rel must be non-negative")

    soll_names = _display_names(soll)
    ist_names = _display_names(ist)
    planned = _keyed_flows(soll)
    observed = _keyed_flows(ist)

    matched: list[tuple[_KeyedFlow, _KeyedFlow]] = []
    free = list(observed)
    out: list[Deviation] = []
    for pf in planned:
        partner = next((of for of in free if _compatible(pf, of)), None)
        if partner is None:
            out.append(Deviation(DeviationKind.MISSING_FLOW, pf.display))
        else:
            free.remove(partner)
            matched.append((pf, partner))
    for of in free:
        out.append(Deviation(DeviationKind.UNPLANNED_FLOW, of.display))
    for pf, of in matched:
        if pf.intensity is None or of.intensity is None:
            continue
        if abs(of.intensity - pf.intensity) > intensity_rel * abs(pf.intensity):
            out.append(
                Deviation(
                    DeviationKind.INTENSITY_DEVIATION,
                    pf.display,
                    planned=pf.intensity,
                    actual=of.intensity,
                )
            )
    for key in sorted(soll_names.keys() - ist_names.keys()):
        out.append(Deviation(DeviationKind.MISSING_STORE, (soll_names[key],)))
    for key in sorted(ist_names.keys() - soll_names.keys()):
        out.append(Deviation(DeviationKind.EXTRA_STORE, (ist_names[key],)))
    return DeviationReport(tuple(out))


@dataclass(frozen=True)
class _KeyedFlow:
    a: str
    b: str
    directed: bool
    intensity: Optional[float]
    display: tuple[str, str]


def _display_names(m: FlowModel) -> dict[str, str]:
    # participants only; conference activities are flow endpoints, not
    # participants, so they are excluded from the store-level diff
    return {normalize_name(s.name): s.name for s in m.stores}


def _keyed_flows(m: FlowModel) -> list[_KeyedFlow]:
    label = {s.id: s.name for s in m.stores}
    label.update({a.id: a.name for a in m.activities})
    keyed = []
    for f in m.flows:
        a, b = normalize_name(label[f.source]), normalize_name(label[f.target])
        keyed.append(
            _KeyedFlow(a, b, f.directed, f.intensity, (label[f.source], label[f.target]))
        )
    keyed.sort(key=lambda k: (min(k.a, k.b), max(k.a, k.b), k.directed))
    return keyed


def _compatible(x: _KeyedFlow, y: _KeyedFlow) -> bool:
    if x.directed and y.directed:
        return (x.a, x.b) == (y.a, y.b)
    return {x.a, x.b} == {y.a, y.b}


@dataclass(frozen=True)
class ModelMetrics:
    flow_count: int
    store_count: int
    activity_count: int
    undefined_count: int
    solidity_ratio: Optional[float]
    experience_share: Optional[float]


def metrics(m: FlowModel) -> ModelMetrics:
    """Counts and ratios over the model's top level.

    solidity_ratio is solid flows over solid plus liquid flows;
    undefined flows are counted separately and excluded from it.  Both
    ratios are None rather than zero when their denominator is empty.
    """
    flows = m.flows
    solid = sum(1 for f in flows if f.state is AggregateState.SOLID)
    liquid = sum(1 for f in flows if f.state is AggregateState.LIQUID)
    undefined = sum(1 for f in flows if f.state is AggregateState.UNDEFINED)
    experienced = sum(1 for f in flows if f.is_experience)
    known = solid + liquid
    return ModelMetrics(
        flow_count=len(flows),
        store_count=len(m.stores),
        activity_count=len(m.activities),
        undefined_count=undefined,
        solidity_ratio=solid / known if known else None,
        experience_share=experienced / len(flows) if flows else None,
    )
