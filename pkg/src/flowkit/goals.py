"""Goal-driven selection of improvement techniques.

An improvement effort is framed by a goal triple: what it wants
(understand or improve), when it runs relative to the examined work
(before, during, after), and how wide it looks (activity, project,
organization).  Techniques declare the triples they serve, the phases
of the improvement cycle they support, and the project contexts they
were built for.  select_techniques filters a catalog against a goal
and the project parameters and reports whether the matching
techniques, taken together, cover every phase the goal demands.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple


class Intent(str, Enum):
    UNDERSTAND = "understand"
    IMPROVE = "improve"


class TimeAspect(str, Enum):
    BEFORE = "before"
    DURING = "during"
    AFTER = "after"


class Scope(str, Enum):
    ACTIVITY = "activity"
    PROJECT = "project"
    ORGANIZATION = "organization"


class Phase(str, Enum):
    ELICIT = "elicit"
    ANALYZE = "analyze"
    IMPROVE = "improve"


class ProcessStyle(str, Enum):
    AGILE = "agile"
    PROCESS_DRIVEN = "process-driven"
    ANY = "any"


class Distribution(str, Enum):
    LOCAL = "local"
    DISTRIBUTED_VERTICAL = "distributed-vertical"
    DISTRIBUTED_HORIZONTAL = "distributed-horizontal"
    DISTRIBUTED_OTHER = "distributed-other"


GoalTriple = tuple[Intent, TimeAspect, Scope]

ALL_PHASES = frozenset(Phase)


def is_constructible(intent: Intent, time: TimeAspect, scope: Scope) -> bool:
    """True for every goal triple except the one excluded corner."""
    del intent
    return not (time is TimeAspect.AFTER and scope is Scope.ORGANIZATION)


@dataclass(frozen=True)
class GoalSpec:
    """A validated improvement goal."""

    intent: Intent
    time: TimeAspect
    scope: Scope

    def __post_init__(self) -> None:
        if not is_constructible(self.intent, self.time, self.scope):
            raise ValueError(
                "invalid goal: time 'after' cannot be combined with"
                " scope 'organization'"
            )

    @property
    def triple(self) -> GoalTriple:
        return (self.intent, self.time, self.scope)


def required_phases(intent: Intent) -> frozenset[Phase]:
    """Phases an effort with this intent should pass through."""
    if intent is Intent.IMPROVE:
        return ALL_PHASES
    return frozenset({Phase.ELICIT, Phase.ANALYZE})


@dataclass(frozen=True)
class ProjectParams:
    """Context of the project (or activity, or organization) under study.

    Unset fields mean the value is unknown; unknown never satisfies a
    constraint a technique places on that field.
    """

    team_size: int | None = None
    budget: str | None = None
    domain: str | None = None
    process_style: ProcessStyle = ProcessStyle.ANY
    process_model: str | None = None
    distribution: Distribution | None = None
    misc: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.team_size is not None and self.team_size <= 0:
            raise ValueError("team_size must be positive")


def _fold(values: Iterable[str]) -> frozenset[str]:
    return frozenset(v.casefold() for v in values)


@dataclass(frozen=True)
class TechConstraints:
    """Context a technique was built for.

    None leaves a field unconstrained.  Text values match
    case-insensitively.
    """

    min_team_size: int | None = None
    max_team_size: int | None = None
    budgets: frozenset[str] | None = None
    domains: frozenset[str] | None = None
    process_styles: frozenset[ProcessStyle] | None = None
    process_models: frozenset[str] | None = None
    distributions: frozenset[Distribution] | None = None
    required_misc: frozenset[str] | None = None

    def accepts(self, params: ProjectParams) -> bool:
        if self.min_team_size is not None:
            if params.team_size is None or params.team_size < self.min_team_size:
                return False
        if self.max_team_size is not None:
            if params.team_size is None or params.team_size > self.max_team_size:
                return False
        if self.budgets is not None:
            if params.budget is None or params.budget.casefold() not in _fold(self.budgets):
                return False
        if self.domains is not None:
            if params.domain is None or params.domain.casefold() not in _fold(self.domains):
                return False
        if self.process_styles is not None:
            if params.process_style is ProcessStyle.ANY:
                return False
            if params.process_style not in self.process_styles:
                return False
        if self.process_models is not None:
            if params.process_model is None:
                return False
            if params.process_model.casefold() not in _fold(self.process_models):
                return False
        if self.distributions is not None:
            if params.distribution is None or params.distribution not in self.distributions:
                return False
        if self.required_misc is not None:
            if not _fold(self.required_misc) <= _fold(params.misc):
                return False
        return True


UNCONSTRAINED = TechConstraints()


@dataclass(frozen=True)
class TechniqueProfile:
    """Classification of one technique for catalog matching."""

    name: str
    phases: frozenset[Phase]
    goals: frozenset[GoalTriple]
    params: TechConstraints = UNCONSTRAINED
    strategy_tags: frozenset[str] = frozenset()
    verfahren_tags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValueError(f"technique {self.name!r} covers no phase")
        if not self.goals:
            raise ValueError(f"technique {self.name!r} supports no goal")


class Selection(NamedTuple):
    technique: TechniqueProfile
    coverage: frozenset[Phase]
    complete: bool


def select_techniques(
    goal: GoalSpec,
    params: ProjectParams,
    catalog: Iterable[TechniqueProfile],
) -> list[Selection]:
    """Techniques fitting the goal and context, in catalog order.

    Each row's coverage is the part of the required phases that
    technique supports; `complete` (the same for every row) tells
    whether the returned techniques jointly cover all required phases.
    """
    needed = required_phases(goal.intent)
    fitting = [
        t for t in catalog if goal.triple in t.goals and t.params.accepts(params)
    ]
    covered: frozenset[Phase] = frozenset()
    for t in fitting:
        covered |= t.phases
    complete = needed <= covered
    return [Selection(t, t.phases & needed, complete) for t in fitting]


def _goal_cross(
    intents: Iterable[Intent],
    times: Iterable[TimeAspect],
    scopes: Iterable[Scope],
) -> frozenset[GoalTriple]:
    return frozenset(
        (i, t, s)
        for i in intents
        for t in times
        for s in scopes
        if is_constructible(i, t, s)
    )


def builtin_catalog() -> tuple[TechniqueProfile, ...]:
    """The eleven stock techniques with their published classifications."""
    both = (Intent.UNDERSTAND, Intent.IMPROVE)
    return (
        TechniqueProfile(
            name="Elicitation",
            phases=frozenset({Phase.ELICIT}),
            goals=_goal_cross(both, (TimeAspect.DURING, TimeAspect.AFTER), tuple(Scope)),
            strategy_tags=frozenset({"bottom-up"}),
            verfahren_tags=frozenset({"interview"}),
        ),
        TechniqueProfile(
            name="Process Model Derivation",
            phases=frozenset({Phase.ELICIT, Phase.ANALYZE}),
            goals=_goal_cross(
                both, (TimeAspect.BEFORE,), (Scope.PROJECT, Scope.ORGANIZATION)
            ),
            strategy_tags=frozenset({"top-down"}),
            verfahren_tags=frozenset({"model-derivation"}),
        ),
        TechniqueProfile(
            name="Simulation",
            phases=frozenset({Phase.ELICIT, Phase.ANALYZE}),
            goals=_goal_cross(
                (Intent.UNDERSTAND,), (TimeAspect.DURING,), (Scope.PROJECT,)
            ),
            verfahren_tags=frozenset({"simulation"}),
        ),
        TechniqueProfile(
            name="FLOW-Mapping",
            phases=ALL_PHASES,
            goals=_goal_cross(both, (TimeAspect.DURING,), (Scope.PROJECT,)),
            strategy_tags=frozenset(
                {"bottom-up", "manual-analysis", "semi-automatic-analysis", "main-product"}
            ),
            verfahren_tags=frozenset(
                {
                    "communication-event-derivation",
                    "visualization",
                    "shortcut",
                    "activity-adaptation",
                }
            ),
        ),
        TechniqueProfile(
            name="Interface Variation",
            phases=ALL_PHASES,
            goals=_goal_cross(
                (Intent.IMPROVE,), (TimeAspect.BEFORE,), (Scope.ACTIVITY,)
            ),
            strategy_tags=frozenset({"manual-analysis", "main-product"}),
            verfahren_tags=frozenset({"visualization", "interface-adaptation"}),
        ),
        TechniqueProfile(
            name="SCRUM Integration",
            phases=ALL_PHASES,
            goals=_goal_cross(
                (Intent.IMPROVE,),
                (TimeAspect.BEFORE, TimeAspect.DURING),
                (Scope.PROJECT,),
            ),
            params=TechConstraints(
                process_models=frozenset({"SCRUM", "V-Modell XT"}),
                distributions=frozenset({Distribution.LOCAL}),
            ),
            strategy_tags=frozenset(
                {
                    "bottom-up",
                    "top-down",
                    "manual-analysis",
                    "semi-automatic-analysis",
                    "automatic-analysis",
                    "heavyweight",
                }
            ),
            verfahren_tags=frozenset(
                {
                    "model-derivation",
                    "visualization",
                    "pattern-search",
                    "liquefy",
                    "shortcut",
                    "consolidate",
                    "activity-adaptation",
                }
            ),
        ),
        TechniqueProfile(
            name="FLOW Patterns",
            phases=frozenset({Phase.ANALYZE, Phase.IMPROVE}),
            goals=_goal_cross(both, (TimeAspect.DURING,), (Scope.PROJECT,)),
            strategy_tags=frozenset({"manual-analysis", "pattern-dependent"}),
            verfahren_tags=frozenset(
                {"visualization", "pattern-search", "pattern-dependent"}
            ),
        ),
        TechniqueProfile(
            name="Experience Solidification",
            phases=frozenset({Phase.IMPROVE}),
            goals=_goal_cross(
                (Intent.IMPROVE,), (TimeAspect.DURING,), (Scope.ORGANIZATION,)
            ),
            strategy_tags=frozenset({"lightweight"}),
            verfahren_tags=frozenset({"solidify"}),
        ),
        TechniqueProfile(
            name="Fast Requirements Solidification",
            phases=frozenset({Phase.IMPROVE}),
            goals=_goal_cross(
                (Intent.IMPROVE,), (TimeAspect.DURING,), (Scope.ACTIVITY,)
            ),
            strategy_tags=frozenset({"by-product", "lightweight"}),
            verfahren_tags=frozenset({"solidify"}),
        ),
        TechniqueProfile(
            name="Prototype Demo Solidification",
            phases=frozenset({Phase.IMPROVE}),
            goals=_goal_cross(
                (Intent.IMPROVE,), (TimeAspect.DURING,), (Scope.ACTIVITY,)
            ),
            strategy_tags=frozenset({"by-product", "lightweight"}),
            verfahren_tags=frozenset({"solidify"}),
        ),
        TechniqueProfile(
            name="By-Product Solidification",
            phases=frozenset({Phase.IMPROVE}),
            goals=_goal_cross(
                (Intent.IMPROVE,), (TimeAspect.DURING,), (Scope.ACTIVITY,)
            ),
            strategy_tags=frozenset({"by-product", "lightweight"}),
            verfahren_tags=frozenset({"solidify", "branch"}),
        ),
    )


def catalog_from_json(text: str) -> tuple[TechniqueProfile, ...]:
    """Parse a technique catalog from JSON.

    Expected shape: a list of objects with `name`, `phases`, `goals`
    and optional `constraints`, `strategy_tags`, `verfahren_tags`.
    `goals` is either a list of [intent, time, scope] triples or an
    object {"intents": [...], "times": [...], "scopes": [...]} whose
    cross product is taken.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ValueError("catalog must be a JSON list of technique objects")
    profiles = []
    for index, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ValueError(f"catalog entry {index} is not an object")
        try:
            profiles.append(_profile_from_obj(entry))
        except (KeyError, TypeError, ValueError) as exc:
            name = entry.get("name", index) if isinstance(entry, dict) else index
            raise ValueError(f"catalog entry {name!r}: {exc}") from exc
    return tuple(profiles)


def _profile_from_obj(obj: dict) -> TechniqueProfile:
    goals = obj["goals"]
    if isinstance(goals, dict):
        triples = _goal_cross(
            tuple(Intent(i) for i in goals["intents"]),
            tuple(TimeAspect(t) for t in goals["times"]),
            tuple(Scope(s) for s in goals["scopes"]),
        )
    else:
        triples = frozenset(
            (Intent(i), TimeAspect(t), Scope(s)) for i, t, s in goals
        )
    raw = obj.get("constraints", {})
    constraints = TechConstraints(
        min_team_size=raw.get("min_team_size"),
        max_team_size=raw.get("max_team_size"),
        budgets=_opt_set(raw.get("budgets")),
        domains=_opt_set(raw.get("domains")),
        process_styles=_opt_set(raw.get("process_styles"), ProcessStyle),
        process_models=_opt_set(raw.get("process_models")),
        distributions=_opt_set(raw.get("distributions"), Distribution),
        required_misc=_opt_set(raw.get("required_misc")),
    )
    return TechniqueProfile(
        name=obj["name"],
        phases=frozenset(Phase(p) for p in obj["phases"]),
        goals=triples,
        params=constraints,
        strategy_tags=frozenset(obj.get("strategy_tags", ())),
        verfahren_tags=frozenset(obj.get("verfahren_tags", ())),
    )


def _opt_set(values, enum=None):
    if values is None:
        return None
    if enum is None:
        return frozenset(values)
    return frozenset(enum(v) for v in values)
