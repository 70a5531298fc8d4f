"""Picking analysis techniques that fit a goal and a project.

A goal is a triple: what you want (understand or improve), when you
look (before, during, or after the work), and at which scope
(activity, project, organization).  Looking back at a whole
organization is the one combination that makes no sense, and GoalSpec
refuses to build it.  Techniques declare which goals they serve and
which project contexts they accept; select_techniques intersects.
"""

from flowkit.goals import (
    Distribution,
    GoalSpec,
    Intent,
    ProjectParams,
    Scope,
    TimeAspect,
    builtin_catalog,
    required_phases,
    select_techniques,
)

goal = GoalSpec(Intent.IMPROVE, TimeAspect.DURING, Scope.PROJECT)
print("goal:", " / ".join(part.value for part in goal.triple))
print("phases any fitting tool chain must cover:",
      sorted(p.value for p in required_phases(goal.intent)))

# A small co-located team with almost no budget for interviews.
params = ProjectParams(team_size=6, distribution=Distribution.LOCAL)
rows = select_techniques(goal, params, builtin_catalog())
print()
for row in rows:
    covered = ", ".join(sorted(p.value for p in row.coverage))
    print(f"  {row.technique.name}: covers {covered or 'nothing required'}")
print("jointly sufficient:", rows[0].complete if rows else False)

# The impossible cell of the goal cube.
try:
    GoalSpec(Intent.UNDERSTAND, TimeAspect.AFTER, Scope.ORGANIZATION)
except ValueError as exc:
    print()
    print("rejected:", exc)
