"""Graphviz DOT export.

Rendering conventions (the diagram notation has no canonical Graphviz
counterpart, so these are fixed here and documented in the README):

* solid stores use the note shape, liquid stores an ellipse, undefined
  stores an ellipse with a ``?`` suffix in the label,
* multiple-instance stores get doubled peripheries,
* liquid flows are dashed, undefined flows dotted (an approximation of the
  dash-dot line), solid flows plain,
* experience stores and flows are gray,
* null flows carry a tee arrowhead,
* activities are boxes; steering flows dock at the top, supporting flows
  at the bottom.
"""

from __future__ import annotations

from .model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    Multiplicity,
    Severity,
    validate,
)
from .dsl import flow_sort_key


def export_dot(model: FlowModel, show_content: bool = True) -> str:
    """Render a valid model as a deterministic DOT digraph."""
    problems = [v for v in validate(model) if v.severity is Severity.ERROR]
    if problems:
        raise ValueError(
            "cannot export an invalid model: " + "; ".join(str(v) for v in problems)
        )
    lines = [f"digraph {_dot_id(model.name or 'flow')} {{", "  rankdir=LR;"]
    _write_body(model, lines, indent="  ", prefix="", show_content=show_content)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _write_body(
    model: FlowModel, lines: list[str], indent: str, prefix: str, show_content: bool
) -> None:
    by_site: dict[str, list[str]] = {}
    for store in sorted(model.stores, key=lambda s: s.id):
        line = indent + _store_line(store, prefix)
        if store.site is not None:
            by_site.setdefault(store.site, []).append(line.replace(indent, indent + "  ", 1))
        else:
            lines.append(line)
    for activity in sorted(model.activities, key=lambda a: a.id):
        if activity.sub_model is not None:
            lines.append(
                indent
                + f"subgraph cluster_{_dot_id(prefix + activity.id)} {{ "
                + f'label="{_escape(activity.name)}";'
            )
            _write_body(
                activity.sub_model,
                lines,
                indent + "  ",
                prefix + activity.id + ".",
                show_content,
            )
            lines.append(indent + "}")
        else:
            line = indent + _activity_line(activity, prefix)
            if activity.site is not None:
                by_site.setdefault(activity.site, []).append(
                    line.replace(indent, indent + "  ", 1)
                )
            else:
                lines.append(line)
    for site in sorted(model.sites, key=lambda s: s.id):
        lines.append(
            indent
            + f"subgraph cluster_{_dot_id(prefix + site.id)} {{ "
            + f'label="{_escape(site.label)}";'
        )
        lines.extend(by_site.get(site.id, []))
        lines.append(indent + "}")
    activity_ids = {a.id for a in model.activities}
    for flow in sorted(model.flows, key=flow_sort_key):
        lines.append(indent + _flow_line(flow, prefix, show_content, activity_ids))


def _store_line(store: InformationStore, prefix: str) -> str:
    label = store.name
    if store.state is AggregateState.UNDEFINED:
        label += " ?"
    attrs = {
        "label": _escape(label),
        "shape": "note" if store.state is AggregateState.SOLID else "ellipse",
    }
    if store.multiplicity is Multiplicity.MULTIPLE:
        attrs["peripheries"] = "2"
    if store.is_experience:
        attrs["color"] = "gray"
        attrs["fontcolor"] = "gray"
    return f"{_dot_id(prefix + store.id)} [{_format_attrs(attrs)}];"


def _activity_line(activity: Activity, prefix: str) -> str:
    attrs = {"label": _escape(activity.name), "shape": "box"}
    return f"{_dot_id(prefix + activity.id)} [{_format_attrs(attrs)}];"


def _flow_line(
    flow: Flow, prefix: str, show_content: bool, activity_ids: set[str]
) -> str:
    attrs: dict[str, str] = {}
    if flow.state is AggregateState.LIQUID:
        attrs["style"] = "dashed"
    elif flow.state is AggregateState.UNDEFINED:
        attrs["style"] = "dotted"
    if flow.is_experience:
        attrs["color"] = "gray"
        attrs["fontcolor"] = "gray"
    label_parts = []
    if show_content and flow.content:
        label_parts.append(flow.content)
    if flow.is_null_flow:
        attrs["arrowhead"] = "tee"
        label_parts.append("(null)")
    if flow.intensity is not None:
        label_parts.append(f"{flow.intensity:g} min")
        if flow.intensity >= 60:
            attrs["penwidth"] = "3"
        elif flow.intensity >= 15:
            attrs["penwidth"] = "2"
    if label_parts:
        attrs["label"] = _escape(" ".join(label_parts))
    if not flow.directed:
        attrs["dir"] = "none"
    if flow.attachment is not Attachment.CONTENT:
        port = "n" if flow.attachment is Attachment.CONTROL else "s"
        if flow.target in activity_ids:
            attrs["headport"] = port
        if flow.source in activity_ids:
            attrs["tailport"] = port
    rendered = f" [{_format_attrs(attrs)}]" if attrs else ""
    return f"{_dot_id(prefix + flow.source)} -> {_dot_id(prefix + flow.target)}{rendered};"


def _format_attrs(attrs: dict[str, str]) -> str:
    return ", ".join(
        f'{k}="{v}"' if k in ("label",) else f"{k}={v}"
        for k, v in sorted(attrs.items())
    )


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_id(raw: str) -> str:
    safe = "".join(c if c.isalnum() or c == "_" else "_" for c in raw)
    if not safe or safe[0].isdigit():
        safe = "n_" + safe
    return safe
