"""Line-oriented text format for flow models.

The grammar, one statement per line, ``#`` starting a comment:

    model [<name>] [soll|ist] [map]
    site <id> "<label>"
    store <id> ["<label>"] [solid|liquid|undefined] [multi] [role]
          [experience] [@<site>]
    activity <id> ["<label>"] {
        ... nested stores, activities, flows ...
    }
    flow <src> -> <dst> ["<content>"] [solid|liquid|undefined] [experience]
         [null] [control|support] [intensity <real>]
    flow <a> -- <b> ...            # undirected, maps only

Identifiers are ``[A-Za-z0-9_.-]+``; labels and contents are quoted and may
not contain quotes or line breaks.  Documents are UTF-8 with LF newlines.
When a flow omits its state it takes the state of its source store; flows
leaving an activity default to liquid (spoken exchange) unless they feed a
store, in which case they take the receiving store's state.

Parsing is syntax only: unresolved ids and rule breaches are left to
``model.validate``.  Syntax errors do not abort at the first problem; up to
20 are collected before giving up.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional

from .model import (
    Activity,
    AggregateState,
    Attachment,
    Flow,
    FlowModel,
    InformationStore,
    ModelKind,
    Multiplicity,
    Severity,
    Site,
    SourceSpan,
    validate,
)

MAX_ERRORS = 20

_STATE_WORDS = {s.value: s for s in AggregateState}
_KIND_WORDS = {k.value: k for k in ModelKind}
_ATTACH_WORDS = {
    Attachment.CONTROL.value: Attachment.CONTROL,
    Attachment.SUPPORT.value: Attachment.SUPPORT,
}
_IDENT_RE = re.compile(r"[A-Za-z0-9_.\-]+")


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        where = f"{self.span.line}:{self.span.column}"
        if self.expected:
            return f"{where}: {self.message} (expected {', '.join(self.expected)})"
        return f"{where}: {self.message}"


class ParseFailure(ValueError):
    """Raised when a document contains syntax errors."""

    def __init__(self, errors: tuple[ParseError, ...]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, string, arrow, undirected, lbrace, rbrace, at
    text: str
    span: SourceSpan


def _tokenize_line(line: str, lineno: int, errors: list[ParseError]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            break
        col = i + 1
        if c == '"':
            end = line.find('"', i + 1)
            if end < 0:
                errors.append(
                    ParseError(
                        SourceSpan(lineno, col, n - i),
                        "unterminated string",
                        ('"',),
                    )
                )
                break
            tokens.append(
                _Token("string", line[i + 1 : end], SourceSpan(lineno, col, end - i + 1))
            )
            i = end + 1
            continue
        if line.startswith("->", i):
            tokens.append(_Token("arrow", "->", SourceSpan(lineno, col, 2)))
            i += 2
            continue
        if c == "{":
            tokens.append(_Token("lbrace", "{", SourceSpan(lineno, col, 1)))
            i += 1
            continue
        if c == "}":
            tokens.append(_Token("rbrace", "}", SourceSpan(lineno, col, 1)))
            i += 1
            continue
        if c == "@":
            tokens.append(_Token("at", "@", SourceSpan(lineno, col, 1)))
            i += 1
            continue
        m = _IDENT_RE.match(line, i)
        if m:
            text = m.group()
            # "--" after an identifier is the undirected-flow separator,
            # and a trailing "-" may belong to an "->" arrow.
            if text == "--":
                tokens.append(_Token("undirected", "--", SourceSpan(lineno, col, 2)))
                i = m.end()
                continue
            if text.endswith("-") and line.startswith(">", m.end()):
                text = text[:-1]
            if not text:
                errors.append(
                    ParseError(SourceSpan(lineno, col, 1), f"stray {c!r}")
                )
                i += 1
                continue
            tokens.append(
                _Token("ident", text, SourceSpan(lineno, col, len(text)))
            )
            i += len(text)
            continue
        errors.append(
            ParseError(SourceSpan(lineno, col, 1), f"unexpected character {c!r}")
        )
        i += 1
    return tokens


class _ModelBuilder:
    def __init__(self) -> None:
        self.name = ""
        self.kind = ModelKind.IST
        self.is_map = False
        self.sites: list[Site] = []
        self.stores: list[InformationStore] = []
        self.activities: list[Activity] = []
        self.flows: list[Flow] = []
        self.flow_count = 0

    def build(self) -> FlowModel:
        return FlowModel(
            name=self.name,
            kind=self.kind,
            is_map=self.is_map,
            sites=tuple(self.sites),
            stores=tuple(self.stores),
            activities=tuple(self.activities),
            flows=tuple(self.flows),
        )


class _Parser:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.errors: list[ParseError] = []

    def error(self, span: SourceSpan, message: str, expected: tuple[str, ...] = ()) -> None:
        self.errors.append(ParseError(span, message, expected))

    def _model_line(self, builder: _ModelBuilder, rest: list[_Token]) -> None:
        for tok in rest:
            if tok.kind != "ident":
                self.error(tok.span, "unexpected token on model line")
                return
            if tok.text in _KIND_WORDS:
                builder.kind = _KIND_WORDS[tok.text]
            elif tok.text == "map":
                builder.is_map = True
            elif not builder.name:
                builder.name = tok.text
            else:
                self.error(tok.span, f"unexpected {tok.text!r} on model line",
                           ("soll", "ist", "map"))
                return

    def _site_line(self, builder: _ModelBuilder, head: _Token, rest: list[_Token]) -> None:
        if not rest or rest[0].kind != "ident":
            self.error(head.span, "site needs an identifier", ("<id>",))
            return
        label = rest[0].text
        if len(rest) > 1 and rest[1].kind == "string":
            label = rest[1].text
            extra = rest[2:]
        else:
            extra = rest[1:]
        if extra:
            self.error(extra[0].span, "unexpected input after site label")
            return
        builder.sites.append(Site(rest[0].text, label, span=rest[0].span))

    def _store_line(self, builder: _ModelBuilder, head: _Token, rest: list[_Token]) -> None:
        if not rest or rest[0].kind != "ident":
            self.error(head.span, "store needs an identifier", ("<id>",))
            return
        store_id = rest[0].text
        span = rest[0].span
        name = store_id
        state = AggregateState.UNDEFINED
        multiplicity = Multiplicity.SINGLE
        is_experience = False
        is_role = False
        site: Optional[str] = None
        i = 1
        if i < len(rest) and rest[i].kind == "string":
            name = rest[i].text
            i += 1
        while i < len(rest):
            tok = rest[i]
            if tok.kind == "at":
                if i + 1 < len(rest) and rest[i + 1].kind == "ident":
                    site = rest[i + 1].text
                    i += 2
                    continue
                self.error(tok.span, "'@' needs a site identifier", ("<site>",))
                return
            if tok.kind != "ident":
                self.error(tok.span, "unexpected token on store line")
                return
            word = tok.text
            if word in _STATE_WORDS:
                state = _STATE_WORDS[word]
            elif word == "multi":
                multiplicity = Multiplicity.MULTIPLE
            elif word == "role":
                is_role = True
            elif word == "experience":
                is_experience = True
            else:
                self.error(
                    tok.span,
                    f"unknown store option {word!r}",
                    ("solid", "liquid", "undefined", "multi", "role", "experience", "@<site>"),
                )
                return
            i += 1
        builder.stores.append(
            InformationStore(
                store_id,
                state,
                name=name,
                multiplicity=multiplicity,
                is_experience=is_experience,
                is_role=is_role,
                site=site,
                span=span,
            )
        )

    def _activity_line(self, stack: list[_ModelBuilder], head: _Token, rest: list[_Token]) -> None:
        if not rest or rest[0].kind != "ident":
            self.error(head.span, "activity needs an identifier", ("<id>",))
            return
        activity_id = rest[0].text
        span = rest[0].span
        name = activity_id
        i = 1
        if i < len(rest) and rest[i].kind == "string":
            name = rest[i].text
            i += 1
        opens_block = i < len(rest) and rest[i].kind == "lbrace"
        if opens_block:
            i += 1
        if i < len(rest):
            self.error(rest[i].span, "unexpected input after activity header")
            return
        builder = stack[-1]
        if opens_block:
            child = _ModelBuilder()
            child.kind = builder.kind
            child.is_map = builder.is_map
            child.name = name
            stack.append(child)
            # The activity is completed when its block closes; record a
            # placeholder that the closing brace replaces.
            builder.activities.append(Activity(activity_id, name, span=span))
            child._parent_slot = (builder, len(builder.activities) - 1)  # type: ignore[attr-defined]
            child._activity = (activity_id, name, span)  # type: ignore[attr-defined]
        else:
            builder.activities.append(Activity(activity_id, name, span=span))

    def _flow_line(self, builder: _ModelBuilder, head: _Token, rest: list[_Token]) -> None:
        if (
            len(rest) < 3
            or rest[0].kind != "ident"
            or rest[1].kind not in ("arrow", "undirected")
            or rest[2].kind != "ident"
        ):
            self.error(
                head.span,
                "flow needs '<src> -> <dst>' or '<a> -- <b>'",
                ("<src> -> <dst>",),
            )
            return
        source = rest[0].text
        target = rest[2].text
        directed = rest[1].kind == "arrow"
        content: Optional[str] = None
        state: Optional[AggregateState] = None
        is_experience = False
        is_null = False
        attachment = Attachment.CONTENT
        intensity: Optional[float] = None
        i = 3
        if i < len(rest) and rest[i].kind == "string":
            content = rest[i].text
            i += 1
        while i < len(rest):
            tok = rest[i]
            if tok.kind != "ident":
                self.error(tok.span, "unexpected token on flow line")
                return
            word = tok.text
            if word in _STATE_WORDS:
                state = _STATE_WORDS[word]
            elif word == "experience":
                is_experience = True
            elif word == "null":
                is_null = True
            elif word in _ATTACH_WORDS:
                attachment = _ATTACH_WORDS[word]
            elif word == "intensity":
                if i + 1 >= len(rest) or rest[i + 1].kind != "ident":
                    self.error(tok.span, "intensity needs a number", ("<real>",))
                    return
                try:
                    intensity = float(rest[i + 1].text)
                except ValueError:
                    self.error(rest[i + 1].span, f"bad number {rest[i+1].text!r}")
                    return
                i += 1
            else:
                self.error(
                    tok.span,
                    f"unknown flow option {word!r}",
                    ("solid", "liquid", "undefined", "experience", "null",
                     "control", "support", "intensity <real>"),
                )
                return
            i += 1
        builder.flow_count += 1
        builder.flows.append(
            Flow(
                f"f{builder.flow_count}",
                source,
                target,
                state,  # type: ignore[arg-type]  # resolved in build()
                content=content,
                is_experience=is_experience,
                directed=directed,
                intensity=intensity,
                attachment=attachment,
                is_null_flow=is_null,
                span=head.span,
            )
        )


def parse(text: str) -> FlowModel:
    """Parse a document into a model.

    Raises :class:`ParseFailure` with up to 20 collected errors when the
    text is not well-formed.  Semantic problems (unknown endpoints, state
    rule breaches) are not checked here.
    """
    parser = _Parser(text)
    root = _ModelBuilder()
    stack = [root]
    saw_statement = False
    for lineno, line in enumerate(parser.lines, start=1):
        if len(parser.errors) >= MAX_ERRORS:
            break
        tokens = _tokenize_line(line, lineno, parser.errors)
        if not tokens:
            continue
        head = tokens[0]
        if head.kind == "rbrace":
            if len(tokens) > 1:
                parser.error(tokens[1].span, "unexpected input after '}'")
            if len(stack) == 1:
                parser.error(head.span, "'}' without an open activity block")
            else:
                child = stack.pop()
                owner, slot = child._parent_slot  # type: ignore[attr-defined]
                activity_id, name, span = child._activity  # type: ignore[attr-defined]
                owner.activities[slot] = Activity(
                    activity_id, name, sub_model=child.build(), span=span
                )
            continue
        if head.kind != "ident":
            parser.error(head.span, "expected a statement keyword",
                         ("model", "site", "store", "activity", "flow"))
            continue
        keyword = head.text
        rest = tokens[1:]
        if keyword == "model":
            if saw_statement or len(stack) > 1:
                parser.error(head.span, "model line must be the first statement")
            else:
                parser._model_line(root, rest)
            saw_statement = True
            continue
        saw_statement = True
        if keyword == "site":
            parser._site_line(stack[-1], head, rest)
        elif keyword == "store":
            parser._store_line(stack[-1], head, rest)
        elif keyword == "activity":
            parser._activity_line(stack, head, rest)
        elif keyword == "flow":
            parser._flow_line(stack[-1], head, rest)
        else:
            parser.error(
                head.span,
                f"unknown statement {keyword!r}",
                ("model", "site", "store", "activity", "flow"),
            )
    if len(stack) > 1:
        parser.error(
            SourceSpan(max(len(parser.lines), 1), 1, 1),
            f"{len(stack) - 1} activity block(s) left open",
            ("}",),
        )
    if parser.errors:
        raise ParseFailure(tuple(parser.errors[:MAX_ERRORS]))
    return _resolve_states(root.build(), {})


def _resolve_states(
    model: FlowModel, outer: dict[str, AggregateState]
) -> FlowModel:
    """Fill in flow states that were omitted in the source text.

    A flow takes its source store's state (stores of enclosing models are
    visible to boundary flows), falling back to the target store's state
    for activity-sourced flows, and to liquid last.
    """
    states = dict(outer)
    states.update({s.id: s.state for s in model.stores})
    flows = []
    for f in model.flows:
        if f.state is None:
            if f.source in states:
                f = replace(f, state=states[f.source])
            elif f.target in states:
                f = replace(f, state=states[f.target])
            else:
                f = replace(f, state=AggregateState.LIQUID)
        flows.append(f)
    activities = tuple(
        replace(a, sub_model=_resolve_states(a.sub_model, states))
        if a.sub_model is not None
        else a
        for a in model.activities
    )
    return replace(model, flows=tuple(flows), activities=activities)


def serialize(model: FlowModel) -> str:
    """Canonical text for a model: stable ordering, explicit flow states.

    Requires a model free of rule errors; the violation list is included in
    the exception otherwise.
    """
    problems = [v for v in validate(model) if v.severity is Severity.ERROR]
    if problems:
        raise ValueError(
            "cannot serialize an invalid model: "
            + "; ".join(str(v) for v in problems)
        )
    lines: list[str] = []
    _write_model(model, lines, depth=0, header=True)
    return "\n".join(lines) + "\n"


def _write_model(model: FlowModel, lines: list[str], depth: int, header: bool) -> None:
    pad = "  " * depth
    if header:
        head = ["model"]
        if model.name:
            head.append(_ident(model.name))
        head.append(model.kind.value)
        if model.is_map:
            head.append("map")
        lines.append(pad + " ".join(head))
    for site in sorted(model.sites, key=lambda s: s.id):
        lines.append(pad + f"site {site.id} {_quote(site.label)}")
    for store in sorted(model.stores, key=lambda s: s.id):
        parts = ["store", store.id]
        if store.name != store.id:
            parts.append(_quote(store.name))
        parts.append(store.state.value)
        if store.multiplicity is Multiplicity.MULTIPLE:
            parts.append("multi")
        if store.is_role:
            parts.append("role")
        if store.is_experience:
            parts.append("experience")
        if store.site is not None:
            parts.append(f"@{store.site}")
        lines.append(pad + " ".join(parts))
    for activity in sorted(model.activities, key=lambda a: a.id):
        parts = ["activity", activity.id]
        if activity.name != activity.id:
            parts.append(_quote(activity.name))
        if activity.sub_model is None:
            lines.append(pad + " ".join(parts))
        else:
            lines.append(pad + " ".join(parts) + " {")
            _write_model(activity.sub_model, lines, depth + 1, header=False)
            lines.append(pad + "}")
    for flow in sorted(model.flows, key=flow_sort_key):
        arrow = "->" if flow.directed else "--"
        parts = ["flow", flow.source, arrow, flow.target]
        if flow.content is not None:
            parts.append(_quote(flow.content))
        parts.append(flow.state.value)
        if flow.is_experience:
            parts.append("experience")
        if flow.is_null_flow:
            parts.append("null")
        if flow.attachment is not Attachment.CONTENT:
            parts.append(flow.attachment.value)
        if flow.intensity is not None:
            parts.append(f"intensity {repr(flow.intensity)}")
        lines.append(pad + " ".join(parts))


def flow_sort_key(f: Flow):
    return (
        f.source,
        f.target,
        f.directed,
        f.attachment.value,
        f.state.value,
        f.content or "",
        f.is_experience,
        f.is_null_flow,
        f.intensity if f.intensity is not None else -1.0,
    )


def _quote(text: str) -> str:
    if '"' in text or "\n" in text:
        raise ValueError(f"label not serializable: {text!r}")
    return f'"{text}"'


def _ident(text: str) -> str:
    from .model import make_id

    cleaned = make_id(text)
    if cleaned in ("soll", "ist", "map"):
        cleaned = cleaned + "_"
    return cleaned


def fingerprint(model: FlowModel):
    """Canonical structure of a model, for isomorphism checks.

    Node identity is preserved; flow identity is structural (flow ids are
    not part of the text format).  Undirected flows compare with normalized
    endpoint order.  Model names and observation scopes are cosmetic and
    excluded.
    """
    def flow_key(f: Flow):
        a, b = f.source, f.target
        if not f.directed and b < a:
            a, b = b, a
        return (
            a,
            b,
            f.directed,
            f.state.value,
            f.content or "",
            f.attachment.value,
            f.is_experience,
            f.is_null_flow,
            f.intensity if f.intensity is not None else -1.0,
        )

    return (
        model.kind.value,
        model.is_map,
        tuple(sorted((s.id, s.label) for s in model.sites)),
        tuple(
            sorted(
                (
                    s.id,
                    s.name,
                    s.state.value,
                    s.multiplicity.value,
                    s.is_experience,
                    s.is_role,
                    s.site or "",
                )
                for s in model.stores
            )
        ),
        tuple(
            sorted(
                (
                    a.id,
                    a.name,
                    fingerprint(a.sub_model) if a.sub_model is not None else (),
                )
                for a in model.activities
            )
        ),
        tuple(sorted(flow_key(f) for f in model.flows)),
    )
