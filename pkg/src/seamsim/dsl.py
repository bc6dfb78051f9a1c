"""Textual language for deployment models and scenario deltas.

Grammar (EBNF):

    model          := (componentDecl | connectionDecl | dataStoreDecl)* ;
    componentDecl  := "component" STRING "{" memberDecl* "}" ;
    memberDecl     := ("useCase" STRING)
                    | ("serviceCandidate" IDENT attrs?)
                    | ("entityType" IDENT attrs?) ;
    connectionDecl := ("local" | "remote") STRING "->" STRING attrs? ;
    dataStoreDecl  := "dataStore" STRING "{" ("entityType" IDENT)* "}" attrs? ;
    attrs          := "[" IDENT "=" value ("," IDENT "=" value)* "]" ;
    value          := INT | IDENT ;

STRING is double-quoted (backslash escapes), IDENT is [A-Za-z_][A-Za-z0-9_]*,
line comments start with ``//``, whitespace is insignificant.  Model files
use the ``.dm`` extension, scenario deltas ``.dms``; both are UTF-8.

Parsing never raises on malformed input; it reports diagnostics with source
positions and recovers where it can.  Unknown attribute names are warnings,
not errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Generic, Optional, TypeVar

from .model import (
    Component,
    ConflictBehavior,
    Connection,
    ConnectionKind,
    DataStore,
    DeltaCandidate,
    DeltaComponent,
    DeltaDataStore,
    DeploymentModel,
    ScenarioDelta,
    ServiceCandidate,
    TransactionBehavior,
    TransactionPropagation,
    validate_model,
)

MODEL_FILE_SUFFIX = ".dm"
DELTA_FILE_SUFFIX = ".dms"

KEYWORDS = frozenset(
    ["component", "useCase", "serviceCandidate", "entityType", "dataStore", "local", "remote"]
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.severity.value}: {self.message}"


T = TypeVar("T")


@dataclass
class ParseResult(Generic[T]):
    """Either a parsed value or error diagnostics (warnings may accompany both)."""

    value: Optional[T]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.value is not None

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


# ---------------------------------------------------------------------------
# Lexer


_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789")
_DIGITS = frozenset("0123456789")


class _Tok(Enum):
    STRING = "string"
    IDENT = "identifier"
    INT = "integer"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LBRACKET = "'['"
    RBRACKET = "']'"
    COMMA = "','"
    EQUALS = "'='"
    ARROW = "'->'"
    EOF = "end of input"
    BAD = "invalid character"


@dataclass(frozen=True)
class _Token:
    kind: _Tok
    text: str
    value: object
    span: SourceSpan


def _tokenize(text: str, diagnostics: list[ParseDiagnostic]) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(length: int) -> SourceSpan:
        return SourceSpan(line, col, length)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            out: list[str] = []
            terminated = False
            while j < n and text[j] != "\n":
                if text[j] == "\\" and j + 1 < n and text[j + 1] != "\n":
                    out.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == '"':
                    terminated = True
                    break
                out.append(text[j])
                j += 1
            length = j - i + (1 if terminated else 0)
            if not terminated:
                diagnostics.append(
                    ParseDiagnostic(Severity.ERROR, "unterminated string literal", span(length))
                )
            tokens.append(_Token(_Tok.STRING, text[i : i + length], "".join(out), span(length)))
            col += length
            i += length
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            word = text[i:j]
            tokens.append(_Token(_Tok.IDENT, word, word, span(j - i)))
            col += j - i
            i = j
            continue
        if ch in _DIGITS or (ch == "-" and i + 1 < n and text[i + 1] in _DIGITS):
            j = i + 1
            while j < n and text[j] in _DIGITS:
                j += 1
            word = text[i:j]
            tokens.append(_Token(_Tok.INT, word, int(word), span(j - i)))
            col += j - i
            i = j
            continue
        if text.startswith("->", i):
            tokens.append(_Token(_Tok.ARROW, "->", "->", span(2)))
            i += 2
            col += 2
            continue
        punct = {"{": _Tok.LBRACE, "}": _Tok.RBRACE, "[": _Tok.LBRACKET, "]": _Tok.RBRACKET, ",": _Tok.COMMA, "=": _Tok.EQUALS}
        if ch in punct:
            tokens.append(_Token(punct[ch], ch, ch, span(1)))
            i += 1
            col += 1
            continue
        tokens.append(_Token(_Tok.BAD, ch, ch, span(1)))
        i += 1
        col += 1

    tokens.append(_Token(_Tok.EOF, "", None, SourceSpan(line, col, 0)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_BEHAVIOR_VALUES = {b.name: b for b in TransactionBehavior}
_PROPAGATION_VALUES = {p.value: p for p in TransactionPropagation}
_CONFLICT_VALUES = {c.value: c for c in ConflictBehavior}

_TOP_LEVEL_KEYWORDS = frozenset(["component", "local", "remote", "dataStore"])


@dataclass
class _Attr:
    name: str
    value: object
    name_span: SourceSpan
    value_span: SourceSpan
    is_int: bool


class _Parser:
    def __init__(self, text: str):
        self.diagnostics: list[ParseDiagnostic] = []
        self.tokens = _tokenize(text, self.diagnostics)
        self.pos = 0
        # First declaration span per name, for attaching semantic violations.
        self.name_spans: dict[str, SourceSpan] = {}

    # -- token helpers

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind is not _Tok.EOF:
            self.pos += 1
        return tok

    def error(self, message: str, span: Optional[SourceSpan] = None) -> None:
        self.diagnostics.append(ParseDiagnostic(Severity.ERROR, message, span or self.cur.span))

    def warning(self, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(ParseDiagnostic(Severity.WARNING, message, span))

    def expect(self, kind: _Tok) -> Optional[_Token]:
        if self.cur.kind is kind:
            return self.advance()
        self.error(f"expected {kind.value}, found {self._describe(self.cur)}")
        return None

    def _describe(self, tok: _Token) -> str:
        if tok.kind is _Tok.EOF:
            return "end of input"
        return f"'{tok.text}'"

    def at_keyword(self, word: str) -> bool:
        return self.cur.kind is _Tok.IDENT and self.cur.text == word

    def note_name(self, name: str, span: SourceSpan) -> None:
        self.name_spans.setdefault(name, span)

    def sync_to_top_level(self) -> None:
        """Panic-mode recovery: skip to the next plausible declaration start."""
        while self.cur.kind is not _Tok.EOF:
            if self.cur.kind is _Tok.IDENT and self.cur.text in _TOP_LEVEL_KEYWORDS:
                return
            self.advance()

    # -- grammar productions

    def parse_document(self) -> tuple[list, list[Connection], list]:
        components: list = []
        connections: list[Connection] = []
        stores: list = []
        while self.cur.kind is not _Tok.EOF:
            if self.at_keyword("component"):
                comp = self.parse_component()
                if comp is not None:
                    components.append(comp)
            elif self.at_keyword("local") or self.at_keyword("remote"):
                conn = self.parse_connection()
                if conn is not None:
                    connections.append(conn)
            elif self.at_keyword("dataStore"):
                store = self.parse_data_store()
                if store is not None:
                    stores.append(store)
            else:
                self.error(f"expected a declaration, found {self._describe(self.cur)}")
                self.advance()
                self.sync_to_top_level()
        return components, connections, stores

    def parse_component(self):
        self.advance()  # component
        name_tok = self.expect(_Tok.STRING)
        if name_tok is None:
            self.sync_to_top_level()
            return None
        self.note_name(name_tok.value, name_tok.span)
        if self.expect(_Tok.LBRACE) is None:
            self.sync_to_top_level()
            return None
        use_cases: list[str] = []
        candidates: list[tuple[str, Optional[TransactionBehavior]]] = []
        entity_types: list[str] = []
        while self.cur.kind is not _Tok.RBRACE and self.cur.kind is not _Tok.EOF:
            if self.at_keyword("useCase"):
                self.advance()
                tok = self.expect(_Tok.STRING)
                if tok is not None:
                    self.note_name(tok.value, tok.span)
                    use_cases.append(tok.value)
            elif self.at_keyword("serviceCandidate"):
                self.advance()
                tok = self.expect(_Tok.IDENT)
                if tok is None:
                    self.skip_member()
                    continue
                self.note_name(tok.value, tok.span)
                attrs = self.parse_attrs()
                behavior = self.take_behavior(attrs)
                self.warn_unknown(attrs, "serviceCandidate")
                candidates.append((tok.value, behavior))
            elif self.at_keyword("entityType"):
                self.advance()
                tok = self.expect(_Tok.IDENT)
                if tok is None:
                    self.skip_member()
                    continue
                self.note_name(tok.value, tok.span)
                attrs = self.parse_attrs()
                self.warn_unknown(attrs, "entityType")
                entity_types.append(tok.value)
            else:
                self.error(f"expected a component member, found {self._describe(self.cur)}")
                self.skip_member()
        self.expect(_Tok.RBRACE)
        return (name_tok.value, use_cases, candidates, entity_types)

    def skip_member(self) -> None:
        while self.cur.kind not in (_Tok.RBRACE, _Tok.EOF) and not (
            self.cur.kind is _Tok.IDENT and self.cur.text in ("useCase", "serviceCandidate", "entityType")
        ):
            self.advance()

    def parse_connection(self) -> Optional[Connection]:
        kind = ConnectionKind.LOCAL if self.cur.text == "local" else ConnectionKind.REMOTE
        self.advance()
        src = self.expect(_Tok.STRING)
        if src is None:
            self.sync_to_top_level()
            return None
        self.note_name(src.value, src.span)
        if self.expect(_Tok.ARROW) is None:
            self.sync_to_top_level()
            return None
        dst = self.expect(_Tok.STRING)
        if dst is None:
            self.sync_to_top_level()
            return None
        self.note_name(dst.value, dst.span)
        attrs = self.parse_attrs()
        overhead = 0
        propagation: Optional[TransactionPropagation] = None
        for attr in self.take(attrs, "overhead"):
            if not attr.is_int:
                self.error("overhead must be a non-negative integer", attr.value_span)
            elif attr.value < 0:  # type: ignore[operator]
                self.error("negative overhead", attr.value_span)
            else:
                overhead = attr.value  # type: ignore[assignment]
        for attr in self.take(attrs, "transactionPropagation"):
            if not attr.is_int and attr.value in _PROPAGATION_VALUES:
                propagation = _PROPAGATION_VALUES[attr.value]  # type: ignore[index]
            else:
                self.error(
                    "transactionPropagation must be one of: " + ", ".join(sorted(_PROPAGATION_VALUES)),
                    attr.value_span,
                )
        self.warn_unknown(attrs, "connection")
        return Connection(src.value, dst.value, kind, overhead, propagation)

    def parse_data_store(self):
        self.advance()  # dataStore
        name_tok = self.expect(_Tok.STRING)
        if name_tok is None:
            self.sync_to_top_level()
            return None
        self.note_name(name_tok.value, name_tok.span)
        if self.expect(_Tok.LBRACE) is None:
            self.sync_to_top_level()
            return None
        entity_types: list[str] = []
        while self.cur.kind is not _Tok.RBRACE and self.cur.kind is not _Tok.EOF:
            if self.at_keyword("entityType"):
                self.advance()
                tok = self.expect(_Tok.IDENT)
                if tok is not None:
                    entity_types.append(tok.value)
            else:
                self.error(f"expected 'entityType', found {self._describe(self.cur)}")
                self.advance()
        self.expect(_Tok.RBRACE)
        attrs = self.parse_attrs()
        behavior: Optional[ConflictBehavior] = None
        for attr in self.take(attrs, "readWriteConflictBehavior"):
            if not attr.is_int and attr.value in _CONFLICT_VALUES:
                behavior = _CONFLICT_VALUES[attr.value]  # type: ignore[index]
            else:
                self.error(
                    "readWriteConflictBehavior must be one of: " + ", ".join(sorted(_CONFLICT_VALUES)),
                    attr.value_span,
                )
        self.warn_unknown(attrs, "dataStore")
        return (name_tok.value, entity_types, behavior)

    def parse_attrs(self) -> list[_Attr]:
        attrs: list[_Attr] = []
        if self.cur.kind is not _Tok.LBRACKET:
            return attrs
        self.advance()
        while self.cur.kind not in (_Tok.RBRACKET, _Tok.EOF):
            name_tok = self.expect(_Tok.IDENT)
            if name_tok is None:
                self.advance()
                continue
            if self.expect(_Tok.EQUALS) is None:
                continue
            if self.cur.kind in (_Tok.INT, _Tok.IDENT):
                value_tok = self.advance()
                attrs.append(
                    _Attr(
                        name_tok.value,
                        value_tok.value,
                        name_tok.span,
                        value_tok.span,
                        value_tok.kind is _Tok.INT,
                    )
                )
            else:
                self.error(f"expected an attribute value, found {self._describe(self.cur)}")
            if self.cur.kind is _Tok.COMMA:
                self.advance()
            elif self.cur.kind is not _Tok.RBRACKET:
                break
        self.expect(_Tok.RBRACKET)
        return attrs

    # -- attribute helpers

    def take(self, attrs: list[_Attr], name: str) -> list[_Attr]:
        matched = [a for a in attrs if a.name == name]
        for a in matched:
            attrs.remove(a)
        return matched

    def take_behavior(self, attrs: list[_Attr]) -> Optional[TransactionBehavior]:
        behavior = None
        for attr in self.take(attrs, "transactionBehavior"):
            if not attr.is_int and attr.value in _BEHAVIOR_VALUES:
                behavior = _BEHAVIOR_VALUES[attr.value]  # type: ignore[index]
            else:
                self.error(
                    "transactionBehavior must be one of: " + ", ".join(sorted(_BEHAVIOR_VALUES)),
                    attr.value_span,
                )
        return behavior

    def warn_unknown(self, attrs: list[_Attr], context: str) -> None:
        for attr in attrs:
            self.warning(f"unknown {context} attribute '{attr.name}'", attr.name_span)


# ---------------------------------------------------------------------------
# Public API


def parse_model(text: str) -> ParseResult[DeploymentModel]:
    """Parse deployment-model text; semantic violations carry source positions."""
    parser = _Parser(text)
    components, connections, stores = parser.parse_document()

    model = DeploymentModel(
        components=tuple(
            Component(
                name=name,
                use_cases=frozenset(use_cases),
                service_candidates=tuple(
                    ServiceCandidate(cname, behavior or TransactionBehavior.REQUIRED)
                    for cname, behavior in candidates
                ),
                entity_types=frozenset(entity_types),
            )
            for name, use_cases, candidates, entity_types in components
        ),
        connections=tuple(connections),
        data_stores=tuple(
            DataStore(
                name=name,
                entity_types=frozenset(entity_types),
                conflict_behavior=behavior or ConflictBehavior.STALE_READ,
            )
            for name, entity_types, behavior in stores
        ),
    )
    for violation in validate_model(model):
        span = parser.name_spans.get(violation.subject, SourceSpan(1, 1, 0))
        parser.diagnostics.append(ParseDiagnostic(Severity.ERROR, violation.message, span))

    diagnostics = parser.diagnostics
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(model, diagnostics)


def parse_delta(text: str) -> ParseResult[ScenarioDelta]:
    """Parse scenario-delta text; references resolve later, at merge time."""
    parser = _Parser(text)
    components, connections, stores = parser.parse_document()

    assigned: dict[str, SourceSpan] = {}
    for name, use_cases, candidates, entity_types in components:
        for member in list(use_cases) + [c for c, _ in candidates] + list(entity_types):
            if member in assigned:
                parser.error(
                    f'"{member}" assigned to two components in the same scenario',
                    parser.name_spans.get(member, SourceSpan(1, 1, 0)),
                )
            assigned[member] = parser.name_spans.get(member, SourceSpan(1, 1, 0))

    delta = ScenarioDelta(
        components=tuple(
            DeltaComponent(
                name=name,
                use_cases=tuple(use_cases),
                service_candidates=tuple(DeltaCandidate(c, b) for c, b in candidates),
                entity_types=tuple(entity_types),
            )
            for name, use_cases, candidates, entity_types in components
        ),
        connections=tuple(connections),
        data_stores=tuple(
            DeltaDataStore(name=name, entity_types=tuple(entity_types), conflict_behavior=behavior)
            for name, entity_types, behavior in stores
        ),
    )
    diagnostics = parser.diagnostics
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(delta, diagnostics)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_model(model: DeploymentModel) -> str:
    """Emit model text that parses back to an equal model.

    Ordering is deterministic (lexicographic by name) and attributes equal to
    their defaults are omitted.  The empty model serializes to the empty
    string.
    """
    lines: list[str] = []
    for comp in sorted(model.components, key=lambda c: c.name):
        lines.append(f"component {_quote(comp.name)} {{")
        for uc in sorted(comp.use_cases):
            lines.append(f"  useCase {_quote(uc)}")
        for cand in sorted(comp.service_candidates, key=lambda c: c.name):
            if cand.transaction_behavior is TransactionBehavior.REQUIRED:
                lines.append(f"  serviceCandidate {cand.name}")
            else:
                lines.append(
                    f"  serviceCandidate {cand.name} [ transactionBehavior = {cand.transaction_behavior.name} ]"
                )
        for et in sorted(comp.entity_types):
            lines.append(f"  entityType {et}")
        lines.append("}")
    for conn in sorted(model.connections, key=lambda c: (c.source, c.target)):
        head = f"{conn.kind.value} {_quote(conn.source)} -> {_quote(conn.target)}"
        attrs = []
        if conn.overhead != 0:
            attrs.append(f"overhead = {conn.overhead}")
        if conn.kind is ConnectionKind.REMOTE and conn.propagation is TransactionPropagation.SUBORDINATE:
            attrs.append("transactionPropagation = subordinate")
        lines.append(head + (f" [ {', '.join(attrs)} ]" if attrs else ""))
    for store in sorted(model.data_stores, key=lambda s: s.name):
        lines.append(f"dataStore {_quote(store.name)} {{")
        for et in sorted(store.entity_types):
            lines.append(f"  entityType {et}")
        if store.conflict_behavior is ConflictBehavior.BLOCK:
            lines.append("} [ readWriteConflictBehavior = block ]")
        else:
            lines.append("}")
    return "\n".join(lines) + ("\n" if lines else "")
