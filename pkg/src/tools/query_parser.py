"""🔎 Query language: scanner, recursive descent parser, pretty printer.

Grammar::

    query  = source [ "where" pred { "and" pred } ] [ "group" "by" ident ]
             [ "select" ( "count" | ident { "," ident } ) ]
    source = "raw" | "stops" | "moves" | "semantic" | "roi-visits" | "stpath" | "devices"
    pred   = ident cmp literal
           | ident "like" string
           | "intersects" "(" "layer" string ")"
           | "within" "(" "region" string ")"
           | "window" "(" num "," num "," num "," num "," int "," int ")"

Keywords are case-insensitive and identifiers are folded to lower case.
Durations are an integer followed by ``s``, ``min`` or ``h``; strings have
no escapes.
"""

from __future__ import annotations

import logging
import math
import re
from enum import Enum
from typing import NamedTuple

from pydantic import ValidationError

from src.errors import QueryParseError, QuerySemanticError
from src.models import (
    CompareOp,
    ComparePredicate,
    CountProjection,
    DurationLiteral,
    DurationUnit,
    InWindowPredicate,
    IntersectsLayerPredicate,
    LikePredicate,
    NumberLiteral,
    Predicate,
    QueryAst,
    QueryLiteral,
    QuerySource,
    StringLiteral,
    STWindow,
    TimeInterval,
    TimeLiteral,
    WithinRegionPredicate,
)

logger = logging.getLogger(__name__)


# =============================================================================
# 📋 FIELD TABLE
# =============================================================================


class FieldType(str, Enum):
    STRING = "string"
    NUMBER = "number"
    DURATION = "duration"
    TIME = "time"


_S, _N, _D, _T = FieldType.STRING, FieldType.NUMBER, FieldType.DURATION, FieldType.TIME

_EPISODE_FIELDS = {"object": _S, "t_begin": _T, "t_end": _T, "duration": _D, "x": _N, "y": _N}

SOURCE_FIELDS: dict[QuerySource, dict[str, FieldType]] = {
    QuerySource.RAW: {"object": _S, "t": _T, "x": _N, "y": _N},
    QuerySource.STOPS: dict(_EPISODE_FIELDS),
    QuerySource.MOVES: dict(_EPISODE_FIELDS),
    QuerySource.SEMANTIC: {**_EPISODE_FIELDS, "place": _S, "category": _S, "role": _S},
    QuerySource.ROI_VISITS: {
        "object": _S,
        "region": _S,
        "category": _S,
        "t_begin": _T,
        "t_end": _T,
        "via_descendant": _S,
    },
    QuerySource.ST_PATH: {
        "object": _S,
        "t_begin": _T,
        "t_end": _T,
        "activity_kind": _S,
        "label": _S,
        "x": _N,
        "y": _N,
    },
    QuerySource.DEVICES: {"device": _S, "kind": _S, "reliability": _N, "t": _T, "region": _S},
}

# Sources whose rows gain a ``place`` column when joined with a layer
JOINABLE_SOURCES = frozenset({QuerySource.RAW, QuerySource.STOPS, QuerySource.MOVES, QuerySource.ST_PATH})
JOIN_FIELD = "place"

_LITERAL_TYPES: dict[FieldType, type] = {
    FieldType.STRING: StringLiteral,
    FieldType.NUMBER: NumberLiteral,
    FieldType.DURATION: DurationLiteral,
    FieldType.TIME: TimeLiteral,
}


def joins_layer(ast: QueryAst) -> bool:
    return ast.source in JOINABLE_SOURCES and any(
        isinstance(predicate, IntersectsLayerPredicate) for predicate in ast.predicates
    )


def fields_for(ast: QueryAst) -> dict[str, FieldType]:
    """Row fields of the query's source, including the joined ``place`` column."""
    fields = dict(SOURCE_FIELDS[ast.source])
    if joins_layer(ast):
        fields[JOIN_FIELD] = FieldType.STRING
    return fields


def _field(name: str, fields: dict[str, FieldType], source: QuerySource) -> FieldType:
    field_type = fields.get(name)
    if field_type is None:
        raise QuerySemanticError(
            f"unknown field {name!r} for source {source.value}; valid fields: {', '.join(fields)}"
        )
    return field_type


def _check_text(value: str, what: str) -> None:
    if '"' in value:
        raise QuerySemanticError(f"{what} cannot contain a double quote: {value!r}")


def validate_ast(ast: QueryAst) -> None:
    """Check fields, literal types and projection shape against the field table.

    Raises:
        QuerySemanticError: on the first problem found
    """
    fields = fields_for(ast)
    for predicate in ast.predicates:
        if isinstance(predicate, ComparePredicate):
            expected = _field(predicate.field, fields, ast.source)
            if not isinstance(predicate.literal, _LITERAL_TYPES[expected]):
                raise QuerySemanticError(
                    f"field {predicate.field!r} is a {expected.value}, "
                    f"cannot compare it with a {predicate.literal.type} literal"
                )
            if isinstance(predicate.literal, StringLiteral):
                _check_text(predicate.literal.value, "string literal")
        elif isinstance(predicate, LikePredicate):
            if _field(predicate.field, fields, ast.source) != FieldType.STRING:
                raise QuerySemanticError(f"like needs a string field, {predicate.field!r} is not one")
            _check_text(predicate.pattern, "like pattern")
        elif isinstance(predicate, IntersectsLayerPredicate):
            _check_text(predicate.category, "layer name")
        elif isinstance(predicate, WithinRegionPredicate):
            _check_text(predicate.region, "region name")

    if ast.group_by is not None:
        _field(ast.group_by, fields, ast.source)
        if ast.projection and not isinstance(ast.projection, CountProjection):
            raise QuerySemanticError("group by only supports select count")
    if not isinstance(ast.projection, CountProjection):
        for name in ast.projection:
            _field(name, fields, ast.source)


# =============================================================================
# 🔤 SCANNER
# =============================================================================


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


_TOKEN = re.compile(
    r"""
    (?P<space>\s+)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<string>"[^"]*")
  | (?P<symbol>!=|<=|>=|[=<>(),])
    """,
    re.VERBOSE,
)


def scan(text: str) -> list[Token]:
    """Split query text into tokens, ending with an ``end`` token.

    Raises:
        QueryParseError: on a character that starts no token
    """
    tokens: list[Token] = []
    offset = 0
    while offset < len(text):
        match = _TOKEN.match(text, offset)
        if match is None:
            expected = "closing quote" if text[offset] == '"' else "a token"
            raise QueryParseError(text, offset, expected)
        kind = match.lastgroup
        assert kind is not None
        if kind != "space":
            tokens.append(Token(kind, match.group(), offset))
        offset = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# =============================================================================
# 🌲 PARSER
# =============================================================================

_SOURCES = {source.value: source for source in QuerySource}
_OPS = {op.value: op for op in CompareOp}
_UNITS = {unit.value: unit for unit in DurationUnit}
_FUNCTIONS = ("intersects", "within", "window")


class QueryParser:
    """Recursive descent over the token list; one instance per query text."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = scan(text)
        self.position = 0

    # ---- token helpers ------------------------------------------------------

    def _peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.position + ahead, len(self.tokens) - 1)]

    def _advance(self) -> Token:
        token = self._peek()
        self.position += 1
        return token

    def _fail(self, expected: str) -> QueryParseError:
        return QueryParseError(self.text, self._peek().offset, expected)

    def _number_value(self, token: Token) -> int | float:
        if not any(mark in token.text for mark in ".eE"):
            return int(token.text)
        value = float(token.text)
        if not math.isfinite(value):
            raise QueryParseError(self.text, token.offset, "a finite number")
        return value

    def _at_keyword(self, word: str, ahead: int = 0) -> bool:
        token = self._peek(ahead)
        return token.kind == "ident" and token.text.lower() == word

    def _keyword(self, word: str) -> None:
        if not self._at_keyword(word):
            raise self._fail(repr(word))
        self._advance()

    def _symbol(self, symbol: str) -> None:
        token = self._peek()
        if token.kind != "symbol" or token.text != symbol:
            raise self._fail(repr(symbol))
        self._advance()

    def _ident(self, what: str) -> str:
        token = self._peek()
        if token.kind != "ident":
            raise self._fail(what)
        self._advance()
        return token.text.lower()

    def _string(self) -> str:
        token = self._peek()
        if token.kind != "string":
            raise self._fail("a string")
        self._advance()
        return token.text[1:-1]

    def _number(self) -> int | float:
        token = self._peek()
        if token.kind != "number":
            raise self._fail("a number")
        self._advance()
        return self._number_value(token)

    def _integer(self, what: str) -> int:
        token = self._peek()
        if token.kind != "number" or not _is_natural(token.text):
            raise self._fail(what)
        self._advance()
        return int(token.text)

    # ---- grammar ------------------------------------------------------------

    def parse(self) -> QueryAst:
        source_token = self._peek()
        name = self._ident("a source (" + ", ".join(_SOURCES) + ")")
        source = _SOURCES.get(name)
        if source is None:
            raise QueryParseError(self.text, source_token.offset, "a source (" + ", ".join(_SOURCES) + ")")

        predicates: list[Predicate] = []
        if self._at_keyword("where"):
            self._advance()
            predicates.append(self._predicate())
            while self._at_keyword("and"):
                self._advance()
                predicates.append(self._predicate())

        group_by: str | None = None
        if self._at_keyword("group"):
            self._advance()
            self._keyword("by")
            group_by = self._ident("a field name")

        projection: tuple[str, ...] | CountProjection = ()
        if self._at_keyword("select"):
            self._advance()
            projection = self._projection()

        if self._peek().kind != "end":
            raise self._fail("'where', 'and', 'group', 'select' or end of query")

        ast = QueryAst(source=source, predicates=tuple(predicates), group_by=group_by, projection=projection)
        return _type_literals(ast)

    def _projection(self) -> tuple[str, ...] | CountProjection:
        if self._at_keyword("count"):
            self._advance()
            return CountProjection()
        names = [self._ident("a field name or 'count'")]
        while self._peek().kind == "symbol" and self._peek().text == ",":
            self._advance()
            names.append(self._ident("a field name"))
        return tuple(names)

    def _predicate(self) -> Predicate:
        token = self._peek()
        if token.kind == "ident" and token.text.lower() in _FUNCTIONS and self._peek(1).text == "(":
            function = token.text.lower()
            self._advance()
            self._symbol("(")
            if function == "intersects":
                self._keyword("layer")
                predicate: Predicate = IntersectsLayerPredicate(category=self._string())
            elif function == "within":
                self._keyword("region")
                predicate = WithinRegionPredicate(region=self._string())
            else:
                predicate = self._window(token)
            self._symbol(")")
            return predicate

        field = self._ident("a field name or predicate")
        if self._at_keyword("like"):
            self._advance()
            return LikePredicate(field=field, pattern=self._string())
        op_token = self._peek()
        op = _OPS.get(op_token.text) if op_token.kind == "symbol" else None
        if op is None:
            raise self._fail("a comparison operator or 'like'")
        self._advance()
        return ComparePredicate(field=field, op=op, literal=self._literal())

    def _window(self, at: Token) -> InWindowPredicate:
        bounds: list[float] = []
        for _ in range(4):
            bounds.append(float(self._number()))
            self._symbol(",")
        begin = self._integer("a time (epoch seconds)")
        self._symbol(",")
        end = self._integer("a time (epoch seconds)")
        try:
            window = STWindow(
                x_min=bounds[0],
                x_max=bounds[1],
                y_min=bounds[2],
                y_max=bounds[3],
                time=TimeInterval(begin=begin, end=end),
            )
        except ValidationError as e:
            raise QuerySemanticError(f"invalid window at column {at.offset + 1}: {e.errors()[0]['msg']}") from e
        return InWindowPredicate(window=window)

    def _literal(self) -> QueryLiteral:
        token = self._peek()
        if token.kind == "string":
            return StringLiteral(value=self._string())
        if token.kind != "number":
            raise self._fail("a string, number, duration or time")
        self._advance()
        unit_token = self._peek()
        if unit_token.kind == "ident" and unit_token.text.lower() in _UNITS:
            if not _is_natural(token.text):
                raise QueryParseError(self.text, token.offset, "a whole number of time units")
            self._advance()
            return DurationLiteral(amount=int(token.text), unit=_UNITS[unit_token.text.lower()])
        return NumberLiteral(value=self._number_value(token))


def _is_natural(text: str) -> bool:
    return text.isdigit()


def _type_literals(ast: QueryAst) -> QueryAst:
    """Read integer literals on time fields as times, then validate."""
    fields = fields_for(ast)
    typed: list[Predicate] = []
    for predicate in ast.predicates:
        if (
            isinstance(predicate, ComparePredicate)
            and fields.get(predicate.field) == FieldType.TIME
            and isinstance(predicate.literal, NumberLiteral)
            and isinstance(predicate.literal.value, int)
            and predicate.literal.value >= 0
        ):
            predicate = predicate.model_copy(update={"literal": TimeLiteral(value=predicate.literal.value)})
        typed.append(predicate)
    ast = ast.model_copy(update={"predicates": tuple(typed)})
    validate_ast(ast)
    return ast


def parse(text: str) -> QueryAst:
    """Parse query text into a validated syntax tree.

    Raises:
        QueryParseError: text does not match the grammar
        QuerySemanticError: unknown field or mismatched literal type
    """
    ast = QueryParser(text).parse()
    logger.debug(f"🔎 Parsed query on {ast.source.value} with {len(ast.predicates)} predicates")
    return ast


# =============================================================================
# 🖨️ PRETTY PRINTER
# =============================================================================


def _format_number(value: int | float) -> str:
    return repr(value)


def _format_literal(literal: QueryLiteral) -> str:
    if isinstance(literal, StringLiteral):
        return f'"{literal.value}"'
    if isinstance(literal, DurationLiteral):
        return f"{literal.amount}{literal.unit.value}"
    return _format_number(literal.value)


def _format_predicate(predicate: Predicate) -> str:
    if isinstance(predicate, ComparePredicate):
        return f"{predicate.field} {predicate.op.value} {_format_literal(predicate.literal)}"
    if isinstance(predicate, LikePredicate):
        return f'{predicate.field} like "{predicate.pattern}"'
    if isinstance(predicate, IntersectsLayerPredicate):
        return f'intersects(layer "{predicate.category}")'
    if isinstance(predicate, WithinRegionPredicate):
        return f'within(region "{predicate.region}")'
    w = predicate.window
    numbers = ", ".join(_format_number(value) for value in (w.x_min, w.x_max, w.y_min, w.y_max))
    return f"window({numbers}, {w.time.begin}, {w.time.end})"


def pretty_print(ast: QueryAst) -> str:
    """Canonical text of a query: lower-case keywords, single spaces."""
    parts = [ast.source.value]
    if ast.predicates:
        parts.append("where " + " and ".join(_format_predicate(predicate) for predicate in ast.predicates))
    if ast.group_by is not None:
        parts.append(f"group by {ast.group_by}")
    if isinstance(ast.projection, CountProjection):
        parts.append("select count")
    elif ast.projection:
        parts.append("select " + ", ".join(ast.projection))
    return " ".join(parts)
