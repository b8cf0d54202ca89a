"""Recursive-descent parser for the analytics SQL subset.

Grammar (keywords case-insensitive, identifiers canonicalized to upper case):

    query   := SELECT item ("," item)* FROM tref join* [WHERE pred]
               [GROUP BY col ("," col)*] [ORDER BY ord ("," ord)*] [LIMIT int]
    item    := (agg | col) [AS ident]
    agg     := (AVG|SUM|MIN|MAX|COUNT) "(" (col | "*") ")"
    join    := JOIN tref ON cmp (AND cmp)*
    pred    := conjP (OR conjP)* ; conjP := term (AND term)*
    term    := cmp | "(" pred ")"
    cmp     := col (("="|"<>"|"<"|"<="|">"|">=") val)
             | col BETWEEN val AND val | col IS [NOT] NULL
    tref    := ident [ident]
    col     := [ident "."] ident ; val := number | string | col
    ord     := (agg | col) [ASC|DESC]

Strings are single-quoted with '' escaping a quote. Syntax errors carry the
offset of the first offending token.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


class SqlSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str]
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AggCall:
    func: str  # AVG | SUM | MIN | MAX | COUNT
    arg: Optional[ColumnRef]  # None = COUNT(*)
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SelectItem:
    expr: Union[AggCall, ColumnRef]
    alias: Optional[str]


@dataclass(frozen=True)
class Comparison:
    op: str  # = <> < <= > >=
    left: ColumnRef
    right: Union[ColumnRef, Literal]


@dataclass(frozen=True)
class Between:
    subject: ColumnRef
    low: Union[ColumnRef, Literal]
    high: Union[ColumnRef, Literal]


@dataclass(frozen=True)
class NullTest:
    subject: ColumnRef
    negated: bool  # True = IS NOT NULL


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    items: tuple


Predicate = Union[Comparison, Between, NullTest, BoolOp]


@dataclass(frozen=True)
class Join:
    table: str
    alias: str
    on: tuple  # conjunction of cmp nodes
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class OrderItem:
    expr: Union[AggCall, ColumnRef]
    ascending: bool


@dataclass(frozen=True)
class Query:
    items: tuple[SelectItem, ...]
    table: str
    alias: str
    joins: tuple[Join, ...]
    where: Optional[Predicate]
    group_by: tuple[ColumnRef, ...]
    order_by: tuple[OrderItem, ...]
    limit: Optional[int]


# -- tokenizer ---------------------------------------------------------------

KEYWORDS = {
    "SELECT", "FROM", "JOIN", "ON", "WHERE", "GROUP", "BY", "ORDER", "LIMIT",
    "AND", "OR", "AS", "AVG", "SUM", "MIN", "MAX", "COUNT", "BETWEEN", "IS",
    "NOT", "NULL", "ASC", "DESC",
}

AGG_FUNCS = {"AVG", "SUM", "MIN", "MAX", "COUNT"}

_SYMBOLS = ("<=", ">=", "<>", "=", "<", ">", "(", ")", ",", ".", "*")


@dataclass(frozen=True)
class _Token:
    kind: str  # KEYWORD | IDENT | NUMBER | STRING | SYMBOL | EOF
    value: object
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j].upper()
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            tokens.append(_Token(kind, word, i))
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # a dot not followed by a digit belongs to the next token
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            raw = text[i:j]
            value = float(raw) if "." in raw else int(raw)
            tokens.append(_Token("NUMBER", value, i))
            i = j
            continue
        if ch == "'":
            j = i + 1
            parts = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", i)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        parts.append("'")
                        j += 2
                        continue
                    j += 1
                    break
                parts.append(text[j])
                j += 1
            tokens.append(_Token("STRING", "".join(parts), i))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(_Token("SYMBOL", sym, i))
                i += len(sym)
                break
        else:
            raise SqlSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("EOF", None, n))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: _Token | None = None):
        token = token or self.peek()
        raise SqlSyntaxError(message, token.offset)

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.kind == "KEYWORD" and token.value in words

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            self.error(f"expected {word}")
        return self.next()

    def at_symbol(self, sym: str) -> bool:
        token = self.peek()
        return token.kind == "SYMBOL" and token.value == sym

    def expect_symbol(self, sym: str) -> _Token:
        if not self.at_symbol(sym):
            self.error(f"expected '{sym}'")
        return self.next()

    def ident(self, what: str) -> _Token:
        token = self.peek()
        if token.kind != "IDENT":
            self.error(f"expected {what}")
        return self.next()

    # grammar productions

    def query(self) -> Query:
        self.expect_keyword("SELECT")
        items = [self.select_item()]
        while self.at_symbol(","):
            self.next()
            items.append(self.select_item())
        self.expect_keyword("FROM")
        table, alias = self.table_ref()
        joins = []
        while self.at_keyword("JOIN"):
            joins.append(self.join())
        where = None
        if self.at_keyword("WHERE"):
            self.next()
            where = self.predicate()
        group_by: list[ColumnRef] = []
        if self.at_keyword("GROUP"):
            self.next()
            self.expect_keyword("BY")
            group_by.append(self.column_ref())
            while self.at_symbol(","):
                self.next()
                group_by.append(self.column_ref())
        order_by: list[OrderItem] = []
        if self.at_keyword("ORDER"):
            self.next()
            self.expect_keyword("BY")
            order_by.append(self.order_item())
            while self.at_symbol(","):
                self.next()
                order_by.append(self.order_item())
        limit = None
        if self.at_keyword("LIMIT"):
            self.next()
            token = self.peek()
            if token.kind != "NUMBER" or not isinstance(token.value, int) or token.value < 0:
                self.error("expected a non-negative integer after LIMIT")
            limit = self.next().value
        if self.peek().kind != "EOF":
            self.error("unexpected input after query")
        return Query(
            items=tuple(items),
            table=table,
            alias=alias,
            joins=tuple(joins),
            where=where,
            group_by=tuple(group_by),
            order_by=tuple(order_by),
            limit=limit,
        )

    def select_item(self) -> SelectItem:
        expr = self.agg_or_column()
        alias = None
        if self.at_keyword("AS"):
            self.next()
            alias = self.ident("alias").value
        return SelectItem(expr, alias)

    def order_item(self) -> OrderItem:
        expr = self.agg_or_column()
        ascending = True
        if self.at_keyword("ASC"):
            self.next()
        elif self.at_keyword("DESC"):
            self.next()
            ascending = False
        return OrderItem(expr, ascending)

    def agg_or_column(self):
        token = self.peek()
        if token.kind == "KEYWORD" and token.value in AGG_FUNCS:
            func = self.next()
            self.expect_symbol("(")
            if self.at_symbol("*"):
                star = self.next()
                if func.value != "COUNT":
                    self.error(f"{func.value}(*) is not allowed", star)
                arg = None
            else:
                arg = self.column_ref()
            self.expect_symbol(")")
            return AggCall(func.value, arg, offset=func.offset)
        return self.column_ref()

    def column_ref(self) -> ColumnRef:
        first = self.ident("column name")
        if self.at_symbol("."):
            self.next()
            second = self.ident("column name")
            return ColumnRef(first.value, second.value, offset=first.offset)
        return ColumnRef(None, first.value, offset=first.offset)

    def value(self):
        token = self.peek()
        if token.kind == "NUMBER":
            self.next()
            return Literal(token.value, offset=token.offset)
        if token.kind == "STRING":
            self.next()
            return Literal(token.value, offset=token.offset)
        if token.kind == "IDENT":
            return self.column_ref()
        self.error("expected a number, string, or column")

    def table_ref(self) -> tuple[str, str]:
        table = self.ident("table name").value
        alias = table
        if self.peek().kind == "IDENT":
            alias = self.next().value
        return table, alias

    def join(self) -> Join:
        token = self.expect_keyword("JOIN")
        table, alias = self.table_ref()
        self.expect_keyword("ON")
        on = [self.comparison()]
        while self.at_keyword("AND"):
            self.next()
            on.append(self.comparison())
        return Join(table, alias, tuple(on), offset=token.offset)

    def comparison(self):
        left = self.column_ref()
        token = self.peek()
        if token.kind == "SYMBOL" and token.value in ("=", "<>", "<", "<=", ">", ">="):
            self.next()
            return Comparison(token.value, left, self.value())
        if self.at_keyword("BETWEEN"):
            self.next()
            low = self.value()
            self.expect_keyword("AND")
            high = self.value()
            return Between(left, low, high)
        if self.at_keyword("IS"):
            self.next()
            negated = False
            if self.at_keyword("NOT"):
                self.next()
                negated = True
            self.expect_keyword("NULL")
            return NullTest(left, negated)
        self.error("expected a comparison operator, BETWEEN, or IS [NOT] NULL")

    def predicate(self) -> Predicate:
        disjuncts = [self.conjunction()]
        while self.at_keyword("OR"):
            self.next()
            disjuncts.append(self.conjunction())
        return _bool_op("or", disjuncts)

    def conjunction(self) -> Predicate:
        terms = [self.term()]
        while self.at_keyword("AND"):
            self.next()
            terms.append(self.term())
        return _bool_op("and", terms)

    def term(self) -> Predicate:
        if self.at_symbol("("):
            self.next()
            inner = self.predicate()
            self.expect_symbol(")")
            return inner
        return self.comparison()


def _bool_op(op: str, items: list) -> Predicate:
    """Flatten same-op children so redundant parentheses don't change the AST."""
    if len(items) == 1:
        return items[0]
    flat = []
    for item in items:
        if isinstance(item, BoolOp) and item.op == op:
            flat.extend(item.items)
        else:
            flat.append(item)
    return BoolOp(op, tuple(flat))


def parse(sql: str) -> Query:
    """Parse one SELECT query; raises SqlSyntaxError with the failing offset."""
    return _Parser(sql).query()


# -- printer -------------------------------------------------------------------


def _print_value(node) -> str:
    if isinstance(node, Literal):
        if isinstance(node.value, str):
            return "'" + node.value.replace("'", "''") + "'"
        return repr(node.value)
    return _print_column(node)


def _print_column(ref: ColumnRef) -> str:
    return f"{ref.table}.{ref.name}" if ref.table else ref.name


def _print_expr(expr) -> str:
    if isinstance(expr, AggCall):
        inner = "*" if expr.arg is None else _print_column(expr.arg)
        return f"{expr.func}({inner})"
    return _print_column(expr)


def _print_cmp(node) -> str:
    if isinstance(node, Comparison):
        return f"{_print_column(node.left)} {node.op} {_print_value(node.right)}"
    if isinstance(node, Between):
        return (
            f"{_print_column(node.subject)} BETWEEN "
            f"{_print_value(node.low)} AND {_print_value(node.high)}"
        )
    if isinstance(node, NullTest):
        return f"{_print_column(node.subject)} IS {'NOT ' if node.negated else ''}NULL"
    raise TypeError(f"not a comparison: {node!r}")


def _print_predicate(node, parent: str | None = None) -> str:
    if isinstance(node, BoolOp):
        sep = " AND " if node.op == "and" else " OR "
        text = sep.join(_print_predicate(item, node.op) for item in node.items)
        if node.op == "or" and parent == "and":
            return f"({text})"
        return text
    return _print_cmp(node)


def to_sql(query: Query) -> str:
    """Canonical text form; reparsing yields a structurally equal AST."""
    parts = ["SELECT "]
    parts.append(
        ", ".join(
            _print_expr(item.expr) + (f" AS {item.alias}" if item.alias else "")
            for item in query.items
        )
    )
    parts.append(f" FROM {query.table}")
    if query.alias != query.table:
        parts.append(f" {query.alias}")
    for join in query.joins:
        parts.append(f" JOIN {join.table}")
        if join.alias != join.table:
            parts.append(f" {join.alias}")
        parts.append(" ON " + " AND ".join(_print_cmp(c) for c in join.on))
    if query.where is not None:
        parts.append(" WHERE " + _print_predicate(query.where))
    if query.group_by:
        parts.append(" GROUP BY " + ", ".join(_print_column(c) for c in query.group_by))
    if query.order_by:
        parts.append(
            " ORDER BY "
            + ", ".join(
                _print_expr(o.expr) + ("" if o.ascending else " DESC")
                for o in query.order_by
            )
        )
    if query.limit is not None:
        parts.append(f" LIMIT {query.limit}")
    return "".join(parts)
