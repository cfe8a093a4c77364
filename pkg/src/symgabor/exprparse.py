"""Matrix entry expressions and the JSON matrix document format.

Grammar (whitespace is ignored between tokens)::

    expr   := unary (("*" | "/") unary)*
    unary  := "-" unary | atom
    atom   := number | "pi" | "sqrt" "(" integer ")" | "(" expr ")"
    number := (digits ["." [digits]] | "." digits) [exponent]
    exponent := ("e" | "E") ["+" | "-"] digits

Binary operators associate to the left, so ``3*sqrt(2)/13`` is
``(3 * sqrt(2)) / 13``.  There is no "+": every entry we need is a product or
quotient of the atoms.  Evaluation is plain IEEE double arithmetic, so
results are deterministic.
"""

from __future__ import annotations

import json
import math
import re

import numpy as np

from .errors import DimensionError, NonInvertible, ParseError

__all__ = ["evaluate", "parse_matrix", "parse_matrix_obj", "render_entry", "render_matrix_doc"]

_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_INTEGER = re.compile(r"\d+")
_NAME = re.compile(r"[A-Za-z_]+")


class _Parser:
    def __init__(self, text: str, row=None, col=None):
        self.text = text
        self.i = 0
        self.row = row
        self.col = col

    def fail(self, reason, pos=None):
        raise ParseError(reason, self.row, self.col, self.i if pos is None else pos)

    def skip(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.i += 1

    def parse(self) -> float:
        if not self.text.strip():
            self.fail("empty expression", 0)
        v = self.expr()
        if self.peek():
            ch = self.peek()
            if ch == "+":
                self.fail("'+' is not part of the grammar")
            self.fail(f"unexpected {ch!r}")
        return v

    def expr(self):
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.i]
            at = self.i
            self.i += 1
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if w == 0:
                    self.fail("division by zero", at)
                v = v / w
        return v

    def unary(self):
        if self.peek() == "-":
            self.i += 1
            return -self.unary()
        return self.atom()

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.i += 1
            v = self.expr()
            self.expect(")")
            return v
        m = _NUMBER.match(self.text, self.i)
        if m:
            self.i = m.end()
            return float(m.group(0))
        m = _NAME.match(self.text, self.i)
        if m:
            name = m.group(0)
            at = self.i
            self.i = m.end()
            if name == "pi":
                return math.pi
            if name == "sqrt":
                self.expect("(")
                self.skip()
                n = _INTEGER.match(self.text, self.i)
                if not n:
                    self.fail("sqrt takes a positive integer literal")
                self.i = n.end()
                k = int(n.group(0))
                if k <= 0:
                    self.fail("sqrt takes a positive integer literal", n.start())
                self.expect(")")
                return math.sqrt(k)
            self.fail(f"unknown name {name!r}", at)
        if not ch:
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {ch!r}")


def evaluate(expr, row=None, col=None) -> float:
    """Value of one entry: an expression string or a JSON number."""
    if isinstance(expr, bool):
        raise ParseError("booleans are not matrix entries", row, col)
    if isinstance(expr, (int, float)):
        v = float(expr)
    elif isinstance(expr, str):
        v = _Parser(expr, row, col).parse()
    else:
        raise ParseError(f"entry of type {type(expr).__name__} is not an expression", row, col)
    if not math.isfinite(v):
        raise ParseError("entry does not evaluate to a finite number", row, col)
    return v


def parse_matrix_obj(doc, require_invertible: bool = True) -> np.ndarray:
    """Matrix from a decoded document {"d": int, "entries": [[...], ...]}."""
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    for key in ("d", "entries"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    d = doc["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ParseError("field 'd' must be a positive integer")
    rows = doc["entries"]
    n = 2 * d
    if not isinstance(rows, list) or len(rows) != n:
        raise DimensionError(f"expected {n} rows for d = {d}")
    out = np.empty((n, n))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise DimensionError(f"expected {n} columns", row=i)
        for j, e in enumerate(row):
            out[i, j] = evaluate(e, i, j)
    if require_invertible and abs(np.linalg.det(out)) <= 1e-12 * max(1.0, float(np.abs(out).max())) ** n:
        raise NonInvertible("lattice matrix is singular")
    return out


def parse_matrix(text: str, require_invertible: bool = True) -> np.ndarray:
    """Parse a JSON matrix document.

    Examples
    --------
    >>> parse_matrix('{"d": 1, "entries": [["1", "0"], ["0", "1/2"]]}')
    array([[1. , 0. ],
           [0. , 0.5]])
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", pos=exc.pos) from None
    return parse_matrix_obj(doc, require_invertible)


def render_entry(x: float) -> str:
    """17 significant digits; parses back to the same double."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("cannot render a non-finite entry")
    return format(x, ".17g")


def render_matrix_doc(M) -> dict:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValueError("matrix must be square of even size")
    return {"d": M.shape[0] // 2, "entries": [[render_entry(x) for x in row] for row in M]}
