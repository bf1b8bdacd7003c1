"""Text parser and JSON codec for bivariate polynomials.

Expressions use integer/decimal coefficients, the variables ``z1`` and ``z2``
and the operators ``+ - * ^`` (parentheses are accepted for grouping), e.g.
``1 - z1*z2`` or ``1 - 0.5*z1^2 - 0.5*z2 + z1^2*z2``.

JSON form: ``{"coeffs": [[[re, im], ...], ...]}``, outer index = power of z1.
"""

from __future__ import annotations

import json
import os
import re
from typing import Any, Dict, List, Tuple

import numpy as np

from shared_tools.lab_errors import ExpressionSyntaxError
from shared_tools.series_core import (
    BivariateSeries,
    add,
    constant,
    monomial,
    polynomial_product,
    scale,
    trim,
)

_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|(z1|z2)|([+\-*^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TOKEN_RE.match(stripped, pos)
        if not match or match.end() == pos:
            raise ExpressionSyntaxError(f"Unexpected character at position {pos} in '{text}'")
        number, var, op = match.groups()
        if number is not None:
            tokens.append(("num", number, match.start(1)))
        elif var is not None:
            tokens.append(("var", var, match.start(2)))
        else:
            tokens.append(("op", op, match.start(3)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def _peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _take(self):
        token = self._peek()
        if token is None:
            raise ExpressionSyntaxError(f"Unexpected end of expression '{self.text}'")
        self.index += 1
        return token

    def _error(self, message: str, token) -> ExpressionSyntaxError:
        where = token[2] if token else len(self.text)
        return ExpressionSyntaxError(f"{message} at position {where} in '{self.text}'")

    def parse(self) -> BivariateSeries:
        if not self.tokens:
            raise ExpressionSyntaxError("Empty polynomial expression")
        result = self._expr()
        leftover = self._peek()
        if leftover is not None:
            raise self._error(f"Unexpected token '{leftover[1]}'", leftover)
        return result

    def _expr(self) -> BivariateSeries:
        sign = 1.0
        token = self._peek()
        if token is not None and token[0] == "op" and token[1] in "+-":
            self._take()
            sign = -1.0 if token[1] == "-" else 1.0
        result = scale(self._term(), sign)
        while True:
            token = self._peek()
            if token is None or token[0] != "op" or token[1] not in "+-":
                return result
            self._take()
            term = self._term()
            result = add(result, scale(term, -1.0) if token[1] == "-" else term)

    def _term(self) -> BivariateSeries:
        result = self._power()
        while True:
            token = self._peek()
            if token is None or token[0] != "op" or token[1] != "*":
                return result
            self._take()
            result = polynomial_product(result, self._power())

    def _power(self) -> BivariateSeries:
        base = self._atom()
        token = self._peek()
        if token is None or token[0] != "op" or token[1] != "^":
            return base
        self._take()
        exponent = self._take()
        if exponent[0] != "num" or not exponent[1].isdigit():
            raise self._error("Exponent must be a nonnegative integer", exponent)
        result = constant(1.0)
        for _ in range(int(exponent[1])):
            result = polynomial_product(result, base)
        return result

    def _atom(self) -> BivariateSeries:
        token = self._take()
        kind, value, _ = token
        if kind == "num":
            return constant(float(value))
        if kind == "var":
            return monomial(1, 0) if value == "z1" else monomial(0, 1)
        if value == "(":
            inner = self._expr()
            closing = self._take()
            if closing[1] != ")":
                raise self._error("Expected ')'", closing)
            return inner
        raise self._error(f"Unexpected token '{value}'", token)


def parse_polynomial(text: str) -> BivariateSeries:
    """Parse an expression such as ``2 - z1 - z2`` into a trimmed polynomial."""
    if not isinstance(text, str):
        raise ExpressionSyntaxError(f"Expression must be a string, got {type(text).__name__}")
    return trim(_Parser(text).parse(), tol=0.0)


def series_to_json(f: BivariateSeries) -> Dict[str, Any]:
    return {"coeffs": [[[float(c.real), float(c.imag)] for c in row] for row in f.coeffs]}


def series_from_json(payload: Any) -> BivariateSeries:
    if not isinstance(payload, dict) or "coeffs" not in payload:
        raise ExpressionSyntaxError("JSON series must be an object with a 'coeffs' member")
    rows = payload["coeffs"]
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ExpressionSyntaxError(f"Malformed 'coeffs' array: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ExpressionSyntaxError(f"'coeffs' must have shape (K+1, L+1, 2), got {arr.shape}")
    try:
        return BivariateSeries(arr[..., 0] + 1j * arr[..., 1])
    except ValueError as exc:
        raise ExpressionSyntaxError(str(exc)) from exc


def read_series_file(path: str) -> BivariateSeries:
    try:
        with open(os.fspath(path), "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ExpressionSyntaxError(f"Could not read series JSON '{path}': {exc}") from exc
    return series_from_json(payload)


def _format_coefficient(c: complex) -> str:
    if c.imag == 0.0:
        value = c.real
        return repr(int(value)) if value.is_integer() else repr(value)
    return f"({c.real!r}{c.imag:+}j)"


def format_polynomial(p: BivariateSeries) -> str:
    """Readable expression for reports; inverse of ``parse_polynomial`` for real coefficients."""
    parts: List[str] = []
    for k, l in zip(*np.nonzero(p.coeffs)):
        c = complex(p.coeffs[k, l])
        negative = c.imag == 0.0 and c.real < 0
        magnitude = -c if negative else c
        factors = []
        if k:
            factors.append("z1" if k == 1 else f"z1^{k}")
        if l:
            factors.append("z2" if l == 1 else f"z2^{l}")
        coeff_text = _format_coefficient(magnitude)
        if factors and coeff_text == "1":
            body = "*".join(factors)
        else:
            body = "*".join([coeff_text] + factors)
        if not parts:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(parts) if parts else "0"
