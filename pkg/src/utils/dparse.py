"""
Parser for convolutional generator matrices in D-transform notation over Z_p.

    poly  := term ('+' term)* | '0'
    term  := coeff | coeff? 'D' ('^' nat)?

Rows of a matrix are separated by ';' and entries by ','. Coefficients are
literal digits smaller than p; nothing is reduced mod p. Degrees are capped at
MAX_DEGREE.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import ply.lex as lex
import ply.yacc as yacc

from src.utils.algebra import Prime
from src.utils.errors import CoefficientError, DimensionError, ParseError

logger = logging.getLogger(__name__)

MAX_DEGREE = 256


@dataclass(frozen=True)
class PolyD:
    """Polynomial in D; coeffs[j] multiplies D^j, trailing zeros stripped."""

    p: int
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        coeffs = [int(c) for c in self.coeffs]
        for c in coeffs:
            if not 0 <= c < self.p:
                raise CoefficientError(f"coefficient {c} is not in [0, {self.p})")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def coefficient(self, j: int) -> int:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def render(self) -> str:
        terms = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            if j == 0:
                terms.append(str(c))
                continue
            power = "D" if j == 1 else f"D^{j}"
            terms.append(power if c == 1 else f"{c}{power}")
        return "+".join(terms) if terms else "0"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class PolyMatrix:
    """A k x n generator matrix G(D)."""

    p: int
    rows: Tuple[Tuple[PolyD, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.rows)
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise DimensionError(
                f"ragged generator matrix with row lengths {sorted(widths)}"
            )
        for row in rows:
            for entry in row:
                if entry.p != self.p:
                    raise DimensionError(
                        f"entry over Z_{entry.p} in a matrix over Z_{self.p}"
                    )
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def row_degree(self, i: int) -> int:
        """Largest entry degree of row i; 0 for an all-zero row."""
        return max([entry.degree for entry in self.rows[i]] + [0])

    def impulse_response(self, i: int, j: int) -> Tuple[int, ...]:
        """The n-tuple of D^j coefficients of row i."""
        return tuple(entry.coefficient(j) for entry in self.rows[i])

    def render(self) -> str:
        return "; ".join(", ".join(e.render() for e in row) for row in self.rows)

    def __str__(self) -> str:
        return self.render()


class _PolyGrammar:
    tokens = ("NUMBER", "D", "PLUS", "CARET")

    t_PLUS = r"\+"
    t_CARET = r"\^"
    t_D = r"D"
    t_ignore = " \t\r\n"

    def t_NUMBER(self, t):
        r"\d+"
        t.value = (int(t.value), t.lexpos)
        return t

    def t_error(self, t):
        raise ParseError(f"unexpected character {t.value[0]!r}", offset=t.lexpos)

    def p_poly_more(self, p):
        "poly : poly PLUS term"
        p[0] = p[1] + [p[3]]

    def p_poly_one(self, p):
        "poly : term"
        p[0] = [p[1]]

    def p_term_constant(self, p):
        "term : NUMBER"
        value, pos = p[1]
        p[0] = (value, 0, pos)

    def p_term_scaled(self, p):
        "term : NUMBER power"
        value, pos = p[1]
        p[0] = (value, p[2][0], pos)

    def p_term_bare(self, p):
        "term : power"
        degree, pos = p[1]
        p[0] = (1, degree, pos)

    def p_power_linear(self, p):
        "power : D"
        p[0] = (1, p.lexpos(1))

    def p_power_exponent(self, p):
        "power : D CARET NUMBER"
        p[0] = (p[3][0], p.lexpos(1))

    def p_error(self, tok):
        if tok is None:
            raise ParseError("unexpected end of input", offset=None)
        raise ParseError(f"unexpected token {tok.type}", offset=tok.lexpos)


_grammar = None


def _build():
    global _grammar
    if _grammar is None:
        spec = _PolyGrammar()
        lexer = lex.lex(module=spec)
        parser = yacc.yacc(
            module=spec,
            start="poly",
            debug=False,
            write_tables=False,
            errorlog=yacc.NullLogger(),
        )
        _grammar = (lexer, parser)
    return _grammar


def _byte_offset(text: str, char_offset: Optional[int]) -> int:
    if char_offset is None:
        char_offset = len(text)
    return len(text[:char_offset].encode("utf-8"))


def parse_poly(text: str, p: int, base_offset: int = 0) -> PolyD:
    """
    Parse one polynomial such as "1+D^2" or "2+D".

    Args:
        text: The polynomial text.
        p: Prime alphabet size; every coefficient must be smaller than p.
        base_offset: Byte offset of ``text`` inside a larger input, added to
            error offsets.

    Returns:
        PolyD: The normalized polynomial.
    """
    p = Prime(p)
    if not text.strip():
        raise ParseError("empty polynomial", offset=base_offset)
    lexer, parser = _build()
    try:
        terms = parser.parse(text, lexer=lexer.clone())
    except ParseError as e:
        raise ParseError(
            e.args[0], offset=base_offset + _byte_offset(text, e.offset)
        ) from None

    coeffs: List[int] = []
    seen = set()
    for value, degree, pos in terms:
        offset = base_offset + _byte_offset(text, pos)
        if degree > MAX_DEGREE:
            raise ParseError(
                f"degree {degree} exceeds the largest supported degree {MAX_DEGREE}",
                offset=offset,
            )
        if value >= p:
            raise CoefficientError(
                f"coefficient {value} is not smaller than p={p}", offset=offset
            )
        if degree in seen:
            raise ParseError(f"degree {degree} appears twice", offset=offset)
        seen.add(degree)
        if degree >= len(coeffs):
            coeffs.extend([0] * (degree + 1 - len(coeffs)))
        coeffs[degree] = value
    return PolyD(p, tuple(coeffs))


def parse_matrix(text: str, p: int) -> PolyMatrix:
    """Parse "g11, g12, ...; g21, ..." into a PolyMatrix."""
    p = Prime(p)
    rows = []
    offset = 0
    for i, row_text in enumerate(text.split(";")):
        entries = []
        entry_offset = offset
        for j, entry_text in enumerate(row_text.split(",")):
            try:
                entries.append(parse_poly(entry_text, p, base_offset=entry_offset))
            except ParseError as e:
                e.row, e.column = i, j
                raise
            entry_offset += len(entry_text.encode("utf-8")) + 1
        if rows and len(entries) != len(rows[0]):
            raise ParseError(
                f"row {i} has {len(entries)} entries, expected {len(rows[0])}",
                offset=offset,
                row=i,
            )
        rows.append(tuple(entries))
        offset += len(row_text.encode("utf-8")) + 1
    matrix = PolyMatrix(p, tuple(rows))
    logger.debug(f"Parsed {matrix.k}x{matrix.n} generator matrix over Z_{p}: {matrix}")
    return matrix
