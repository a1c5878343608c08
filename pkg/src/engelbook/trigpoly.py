"""Exact trigonometric polynomial arithmetic over named chart coordinates.

An expression is a finite sum of terms

    coeff * prod(x_i ** p_i) * {1 | cos | sin}(sum_j k_j * x_j + phase)

with integer Laurent exponents ``p_i`` on non-angular coordinates and integer
frequencies ``k_j`` on coordinates allowed inside a trigonometric argument.
This class of functions is closed under addition, multiplication, partial
differentiation, restriction to coordinate slices, and precomposition with
integer-affine coordinate maps, so every operation here is exact up to float
round-off in coefficients and phases.  Expressions are kept in a canonical
normal form, which makes equality testing a term-by-term comparison.

Canonical form of a term:

- frequencies that are zero are dropped; a trig factor with no frequencies
  left is folded into the coefficient;
- the first nonzero frequency (in chart coordinate order) is positive;
- the phase lies in [0, pi/2), using the quarter-turn identities to trade
  phase against the mode and the sign of the coefficient; phases within
  1e-12 of a quarter-turn boundary are snapped before folding;
- terms are sorted by (powers, mode, frequencies, phase) and merged when
  their discrete data agree and their phases differ by at most 1e-12;
- terms with |coeff| <= 1e-12 are dropped.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "KIND_ANGULAR",
    "KIND_LINEAR",
    "KIND_POLYNOMIAL",
    "Coordinate",
    "Expr",
    "Mode",
    "ParseError",
    "TrigTerm",
    "canonical_equal",
    "parse_expression",
]

TAU = math.tau
HALF_PI = math.pi / 2.0
ZERO_TOL = 1e-12
PHASE_SNAP = 1e-12

KIND_ANGULAR = "angular"
KIND_LINEAR = "linear"
KIND_POLYNOMIAL = "polynomial"
_KINDS = (KIND_ANGULAR, KIND_LINEAR, KIND_POLYNOMIAL)


class Mode(enum.IntEnum):
    """Trigonometric factor carried by a term; CONST means no factor."""

    CONST = 0
    COS = 1
    SIN = 2


@dataclass(frozen=True)
class Coordinate:
    """A chart coordinate together with the ways it may enter a term.

    ``angular``: periodic, appears only inside cos/sin, integer frequency.
    ``linear``: non-periodic but allowed inside cos/sin; the parser admits
    only unit frequencies on it, although products may create larger ones
    internally.  May also carry Laurent powers.
    ``polynomial``: appears only through Laurent powers.
    """

    name: str
    kind: str = KIND_POLYNOMIAL

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown coordinate kind {self.kind!r}")
        if not self.name.isidentifier():
            raise ValueError(f"coordinate name {self.name!r} is not an identifier")

    @property
    def is_angular(self) -> bool:
        return self.kind == KIND_ANGULAR

    @property
    def trig_ok(self) -> bool:
        return self.kind != KIND_POLYNOMIAL


@dataclass(frozen=True)
class TrigTerm:
    """One canonical term coeff * monomial * {1, cos, sin}(freqs . x + phase)."""

    coeff: float
    powers: tuple[int, ...]
    mode: Mode
    freqs: tuple[int, ...]
    phase: float

    def discrete_key(self) -> tuple:
        return (self.powers, int(self.mode), self.freqs)


def _normalize_term(
    coeff: float,
    powers: tuple[int, ...],
    mode: Mode,
    freqs: tuple[int, ...],
    phase: float,
) -> TrigTerm:
    zero_freqs = (0,) * len(powers)
    if mode == Mode.CONST or not any(freqs):
        if mode == Mode.COS:
            coeff *= math.cos(phase)
        elif mode == Mode.SIN:
            coeff *= math.sin(phase)
        return TrigTerm(float(coeff), powers, Mode.CONST, zero_freqs, 0.0)

    first = next(f for f in freqs if f)
    if first < 0:
        freqs = tuple(-f for f in freqs)
        phase = -phase
        if mode == Mode.SIN:
            coeff = -coeff

    # Phase into [0, pi/2) by quarter turns; values within PHASE_SNAP of a
    # boundary are pushed over it so exact identities stay exact.
    ph = phase % TAU
    n = int(math.floor((ph + PHASE_SNAP) / HALF_PI))
    ph -= n * HALF_PI
    if ph < 0.0:
        ph = 0.0
    n %= 4
    if n == 1:
        # f(x + pi/2): cos -> -sin, sin -> cos
        mode, coeff = (Mode.SIN, -coeff) if mode == Mode.COS else (Mode.COS, coeff)
    elif n == 2:
        coeff = -coeff
    elif n == 3:
        # f(x + 3*pi/2): cos -> sin, sin -> -cos
        mode, coeff = (Mode.SIN, coeff) if mode == Mode.COS else (Mode.COS, -coeff)
    return TrigTerm(float(coeff), powers, mode, freqs, ph)


def _canonical(coords: tuple[Coordinate, ...], raw: Iterable[TrigTerm]) -> tuple[TrigTerm, ...]:
    normed = [_normalize_term(t.coeff, t.powers, t.mode, t.freqs, t.phase) for t in raw]
    normed.sort(key=lambda t: (t.powers, int(t.mode), t.freqs, t.phase))
    merged: list[TrigTerm] = []
    for t in normed:
        if (
            merged
            and merged[-1].discrete_key() == t.discrete_key()
            and abs(merged[-1].phase - t.phase) <= PHASE_SNAP
        ):
            prev = merged.pop()
            t = TrigTerm(prev.coeff + t.coeff, prev.powers, prev.mode, prev.freqs, prev.phase)
        merged.append(t)
    return tuple(t for t in merged if abs(t.coeff) > ZERO_TOL)


def _coord_index(coords: tuple[Coordinate, ...], name: str) -> int:
    for i, c in enumerate(coords):
        if c.name == name:
            return i
    raise KeyError(f"no coordinate named {name!r}")


@dataclass(frozen=True)
class Expr:
    """A canonical sum of trigonometric polynomial terms over fixed coordinates.

    Construct through the classmethods or the parser; the ``terms`` tuple is
    assumed canonical and all arithmetic preserves that invariant.
    """

    coords: tuple[Coordinate, ...]
    terms: tuple[TrigTerm, ...]

    # -- construction ----------------------------------------------------

    @classmethod
    def from_terms(cls, coords: Sequence[Coordinate], terms: Iterable[TrigTerm]) -> "Expr":
        coords = tuple(coords)
        return cls(coords, _canonical(coords, terms))

    @classmethod
    def zero(cls, coords: Sequence[Coordinate]) -> "Expr":
        return cls(tuple(coords), ())

    @classmethod
    def const(cls, coords: Sequence[Coordinate], value: float) -> "Expr":
        coords = tuple(coords)
        n = len(coords)
        return cls.from_terms(coords, [TrigTerm(float(value), (0,) * n, Mode.CONST, (0,) * n, 0.0)])

    @classmethod
    def term(
        cls,
        coords: Sequence[Coordinate],
        coeff: float,
        powers: Sequence[int] | None = None,
        mode: Mode = Mode.CONST,
        freqs: Sequence[int] | None = None,
        phase: float = 0.0,
    ) -> "Expr":
        """General validated single-term builder."""
        coords = tuple(coords)
        n = len(coords)
        powers = tuple(int(p) for p in (powers if powers is not None else (0,) * n))
        freqs = tuple(int(k) for k in (freqs if freqs is not None else (0,) * n))
        if len(powers) != n or len(freqs) != n:
            raise ValueError("powers and freqs must match the coordinate tuple")
        for c, p, k in zip(coords, powers, freqs):
            if p and c.is_angular:
                raise ValueError(f"angular coordinate {c.name!r} cannot carry a power")
            if k and not c.trig_ok:
                raise ValueError(
                    f"coordinate {c.name!r} cannot appear inside a trigonometric argument"
                )
        return cls.from_terms(coords, [TrigTerm(float(coeff), powers, mode, freqs, float(phase))])

    @classmethod
    def coordinate(cls, coords: Sequence[Coordinate], name: str) -> "Expr":
        coords = tuple(coords)
        i = _coord_index(coords, name)
        powers = [0] * len(coords)
        powers[i] = 1
        return cls.term(coords, 1.0, powers)

    # -- structure --------------------------------------------------------

    @property
    def is_constant(self) -> bool:
        return all(
            t.mode == Mode.CONST and not any(t.powers) and not any(t.freqs) for t in self.terms
        )

    def constant_value(self) -> float:
        if not self.is_constant:
            raise ValueError("expression is not constant")
        return sum(t.coeff for t in self.terms)

    def max_coeff(self) -> float:
        return max((abs(t.coeff) for t in self.terms), default=0.0)

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        """Coefficient-bound zero test; a certificate only where monomial
        factors are bounded by 1 in magnitude."""
        return self.max_coeff() <= tol

    def _check_same_chart(self, other: "Expr") -> None:
        if self.coords != other.coords:
            raise ValueError("expressions live over different coordinate tuples")

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other: "Expr | float | int") -> "Expr":
        if isinstance(other, Expr):
            self._check_same_chart(other)
            return other
        if isinstance(other, (int, float)):
            return Expr.const(self.coords, float(other))
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: "Expr | float | int") -> "Expr":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return Expr.from_terms(self.coords, self.terms + rhs.terms)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(
            self.coords,
            tuple(TrigTerm(-t.coeff, t.powers, t.mode, t.freqs, t.phase) for t in self.terms),
        )

    def __sub__(self, other: "Expr | float | int") -> "Expr":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: "Expr | float | int") -> "Expr":
        return (-self) + other

    def __mul__(self, other: "Expr | float | int") -> "Expr":
        if isinstance(other, (int, float)):
            c = float(other)
            return Expr(
                self.coords,
                ()
                if c == 0.0
                else tuple(
                    TrigTerm(c * t.coeff, t.powers, t.mode, t.freqs, t.phase) for t in self.terms
                ),
            )
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        out: list[TrigTerm] = []
        for a in self.terms:
            for b in rhs.terms:
                out.extend(_term_product(a, b))
        return Expr.from_terms(self.coords, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are defined")
        out = Expr.const(self.coords, 1.0)
        for _ in range(n):
            out = out * self
        return out

    # -- calculus ---------------------------------------------------------

    def partial(self, name: str) -> "Expr":
        """Exact partial derivative with respect to the named coordinate."""
        i = _coord_index(self.coords, name)
        out: list[TrigTerm] = []
        for t in self.terms:
            p = t.powers[i]
            if p:
                powers = list(t.powers)
                powers[i] = p - 1
                out.append(TrigTerm(t.coeff * p, tuple(powers), t.mode, t.freqs, t.phase))
            k = t.freqs[i]
            if k and t.mode == Mode.COS:
                out.append(TrigTerm(-t.coeff * k, t.powers, Mode.SIN, t.freqs, t.phase))
            elif k and t.mode == Mode.SIN:
                out.append(TrigTerm(t.coeff * k, t.powers, Mode.COS, t.freqs, t.phase))
        return Expr.from_terms(self.coords, out)

    # -- evaluation -------------------------------------------------------

    def evaluate(self, values: Mapping[str, float | np.ndarray]) -> float | np.ndarray:
        arrays = [np.asarray(values[c.name], dtype=float) for c in self.coords]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        out = np.zeros(shape)
        for t in self.terms:
            acc = np.full(shape, t.coeff)
            for i, p in enumerate(t.powers):
                if p:
                    acc = acc * arrays[i] ** p
            if t.mode != Mode.CONST:
                arg = np.full(shape, t.phase)
                for i, k in enumerate(t.freqs):
                    if k:
                        arg = arg + k * arrays[i]
                acc = acc * (np.cos(arg) if t.mode == Mode.COS else np.sin(arg))
            out = out + acc
        return float(out) if out.ndim == 0 else out

    def compile(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized evaluator taking points stacked on the last axis."""
        terms = self.terms

        def fn(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, dtype=float)
            out = np.zeros(pts.shape[:-1])
            for t in terms:
                acc = np.full(pts.shape[:-1], t.coeff)
                for i, p in enumerate(t.powers):
                    if p:
                        acc = acc * pts[..., i] ** p
                if t.mode != Mode.CONST:
                    arg = np.full(pts.shape[:-1], t.phase)
                    for i, k in enumerate(t.freqs):
                        if k:
                            arg = arg + k * pts[..., i]
                    acc = acc * (np.cos(arg) if t.mode == Mode.COS else np.sin(arg))
                out = out + acc
            return out

        return fn

    # -- substitution -----------------------------------------------------

    def substitute_constants(self, values: Mapping[str, float]) -> "Expr":
        """Restrict to the slice where the named coordinates take fixed values.

        Returns an expression over the remaining coordinates, in their
        original order.  Substituting 0 into a negative power raises.
        """
        fixed = {name: float(v) for name, v in values.items()}
        for name in fixed:
            _coord_index(self.coords, name)
        keep = [i for i, c in enumerate(self.coords) if c.name not in fixed]
        new_coords = tuple(self.coords[i] for i in keep)
        out: list[TrigTerm] = []
        for t in self.terms:
            coeff = t.coeff
            phase = t.phase
            dead = False
            for i, c in enumerate(self.coords):
                if c.name not in fixed:
                    continue
                v = fixed[c.name]
                p = t.powers[i]
                if p:
                    if v == 0.0 and p < 0:
                        raise ValueError(f"Laurent pole: {c.name}^({p}) at {c.name} = 0")
                    coeff *= v**p
                    if coeff == 0.0:
                        dead = True
                        break
                k = t.freqs[i]
                if k:
                    phase += k * v
            if dead:
                continue
            powers = tuple(t.powers[i] for i in keep)
            freqs = tuple(t.freqs[i] for i in keep)
            out.append(TrigTerm(coeff, powers, t.mode, freqs, phase))
        return Expr.from_terms(new_coords, out)

    def substitute_integer_affine(
        self, mapping: Mapping[str, tuple[Mapping[str, int], float]]
    ) -> "Expr":
        """Exact precomposition with an integer-affine coordinate map.

        ``mapping`` sends a coordinate name to ``(linear_part, offset)`` where
        ``linear_part`` maps coordinate names to integer multipliers.
        Unnamed coordinates map to themselves.  A coordinate carrying a
        Laurent power must map to a signed single coordinate with no offset.
        """
        n = len(self.coords)
        idx = {c.name: i for i, c in enumerate(self.coords)}
        rows: list[tuple[tuple[int, ...], float]] = []
        for i, c in enumerate(self.coords):
            if c.name in mapping:
                linear, offset = mapping[c.name]
                row = [0] * n
                for name, mult in linear.items():
                    if int(mult) != mult:
                        raise ValueError("substitution multipliers must be integers")
                    row[idx[name]] += int(mult)
                rows.append((tuple(row), float(offset)))
            else:
                row = [0] * n
                row[i] = 1
                rows.append((tuple(row), 0.0))

        out: list[TrigTerm] = []
        for t in self.terms:
            coeff = t.coeff
            powers = [0] * n
            for i, p in enumerate(t.powers):
                if not p:
                    continue
                row, offset = rows[i]
                nonzero = [(j, m) for j, m in enumerate(row) if m]
                if offset != 0.0 or len(nonzero) != 1 or abs(nonzero[0][1]) != 1:
                    raise ValueError(
                        f"power of {self.coords[i].name!r} cannot be pushed through "
                        "a non-permutation substitution"
                    )
                j, m = nonzero[0]
                if self.coords[j].is_angular:
                    raise ValueError(
                        f"substitution would put a power on angular coordinate "
                        f"{self.coords[j].name!r}"
                    )
                powers[j] += p
                coeff *= float(m) ** p
            freqs = [0] * n
            phase = t.phase
            for i, k in enumerate(t.freqs):
                if not k:
                    continue
                row, offset = rows[i]
                for j, m in enumerate(row):
                    if m:
                        freqs[j] += k * m
                phase += k * offset
            for j, k in enumerate(freqs):
                if k and not self.coords[j].trig_ok:
                    raise ValueError(
                        f"substitution would put a frequency on coordinate "
                        f"{self.coords[j].name!r}"
                    )
            out.append(TrigTerm(coeff, tuple(powers), t.mode, tuple(freqs), phase))
        return Expr.from_terms(self.coords, out)

    def with_coords(self, new_coords: Sequence[Coordinate]) -> "Expr":
        """Rename coordinates positionally; kinds must match."""
        new_coords = tuple(new_coords)
        if len(new_coords) != len(self.coords):
            raise ValueError("coordinate tuples differ in length")
        for old, new in zip(self.coords, new_coords):
            if old.kind != new.kind:
                raise ValueError(f"kind mismatch renaming {old.name!r} to {new.name!r}")
        return Expr(new_coords, self.terms)

    # -- output -----------------------------------------------------------

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        chunks: list[str] = []
        for t in self.terms:
            body = _term_body(self.coords, t)
            if not chunks:
                chunks.append(f"-{body}" if t.coeff < 0 else body)
            else:
                chunks.append(f"{'-' if t.coeff < 0 else '+'} {body}")
        return " ".join(chunks)

    def __str__(self) -> str:
        return self.to_string()


def _term_product(a: TrigTerm, b: TrigTerm) -> list[TrigTerm]:
    coeff = a.coeff * b.coeff
    powers = tuple(p + q for p, q in zip(a.powers, b.powers))
    if a.mode == Mode.CONST and b.mode == Mode.CONST:
        return [TrigTerm(coeff, powers, Mode.CONST, a.freqs, 0.0)]
    if a.mode == Mode.CONST:
        return [TrigTerm(coeff, powers, b.mode, b.freqs, b.phase)]
    if b.mode == Mode.CONST:
        return [TrigTerm(coeff, powers, a.mode, a.freqs, a.phase)]
    diff = tuple(p - q for p, q in zip(a.freqs, b.freqs))
    summ = tuple(p + q for p, q in zip(a.freqs, b.freqs))
    dph = a.phase - b.phase
    sph = a.phase + b.phase
    half = 0.5 * coeff
    # product-to-sum identities
    if a.mode == Mode.COS and b.mode == Mode.COS:
        return [
            TrigTerm(half, powers, Mode.COS, diff, dph),
            TrigTerm(half, powers, Mode.COS, summ, sph),
        ]
    if a.mode == Mode.SIN and b.mode == Mode.SIN:
        return [
            TrigTerm(half, powers, Mode.COS, diff, dph),
            TrigTerm(-half, powers, Mode.COS, summ, sph),
        ]
    if a.mode == Mode.SIN and b.mode == Mode.COS:
        return [
            TrigTerm(half, powers, Mode.SIN, summ, sph),
            TrigTerm(half, powers, Mode.SIN, diff, dph),
        ]
    # cos * sin
    return [
        TrigTerm(half, powers, Mode.SIN, summ, sph),
        TrigTerm(-half, powers, Mode.SIN, diff, dph),
    ]


def canonical_equal(a: Expr, b: Expr, tol: float = 1e-9) -> bool:
    """Whether two canonical expressions agree coefficient-by-coefficient.

    Terms are matched on (powers, mode, frequencies) and paired by phase
    within ``tol``; paired coefficients must agree within ``tol`` and
    unpaired terms must have coefficient magnitude at most ``tol``.
    """
    if a.coords != b.coords:
        return False

    def grouped(e: Expr) -> dict[tuple, list[TrigTerm]]:
        groups: dict[tuple, list[TrigTerm]] = {}
        for t in e.terms:
            groups.setdefault(t.discrete_key(), []).append(t)
        return groups

    ga, gb = grouped(a), grouped(b)
    for key in set(ga) | set(gb):
        ta = ga.get(key, [])
        tb = gb.get(key, [])
        i = j = 0
        while i < len(ta) and j < len(tb):
            if abs(ta[i].phase - tb[j].phase) <= tol:
                if abs(ta[i].coeff - tb[j].coeff) > tol:
                    return False
                i += 1
                j += 1
            elif ta[i].phase < tb[j].phase:
                if abs(ta[i].coeff) > tol:
                    return False
                i += 1
            else:
                if abs(tb[j].coeff) > tol:
                    return False
                j += 1
        for t in ta[i:] + tb[j:]:
            if abs(t.coeff) > tol:
                return False
    return True


# -- pretty printing -------------------------------------------------------


def _fmt_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _linarg_string(coords: tuple[Coordinate, ...], t: TrigTerm) -> str:
    parts: list[str] = []
    for c, k in zip(coords, t.freqs):
        if not k:
            continue
        body = c.name if abs(k) == 1 else f"{abs(k)}*{c.name}"
        if not parts:
            parts.append(body if k > 0 else f"-{body}")
        else:
            parts.append(f"{'+' if k > 0 else '-'} {body}")
    if t.phase != 0.0:
        parts.append(f"+ {_fmt_float(t.phase)}")
    return " ".join(parts)


def _term_body(coords: tuple[Coordinate, ...], t: TrigTerm) -> str:
    factors: list[str] = []
    for c, p in zip(coords, t.powers):
        if p == 0:
            continue
        factors.append(c.name if p == 1 else f"{c.name}^{p}")
    if t.mode != Mode.CONST:
        fn = "cos" if t.mode == Mode.COS else "sin"
        factors.append(f"{fn}({_linarg_string(coords, t)})")
    mag = abs(t.coeff)
    if not factors or mag != 1.0:
        factors.insert(0, _fmt_float(mag))
    return "*".join(factors)


# -- parser ------------------------------------------------------------------


class ParseError(ValueError):
    """Syntax or validation error in an expression string, with position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op"
    text: str
    value: float
    pos: int


_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*^()])"
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(_Token("num", m.group(), float(m.group()), pos))
        elif m.lastgroup == "name":
            tokens.append(_Token("name", m.group(), 0.0, pos))
        else:
            tokens.append(_Token("op", m.group(), 0.0, pos))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent over: expr := term (+- term)*, term := factor (* factor)*,
    factor := number | coord[^int] | cos/sin(linarg) | (expr)."""

    def __init__(self, text: str, coords: Sequence[Coordinate]) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.coords = tuple(coords)
        self.index = {c.name: i for i, c in enumerate(self.coords)}

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _at_op(self, symbols: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "op" and tok.text in symbols

    def _advance(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.pos += 1
        return tok

    def _expect_op(self, symbol: str) -> None:
        tok = self._peek()
        if tok is None:
            raise ParseError(f"expected {symbol!r}", len(self.text))
        if tok.kind != "op" or tok.text != symbol:
            raise ParseError(f"expected {symbol!r}", tok.pos)
        self.pos += 1

    def parse(self) -> Expr:
        e = self.expr()
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok.text!r}", tok.pos)
        return e

    def expr(self) -> Expr:
        negate = False
        if self._at_op("+-"):
            negate = self._advance().text == "-"
        out = self.term()
        if negate:
            out = -out
        while self._at_op("+-"):
            op = self._advance().text
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Expr:
        out = self.factor()
        while self._at_op("*"):
            self._advance()
            out = out * self.factor()
        return out

    def factor(self) -> Expr:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            e = self.expr()
            self._expect_op(")")
            return e
        if tok.kind == "num":
            self._advance()
            return Expr.const(self.coords, tok.value)
        if tok.kind == "name":
            if tok.text in ("cos", "sin"):
                self._advance()
                self._expect_op("(")
                freqs, phase = self.linarg()
                self._expect_op(")")
                mode = Mode.COS if tok.text == "cos" else Mode.SIN
                return Expr.term(self.coords, 1.0, None, mode, freqs, phase)
            if tok.text in self.index:
                self._advance()
                i = self.index[tok.text]
                c = self.coords[i]
                if c.is_angular:
                    raise ParseError(
                        f"angular coordinate {c.name!r} may appear only inside cos or sin",
                        tok.pos,
                    )
                p = 1
                if self._at_op("^"):
                    self._advance()
                    p = self._exponent()
                powers = [0] * len(self.coords)
                powers[i] = p
                return Expr.term(self.coords, 1.0, powers)
            if tok.text == "pi":
                self._advance()
                return Expr.const(self.coords, math.pi)
            raise ParseError(f"unknown coordinate {tok.text!r}", tok.pos)
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)

    def _exponent(self) -> int:
        neg = False
        if self._at_op("-"):
            self._advance()
            neg = True
        tok = self._advance()
        if tok.kind != "num" or not tok.text.isdigit():
            raise ParseError("exponent must be an integer", tok.pos)
        p = int(tok.text)
        return -p if neg else p

    def linarg(self) -> tuple[tuple[int, ...], float]:
        """Sum of integer multiples of trig-capable coordinates plus constants."""
        freqs = [0] * len(self.coords)
        phase = 0.0
        first = True
        while True:
            sign = 1
            if self._at_op("+-"):
                sign = -1 if self._advance().text == "-" else 1
            elif not first:
                break
            first = False
            tok = self._advance()
            if tok.kind == "num":
                if self._at_op("*"):
                    self._advance()
                    self._apply_freq(freqs, tok, sign, self._advance())
                else:
                    phase += sign * tok.value
            elif tok.kind == "name":
                if tok.text == "pi" and tok.text not in self.index:
                    phase += sign * math.pi
                elif tok.text in self.index:
                    unit = _Token("num", "1", 1.0, tok.pos)
                    self._apply_freq(freqs, unit, sign, tok)
                else:
                    raise ParseError(f"unknown coordinate {tok.text!r}", tok.pos)
            else:
                raise ParseError(f"unexpected token {tok.text!r}", tok.pos)
        return tuple(freqs), phase

    def _apply_freq(self, freqs: list[int], num_tok: _Token, sign: int, name_tok: _Token) -> None:
        if name_tok.kind != "name":
            raise ParseError("expected a coordinate name", name_tok.pos)
        if name_tok.text not in self.index:
            raise ParseError(f"unknown coordinate {name_tok.text!r}", name_tok.pos)
        i = self.index[name_tok.text]
        c = self.coords[i]
        if not c.trig_ok:
            raise ParseError(
                f"coordinate {c.name!r} may not appear inside a trigonometric argument",
                name_tok.pos,
            )
        if num_tok.value != int(num_tok.value):
            raise ParseError(
                f"non-integer frequency {num_tok.text} on coordinate {c.name!r}",
                num_tok.pos,
            )
        k = sign * int(num_tok.value)
        freqs[i] += k
        if c.kind == KIND_LINEAR and abs(freqs[i]) > 1:
            raise ParseError(
                f"frequency magnitude {abs(freqs[i])} not allowed on linear coordinate {c.name!r}",
                num_tok.pos,
            )


def parse_expression(text: str, coords: Sequence[Coordinate]) -> Expr:
    """Parse an expression string over the given coordinates.

    Raises ParseError with a character position for syntax errors, unknown
    coordinates, angular coordinates outside a trigonometric argument,
    non-integer frequencies, and over-large frequencies on linear
    coordinates.
    """
    return _Parser(text, coords).parse()
