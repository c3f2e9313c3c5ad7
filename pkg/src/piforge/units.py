"""Dimension vectors, unit parsing, and quantity conversion.

A unit is an integer exponent vector over eight base dimensions (length,
mass, time, current, temperature, amount, luminosity, information) plus a
positive rational scale relative to the canonical base unit.  Degree
Celsius is the single affine unit: it shares the temperature dimension
with kelvin and carries a +273.15 offset that is applied when converting
values, never when composing units.

Unit expressions follow a small grammar evaluated left to right::

    expr := term (("/" | "·" | "*") term)*
    term := prefix? token ("^" signed_int)?

"1" alone denotes the dimensionless unit.  "/" applies to the single
following term.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import IncompatibleDimensions, MalformedUnitExpression, UnknownUnitToken

DIMENSIONS = (
    "length",
    "mass",
    "time",
    "current",
    "temperature",
    "amount",
    "luminosity",
    "information",
)

_NDIMS = len(DIMENSIONS)
_ZERO_DIMS = (0,) * _NDIMS
_MAX_EXPONENT = 8

_ONE = Fraction(1)
_NO_OFFSET = Fraction(0)
_CELSIUS_OFFSET = Fraction(5463, 20)  # 273.15 K


def _dims(**exponents: int) -> tuple[int, ...]:
    vec = [0] * _NDIMS
    for name, exp in exponents.items():
        vec[DIMENSIONS.index(name)] = exp
    return tuple(vec)


@dataclass(frozen=True)
class UnitVector:
    """Dimension exponents, rational scale, and (for °C only) an affine offset."""

    dims: tuple[int, ...] = _ZERO_DIMS
    scale: Fraction = _ONE
    offset: Fraction = _NO_OFFSET

    def __post_init__(self) -> None:
        if len(self.dims) != _NDIMS:
            raise ValueError(f"dims must have {_NDIMS} entries")
        for exp in self.dims:
            if not isinstance(exp, int) or abs(exp) > _MAX_EXPONENT:
                raise ValueError(f"dimension exponent {exp!r} outside [-8, 8]")
        if self.scale <= 0:
            raise ValueError("unit scale must be positive")

    @property
    def is_dimensionless(self) -> bool:
        return self.dims == _ZERO_DIMS

    @property
    def is_affine(self) -> bool:
        return self.offset != 0


DIMENSIONLESS = UnitVector()

# token -> (dims, scale, offset)
_TOKENS: dict[str, tuple[tuple[int, ...], Fraction, Fraction]] = {
    "m": (_dims(length=1), _ONE, _NO_OFFSET),
    "kg": (_dims(mass=1), _ONE, _NO_OFFSET),
    "s": (_dims(time=1), _ONE, _NO_OFFSET),
    "A": (_dims(current=1), _ONE, _NO_OFFSET),
    "K": (_dims(temperature=1), _ONE, _NO_OFFSET),
    "mol": (_dims(amount=1), _ONE, _NO_OFFSET),
    "cd": (_dims(luminosity=1), _ONE, _NO_OFFSET),
    "bit": (_dims(information=1), _ONE, _NO_OFFSET),
    "B": (_dims(information=1), Fraction(8), _NO_OFFSET),
    "Hz": (_dims(time=-1), _ONE, _NO_OFFSET),
    "min": (_dims(time=1), Fraction(60), _NO_OFFSET),
    "h": (_dims(time=1), Fraction(3600), _NO_OFFSET),
    "ms": (_dims(time=1), Fraction(1, 1000), _NO_OFFSET),
    "us": (_dims(time=1), Fraction(1, 10**6), _NO_OFFSET),
    "km": (_dims(length=1), Fraction(1000), _NO_OFFSET),
    "°C": (_dims(temperature=1), _ONE, _CELSIUS_OFFSET),
}

_PREFIXES: dict[str, Fraction] = {
    "k": Fraction(10**3),
    "M": Fraction(10**6),
    "G": Fraction(10**9),
    "m": Fraction(1, 10**3),
    "u": Fraction(1, 10**6),
    "n": Fraction(1, 10**9),
}

_TERM_RE = re.compile(r"([A-Za-z°]+)(?:\^([+-]?\d+))?")


def _resolve_token(text: str, expr: str) -> tuple[tuple[int, ...], Fraction, Fraction]:
    if text in _TOKENS:
        return _TOKENS[text]
    if len(text) > 1 and text[0] in _PREFIXES and text[1:] in _TOKENS:
        dims, scale, offset = _TOKENS[text[1:]]
        if offset != 0:
            raise MalformedUnitExpression(
                f"prefix not allowed on affine unit °C in {expr!r}"
            )
        return dims, scale * _PREFIXES[text[0]], offset
    raise UnknownUnitToken(f"unknown unit token {text!r} in {expr!r}")


def parse_unit(expr: str) -> UnitVector:
    """Parse a unit expression into a :class:`UnitVector`."""

    text = "".join(expr.split())
    if not text:
        raise MalformedUnitExpression("empty unit expression")
    if text == "1":
        return DIMENSIONLESS

    dims = [0] * _NDIMS
    scale = _ONE
    offset = _NO_OFFSET
    pos = 0
    nterms = 0
    divide = False
    while pos < len(text):
        if nterms > 0:
            op = text[pos]
            if op not in ("/", "·", "*"):
                raise MalformedUnitExpression(
                    f"expected operator at position {pos} in {expr!r}"
                )
            divide = op == "/"
            pos += 1
        match = _TERM_RE.match(text, pos)
        if match is None or match.start() != pos:
            raise MalformedUnitExpression(
                f"expected unit term at position {pos} in {expr!r}"
            )
        token, exp_text = match.group(1), match.group(2)
        exponent = int(exp_text) if exp_text is not None else 1
        tok_dims, tok_scale, tok_offset = _resolve_token(token, expr)
        if tok_offset != 0:
            # °C must stand alone: products, quotients, and powers of an
            # affine unit have no meaning here.
            if nterms > 0 or exponent != 1 or match.end() != len(text):
                raise MalformedUnitExpression(
                    f"°C cannot be composed or exponentiated in {expr!r}"
                )
            return UnitVector(tuple(tok_dims), tok_scale, tok_offset)
        if divide:
            exponent = -exponent
        for i, base_exp in enumerate(tok_dims):
            dims[i] += base_exp * exponent
            if abs(dims[i]) > _MAX_EXPONENT:
                raise MalformedUnitExpression(
                    f"dimension exponent outside [-8, 8] in {expr!r}"
                )
        scale *= tok_scale**exponent
        nterms += 1
        pos = match.end()
    return UnitVector(tuple(dims), scale, offset)


def units_compatible(a: UnitVector, b: UnitVector) -> bool:
    """True iff both units share the same dimension exponents."""
    return a.dims == b.dims


@dataclass(frozen=True)
class Quantity:
    """A finite real value tagged with its unit."""

    value: float
    unit: UnitVector = DIMENSIONLESS

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"quantity value must be finite, got {self.value!r}")


def convert(q: Quantity, target: UnitVector) -> Quantity:
    """Re-express ``q`` in ``target`` units (same dimensions required)."""

    if not units_compatible(q.unit, target):
        raise IncompatibleDimensions(
            f"cannot convert between dimensions {q.unit.dims} and {target.dims}"
        )
    # Exact rational arithmetic, one final rounding to float.
    base = Fraction(q.value) * q.unit.scale + q.unit.offset
    value = (base - target.offset) / target.scale
    return Quantity(float(value), target)


def canonical_unit(unit: UnitVector) -> UnitVector:
    """The scale-1 unit this unit normalizes to (°C stays affine)."""
    if unit.is_affine:
        return unit
    if unit.scale == 1:
        return unit
    return UnitVector(unit.dims, _ONE, _NO_OFFSET)


def normalize(q: Quantity) -> Quantity:
    """Convert to the canonical scale-1 unit for the quantity's dimensions."""
    return convert(q, canonical_unit(q.unit))


_BASE_TOKENS = ("m", "kg", "s", "A", "K", "mol", "cd", "bit")
_HERTZ_DIMS = _dims(time=-1)


def render_unit(unit: UnitVector) -> str:
    """Canonical text for a normalized unit; parses back to an equal vector."""

    if unit.is_affine:
        return "°C"
    if unit.scale != 1:
        raise ValueError("only canonical scale-1 units have a rendering")
    if unit.is_dimensionless:
        return "1"
    if unit.dims == _HERTZ_DIMS:
        return "Hz"
    terms = [(t, e) for t, e in zip(_BASE_TOKENS, unit.dims) if e != 0]
    terms.sort(key=lambda te: te[1] < 0)  # numerator units first
    return "·".join(t if e == 1 else f"{t}^{e}" for t, e in terms)


HERTZ = parse_unit("Hz")
SECOND = parse_unit("s")
BIT = parse_unit("bit")
KELVIN = parse_unit("K")
CELSIUS = parse_unit("°C")
BIT_PER_SECOND = parse_unit("bit/s")
