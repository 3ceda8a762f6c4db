"""Format parameterization, packed HUB/conventional encodings and exact values.

A HUB significand with ``f`` stored fraction bits represents

    M = 1 + sum(M_i * 2**-i, i = 1..f) + 2**-(f+1)

so every normal HUB number is an odd multiple of half a conventional ULP.
The stored bits are the *representative* form; arithmetic works on the
``f + 2`` bit *operational* form ``1.M_1 ... M_f 1``.

Both encodings share the packed layout ``[sign | exp_field | frac_field]``
(MSB first).  ``exp_field == 0`` is zero and ``exp_field == 2**e - 1`` is
Inf/NaN; there are no subnormals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple


class EncodingError(ValueError):
    """Raised for malformed field values or bit patterns."""


class ClassError(ValueError):
    """Raised when an operation needs a Normal operand and gets a special."""


class FloatClass(enum.Enum):
    ZERO = "zero"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"


@dataclass(frozen=True, slots=True)
class FormatSpec:
    exp_bits: int
    frac_bits: int
    exp_bias: int = field(init=False, repr=False, compare=False)
    emin: int = field(init=False, repr=False, compare=False)
    emax: int = field(init=False, repr=False, compare=False)
    exp_all_ones: int = field(init=False, repr=False, compare=False)
    frac_mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e, f = self.exp_bits, self.frac_bits
        if not isinstance(e, int) or not 2 <= e <= 15:
            raise EncodingError(f"exp_bits must be in [2, 15], got {e!r}")
        if not isinstance(f, int) or not 1 <= f <= 63:
            raise EncodingError(f"frac_bits must be in [1, 63], got {f!r}")
        bias = (1 << (e - 1)) - 1
        object.__setattr__(self, "exp_bias", bias)
        object.__setattr__(self, "emin", 1 - bias)
        object.__setattr__(self, "emax", (1 << e) - 2 - bias)
        object.__setattr__(self, "exp_all_ones", (1 << e) - 1)
        object.__setattr__(self, "frac_mask", (1 << f) - 1)

    @property
    def total_bits(self) -> int:
        return 1 + self.exp_bits + self.frac_bits

    @property
    def hex_digits(self) -> int:
        return (self.total_bits + 3) // 4

    @property
    def encoding_count(self) -> int:
        return 1 << self.total_bits

    @property
    def normal_count(self) -> int:
        return 2 * (self.exp_all_ones - 1) << self.frac_bits

    def __str__(self):
        return f"(e={self.exp_bits}, f={self.frac_bits})"


HUB32 = FormatSpec(8, 23)
HUB64 = FormatSpec(11, 52)
PRESETS = {"hub32": HUB32, "hub64": HUB64}


@dataclass(frozen=True, slots=True)
class Special:
    """Class tag returned by decoders for Zero, Inf and NaN encodings."""

    kind: FloatClass
    sign: int = 0


class _ExactFields(NamedTuple):
    sign: int
    mantissa: int
    exp2: int


class ExactValue(_ExactFields):
    """Exact dyadic rational ``(-1)**sign * mantissa * 2**exp2``.

    Instances are canonical: the mantissa is odd, or the value is the single
    zero ``(0, 0, 0)``.  Construct through :meth:`make` unless the triple is
    known to be canonical already.
    """

    __slots__ = ()

    def __new__(cls, sign: int, mantissa: int, exp2: int):
        if mantissa < 0 or sign not in (0, 1):
            raise ValueError(f"bad exact value fields {(sign, mantissa, exp2)!r}")
        if mantissa == 0:
            if sign or exp2:
                raise ValueError("zero must be canonical (0, 0, 0)")
        elif not mantissa & 1:
            raise ValueError(f"mantissa {mantissa} is not odd; use ExactValue.make")
        return tuple.__new__(cls, (sign, mantissa, exp2))

    @classmethod
    def make(cls, sign: int, mantissa: int, exp2: int) -> ExactValue:
        if mantissa == 0:
            return ZERO_EXACT
        tz = (mantissa & -mantissa).bit_length() - 1
        return tuple.__new__(cls, (sign, mantissa >> tz, exp2 + tz))

    @classmethod
    def from_fraction(cls, q: Fraction | int) -> ExactValue:
        """Convert a dyadic rational exactly; non-dyadic input raises ValueError."""
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        sign = 1 if q < 0 else 0
        return cls.make(sign, abs(q.numerator), -(den.bit_length() - 1))

    def to_fraction(self) -> Fraction:
        v = Fraction(self.mantissa) * Fraction(2) ** self.exp2
        return -v if self.sign else v

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def normalized_exponent(self) -> int:
        """Exponent ``E'`` with ``|v| = m * 2**E'`` and ``m`` in [1, 2)."""
        if not self.mantissa:
            raise ValueError("zero has no normalized exponent")
        return self.exp2 + self.mantissa.bit_length() - 1

    def __neg__(self) -> ExactValue:
        if not self.mantissa:
            return self
        return tuple.__new__(ExactValue, (self.sign ^ 1, self.mantissa, self.exp2))

    def __abs__(self) -> ExactValue:
        return tuple.__new__(ExactValue, (0, self.mantissa, self.exp2)) if self.sign else self

    def __str__(self):
        return format_dyadic(self.sign, self.mantissa, self.exp2)

    def __repr__(self):
        return f"ExactValue(sign={self.sign}, mantissa={self.mantissa}, exp2={self.exp2})"


ZERO_EXACT = ExactValue(0, 0, 0)


def format_dyadic(sign: int, mantissa: int, exp2: int) -> str:
    """Exact decimal rendering of ``(-1)**sign * mantissa * 2**exp2``."""
    if exp2 >= 0:
        digits = str(mantissa << exp2)
    else:
        scaled = str(mantissa * 5 ** -exp2).rjust(-exp2 + 1, "0")
        whole, frac = scaled[:exp2], scaled[exp2:].rstrip("0")
        digits = f"{whole}.{frac}" if frac else whole
    return ("-" if sign and mantissa else "") + digits


class _Packed:
    """Shared behaviour of the two packed encodings (mixed into a NamedTuple)."""

    __slots__ = ()

    def __new__(cls, spec: FormatSpec, sign: int, exp_field: int, frac_field: int):
        if sign not in (0, 1):
            raise EncodingError(f"sign must be 0 or 1, got {sign!r}")
        if not 0 <= exp_field <= spec.exp_all_ones:
            raise EncodingError(f"exp_field {exp_field} outside [0, {spec.exp_all_ones}]")
        if not 0 <= frac_field <= spec.frac_mask:
            raise EncodingError(f"frac_field {frac_field} outside [0, {spec.frac_mask}]")
        if exp_field == 0 and frac_field:
            raise EncodingError("exp_field 0 with nonzero fraction (no subnormals)")
        return tuple.__new__(cls, (spec, sign, exp_field, frac_field))

    # the two encodings never compare equal to each other or to plain tuples
    def __eq__(self, other):
        return type(self) is type(other) and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = tuple.__hash__

    def __repr__(self):
        return (f"{type(self).__name__}({self.spec}, sign={self.sign}, "
                f"exp_field={self.exp_field}, frac_field={self.frac_field})")

    @property
    def fclass(self) -> FloatClass:
        ef = self.exp_field
        if ef == 0:
            return FloatClass.ZERO
        if ef == self.spec.exp_all_ones:
            return FloatClass.NAN if self.frac_field else FloatClass.INF
        return FloatClass.NORMAL

    @property
    def is_normal(self) -> bool:
        return 0 < self.exp_field < self.spec.exp_all_ones

    @property
    def unbiased_exp(self) -> int:
        return self.exp_field - self.spec.exp_bias

    @property
    def bits(self) -> int:
        spec = self.spec
        return ((self.sign << spec.exp_bits | self.exp_field) << spec.frac_bits) | self.frac_field

    def hex(self) -> str:
        return f"0x{self.bits:0{self.spec.hex_digits}X}"

    @classmethod
    def from_bits(cls, bits: int, spec: FormatSpec, daz: bool = False):
        """Unpack ``[sign | exp | frac]``.

        With ``daz`` the unused patterns ``exp_field == 0, frac != 0`` read as
        a signed zero instead of raising.
        """
        if not 0 <= bits < spec.encoding_count:
            raise EncodingError(
                f"bit pattern {bits:#x} does not fit {spec.total_bits} bits")
        frac = bits & spec.frac_mask
        exp = (bits >> spec.frac_bits) & spec.exp_all_ones
        sign = bits >> (spec.frac_bits + spec.exp_bits)
        if daz and exp == 0:
            frac = 0
        return cls(spec, sign, exp, frac)

    @classmethod
    def raw(cls, spec: FormatSpec, sign: int, exp_field: int, frac_field: int):
        """Unchecked constructor for datapath results known to be in range."""
        return tuple.__new__(cls, (spec, sign, exp_field, frac_field))

    @classmethod
    def zero(cls, spec: FormatSpec, sign: int = 0):
        return cls(spec, sign, 0, 0)

    @classmethod
    def inf(cls, spec: FormatSpec, sign: int = 0):
        return cls(spec, sign, spec.exp_all_ones, 0)

    @classmethod
    def nan(cls, spec: FormatSpec):
        return cls(spec, 0, spec.exp_all_ones, 1 << (spec.frac_bits - 1))

    def negate(self):
        return tuple.__new__(type(self), (self.spec, self.sign ^ 1, self.exp_field, self.frac_field))


class _PackedFields(NamedTuple):
    spec: FormatSpec
    sign: int
    exp_field: int
    frac_field: int


class HubFloat(_Packed, _PackedFields):
    """Packed HUB number; ``frac_field`` holds the representative form."""

    __slots__ = ()


class ConvFloat(_Packed, _PackedFields):
    """Packed conventional number with significand ``1.frac``."""

    __slots__ = ()


def _special_of(p) -> Special:
    fc = p.fclass
    return Special(fc, 0 if fc is FloatClass.NAN else p.sign)


def decode_hub(h: HubFloat) -> ExactValue | Special:
    if not h.is_normal:
        return _special_of(h)
    f = h.spec.frac_bits
    # 2**(f+1) + 2*frac + 1 is odd, so this triple is already canonical
    return tuple.__new__(ExactValue, (h.sign, (1 << (f + 1)) | (h.frac_field << 1) | 1,
                                      h.exp_field - h.spec.exp_bias - f - 1))


def decode_conv(c: ConvFloat) -> ExactValue | Special:
    if not c.is_normal:
        return _special_of(c)
    f = c.spec.frac_bits
    return ExactValue.make(c.sign, (1 << f) | c.frac_field,
                           c.exp_field - c.spec.exp_bias - f)


def operational_significand(h: HubFloat) -> int:
    """The ``f + 2`` bit word ``1.M_1..M_f 1`` as an integer."""
    if not h.is_normal:
        raise ClassError(f"operational form needs a Normal operand, got {h.fclass.value}")
    return (1 << (h.spec.frac_bits + 1)) | (h.frac_field << 1) | 1


def representative_from_operational(op: int, spec: FormatSpec) -> int:
    if op >> (spec.frac_bits + 2) or not op >> (spec.frac_bits + 1) or not op & 1:
        raise EncodingError(f"{op:#b} is not a normalized operational significand")
    return (op >> 1) & spec.frac_mask


def render_bits(value: int, width: int, int_bits: int = 1, tail: int = 0) -> str:
    """MSB-first bitstring with ``·`` after the integer part and ``|`` before the tail."""
    s = format(value, f"0{width}b")
    if len(s) != width:
        raise ValueError(f"{value:#b} does not fit in {width} bits")
    head, body = s[:int_bits], s[int_bits:]
    if tail:
        body = body[:-tail] + "|" + body[-tail:]
    return f"{head}·{body}"


def _range_checked(cls, spec, sign, exp, frac):
    if exp > spec.emax:
        return cls.inf(spec, sign)
    if exp < spec.emin:
        return cls.zero(spec, sign)
    return tuple.__new__(cls, (spec, sign, exp + spec.exp_bias, frac))


def _special_to(cls, v: Special, spec: FormatSpec):
    if v.kind is FloatClass.NAN:
        return cls.nan(spec)
    if v.kind is FloatClass.INF:
        return cls.inf(spec, v.sign)
    return cls.zero(spec, v.sign)


def round_exact_to_hub(v: ExactValue | Special, spec: FormatSpec, sign: int = 0) -> HubFloat:
    """Round to the HUB grid by truncating the fraction beyond ``f`` bits.

    ``sign`` only matters for the exact zero, which has no sign of its own.
    """
    if isinstance(v, Special):
        return _special_to(HubFloat, v, spec)
    m = v.mantissa
    if not m:
        return HubFloat.zero(spec, sign)
    f = spec.frac_bits
    n = m.bit_length()
    excess = n - 1 - f
    frac = (m >> excess if excess >= 0 else m << -excess) & spec.frac_mask
    return _range_checked(HubFloat, spec, v.sign, v.exp2 + n - 1, frac)


def round_exact_to_conv_rne(v: ExactValue | Special, spec: FormatSpec, sign: int = 0) -> ConvFloat:
    """Round-to-nearest-even onto the conventional grid.

    The overflow/underflow checks use the exponent after rounding.
    """
    if isinstance(v, Special):
        return _special_to(ConvFloat, v, spec)
    m = v.mantissa
    if not m:
        return ConvFloat.zero(spec, sign)
    f = spec.frac_bits
    n = m.bit_length()
    exp = v.exp2 + n - 1
    shift = n - 1 - f
    if shift <= 0:
        q = m << -shift
    else:
        q = m >> shift
        rem = m & ((1 << shift) - 1)
        half = 1 << (shift - 1)
        if rem > half or (rem == half and q & 1):
            q += 1
            if q >> (f + 1):
                q >>= 1
                exp += 1
    return _range_checked(ConvFloat, spec, v.sign, exp, q & spec.frac_mask)


def dyadic_proxy(q: Fraction, spec: FormatSpec) -> ExactValue:
    """An exact value that rounds like ``q`` under both rounding rules.

    Dyadic ``q`` converts exactly.  Otherwise ``|q|`` is cut to ``f + 3``
    significant bits and a sticky 1 is appended, which preserves truncation
    and round-to-nearest-even decisions.
    """
    q = Fraction(q)
    den = q.denominator
    if not den & (den - 1):
        return ExactValue.from_fraction(q)
    sign = 1 if q < 0 else 0
    a = abs(q)
    # floor(log2(a)) from the bit lengths, corrected by one comparison
    e = a.numerator.bit_length() - den.bit_length()
    if Fraction(2) ** e > a:
        e -= 1
    keep = spec.frac_bits + 3
    scaled = a * Fraction(2) ** (keep - 1 - e)
    m = scaled.numerator // scaled.denominator
    # non-dyadic values are never exact at any finite precision
    return ExactValue.make(sign, (m << 1) | 1, e - keep)
