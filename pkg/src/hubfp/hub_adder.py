"""Bit-accurate five-stage HUB floating-point adder.

The datapath word is ``f + 3`` bits wide: the ``f + 2`` bit operational
significand plus one sticky position below it.  Rounding to nearest is the
truncation in stage 5, so there is no rounding stage and no increment.

Stages:

1. order the operands by magnitude, compute the exponent difference ``d``
2. shift the smaller significand; the sticky position gets the bit shifted
   in for ``d == 1`` and the constant 1 for ``d >= 2`` (the discarded tail
   always contains the implicit LSB); two's complement on subtraction
3. add the aligned words, correct a carry-out by a right shift
4. leading-zero count
5. normalize and truncate to ``f`` fraction bits

Each stage is an integer kernel compiled with numba.  :func:`hub_pipeline`
composes them and returns every intermediate as a flat tuple (see
``HUB_FIELDS``); :func:`hub_add` wraps that tuple into stage records and
:func:`hub_add_batch` runs the same pipeline over arrays of operands.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from .formats import FormatSpec, HubFloat, render_bits
from .oracle import SpecMismatchError

# widest conventional raw sum is f + 5 bits and must stay below 2**63
MAX_DATAPATH_FRAC_BITS = 58


# -- integer kernels ------------------------------------------------------------

@njit(cache=True)
def leading_zeros(bits, width):
    """Leading zeros of a ``width``-bit word; ``width`` for zero."""
    n = width
    while bits:
        bits >>= 1
        n -= 1
    return n


@njit(cache=True)
def bypass_fields(sx, ex, fx, sy, ey, fy, top, f):
    """Special-value algebra on raw fields.

    Returns ``(bypassed, sign, exp_field, frac_field)``; ``bypassed`` is 0
    for Normal + Normal, where the other entries are meaningless.
    """
    if 0 < ex < top and 0 < ey < top:
        return 0, 0, 0, 0
    nan = (1, 0, top, 1 << (f - 1))
    if (ex == top and fx) or (ey == top and fy):
        return nan
    if ex == top:
        if ey == top and sy != sx:
            return nan
        return 1, sx, ex, fx
    if ey == top:
        return 1, sy, ey, fy
    if ex == 0 and ey == 0:
        return 1, sx & sy, 0, 0
    if ex == 0:
        return 1, sy, ey, fy
    return 1, sx, ex, fx


@njit(cache=True)
def order_operands(ex, fx, ey, fy):
    """1 when ``y`` has the larger (exp, frac); ties keep ``x`` first."""
    if ey > ex or (ey == ex and fy > fx):
        return 1
    return 0


@njit(cache=True)
def align_bits(small_operational, d, sub, f):
    width = f + 3
    if d == 0:
        bits = small_operational << 1
    elif d == 1:
        # lossless: the implicit LSB lands in the sticky position
        bits = small_operational
    elif d >= width:
        bits = 1
    else:
        # every discarded tail contains the implicit LSB, so sticky is 1
        bits = ((small_operational << 1) >> d) | 1
    if sub:
        bits = -bits & ((1 << width) - 1)
    return bits


@njit(cache=True)
def add_aligned(large_bits, small_bits, sub, width):
    """Returns ``(raw_sum, overflow, corrected)``."""
    raw = large_bits + small_bits
    if sub:
        # large >= small, so the carry out of a complemented add is discarded
        return raw, 0, raw & ((1 << width) - 1)
    if raw >> width:
        return raw, 1, raw >> 1
    return raw, 0, raw


@njit(cache=True)
def normalize_truncate_bits(word, result_exp, lzc, sign, f, bias):
    """Returns ``(normalized, final_exp, sign, exp_field, frac_field)``."""
    width = f + 3
    if lzc == width:
        return 0, result_exp, 0, 0, 0
    normalized = (word << lzc) & ((1 << width) - 1)
    exp = result_exp - lzc
    if exp > bias:
        return normalized, exp, sign, 2 * bias + 1, 0
    if exp < 1 - bias:
        return normalized, exp, sign, 0, 0
    return normalized, exp, sign, exp + bias, (normalized >> 2) & ((1 << f) - 1)


@njit(cache=True)
def _front(sx, ex, fx, sy, ey, fy, f):
    """Stage 1 on raw fields: order the operands, build both operational significands."""
    swapped = order_operands(ex, fx, ey, fy)
    if swapped:
        sl, el, fl, es, fs = sy, ey, fy, ex, fx
    else:
        sl, el, fl, es, fs = sx, ex, fx, ey, fy
    sub = 1 if sx != sy else 0
    op_small = (1 << (f + 1)) | (fs << 1) | 1
    op_large = (1 << (f + 1)) | (fl << 1) | 1
    return swapped, el - es, sub, op_small, op_large, sl, el


@njit(cache=True)
def _middle(op_large, aligned, sub, el, f, bias):
    """Stages 3 and 4."""
    raw, overflow, corrected = add_aligned(op_large << 1, aligned, sub, f + 3)
    result_exp = el - bias + overflow
    return raw, overflow, corrected, result_exp, leading_zeros(corrected, f + 3)


@njit(cache=True)
def hub_pipeline(sx, ex, fx, sy, ey, fy, f, bias, align_fn, finish_fn):
    """All five stages on raw fields; the stage 2 and 5 kernels are parameters."""
    bypassed, rs, re, rf = bypass_fields(sx, ex, fx, sy, ey, fy, 2 * bias + 1, f)
    if bypassed:
        return (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, rs, re, rf)
    swapped, d, sub, op_small, op_large, sl, el = _front(sx, ex, fx, sy, ey, fy, f)
    aligned = align_fn(op_small, d, sub, f)
    raw, overflow, corrected, result_exp, lzc = _middle(op_large, aligned, sub, el, f, bias)
    normalized, final_exp, rs, re, rf = finish_fn(corrected, result_exp, lzc, sl, f, bias)
    return (0, f + 3, swapped, d, sub, op_small, aligned, raw, overflow, corrected,
            result_exp, lzc, normalized, final_exp, sl, rs, re, rf)


@njit(cache=True)
def hub_core(sx, ex, fx, sy, ey, fy, f, bias):
    """``hub_pipeline`` with the standard kernels, called directly so it can be cached."""
    bypassed, rs, re, rf = bypass_fields(sx, ex, fx, sy, ey, fy, 2 * bias + 1, f)
    if bypassed:
        return (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, rs, re, rf)
    swapped, d, sub, op_small, op_large, sl, el = _front(sx, ex, fx, sy, ey, fy, f)
    aligned = align_bits(op_small, d, sub, f)
    raw, overflow, corrected, result_exp, lzc = _middle(op_large, aligned, sub, el, f, bias)
    normalized, final_exp, rs, re, rf = normalize_truncate_bits(corrected, result_exp, lzc,
                                                                sl, f, bias)
    return (0, f + 3, swapped, d, sub, op_small, aligned, raw, overflow, corrected,
            result_exp, lzc, normalized, final_exp, sl, rs, re, rf)


HUB_FIELDS = ("bypassed", "width", "swapped", "exp_diff", "sub", "small_operational",
              "aligned_small", "raw_sum", "overflow", "corrected", "result_exp", "lzc",
              "normalized", "final_exp", "large_sign", "result_sign", "result_exp_field",
              "result_frac")


@njit(cache=True)
def _hub_batch(sx, ex, fx, sy, ey, fy, f, bias, align_fn, finish_fn, out):
    for i in range(sx.shape[0]):
        row = hub_pipeline(sx[i], ex[i], fx[i], sy[i], ey[i], fy[i], f, bias,
                           align_fn, finish_fn)
        for k in range(len(row)):
            out[i, k] = row[k]


# -- records --------------------------------------------------------------------

class AlignedWord(NamedTuple):
    bits: int
    width: int
    negative_flag: int = 0

    def render(self, tail: int = 1) -> str:
        return render_bits(self.bits, self.width, tail=tail)


class Stage1Record(NamedTuple):
    swapped: int
    exp_diff: int
    effective_op: str

    def to_dict(self) -> dict:
        return self._asdict()


class Stage2Record(NamedTuple):
    operand: int
    aligned_small: AlignedWord
    sticky: int
    complemented: int

    def to_dict(self) -> dict:
        return {"aligned_small": self.aligned_small.render(),
                "sticky": self.sticky, "complemented": self.complemented}


class Stage3Record(NamedTuple):
    raw_sum: int
    raw_width: int
    overflow: int
    corrected: AlignedWord
    result_exp: int

    def to_dict(self) -> dict:
        return {"raw_sum": render_bits(self.raw_sum, self.raw_width, int_bits=2, tail=1),
                "overflow": self.overflow, "corrected": self.corrected.render(),
                "result_exp": self.result_exp}


class Stage4Record(NamedTuple):
    lzc: int

    def to_dict(self) -> dict:
        return {"lzc": self.lzc}


class Stage5Record(NamedTuple):
    normalized: AlignedWord
    final_exp: int
    result: HubFloat

    def to_dict(self) -> dict:
        return {"normalized": self.normalized.render(), "final_exp": self.final_exp,
                "result": self.result.hex()}


class HubAddTrace(NamedTuple):
    """Per-stage record of one addition; all stages are None when bypassed."""

    stage1: Stage1Record | None = None
    stage2: Stage2Record | None = None
    stage3: Stage3Record | None = None
    stage4: Stage4Record | None = None
    stage5: Stage5Record | None = None
    bypassed: bool = False

    @property
    def stages(self) -> tuple:
        if self.bypassed:
            return ()
        return (self.stage1, self.stage2, self.stage3, self.stage4, self.stage5)

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    @property
    def words(self) -> tuple[AlignedWord, ...]:
        if self.bypassed:
            return ()
        return (self.stage2.aligned_small, self.stage3.corrected, self.stage5.normalized)

    def to_dict(self) -> dict:
        d: dict = {"bypassed": self.bypassed, "stage_count": self.stage_count}
        for i, rec in enumerate(self.stages, 1):
            d[f"stage{i}"] = rec.to_dict()
        return d


def sticky_position_bit(aligned: int, sub: int, width: int) -> int:
    """The bit the aligned small operand carries in its sticky position."""
    if sub:
        aligned = -aligned & ((1 << width) - 1)
    return aligned & 1


# -- public stage operations ----------------------------------------------------

def stage1_compare(x, y):
    """Returns ``(large, small, exp_diff, effective_op)``."""
    if order_operands(x.exp_field, x.frac_field, y.exp_field, y.frac_field):
        large, small = y, x
    else:
        large, small = x, y
    return large, small, large.exp_field - small.exp_field, "sub" if x.sign != y.sign else "add"


def stage2_align(small_operational: int, d: int, effective_op: str, frac_bits: int) -> AlignedWord:
    sub = 1 if effective_op == "sub" else 0
    return AlignedWord(align_bits(small_operational, d, sub, frac_bits), frac_bits + 3, sub)


def stage3_add(large_word: AlignedWord, small_word: AlignedWord, exp_large: int) -> Stage3Record:
    raw, overflow, corrected = add_aligned(large_word.bits, small_word.bits,
                                           small_word.negative_flag, large_word.width)
    return Stage3Record(raw, large_word.width + 1, overflow,
                        AlignedWord(corrected, large_word.width), exp_large + overflow)


def stage4_lzc(word: AlignedWord) -> int:
    return leading_zeros(word.bits, word.width)


def stage5_normalize_truncate(word: AlignedWord, result_exp: int, lzc: int, sign: int,
                              spec: FormatSpec) -> Stage5Record:
    normalized, exp, rs, re, rf = normalize_truncate_bits(
        word.bits, result_exp, lzc, sign, spec.frac_bits, spec.exp_bias)
    return Stage5Record(AlignedWord(normalized, word.width), exp, HubFloat(spec, rs, re, rf))


# -- adder entry points -----------------------------------------------------------

def check_operands(x, y, cls):
    if type(x) is not cls or type(y) is not cls or (x.spec is not y.spec and x.spec != y.spec):
        raise SpecMismatchError(f"operands must be {cls.__name__} of one format: {x!r}, {y!r}")
    check_datapath_spec(x.spec)


def check_datapath_spec(spec: FormatSpec):
    if spec.frac_bits > MAX_DATAPATH_FRAC_BITS:
        raise ValueError(f"datapath model supports frac_bits <= {MAX_DATAPATH_FRAC_BITS}, "
                         f"got {spec.frac_bits}")


def hub_trace_from_fields(fields: tuple, spec: FormatSpec) -> tuple[HubFloat, HubAddTrace]:
    (bypassed, width, swapped, d, sub, op_small, aligned, raw, overflow, corrected,
     result_exp, lzc, normalized, final_exp, _, rs, re, rf) = fields
    result = HubFloat(spec, rs, re, rf)
    if bypassed:
        return result, HubAddTrace(bypassed=True)
    return result, HubAddTrace(
        Stage1Record(swapped, d, "sub" if sub else "add"),
        Stage2Record(op_small, AlignedWord(aligned, width, sub),
                     sticky_position_bit(aligned, sub, width), sub),
        Stage3Record(raw, width + 1, overflow, AlignedWord(corrected, width), result_exp),
        Stage4Record(lzc),
        Stage5Record(AlignedWord(normalized, width), final_exp, result),
    )


def hub_add(x: HubFloat, y: HubFloat) -> tuple[HubFloat, HubAddTrace]:
    check_operands(x, y, HubFloat)
    spec = x.spec
    fields = hub_core(x.sign, x.exp_field, x.frac_field, y.sign, y.exp_field, y.frac_field,
                      spec.frac_bits, spec.exp_bias)
    return hub_trace_from_fields(fields, spec)


def hub_sub(x: HubFloat, y: HubFloat) -> tuple[HubFloat, HubAddTrace]:
    return hub_add(x, y.negate())


def unpack_fields(spec: FormatSpec, bits) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split packed patterns into int64 (sign, exp, frac); zero exponents clear the fraction."""
    bits = np.asarray(bits, dtype=np.uint64)
    frac = (bits & np.uint64(spec.frac_mask)).astype(np.int64)
    exp = ((bits >> np.uint64(spec.frac_bits)) & np.uint64(spec.exp_all_ones)).astype(np.int64)
    sign = (bits >> np.uint64(spec.frac_bits + spec.exp_bits)).astype(np.int64)
    return sign, exp, np.where(exp == 0, 0, frac)


def pack_fields(spec: FormatSpec, sign, exp_field, frac_field) -> np.ndarray:
    """Inverse of :func:`unpack_fields`, as uint64 so 64-bit formats fit."""
    u = np.uint64
    sign, exp_field, frac_field = (np.asarray(a).astype(u) for a in (sign, exp_field, frac_field))
    return (((sign << u(spec.exp_bits)) | exp_field) << u(spec.frac_bits)) | frac_field


def hub_add_batch(spec: FormatSpec, x_bits, y_bits, align_fn=align_bits,
                  finish_fn=normalize_truncate_bits) -> dict[str, np.ndarray]:
    """Run the pipeline over packed operand arrays; one column per ``HUB_FIELDS`` name."""
    check_datapath_spec(spec)
    cols = [*unpack_fields(spec, x_bits), *unpack_fields(spec, y_bits)]
    out = np.empty((len(cols[0]), len(HUB_FIELDS)), dtype=np.int64)
    _hub_batch(*cols, spec.frac_bits, spec.exp_bias, align_fn, finish_fn, out)
    return {name: out[:, k] for k, name in enumerate(HUB_FIELDS)}
