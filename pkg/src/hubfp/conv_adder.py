"""Conventional six-stage adder with guard, round and sticky bits.

The datapath word is ``f + 4`` bits: ``1.f`` plus guard, round and sticky.
Stage 2 computes the sticky bit as a real OR over the discarded bits and
stage 6 rounds to nearest-even, renormalizing on a post-round carry.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from .formats import ConvFloat, FormatSpec, render_bits
from .hub_adder import (
    AlignedWord,
    Stage1Record,
    Stage4Record,
    add_aligned,
    bypass_fields,
    check_datapath_spec,
    check_operands,
    leading_zeros,
    order_operands,
    unpack_fields,
)

GRS_BITS = 3


@njit(cache=True)
def conv_align_bits(significand, d, sub, f):
    """Returns ``(aligned_bits, sticky)``; sticky is the OR of every discarded bit."""
    width = f + 4
    word = significand << 3
    if d >= width:
        bits, sticky = 0, 1
    else:
        sticky = 1 if word & ((1 << d) - 1) else 0
        bits = word >> d
    bits |= sticky
    if sub:
        bits = -bits & ((1 << width) - 1)
    return bits, sticky


@njit(cache=True)
def conv_add_aligned(large_bits, small_bits, sub, width):
    raw, overflow, corrected = add_aligned(large_bits, small_bits, sub, width)
    if overflow:
        # the bit shifted out folds into sticky
        corrected |= raw & 1
    return raw, overflow, corrected


@njit(cache=True)
def round_nearest_even(normalized, exp, sign, f, bias):
    """Returns ``(guard, sticky, increment, post_overflow, final_exp, sign, exp_field, frac)``."""
    if normalized == 0:
        return 0, 0, 0, 0, exp, 0, 0, 0
    q = normalized >> 3
    guard = (normalized >> 2) & 1
    sticky = 1 if normalized & 3 else 0
    inc = guard & (sticky | (q & 1))
    q += inc
    post = 0
    if q >> (f + 1):
        q >>= 1
        exp += 1
        post = 1
    if exp > bias:
        return guard, sticky, inc, post, exp, sign, 2 * bias + 1, 0
    if exp < 1 - bias:
        return guard, sticky, inc, post, exp, sign, 0, 0
    return guard, sticky, inc, post, exp, sign, exp + bias, q & ((1 << f) - 1)


@njit(cache=True)
def conv_pipeline(sx, ex, fx, sy, ey, fy, f, bias):
    top = 2 * bias + 1
    bypassed, rs, re, rf = bypass_fields(sx, ex, fx, sy, ey, fy, top, f)
    if bypassed:
        return (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, rs, re, rf)
    width = f + 4
    swapped = order_operands(ex, fx, ey, fy)
    if swapped:
        sl, el, fl, es, fs = sy, ey, fy, ex, fx
    else:
        sl, el, fl, es, fs = sx, ex, fx, ey, fy
    d = el - es
    sub = 1 if sx != sy else 0
    sig_small = (1 << f) | fs
    aligned, sticky = conv_align_bits(sig_small, d, sub, f)
    raw, overflow, corrected = conv_add_aligned(((1 << f) | fl) << 3, aligned, sub, width)
    result_exp = el - bias + overflow
    lzc = leading_zeros(corrected, width)
    if lzc == width:
        normalized, exp = 0, result_exp
    else:
        normalized, exp = (corrected << lzc) & ((1 << width) - 1), result_exp - lzc
    guard, rsticky, inc, post, final_exp, rs, re, rf = round_nearest_even(normalized, exp, sl,
                                                                          f, bias)
    return (0, width, swapped, d, sub, sig_small, aligned, sticky, raw, overflow, corrected,
            result_exp, lzc, normalized, exp, guard, rsticky, inc, post, final_exp, sl,
            rs, re, rf)


CONV_FIELDS = ("bypassed", "width", "swapped", "exp_diff", "sub", "small_significand",
               "aligned_small", "sticky", "raw_sum", "overflow", "corrected", "result_exp",
               "lzc", "normalized", "norm_exp", "guard", "round_sticky", "round_increment",
               "post_round_overflow", "final_exp", "large_sign", "result_sign",
               "result_exp_field", "result_frac")


@njit(cache=True)
def _conv_batch(sx, ex, fx, sy, ey, fy, f, bias, out):
    for i in range(sx.shape[0]):
        row = conv_pipeline(sx[i], ex[i], fx[i], sy[i], ey[i], fy[i], f, bias)
        for k in range(len(row)):
            out[i, k] = row[k]


def _render(word: AlignedWord) -> str:
    return word.render(tail=GRS_BITS)


class ConvStage2Record(NamedTuple):
    operand: int
    aligned_small: AlignedWord
    sticky: int
    complemented: int

    def to_dict(self) -> dict:
        return {"aligned_small": _render(self.aligned_small),
                "sticky": self.sticky, "complemented": self.complemented}


class ConvStage3Record(NamedTuple):
    raw_sum: int
    raw_width: int
    overflow: int
    corrected: AlignedWord
    result_exp: int

    def to_dict(self) -> dict:
        return {"raw_sum": render_bits(self.raw_sum, self.raw_width, int_bits=2, tail=GRS_BITS),
                "overflow": self.overflow, "corrected": _render(self.corrected),
                "result_exp": self.result_exp}


class ConvStage5Record(NamedTuple):
    normalized: AlignedWord
    exp: int

    def to_dict(self) -> dict:
        return {"normalized": _render(self.normalized), "exp": self.exp}


class ConvStage6Record(NamedTuple):
    guard: int
    sticky: int
    round_increment: int
    post_round_overflow: int
    final_exp: int
    result: ConvFloat

    def to_dict(self) -> dict:
        return {"guard": self.guard, "sticky": self.sticky,
                "round_increment": self.round_increment,
                "post_round_overflow": self.post_round_overflow,
                "final_exp": self.final_exp, "result": self.result.hex()}


class ConvAddTrace(NamedTuple):
    stage1: Stage1Record | None = None
    stage2: ConvStage2Record | None = None
    stage3: ConvStage3Record | None = None
    stage4: Stage4Record | None = None
    stage5: ConvStage5Record | None = None
    stage6: ConvStage6Record | None = None
    bypassed: bool = False

    @property
    def stages(self) -> tuple:
        if self.bypassed:
            return ()
        return (self.stage1, self.stage2, self.stage3, self.stage4, self.stage5, self.stage6)

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


def conv_trace_from_fields(fields: tuple, spec: FormatSpec) -> tuple[ConvFloat, ConvAddTrace]:
    (bypassed, width, swapped, d, sub, sig_small, aligned, sticky, raw, overflow, corrected,
     result_exp, lzc, normalized, exp, guard, rsticky, inc, post, final_exp, _,
     rs, re, rf) = fields
    result = ConvFloat(spec, rs, re, rf)
    if bypassed:
        return result, ConvAddTrace(bypassed=True)
    return result, ConvAddTrace(
        Stage1Record(swapped, d, "sub" if sub else "add"),
        ConvStage2Record(sig_small, AlignedWord(aligned, width, sub), sticky, sub),
        ConvStage3Record(raw, width + 1, overflow, AlignedWord(corrected, width), result_exp),
        Stage4Record(lzc),
        ConvStage5Record(AlignedWord(normalized, width), exp),
        ConvStage6Record(guard, rsticky, inc, post, final_exp, result),
    )


def conv_add(x: ConvFloat, y: ConvFloat) -> tuple[ConvFloat, ConvAddTrace]:
    check_operands(x, y, ConvFloat)
    spec = x.spec
    fields = conv_pipeline(x.sign, x.exp_field, x.frac_field, y.sign, y.exp_field, y.frac_field,
                           spec.frac_bits, spec.exp_bias)
    return conv_trace_from_fields(fields, spec)


def conv_sub(x: ConvFloat, y: ConvFloat) -> tuple[ConvFloat, ConvAddTrace]:
    return conv_add(x, y.negate())


def conv_add_batch(spec: FormatSpec, x_bits, y_bits) -> dict[str, np.ndarray]:
    """Run the pipeline over packed operand arrays; one column per ``CONV_FIELDS`` name."""
    check_datapath_spec(spec)
    cols = [*unpack_fields(spec, x_bits), *unpack_fields(spec, y_bits)]
    out = np.empty((len(cols[0]), len(CONV_FIELDS)), dtype=np.int64)
    _conv_batch(*cols, spec.frac_bits, spec.exp_bias, out)
    return {name: out[:, k] for k, name in enumerate(CONV_FIELDS)}
