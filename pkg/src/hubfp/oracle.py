"""Exact-arithmetic reference layer used to judge both adders."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .formats import (
    ExactValue,
    FloatClass,
    FormatSpec,
    HubFloat,
    ConvFloat,
    Special,
    decode_conv,
    decode_hub,
    round_exact_to_conv_rne,
    round_exact_to_hub,
)

BRUTEFORCE_MAX_EXP_BITS = 8
BRUTEFORCE_MAX_FRAC_BITS = 8


class EnumerationGuardError(ValueError):
    pass


class SpecMismatchError(ValueError):
    pass


def exact_add(a: ExactValue, b: ExactValue) -> ExactValue:
    if not a.mantissa:
        return b
    if not b.mantissa:
        return a
    e = min(a.exp2, b.exp2)
    ma = a.mantissa << (a.exp2 - e)
    mb = b.mantissa << (b.exp2 - e)
    s = (-ma if a.sign else ma) + (-mb if b.sign else mb)
    return ExactValue.make(1 if s < 0 else 0, abs(s), e)


@lru_cache(maxsize=16)
def _hub_table(spec: FormatSpec):
    """All Normal HUB encodings with their values scaled to one common exponent.

    Returns ``(encodings, scaled_values, base_exp)`` where
    ``value(encodings[i]) == scaled_values[i] * 2**base_exp``.
    """
    f = spec.frac_bits
    base = spec.emin - f - 1
    encodings, values = [], []
    for sign in (0, 1):
        for ef in range(1, spec.exp_all_ones):
            for frac in range(1 << f):
                h = HubFloat(spec, sign, ef, frac)
                v = decode_hub(h)
                scaled = v.mantissa << (v.exp2 - base)
                encodings.append(h)
                values.append(-scaled if sign else scaled)
    return tuple(encodings), values, base


def nearest_hub_bruteforce(v: ExactValue, spec: FormatSpec) -> frozenset[HubFloat]:
    """Scan every Normal HUB encoding and return those closest to ``v``."""
    if spec.exp_bits > BRUTEFORCE_MAX_EXP_BITS or spec.frac_bits > BRUTEFORCE_MAX_FRAC_BITS:
        raise EnumerationGuardError(
            f"{spec} too large to enumerate (limit e<={BRUTEFORCE_MAX_EXP_BITS}, "
            f"f<={BRUTEFORCE_MAX_FRAC_BITS})")
    encodings, values, base = _hub_table(spec)
    common = min(base, v.exp2)
    target = v.mantissa << (v.exp2 - common)
    if v.sign:
        target = -target
    up = base - common
    top = max(abs(values[0]), abs(values[-1])) << up
    if max(top, abs(target)).bit_length() < 62:
        arr = np.asarray(values, dtype=np.int64) << up
        dist = np.abs(arr - target)
        best = dist.min()
        return frozenset(encodings[i] for i in np.flatnonzero(dist == best))
    dists = [abs((x << up) - target) for x in values]
    best = min(dists)
    return frozenset(h for h, d in zip(encodings, dists) if d == best)


def _check_specs(x, y):
    if type(x) is not type(y) or x.spec != y.spec:
        raise SpecMismatchError(f"operands differ in type or format: {x!r} vs {y!r}")


def _reference_add(x, y, decode, round_to, cls):
    _check_specs(x, y)
    spec = x.spec
    a, b = decode(x), decode(y)
    a_special, b_special = isinstance(a, Special), isinstance(b, Special)
    if a_special or b_special:
        kinds = {a.kind if a_special else FloatClass.NORMAL,
                 b.kind if b_special else FloatClass.NORMAL}
        if FloatClass.NAN in kinds:
            return cls.nan(spec)
        if FloatClass.INF in kinds:
            inf_signs = {s.sign for s in (a, b) if isinstance(s, Special) and s.kind is FloatClass.INF}
            if len(inf_signs) == 2:
                return cls.nan(spec)
            return cls.inf(spec, inf_signs.pop())
        if a_special and b_special:
            return cls.zero(spec, a.sign & b.sign)
        # finite + zero is the finite operand, re-rounded (a fixed point)
        return round_to(b if a_special else a, spec)
    s = exact_add(a, b)
    return round_to(s, spec)


def reference_hub_add(x: HubFloat, y: HubFloat) -> HubFloat:
    """Exact sum rounded by truncation, with IEEE-style special values."""
    return _reference_add(x, y, decode_hub, round_exact_to_hub, HubFloat)


def reference_conv_add(x: ConvFloat, y: ConvFloat) -> ConvFloat:
    """Exact sum rounded to nearest-even, with IEEE-style special values."""
    return _reference_add(x, y, decode_conv, round_exact_to_conv_rne, ConvFloat)
