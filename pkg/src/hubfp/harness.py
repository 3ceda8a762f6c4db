"""Verification and measurement campaigns for the HUB and conventional adders.

Every run compares each adder with its exact-arithmetic oracle and re-checks
the datapath invariants on every trace it produces.  The adders run in
batches; the invariants are re-derived from the trace columns with numpy.

Expected results come from one of two routes.  When every exact sum of the
format fits an int64 on one common scale (all small formats), sums and their
roundings are computed vectorized.  Otherwise each pair goes through
:func:`reference_hub_add` / :func:`reference_conv_add` on Python integers.
Pairs involving zeros, infinities or NaN always take the scalar route.

Random campaigns use Python's ``random.Random`` (MT19937) seeded with the
given integer; operands and samples are drawn only through ``getrandbits``
and ``randrange`` so a ``(spec, n, seed)`` triple always yields the same
report.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from numba import njit

from .conv_adder import conv_add, conv_add_batch
from .formats import (
    ConvFloat,
    ExactValue,
    FormatSpec,
    HubFloat,
    decode_conv,
    decode_hub,
    operational_significand,
    representative_from_operational,
    round_exact_to_conv_rne,
    round_exact_to_hub,
)
from .hub_adder import align_bits, hub_add, hub_add_batch, normalize_truncate_bits, pack_fields
from .oracle import exact_add, reference_conv_add, reference_hub_add

EXHAUSTIVE_MAX_BITS = 16
DEFAULT_EXHAUSTIVE_SPECS = (FormatSpec(4, 3), FormatSpec(5, 4), FormatSpec(5, 5))
MAX_RECORDED = 64
CHUNK = 1 << 18
_EXACT_INT_BITS = 62

HUB_CHECKS = ("datapath_width", "sticky_theorem", "lzc", "normalize_exponent",
              "rounding_increment", "cancellation_exact", "half_ulp_bound")
CONV_CHECKS = ("datapath_width", "sticky_or", "lzc", "half_ulp_bound")


class GuardError(ValueError):
    pass


@dataclass
class VerifyReport:
    spec: FormatSpec
    mode: str
    pairs_tested: int = 0
    mismatch_count: int = 0
    mismatches: list = field(default_factory=list)
    violation_count: int = 0
    invariant_violations: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    elapsed: float = 0.0
    seed: int | None = None
    mutant: str | None = None

    @property
    def passed(self) -> bool:
        return self.mismatch_count == 0 and self.violation_count == 0

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "spec": {"exp_bits": self.spec.exp_bits, "frac_bits": self.spec.frac_bits},
            "mode": self.mode,
            "seed": self.seed,
            "mutant": self.mutant,
            "pairs_tested": self.pairs_tested,
            "passed": self.passed,
            "mismatch_count": self.mismatch_count,
            "mismatches": sorted(self.mismatches, key=lambda m: (m["adder"], m["x"], m["y"])),
            "violation_count": self.violation_count,
            "invariant_violations": sorted(self.invariant_violations,
                                           key=lambda v: (v["adder"], v["x"], v["y"], v["check"])),
            "counters": dict(sorted(self.counters.items())),
        }
        if timing:
            d["elapsed"] = round(self.elapsed, 3)
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)

    def summary(self) -> str:
        return (f"spec={self.spec} mode={self.mode} pairs={self.pairs_tested} "
                f"mismatches={self.mismatch_count} violations={self.violation_count}")


@dataclass
class ErrorStats:
    """Rounding errors measured in ULPs of the sample's binade."""

    spec: FormatSpec
    samples: int
    max_abs_err_in_result_ulps: float
    max_abs_err_hub_ulps: float
    max_abs_err_conv_ulps: float
    rms_err_hub: float
    rms_err_conv: float
    half_ulp_violations: int
    seed: int | None = None

    @property
    def rms_ratio(self) -> float:
        return self.rms_err_hub / self.rms_err_conv

    def to_dict(self) -> dict:
        return {
            "spec": {"exp_bits": self.spec.exp_bits, "frac_bits": self.spec.frac_bits},
            "seed": self.seed,
            "samples": self.samples,
            "max_abs_err_in_result_ulps": self.max_abs_err_in_result_ulps,
            "max_abs_err_hub_ulps": self.max_abs_err_hub_ulps,
            "max_abs_err_conv_ulps": self.max_abs_err_conv_ulps,
            "rms_err_hub": self.rms_err_hub,
            "rms_err_conv": self.rms_err_conv,
            "rms_ratio": self.rms_ratio,
            "half_ulp_violations": self.half_ulp_violations,
        }


# -- mutants for harness self-tests -------------------------------------------

@njit(cache=True)
def _finish_rne_increment(word, result_exp, lzc, sign, f, bias):
    """Stage 5 with truncation replaced by a conventional increment rounder."""
    width = f + 3
    if lzc == width:
        return 0, result_exp, 0, 0, 0
    normalized = (word << lzc) & ((1 << width) - 1)
    exp = result_exp - lzc
    q = normalized >> 2
    q += ((normalized >> 1) & 1) & ((normalized & 1) | (q & 1))
    if q >> (f + 1):
        q >>= 1
        exp += 1
    if exp > bias:
        return normalized, exp, sign, 2 * bias + 1, 0
    if exp < 1 - bias:
        return normalized, exp, sign, 0, 0
    return normalized, exp, sign, exp + bias, q & ((1 << f) - 1)


@njit(cache=True)
def _align_sticky_zero(small_operational, d, sub, f):
    """Stage 2 with the sticky position forced to 0."""
    width = f + 3
    bits = 0 if d >= width else ((small_operational << 1) >> d) & ~1
    if sub:
        bits = -bits & ((1 << width) - 1)
    return bits


# name -> (stage 2 kernel, stage 5 kernel) for the HUB pipeline
MUTANTS = {
    "rne-increment": (align_bits, _finish_rne_increment),
    "sticky-zero": (_align_sticky_zero, normalize_truncate_bits),
}


def mutant_kernels(mutant: str | None):
    if mutant is None:
        return align_bits, normalize_truncate_bits
    try:
        return MUTANTS[mutant]
    except KeyError:
        raise ValueError(f"unknown mutant {mutant!r}; choose from {sorted(MUTANTS)}") from None


# -- vectorized helpers ---------------------------------------------------------

def bit_length(a) -> np.ndarray:
    """Exact ``int.bit_length`` of non-negative int64 values."""
    a = np.asarray(a, dtype=np.int64)
    n = np.zeros(a.shape, dtype=np.int64)
    for k in (32, 16, 8, 4, 2, 1):
        n += np.where((a >> (n + k)) > 0, k, 0)
    return n + (a > 0)


def _pow2(e: np.ndarray) -> np.ndarray:
    return np.left_shift(1, np.maximum(e, 0), dtype=np.int64)


class _Scale:
    """Signed value of every Normal encoding as an integer times ``2**base``."""

    def __init__(self, spec: FormatSpec):
        f = spec.frac_bits
        self.spec = spec
        self.base = spec.emin - f - 2
        # |x + y| < 2**(emax + 2)
        self.exact = (spec.total_bits <= EXHAUSTIVE_MAX_BITS
                      and spec.emax + 2 - self.base <= _EXACT_INT_BITS)
        if not self.exact:
            return
        bits = np.arange(spec.encoding_count, dtype=np.int64)
        sign = bits >> (spec.exp_bits + f)
        exp = (bits >> f) & spec.exp_all_ones
        frac = bits & spec.frac_mask
        normal = (exp > 0) & (exp < spec.exp_all_ones)
        shift = np.where(normal, exp - spec.exp_bias - spec.emin, 0)
        hub = ((1 << (f + 1)) | (frac << 1) | 1) << (shift + 1)
        conv = ((1 << f) | frac) << (shift + 2)
        self.hub = np.where(normal, np.where(sign == 1, -hub, hub), 0)
        self.conv = np.where(normal, np.where(sign == 1, -conv, conv), 0)

    def round(self, s: np.ndarray, rne: bool) -> np.ndarray:
        """Packed encodings of ``s * 2**base``: truncation, or nearest-even with ``rne``."""
        spec = self.spec
        f = spec.frac_bits
        m = np.abs(s)
        bl = bit_length(m)
        exp = bl - 1 + self.base
        shift = np.maximum(bl - 1 - f, 1)
        q = m >> shift
        if rne:
            rem = m & (_pow2(shift) - 1)
            half = _pow2(shift - 1)
            q = q + ((rem > half) | ((rem == half) & ((q & 1) == 1)))
            carry = q >> (f + 1)
            q >>= carry
            exp = exp + carry
        over, under = exp > spec.emax, exp < spec.emin
        ef = np.where(over, spec.exp_all_ones, np.where(under, 0, exp + spec.exp_bias))
        frac = np.where(over | under, 0, q & spec.frac_mask)
        sign = np.where(m == 0, 0, (s < 0).astype(np.int64))
        return pack_fields(spec, sign, ef, frac)


def _hub_structure(spec: FormatSpec, c: dict, normal: np.ndarray) -> dict:
    """Checks that need only the trace columns; each entry is a violation mask."""
    f = spec.frac_bits
    width = f + 3
    wmask = (1 << width) - 1
    d, sub = c["exp_diff"], c["sub"]
    bad = {}
    bad["datapath_width"] = ((c["width"] != width) | (c["aligned_small"] > wmask)
                             | (c["corrected"] > wmask) | (c["normalized"] > wmask))
    # recompute the OR of the bits that leave the f+2-bit window from the unshifted operand
    recomputed = (c["small_operational"] & (_pow2(np.minimum(d, f + 2)) - 1)) != 0
    aligned = np.where(sub == 1, -c["aligned_small"] & wmask, c["aligned_small"])
    expected = d > 0
    bad["sticky_theorem"] = (recomputed != expected) | (((aligned & 1) == 1) != expected)
    lzc = c["lzc"]
    bad["lzc"] = lzc != width - bit_length(c["corrected"])
    live = lzc < width
    bad["normalize_exponent"] = live & (c["final_exp"] != c["result_exp"] - lzc)
    rnormal = (c["result_exp_field"] > 0) & (c["result_exp_field"] < spec.exp_all_ones)
    bad["rounding_increment"] = live & rnormal & (
        (c["result_frac"] != (c["normalized"] >> 2) & spec.frac_mask)
        | (c["result_exp_field"] - spec.exp_bias != c["final_exp"]))
    return {k: v & normal for k, v in bad.items()}


def _conv_structure(spec: FormatSpec, c: dict, normal: np.ndarray) -> dict:
    f = spec.frac_bits
    width = f + 4
    wmask = (1 << width) - 1
    bad = {}
    bad["datapath_width"] = ((c["width"] != width) | (c["aligned_small"] > wmask)
                             | (c["corrected"] > wmask) | (c["normalized"] > wmask))
    discarded = (c["small_significand"] << 3) & (_pow2(np.minimum(c["exp_diff"], width)) - 1)
    bad["sticky_or"] = (discarded != 0) != (c["sticky"] == 1)
    bad["lzc"] = c["lzc"] != width - bit_length(c["corrected"])
    return {k: v & normal for k, v in bad.items()}


def _within_half_ulp(sign: int, sig: int, lsb_exp: int, s: ExactValue, half_exp: int) -> bool:
    """``|sig * 2**lsb_exp - s| <= 2**half_exp`` for a result of sign ``sign``."""
    if sign != s.sign:
        return False
    c = s.exp2 if s.exp2 < half_exp else half_exp
    diff = (sig << (lsb_exp - c)) - (s.mantissa << (s.exp2 - c))
    return -(1 << (half_exp - c)) <= diff <= 1 << (half_exp - c)


def check_encoding(bits: int, spec: FormatSpec) -> list[str]:
    """Per-encoding properties: round trips and the operational form."""
    bad = []
    h = HubFloat.from_bits(bits, spec, daz=True)
    c = ConvFloat.from_bits(bits, spec, daz=True)
    if h.is_normal:
        if round_exact_to_hub(decode_hub(h), spec) != h:
            bad.append("hub_round_trip")
        op = operational_significand(h)
        if op.bit_length() != spec.frac_bits + 2 or not op & 1:
            bad.append("operational_form")
        if representative_from_operational(op, spec) != h.frac_field:
            bad.append("representative_round_trip")
    if c.is_normal and round_exact_to_conv_rne(decode_conv(c), spec) != c:
        bad.append("conv_round_trip")
    return bad


# -- campaigns ---------------------------------------------------------------

def _is_normal_field(spec: FormatSpec, exp_field: np.ndarray) -> np.ndarray:
    return (exp_field > 0) & (exp_field < spec.exp_all_ones)


class _Sweep:
    """Runs batches through both adders and folds the outcome into a report."""

    def __init__(self, report: VerifyReport, max_recorded: int, vectorized: bool):
        self.report = report
        self.spec = report.spec
        self.max_recorded = max_recorded
        self.scale = _Scale(report.spec)
        self.vectorized = vectorized and self.scale.exact
        self.kernels = mutant_kernels(report.mutant)
        self.c = {"hub_traces": 0, "conv_traces": 0, "sticky_checked": 0, "sticky_set": 0,
                  "hub_rounding_increments": 0, "conv_round_increments": 0,
                  "conv_post_round_overflows": 0, "bypassed": 0}
        report.counters = self.c

    def _hex(self, bits) -> str:
        return f"0x{int(bits):0{self.spec.hex_digits}X}"

    def violation(self, adder: str, xbits, ybits, check: str):
        r = self.report
        r.violation_count += 1
        if len(r.invariant_violations) < self.max_recorded:
            r.invariant_violations.append({"adder": adder, "x": self._hex(xbits),
                                           "y": self._hex(ybits), "check": check})

    def _record_mismatches(self, adder, xb, yb, got, expected):
        r = self.report
        wrong = np.flatnonzero(got != expected)
        r.mismatch_count += len(wrong)
        for i in wrong[:max(0, self.max_recorded - len(r.mismatches))]:
            r.mismatches.append({"adder": adder, "x": self._hex(xb[i]), "y": self._hex(yb[i]),
                                 "got": self._hex(got[i]), "expected": self._hex(expected[i])})

    def _record_violations(self, adder, xb, yb, masks):
        r = self.report
        for check, mask in masks.items():
            rows = np.flatnonzero(mask)
            r.violation_count += len(rows)
            for i in rows[:max(0, self.max_recorded - len(r.invariant_violations))]:
                r.invariant_violations.append({"adder": adder, "x": self._hex(xb[i]),
                                               "y": self._hex(yb[i]), "check": check})

    def run(self, xb: np.ndarray, yb: np.ndarray):
        for lo in range(0, len(xb), CHUNK):
            self._run_chunk(xb[lo:lo + CHUNK], yb[lo:lo + CHUNK])

    def _run_chunk(self, xb, yb):
        spec, c = self.spec, self.c
        h = hub_add_batch(spec, xb, yb, *self.kernels)
        v = conv_add_batch(spec, xb, yb)
        hub_got = pack_fields(spec, h["result_sign"], h["result_exp_field"], h["result_frac"])
        conv_got = pack_fields(spec, v["result_sign"], v["result_exp_field"], v["result_frac"])
        normal = h["bypassed"] == 0
        n_normal = int(normal.sum())
        c["bypassed"] += len(xb) - n_normal
        c["hub_traces"] += n_normal
        c["conv_traces"] += n_normal
        c["sticky_checked"] += n_normal
        wmask = (1 << (spec.frac_bits + 3)) - 1
        aligned = np.where(h["sub"] == 1, -h["aligned_small"] & wmask, h["aligned_small"])
        c["sticky_set"] += int(((aligned & 1) == 1)[normal].sum())
        c["conv_round_increments"] += int(v["round_increment"][normal].sum())
        c["conv_post_round_overflows"] += int(v["post_round_overflow"][normal].sum())

        hub_bad = _hub_structure(spec, h, normal)
        conv_bad = _conv_structure(spec, v, normal)
        hub_exp = np.zeros_like(hub_got)
        conv_exp = np.zeros_like(conv_got)
        if self.vectorized:
            self._vector_oracle(xb, yb, h, v, normal, hub_got, conv_got, hub_exp, conv_exp,
                                hub_bad, conv_bad)
            scalar_rows = np.flatnonzero(~normal)
        else:
            for masks, name in ((hub_bad, "cancellation_exact"), (hub_bad, "half_ulp_bound"),
                                (conv_bad, "half_ulp_bound")):
                masks[name] = np.zeros_like(normal)
            scalar_rows = np.arange(len(xb))
        self._scalar_oracle(xb, yb, scalar_rows, h, v, hub_exp, conv_exp, hub_bad, conv_bad)

        c["hub_rounding_increments"] += int(hub_bad["rounding_increment"].sum())
        self._record_mismatches("hub", xb, yb, hub_got, hub_exp)
        self._record_mismatches("conv", xb, yb, conv_got, conv_exp)
        self._record_violations("hub", xb, yb, hub_bad)
        self._record_violations("conv", xb, yb, conv_bad)
        self.report.pairs_tested += len(xb)

    def _vector_oracle(self, xb, yb, h, v, normal, hub_got, conv_got, hub_exp, conv_exp,
                       hub_bad, conv_bad):
        """Exact sums on the common integer scale for Normal x Normal rows."""
        spec, scale = self.spec, self.scale
        xi, yi = xb.astype(np.int64), yb.astype(np.int64)

        s = scale.hub[xi] + scale.hub[yi]
        hub_exp[normal] = scale.round(s, rne=False)[normal]
        # for d <= 1 subtraction the corrected word is the exact difference
        cancel = normal & (h["sub"] == 1) & (h["exp_diff"] <= 1)
        word = np.left_shift(h["corrected"], np.maximum(h["result_exp"] - spec.emin, 0))
        hub_bad["cancellation_exact"] = cancel & (word != np.abs(s))
        ef = h["result_exp_field"]
        r = scale.hub[hub_got.astype(np.int64)]
        lim = _pow2(ef - spec.exp_bias - spec.emin + 1)
        hub_bad["half_ulp_bound"] = normal & _is_normal_field(spec, ef) & (np.abs(r - s) > lim)

        s = scale.conv[xi] + scale.conv[yi]
        conv_exp[normal] = scale.round(s, rne=True)[normal]
        ef = v["result_exp_field"]
        r = scale.conv[conv_got.astype(np.int64)]
        # bound against the pre-round binade; a post-round carry only widens the ULP
        lim = _pow2(v["norm_exp"] - spec.emin + 1)
        conv_bad["half_ulp_bound"] = normal & _is_normal_field(spec, ef) & (np.abs(r - s) > lim)

    def _scalar_oracle(self, xb, yb, rows, h, v, hub_exp, conv_exp, hub_bad, conv_bad):
        """Big-integer route for ``rows``; fills expectations and masks in place."""
        if not len(rows):
            return
        spec = self.spec
        f = spec.frac_bits
        hub_from, conv_from = HubFloat.from_bits, ConvFloat.from_bits
        xs, ys = xb[rows].tolist(), yb[rows].tolist()
        normal = (h["bypassed"][rows] == 0).tolist()
        sub, d, result_exp, corrected = (h[k][rows].tolist() for k in
                                         ("sub", "exp_diff", "result_exp", "corrected"))
        norm_exp = v["norm_exp"][rows].tolist()
        hub_res = pack_fields(spec, h["result_sign"][rows], h["result_exp_field"][rows],
                              h["result_frac"][rows]).tolist()
        conv_res = pack_fields(spec, v["result_sign"][rows], v["result_exp_field"][rows],
                               v["result_frac"][rows]).tolist()
        hub_cancel, hub_half = hub_bad["cancellation_exact"], hub_bad["half_ulp_bound"]
        conv_half = conv_bad["half_ulp_bound"]
        for k, i in enumerate(rows.tolist()):
            hx, hy = hub_from(xs[k], spec, daz=True), hub_from(ys[k], spec, daz=True)
            cx, cy = conv_from(xs[k], spec, daz=True), conv_from(ys[k], spec, daz=True)
            hub_exp[i] = reference_hub_add(hx, hy).bits
            conv_exp[i] = reference_conv_add(cx, cy).bits
            if not normal[k]:
                continue
            s = exact_add(decode_hub(hx), decode_hub(hy))
            if sub[k] and d[k] <= 1:
                shift = s.exp2 - (result_exp[k] - f - 2)
                exact_word = 0 if not s.mantissa else (s.mantissa << shift if shift >= 0 else -1)
                hub_cancel[i] = exact_word != corrected[k]
            r = hub_from(hub_res[k], spec)
            if r.is_normal:
                lsb = r.unbiased_exp - f - 1
                sig = (1 << (f + 1)) | (r.frac_field << 1) | 1
                hub_half[i] = not _within_half_ulp(r.sign, sig, lsb, s, lsb)
            r = conv_from(conv_res[k], spec)
            if r.is_normal:
                s = exact_add(decode_conv(cx), decode_conv(cy))
                conv_half[i] = not _within_half_ulp(r.sign, (1 << f) | r.frac_field,
                                                    r.unbiased_exp - f, s, norm_exp[k] - f - 1)


def exhaustive_verify(spec: FormatSpec, mutant: str | None = None, normals_only: bool = False,
                      max_recorded: int = MAX_RECORDED, vectorized: bool = True) -> VerifyReport:
    """Run both adders on every ordered pair of encodings of ``spec``.

    Bit patterns with a zero exponent field and nonzero fraction read as
    signed zeros.  ``mutant`` swaps a broken kernel into the HUB adder.
    ``vectorized=False`` sends every pair through the scalar oracle.
    """
    if spec.total_bits > EXHAUSTIVE_MAX_BITS:
        raise GuardError(f"{spec} has {spec.total_bits}-bit encodings; exhaustive limit is "
                         f"{EXHAUSTIVE_MAX_BITS} bits")
    t0 = time.perf_counter()
    report = VerifyReport(spec, "exhaustive-normal" if normals_only else "exhaustive",
                          mutant=mutant)
    sweep = _Sweep(report, max_recorded, vectorized)
    for bits in range(spec.encoding_count):
        for check in check_encoding(bits, spec):
            sweep.violation("formats", bits, bits, check)
    enc = np.arange(spec.encoding_count, dtype=np.uint64)
    if normals_only:
        exp = (enc >> np.uint64(spec.frac_bits)) & np.uint64(spec.exp_all_ones)
        enc = enc[_is_normal_field(spec, exp.astype(np.int64))]
    # whole rows of x per chunk keep memory flat
    per_chunk = max(1, CHUNK // len(enc))
    for lo in range(0, len(enc), per_chunk):
        xs = enc[lo:lo + per_chunk]
        sweep.run(np.repeat(xs, len(enc)), np.tile(enc, len(xs)))
    report.elapsed = time.perf_counter() - t0
    return report


def _random_bits(rng: random.Random, spec: FormatSpec, near_exp: int | None = None) -> int:
    e, f = spec.exp_bits, spec.frac_bits
    top = spec.exp_all_ones
    sign = rng.getrandbits(1)
    frac = rng.getrandbits(f)
    pick = rng.randrange(64)
    if pick == 0:
        exp, frac = 0, 0
    elif pick == 1:
        exp = top
        frac = 0 if rng.getrandbits(1) else frac
    elif near_exp is not None and pick < 48:
        # exponents close together exercise alignment, cancellation and carries
        exp = min(max(near_exp + rng.randrange(-(f + 4), f + 5), 1), top - 1)
    else:
        exp = rng.randrange(1, top)
    return ((sign << e | exp) << f) | frac


def random_pairs(spec: FormatSpec, n: int, seed: int):
    """Deterministic stream of ``n`` bit-pattern pairs."""
    rng = random.Random(seed)
    for _ in range(n):
        a = _random_bits(rng, spec)
        exp_a = (a >> spec.frac_bits) & spec.exp_all_ones
        b = _random_bits(rng, spec, exp_a)
        yield a, b


def random_verify(spec: FormatSpec, n: int, seed: int, mutant: str | None = None,
                  max_recorded: int = MAX_RECORDED, vectorized: bool = True) -> VerifyReport:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    t0 = time.perf_counter()
    report = VerifyReport(spec, "random", seed=seed, mutant=mutant)
    sweep = _Sweep(report, max_recorded, vectorized)
    pairs = np.array(list(random_pairs(spec, n, seed)), dtype=np.uint64).reshape(n, 2)
    sweep.run(pairs[:, 0], pairs[:, 1])
    report.elapsed = time.perf_counter() - t0
    return report


def sample_exact(rng: random.Random, spec: FormatSpec) -> ExactValue:
    """Uniform significand in [1, 2) at ``2f + 8`` fraction bits, uniform exponent.

    The exponent range keeps a two-binade margin from both ends when the
    format has room for it.
    """
    precision = 2 * spec.frac_bits + 8
    lo, hi = spec.emin + 2, spec.emax - 2
    if lo > hi:
        lo, hi = spec.emin, spec.emax
    exp = rng.randrange(lo, hi + 1)
    sig = (1 << precision) | rng.getrandbits(precision)
    return ExactValue.make(rng.getrandbits(1), sig, exp - precision)


def accuracy_compare(spec: FormatSpec, n: int, seed: int) -> ErrorStats:
    """Round the same random reals onto both grids and compare the errors."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = random.Random(seed)
    f = spec.frac_bits
    precision = 2 * f + 8
    ulp_units = 1 << (precision - f)
    sq_hub = sq_conv = 0
    max_hub = max_conv = 0
    violations = 0
    for _ in range(n):
        v = sample_exact(rng, spec)
        # errors are integers in units of 2**(E' - precision)
        unit_exp = v.normalized_exponent - precision
        target = v.mantissa << (v.exp2 - unit_exp)
        errs = []
        for got in (decode_hub(round_exact_to_hub(v, spec)),
                    decode_conv(round_exact_to_conv_rne(v, spec))):
            errs.append(abs((got.mantissa << (got.exp2 - unit_exp)) - target))
        eh, ec = errs
        sq_hub += eh * eh
        sq_conv += ec * ec
        max_hub = max(max_hub, eh)
        max_conv = max(max_conv, ec)
        violations += (2 * eh > ulp_units) + (2 * ec > ulp_units)
    return ErrorStats(
        spec=spec,
        samples=n,
        max_abs_err_in_result_ulps=max(max_hub, max_conv) / ulp_units,
        max_abs_err_hub_ulps=max_hub / ulp_units,
        max_abs_err_conv_ulps=max_conv / ulp_units,
        rms_err_hub=sqrt(sq_hub / n) / ulp_units,
        rms_err_conv=sqrt(sq_conv / n) / ulp_units,
        half_ulp_violations=violations,
        seed=seed,
    )


def structural_report(spec: FormatSpec) -> dict:
    """Stage counts and datapath widths read off live traces of a probe addition."""
    one_ish = (spec.exp_bias, 0)
    _, htr = hub_add(HubFloat(spec, 0, *one_ish), HubFloat(spec, 0, *one_ish))
    _, ctr = conv_add(ConvFloat(spec, 0, *one_ish), ConvFloat(spec, 0, *one_ish))
    hub_widths = {w.width for w in htr.words}
    conv_widths = {w.width for w in ctr.words}
    if len(hub_widths) != 1 or len(conv_widths) != 1:
        raise AssertionError(f"inconsistent datapath widths {hub_widths} / {conv_widths}")
    return {
        "hub_stages": htr.stage_count,
        "conv_stages": ctr.stage_count,
        "hub_datapath_bits": hub_widths.pop(),
        "conv_datapath_bits": conv_widths.pop(),
    }
