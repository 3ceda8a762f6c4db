from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hubfp.formats import (
    HUB64,
    ConvFloat,
    ExactValue,
    FormatSpec,
    HubFloat,
    decode_hub,
    operational_significand,
    round_exact_to_hub,
)
from hubfp.hub_adder import (
    HUB_FIELDS,
    AlignedWord,
    hub_add,
    hub_add_batch,
    hub_sub,
    pack_fields,
    stage1_compare,
    stage2_align,
    stage3_add,
    stage4_lzc,
    stage5_normalize_truncate,
    unpack_fields,
)
from hubfp.oracle import SpecMismatchError, exact_add, reference_hub_add

from conftest import spec_and_pair


def hub(spec, x) -> HubFloat:
    return round_exact_to_hub(ExactValue.from_fraction(Fraction(x)), spec)


def val(p) -> Fraction:
    return decode_hub(p).to_fraction()


def word(s: str) -> AlignedWord:
    """``'1·0001|0'`` -> AlignedWord."""
    bits = s.replace("·", "").replace("|", "")
    return AlignedWord(int(bits, 2), len(bits))


class TestStage1:
    def test_examples(self, small):
        x, y = HubFloat(small, 0, 8, 0), HubFloat(small, 0, 7, 0)
        assert stage1_compare(x, y)[:3] == (x, y, 1)
        x, y = HubFloat(small, 0, 7, 0b101), HubFloat(small, 0, 7, 0b010)
        assert stage1_compare(x, y)[:3] == (x, y, 0)
        assert stage1_compare(y, x)[:3] == (x, y, 0)
        z = HubFloat(small, 1, 7, 0b101)
        large, small_op, d, op = stage1_compare(x, z)
        assert large is x and small_op is z and d == 0 and op == "sub"


class TestStage2:
    def test_examples(self, small):
        op = operational_significand(HubFloat(small, 0, 7, 0))
        assert stage2_align(op, 2, "add", 3).render() == "0·0100|1"
        assert stage2_align(op, 1, "add", 3).render() == "0·1000|1"
        w = stage2_align(op, 0, "sub", 3)
        assert (w.bits, w.width, w.negative_flag) == ((-0b100010) & 0b111111, 6, 1)

    def test_far_shift_keeps_only_sticky(self, small):
        op = operational_significand(HubFloat(small, 0, 7, 0b111))
        assert stage2_align(op, 6, "add", 3).render() == "0·0000|1"
        assert stage2_align(op, 40, "add", 3).render() == "0·0000|1"


class TestStage3:
    def test_examples(self):
        r = stage3_add(word("1·1111|0"), word("1·0001|0"), 0)
        assert (r.overflow, r.corrected.render(), r.result_exp) == (1, "1·1000|0", 1)
        sub = AlignedWord((-0b100010) & 0b111111, 6, 1)
        r = stage3_add(word("1·1111|0"), sub, 0)
        assert (r.overflow, r.corrected.render(), r.result_exp) == (0, "0·1110|0", 0)
        r = stage3_add(word("1·0001|0"), word("0·0100|1"), 0)
        assert (r.overflow, r.corrected.render()) == (0, "1·0101|1")


class TestStage4:
    @pytest.mark.parametrize("w,lzc", [("0·1110|0", 1), ("1·0101|1", 0), ("0·0000|0", 6),
                                       ("0·0000|1", 5)])
    def test_examples(self, w, lzc):
        assert stage4_lzc(word(w)) == lzc


class TestStage5:
    def test_examples(self, small):
        r = stage5_normalize_truncate(word("0·1110|0"), 0, 1, 1, small)
        assert val(r.result) == Fraction(-29, 32) and r.result.frac_field == 0b110
        r = stage5_normalize_truncate(word("1·1000|0"), 1, 0, 0, small)
        assert r.result.frac_field == 0b100 and val(r.result) == Fraction(25, 8)
        r = stage5_normalize_truncate(word("0·0000|0"), 0, 6, 1, small)
        assert r.result == HubFloat.zero(small)

    def test_range(self, small):
        assert stage5_normalize_truncate(word("1·1000|0"), 8, 0, 1, small).result == \
            HubFloat.inf(small, 1)
        assert stage5_normalize_truncate(word("0·1000|0"), -6, 1, 1, small).result == \
            HubFloat.zero(small, 1)


class TestHubAdd:
    def test_doubling(self, small):
        r, t = hub_add(hub(small, "1.0625"), hub(small, "1.0625"))
        assert val(r) == Fraction(17, 8)
        assert (t.stage1.exp_diff, t.stage2.sticky, t.stage3.overflow, t.stage4.lzc) == \
            (0, 0, 1, 0)

    def test_cross_binade_example(self, small):
        r, t = hub_add(hub(small, Fraction(27, 16) * 4), hub(small, "1.3125"))
        assert val(r) == Fraction(17, 2)
        assert (t.stage1.exp_diff, t.stage2.sticky, t.stage3.overflow) == (2, 1, 1)

    def test_cancellation(self, small):
        x = hub(small, "1.3125")
        r, t = hub_add(x, x.negate())
        assert r == HubFloat.zero(small)
        assert t.stage4.lzc == small.frac_bits + 3 and t.stage3.corrected.bits == 0

    def test_subtraction_example(self, small):
        r, t = hub_sub(hub(small, "4.25"), hub(small, "1.9375"))
        assert val(r) == Fraction(19, 8)
        assert (t.stage1.exp_diff, t.stage2.sticky, t.stage2.complemented, t.stage4.lzc) == \
            (2, 1, 1, 1)

    def test_midpoint_example(self, small):
        r, t = hub_add(HubFloat.from_bits(0x3F, small), HubFloat.from_bits(0x38, small))
        assert r.hex() == "0x44"
        assert t.stage3.corrected.render() == "1·1000|0"
        r, _ = hub_sub(HubFloat.from_bits(0x38, small), HubFloat.from_bits(0x3F, small))
        assert val(r) == Fraction(-29, 32)

    def test_bypass(self, small):
        r, t = hub_add(HubFloat.inf(small), HubFloat(small, 0, 7, 0))
        assert r == HubFloat.inf(small) and t.bypassed and t.stage_count == 0
        assert t.to_dict() == {"bypassed": True, "stage_count": 0}

    def test_trace_schema(self, small):
        _, t = hub_add(HubFloat.from_bits(0x3F, small), HubFloat.from_bits(0x39, small))
        d = t.to_dict()
        assert list(d) == ["bypassed", "stage_count", "stage1", "stage2", "stage3", "stage4",
                           "stage5"]
        assert d["stage3"]["raw_sum"] == "11·0010|0"
        assert d["stage5"] == {"normalized": "1·1001|0", "final_exp": 1, "result": "0x44"}

    def test_operand_checks(self, small):
        with pytest.raises(SpecMismatchError):
            hub_add(HubFloat(small, 0, 7, 0), ConvFloat(small, 0, 7, 0))
        with pytest.raises(SpecMismatchError):
            hub_add(HubFloat(small, 0, 7, 0), HubFloat(FormatSpec(5, 3), 0, 7, 0))
        wide = FormatSpec(11, 60)
        with pytest.raises(ValueError):
            hub_add(HubFloat(wide, 0, 7, 0), HubFloat(wide, 0, 7, 0))

    def test_hub64_width(self):
        _, t = hub_add(HubFloat(HUB64, 0, 1023, 0), HubFloat(HUB64, 0, 1000, 12345))
        assert {w.width for w in t.words} == {55}

    @given(spec_and_pair(normal=False))
    def test_matches_oracle(self, sxy):
        _, x, y = sxy
        assert hub_add(x, y)[0] == reference_hub_add(x, y)

    @given(spec_and_pair())
    def test_trace_invariants(self, sxy):
        spec, x, y = sxy
        f = spec.frac_bits
        r, t = hub_add(x, y)
        assert t.stage_count == 5
        assert all(w.width == f + 3 for w in t.words)
        assert t.stage2.sticky == (1 if t.stage1.exp_diff > 0 else 0)
        s = exact_add(decode_hub(x), decode_hub(y))
        if r.is_normal:
            err = abs(val(r) - s.to_fraction())
            assert err <= Fraction(2) ** (r.unbiased_exp - f - 1)
        if t.stage1.effective_op == "sub" and t.stage1.exp_diff <= 1:
            lsb = Fraction(2) ** (t.stage3.result_exp - f - 2)
            assert t.stage3.corrected.bits * lsb == abs(s.to_fraction())

    @given(spec_and_pair(normal=False))
    def test_commutative_and_sub_is_negated_add(self, sxy):
        _, x, y = sxy
        assert hub_add(x, y)[0] == hub_add(y, x)[0]
        assert hub_sub(x, y)[0] == hub_add(x, y.negate())[0]


class TestBatch:
    def test_agrees_with_scalar(self, small):
        rng = np.random.default_rng(7)
        xb = rng.integers(0, 256, 500, dtype=np.uint64)
        yb = rng.integers(0, 256, 500, dtype=np.uint64)
        cols = hub_add_batch(small, xb, yb)
        assert set(cols) == set(HUB_FIELDS)
        got = pack_fields(small, cols["result_sign"], cols["result_exp_field"],
                          cols["result_frac"])
        for a, b, g in zip(xb.tolist(), yb.tolist(), got.tolist()):
            x = HubFloat.from_bits(a, small, daz=True)
            y = HubFloat.from_bits(b, small, daz=True)
            assert hub_add(x, y)[0].bits == g

    def test_unpack_pack_64_bit(self):
        bits = np.array([2 ** 64 - 1, 2 ** 63, 0x3FF0000000000001], dtype=np.uint64)
        sign, exp, frac = unpack_fields(HUB64, bits)
        assert sign.tolist() == [1, 1, 0] and exp.tolist() == [2047, 0, 1023]
        assert frac.tolist() == [2 ** 52 - 1, 0, 1]
        assert pack_fields(HUB64, sign, exp, frac).tolist() == [2 ** 64 - 1, 2 ** 63,
                                                               0x3FF0000000000001]
