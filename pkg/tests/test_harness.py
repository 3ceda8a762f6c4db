import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hubfp.formats import HUB32, HUB64, FormatSpec, HubFloat
from hubfp.harness import (
    DEFAULT_EXHAUSTIVE_SPECS,
    MUTANTS,
    GuardError,
    VerifyReport,
    accuracy_compare,
    bit_length,
    check_encoding,
    exhaustive_verify,
    random_pairs,
    random_verify,
    structural_report,
)

TINY = FormatSpec(3, 2)


class TestExhaustive:
    def test_small_spec(self, small):
        r = exhaustive_verify(small)
        assert r.passed and r.pairs_tested == 65536
        assert r.counters["hub_traces"] == 224 * 224
        assert r.counters["sticky_checked"] == 224 * 224
        assert r.counters["hub_rounding_increments"] == 0
        assert r.mismatches == [] and r.invariant_violations == []

    def test_frozen_counters(self, small):
        r = exhaustive_verify(small)
        assert r.counters == {"bypassed": 15360, "conv_post_round_overflows": 2268,
                              "conv_round_increments": 19852, "conv_traces": 50176,
                              "hub_rounding_increments": 0, "hub_traces": 50176,
                              "sticky_checked": 50176, "sticky_set": 46592}

    def test_normals_only(self, small):
        r = exhaustive_verify(small, normals_only=True)
        assert r.pairs_tested == 50176 and r.counters["bypassed"] == 0 and r.passed
        assert r.mode == "exhaustive-normal"

    def test_default_specs(self):
        assert [(s.exp_bits, s.frac_bits) for s in DEFAULT_EXHAUSTIVE_SPECS] == \
            [(4, 3), (5, 4), (5, 5)]

    def test_guard(self):
        with pytest.raises(GuardError):
            exhaustive_verify(FormatSpec(8, 8))

    @pytest.mark.parametrize("mutant", sorted(MUTANTS))
    def test_mutants_detected(self, small, mutant):
        r = exhaustive_verify(small, mutant=mutant)
        assert r.mismatch_count > 0 and not r.passed and r.mutant == mutant

    def test_mutant_checks(self, small):
        r = exhaustive_verify(small, mutant="sticky-zero")
        assert "sticky_theorem" in {v["check"] for v in r.invariant_violations}
        r = exhaustive_verify(small, mutant="rne-increment")
        assert r.counters["hub_rounding_increments"] > 0

    def test_unknown_mutant(self, small):
        with pytest.raises(ValueError):
            exhaustive_verify(small, mutant="nope")

    @pytest.mark.parametrize("mutant", [None, *sorted(MUTANTS)])
    def test_oracle_routes_agree(self, mutant):
        fast = exhaustive_verify(TINY, mutant=mutant, max_recorded=10 ** 6)
        slow = exhaustive_verify(TINY, mutant=mutant, max_recorded=10 ** 6, vectorized=False)
        assert fast.to_dict(timing=False) == slow.to_dict(timing=False)

    def test_recorded_lists_capped(self, small):
        r = exhaustive_verify(small, mutant="rne-increment", max_recorded=5)
        assert len(r.mismatches) == 5 and len(r.invariant_violations) == 5
        assert r.mismatch_count > 5 and r.violation_count > 5

    def test_mismatch_record_shape(self, small):
        r = exhaustive_verify(small, mutant="rne-increment", max_recorded=1)
        m = r.mismatches[0]
        assert set(m) == {"adder", "x", "y", "got", "expected"} and m["adder"] == "hub"
        x, y = (HubFloat.from_bits(int(m[k], 16), small, daz=True) for k in ("x", "y"))
        from hubfp.oracle import reference_hub_add
        assert reference_hub_add(x, y).hex() == m["expected"] != m["got"]


class TestRandom:
    def test_reproducible(self, small):
        a = random_verify(small, 2000, seed=5).to_json(timing=False)
        b = random_verify(small, 2000, seed=5).to_json(timing=False)
        assert a == b
        assert random_verify(small, 2000, seed=6).to_dict(timing=False) != json.loads(a)

    def test_pairs_stream_frozen(self, small):
        assert list(random_pairs(small, 4, 42)) == _FROZEN_PAIRS

    def test_rejects_empty(self, small):
        with pytest.raises(ValueError):
            random_verify(small, 0, seed=1)

    @pytest.mark.parametrize("spec", [HUB32, HUB64])
    def test_presets(self, spec):
        r = random_verify(spec, 3000, seed=1)
        assert r.passed and r.pairs_tested == 3000 and r.seed == 1

    def test_presets_detect_mutants(self):
        for mutant in MUTANTS:
            assert random_verify(HUB32, 3000, seed=1, mutant=mutant).mismatch_count > 0

    def test_routes_agree(self, small):
        for mutant in (None, "rne-increment"):
            fast = random_verify(small, 5000, 9, mutant=mutant).to_dict(timing=False)
            slow = random_verify(small, 5000, 9, mutant=mutant, vectorized=False)
            assert fast == slow.to_dict(timing=False)


_FROZEN_PAIRS = [(224, 57), (208, 32), (73, 37), (108, 240)]


class TestReport:
    def test_passed_iff_empty(self, small):
        r = VerifyReport(small, "x")
        assert r.passed
        r.violation_count = 1
        assert not r.passed

    def test_json_without_timing_has_no_elapsed(self, small):
        r = exhaustive_verify(TINY)
        assert "elapsed" not in r.to_dict(timing=False) and "elapsed" in r.to_dict()
        assert r.summary() == ("spec=(e=3, f=2) mode=exhaustive pairs=4096 mismatches=0 "
                               "violations=0")


class TestStructure:
    def test_small(self, small):
        assert structural_report(small) == {"hub_stages": 5, "conv_stages": 6,
                                            "hub_datapath_bits": 6, "conv_datapath_bits": 7}

    def test_hub64(self):
        r = structural_report(HUB64)
        assert (r["hub_datapath_bits"], r["conv_datapath_bits"]) == (55, 56)

    @given(st.integers(2, 11), st.integers(1, 58))
    def test_one_bit_less(self, e, f):
        r = structural_report(FormatSpec(e, f))
        assert r["hub_stages"] < r["conv_stages"]
        assert r["hub_datapath_bits"] == f + 3 == r["conv_datapath_bits"] - 1


class TestAccuracy:
    def test_single_sample(self, small):
        s = accuracy_compare(small, 1, seed=0)
        assert s.samples == 1 and s.half_ulp_violations == 0

    def test_rejects_empty(self, small):
        with pytest.raises(ValueError):
            accuracy_compare(small, 0, seed=0)

    def test_bounds_and_determinism(self, small):
        a = accuracy_compare(small, 20000, seed=3)
        assert a.half_ulp_violations == 0
        assert a.max_abs_err_hub_ulps <= 0.5 and a.max_abs_err_conv_ulps <= 0.5
        assert a.to_dict() == accuracy_compare(small, 20000, seed=3).to_dict()
        assert 0.9 <= a.rms_ratio <= 1.1


class TestHelpers:
    @given(st.lists(st.integers(0, 2 ** 63 - 1), min_size=1, max_size=50))
    def test_bit_length(self, xs):
        assert bit_length(np.array(xs, dtype=np.int64)).tolist() == [x.bit_length() for x in xs]

    def test_check_encoding_clean(self, small):
        assert all(check_encoding(b, small) == [] for b in range(small.encoding_count))
