"""HUB floating-point formats, adders and their exact-arithmetic oracle."""

from .conv_adder import ConvAddTrace, conv_add, conv_sub
from .formats import (
    HUB32,
    HUB64,
    PRESETS,
    ClassError,
    ConvFloat,
    EncodingError,
    ExactValue,
    FloatClass,
    FormatSpec,
    HubFloat,
    Special,
    decode_conv,
    decode_hub,
    round_exact_to_conv_rne,
    round_exact_to_hub,
)
from .harness import (
    ErrorStats,
    VerifyReport,
    accuracy_compare,
    exhaustive_verify,
    random_verify,
    structural_report,
)
from .hub_adder import HubAddTrace, hub_add, hub_sub
from .oracle import exact_add, nearest_hub_bruteforce, reference_conv_add, reference_hub_add

__version__ = "0.1.0"

__all__ = [
    "HUB32", "HUB64", "PRESETS", "ClassError", "ConvAddTrace", "ConvFloat", "EncodingError",
    "ErrorStats", "ExactValue", "FloatClass", "FormatSpec", "HubAddTrace", "HubFloat",
    "Special", "VerifyReport", "accuracy_compare", "conv_add", "conv_sub", "decode_conv",
    "decode_hub", "exact_add", "exhaustive_verify", "hub_add", "hub_sub",
    "nearest_hub_bruteforce", "random_verify", "reference_conv_add", "reference_hub_add",
    "round_exact_to_conv_rne", "round_exact_to_hub", "structural_report",
]
