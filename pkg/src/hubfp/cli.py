"""``hubfp`` command line: encode, decode, add with traces, verification campaigns."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .conv_adder import conv_add, conv_sub
from .formats import (
    PRESETS,
    ConvFloat,
    EncodingError,
    FloatClass,
    FormatSpec,
    HubFloat,
    Special,
    decode_conv,
    decode_hub,
    dyadic_proxy,
    round_exact_to_conv_rne,
    round_exact_to_hub,
)
from .harness import MUTANTS, GuardError, accuracy_compare, exhaustive_verify, random_verify, \
    structural_report
from .hub_adder import hub_add, hub_sub

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _hex_bits(token: str) -> int:
    if not token.lower().startswith("0x"):
        raise argparse.ArgumentTypeError(f"expected a 0x... bit pattern, got {token!r}")
    try:
        return int(token, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed hex bit pattern {token!r}") from None


def _positive_int(token: str) -> int:
    try:
        n = int(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {token!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {token!r}")
    return n


_SPECIALS = {"inf": (FloatClass.INF, 0), "+inf": (FloatClass.INF, 0),
             "-inf": (FloatClass.INF, 1), "nan": (FloatClass.NAN, 0)}


def parse_value(token: str) -> Special | Fraction:
    """Exact reading of a decimal, fraction (``3/4``) or special literal."""
    key = token.strip().lower()
    if key in _SPECIALS:
        return Special(*_SPECIALS[key])
    try:
        q = Fraction(key)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--value {token!r}: not a decimal or fraction literal") from None
    if q == 0:
        return Special(FloatClass.ZERO, 1 if key.startswith("-") else 0)
    return q


def _spec(args) -> FormatSpec:
    if args.preset:
        if args.exp is not None or args.frac is not None:
            raise UsageError("--preset cannot be combined with --exp/--frac")
        return PRESETS[args.preset]
    if args.exp is None or args.frac is None:
        raise UsageError("a format is required: --exp E --frac F, or --preset hub32|hub64")
    try:
        return FormatSpec(args.exp, args.frac)
    except ValueError as e:
        raise UsageError(f"--exp {args.exp} --frac {args.frac}: {e}") from None


def _unpack(cls, token_name: str, bits: int, spec: FormatSpec):
    try:
        return cls.from_bits(bits, spec)
    except EncodingError as e:
        raise UsageError(f"{token_name} {bits:#x}: {e}") from None


def value_text(p) -> str:
    v = decode_hub(p) if isinstance(p, HubFloat) else decode_conv(p)
    if isinstance(v, Special):
        if v.kind is FloatClass.NAN:
            return "nan"
        text = "inf" if v.kind is FloatClass.INF else "0"
        return "-" + text if v.sign else text
    return str(v)


def encoding_dict(p) -> dict:
    return {"bits": p.hex(), "system": "hub" if isinstance(p, HubFloat) else "conv",
            "sign": p.sign, "exp_field": p.exp_field, "frac_field": p.frac_field,
            "class": p.fclass.value, "value": value_text(p)}


def _line(p) -> str:
    suffix = " exactly" if p.is_normal else ""
    return f"{p.hex()}  (= {value_text(p)}{suffix})"


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        print(text)


def cmd_info(args) -> int:
    spec = _spec(args)
    print(json.dumps(structural_report(spec), indent=2))
    return EXIT_OK


def cmd_encode(args) -> int:
    spec = _spec(args)
    v = parse_value(args.value)
    cls, rounder = (ConvFloat, round_exact_to_conv_rne) if args.conv else \
        (HubFloat, round_exact_to_hub)
    p = rounder(v if isinstance(v, Special) else dyadic_proxy(v, spec), spec)
    _emit(args, encoding_dict(p), _line(p))
    return EXIT_OK


def cmd_decode(args) -> int:
    spec = _spec(args)
    p = _unpack(ConvFloat if args.conv else HubFloat, "--bits", args.bits, spec)
    _emit(args, encoding_dict(p), _line(p))
    return EXIT_OK


def _trace_text(trace) -> str:
    if trace.bypassed:
        return "bypassed (special operand)"
    lines = []
    for name, rec in trace.to_dict().items():
        if isinstance(rec, dict):
            lines.append(f"{name}: " + " ".join(f"{k}={v}" for k, v in rec.items()))
    return "\n".join(lines)


def _cmd_arith(args, subtract: bool) -> int:
    spec = _spec(args)
    cls = ConvFloat if args.conv else HubFloat
    a = _unpack(cls, "--a", args.a, spec)
    b = _unpack(cls, "--b", args.b, spec)
    if args.conv:
        op = conv_sub if subtract else conv_add
    else:
        op = hub_sub if subtract else hub_add
    try:
        result, trace = op(a, b)
    except ValueError as e:
        raise UsageError(str(e)) from None
    payload = {"op": "sub" if subtract else "add", "a": encoding_dict(a),
               "b": encoding_dict(b), "result": encoding_dict(result)}
    text = _line(result)
    if args.trace:
        payload["trace"] = trace.to_dict()
        text += "\n" + _trace_text(trace)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_add(args) -> int:
    return _cmd_arith(args, subtract=False)


def cmd_sub(args) -> int:
    return _cmd_arith(args, subtract=True)


def cmd_verify(args) -> int:
    spec = _spec(args)
    try:
        if args.exhaustive:
            report = exhaustive_verify(spec, mutant=args.mutant, normals_only=args.normals_only)
        else:
            report = random_verify(spec, args.random, args.seed, mutant=args.mutant)
    except (GuardError, ValueError) as e:
        raise UsageError(str(e)) from None
    if args.format == "json":
        print(report.to_json(timing=args.timing))
    else:
        print(report.summary())
        if args.timing:
            print(f"elapsed={report.elapsed:.2f}s")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_compare(args) -> int:
    spec = _spec(args)
    stats = accuracy_compare(spec, args.samples, args.seed)
    text = (f"spec={spec} samples={stats.samples} rms_hub={stats.rms_err_hub:.6f} "
            f"rms_conv={stats.rms_err_conv:.6f} ratio={stats.rms_ratio:.4f} "
            f"half_ulp_violations={stats.half_ulp_violations}")
    _emit(args, stats.to_dict(), text)
    return EXIT_OK if stats.half_ulp_violations == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--exp", type=int, help="exponent field width e")
    common.add_argument("--frac", type=int, help="stored fraction width f")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="hubfp",
                                     description="HUB floating-point formats and adders.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("info", parents=[common], help="stage counts and datapath widths")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("encode", parents=[common], help="round a number to an encoding")
    p.add_argument("--value", required=True, help="decimal, fraction, inf or nan")
    p.add_argument("--conv", action="store_true", help="conventional RNE grid instead of HUB")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="exact value of a bit pattern")
    p.add_argument("--bits", required=True, type=_hex_bits)
    p.add_argument("--conv", action="store_true")
    p.set_defaults(func=cmd_decode)

    for name, func in (("add", cmd_add), ("sub", cmd_sub)):
        p = sub.add_parser(name, parents=[common], help=f"{name} two encodings")
        p.add_argument("--a", required=True, type=_hex_bits)
        p.add_argument("--b", required=True, type=_hex_bits)
        p.add_argument("--conv", action="store_true", help="use the conventional adder")
        p.add_argument("--trace", action="store_true", help="print the stage records")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", parents=[common], help="oracle equivalence campaign")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--random", type=_positive_int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normals-only", action="store_true")
    p.add_argument("--mutant", choices=sorted(MUTANTS), help="inject a known HUB adder bug")
    p.add_argument("--timing", action="store_true", help="include elapsed time")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", parents=[common], help="rounding error of both grids")
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)
    return parser


def _glue_values(argv: list[str]) -> list[str]:
    """``--value -inf`` -> ``--value=-inf`` so argparse does not read it as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--value" and i + 1 < len(argv):
            out.append(f"--value={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(_glue_values(list(argv)))
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"hubfp {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
