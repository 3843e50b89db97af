"""``adiasim`` command line.

Exit status is 0 on success, 1 when a verification or lint check fails,
and 2 for usage errors, unknown circuits and unreadable netlists.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import energy
from .adders import (
    AdderKind,
    AdderSpec,
    C_LOAD,
    circuits_dir,
    load_fixture,
    spec_from_netlist,
    verify_netlist,
)
from .harness import (
    PLAN_NOTE,
    R_NOTE,
    RAMP_FRACTION,
    MeterMode,
    PowerMeterConfig,
    StimulusPlan,
    comparison_csv,
    comparison_table,
    fmt9,
    frequency_sweep,
)
from .netlist import NetlistError, parse_netlist, validate
from .switch_eval import EvalConfig, EvalError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

BUILTIN_NAMES = [k.value for k in AdderKind] + ["cpl24"]


class UsageError(Exception):
    pass


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def load_circuit(ref: str) -> AdderSpec:
    """Built-in name (looked up in the fixture directory) or a path to a netlist file."""
    key = ref.lower()
    if key in BUILTIN_NAMES:
        try:
            netlist = load_fixture(key)
        except OSError as e:
            raise UsageError(f"cannot read fixture {key!r} from {circuits_dir()}: {e.strerror}") from None
        kind = AdderKind.CPL if key == "cpl24" else AdderKind(key)
        return spec_from_netlist(netlist, kind)
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"unknown circuit {ref!r} (built-ins: {', '.join(BUILTIN_NAMES)})")
    try:
        return spec_from_netlist(parse_netlist(path.read_text()))
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None


def _with_load(spec: AdderSpec, cload: float) -> AdderSpec:
    return AdderSpec(spec.kind, spec.netlist.with_output_load(cload), spec.expected_devices,
                     spec.supply_regime, spec.cpl_optional_pmos)


# -- subcommands --------------------------------------------------------------

def cmd_verify(args) -> int:
    spec = load_circuit(args.circuit)
    cfg = EvalConfig(vdd=args.vdd)
    report = verify_netlist(spec.netlist, cfg, warm=args.warm, circuit=spec.netlist.name)
    if args.csv:
        names = list(report.rows[0].outputs) if report.rows else []
        print(",".join(["A", "B", "C"] + names + ["result"]))
        for r in report.rows:
            print(",".join([str(b) for b in r.inputs] + [str(r.outputs[n]) for n in names]
                           + ["PASS" if r.passed else "FAIL"]))
    else:
        print(f"{report.circuit}: {'PASS' if report.passed else 'FAIL'}")
        print(report.format())
    return EXIT_OK if report.passed else EXIT_FAIL


def _circuit_list(args) -> list[str]:
    if args.all:
        return [k.value for k in AdderKind]
    if not args.circuit:
        raise UsageError("name at least one --circuit, or pass --all")
    return args.circuit


def cmd_power(args) -> int:
    specs = [_with_load(load_circuit(c), args.cload) for c in _circuit_list(args)]
    meter = PowerMeterConfig(MeterMode(args.meter))
    rows = comparison_table(specs, StimulusPlan(f_clk=args.freq), EvalConfig(vdd=args.vdd), meter)
    if args.csv:
        sys.stdout.write(comparison_csv(rows))
        return EXIT_OK
    print(f"V_DD={args.vdd:g} V  C_L={args.cload:g} F  f_clk={args.freq:g} Hz  meter={args.meter}")
    print(f"{'circuit':<8} {'devices':>8} {'avg power (uW)':>16}")
    footnote = False
    for spec, row in zip(specs, rows):
        mark = ""
        if spec.kind is AdderKind.CPL and not spec.cpl_optional_pmos:
            mark, footnote = "*", True
        print(f"{row.circuit:<8} {str(row.devices) + mark:>8} {row.avg_power_w * 1e6:>16.6f}")
    if footnote:
        print("* 24 devices with the optional cross-coupled pMOS pair (circuit cpl24)")
    print(f"notes: {PLAN_NOTE}; {R_NOTE}; ramp time T = {RAMP_FRACTION:g} of the clock period")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.fmin < args.fmax:
        raise UsageError("--fmin must be below --fmax")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if not args.circuit:
        raise UsageError("name at least one --circuit")
    cfg = EvalConfig(vdd=args.vdd)
    chunks = []
    for k, ref in enumerate(args.circuit):
        spec = _with_load(load_circuit(ref), args.cload)
        result = frequency_sweep(spec, args.fmin, args.fmax, args.points, StimulusPlan(), cfg)
        chunks.append(result.to_csv(header=k == 0))
    text = "".join(chunks)
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as e:
            raise UsageError(f"cannot write {args.out}: {e.strerror}") from None
    return EXIT_OK


def cmd_energy(args) -> int:
    f = args.formula
    if f == "eq2":
        value = energy.cc_voltage(args.i_s, args.c, args.t)
    elif f == "eq4":
        value = energy.cc_dissipation(args.r, args.i_s, args.t)
    elif f == "eq5":
        value = energy.ramp_dissipation(args.r, args.c, args.t, args.v)
    else:
        value = energy.stepwise_dissipation(args.c, args.v, args.n)
    print(fmt9(value))
    return EXIT_OK


def cmd_lint(args) -> int:
    path = Path(args.netlist)
    try:
        text = path.read_text()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None
    diags = validate(parse_netlist(text))
    for d in diags:
        print(f"{path}: {d}")
    if not diags:
        print(f"{path}: ok")
    return EXIT_FAIL if diags else EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiasim", description="Switch-level adiabatic full adder simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check the full-adder truth table")
    v.add_argument("circuit", help=f"built-in ({', '.join(BUILTIN_NAMES)}) or netlist path")
    v.add_argument("--warm", action="store_true", help="chain state from row to row")
    v.add_argument("--vdd", type=_positive, default=1.8)
    v.add_argument("--csv", action="store_true")
    v.set_defaults(func=cmd_verify)

    pw = sub.add_parser("power", help="average power table")
    pw.add_argument("--circuit", action="append", default=[])
    pw.add_argument("--all", action="store_true", help="all seven built-in adders")
    pw.add_argument("--vdd", type=_positive, default=1.8)
    pw.add_argument("--cload", type=_positive, default=C_LOAD)
    pw.add_argument("--freq", type=_positive, default=50e6)
    pw.add_argument("--meter", choices=[m.value for m in MeterMode], default=MeterMode.EXACT.value)
    pw.add_argument("--csv", action="store_true")
    pw.set_defaults(func=cmd_power)

    sw = sub.add_parser("sweep", help="power against clock frequency, as CSV")
    sw.add_argument("--circuit", action="append", default=[])
    sw.add_argument("--fmin", type=_positive, default=1e6)
    sw.add_argument("--fmax", type=_positive, default=100e6)
    sw.add_argument("--points", type=int, default=20)
    sw.add_argument("--vdd", type=_positive, default=1.8)
    sw.add_argument("--cload", type=_positive, default=C_LOAD)
    sw.add_argument("--out", help="output file (default stdout)")
    sw.add_argument("--csv", action="store_true", help="accepted for symmetry; output is always CSV")
    sw.set_defaults(func=cmd_sweep)

    e = sub.add_parser("energy", help="evaluate one charging formula")
    e.add_argument("formula", choices=["eq2", "eq4", "eq5", "eq6"],
                   help="eq2 voltage under constant current, eq4 constant-current loss, "
                        "eq5 ramp loss, eq6 stepwise loss")
    e.add_argument("--is", dest="i_s", type=_positive)
    e.add_argument("--r", type=_positive)
    e.add_argument("--c", type=_positive)
    e.add_argument("--t", type=_positive)
    e.add_argument("--v", type=_positive)
    e.add_argument("--n", type=_count)
    e.add_argument("--csv", action="store_true", help="accepted for symmetry; output is one number")
    e.set_defaults(func=cmd_energy)

    lint = sub.add_parser("lint", help="parse and validate a netlist file")
    lint.add_argument("netlist")
    lint.set_defaults(func=cmd_lint)
    return p


_ENERGY_PARAMS = {"eq2": ("i_s", "c", "t"), "eq4": ("r", "i_s", "t"), "eq5": ("r", "c", "t", "v"), "eq6": ("c", "v", "n")}
_FLAG = {"i_s": "--is"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "energy":
        missing = [_FLAG.get(k, f"--{k}") for k in _ENERGY_PARAMS[args.formula] if getattr(args, k) is None]
        if missing:
            parser.error(f"energy {args.formula} needs {' '.join(missing)}")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"adiasim: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NetlistError as e:
        print(f"adiasim: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (EvalError, ValueError) as e:
        print(f"adiasim: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
