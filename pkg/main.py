"""
veilcache command line

  simulate  place, deliver and decode one demand vector; write the trace
  audit     exhaustive decodability and exact privacy checks
  rates     closed-form rate tables and the comparison at M*

Exit codes: 0 success, 1 decode failure, 2 privacy failure, 3 input error,
4 enumeration cap exceeded.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from analysis.audit import (
    KeyMode,
    decodability_to_document,
    privacy_to_document,
    render_table,
    table1_reconstruct,
    table_to_document,
    verify_decodability,
    verify_privacy,
)
from analysis.rates import (
    comparison_rates_at_mstar,
    fraction_text,
    parse_grid,
    points_to_csv,
    rates_to_document,
    tradeoff_table,
    check_measured_rate,
)
from core.config import LogLevel, RunConfig, load_run_config
from core.errors import CapExceededError, ConfigError, DecodeError, ExitCode, SingularMatrixError, VeilcacheError
from core.galois import FieldElement
from core.mds import generator_to_document, load_generator, systematic_generator, GeneratorMatrix
from core.model import (
    DemandVector,
    FileLibrary,
    SystemParams,
    TransmissionRecord,
    load_library,
    random_library,
    render_entry,
    trace_to_document,
    write_json,
)
from core.monitoring import RunMetrics, configure_logging
from schemes.nonprivate_scheme import np_decode, np_deliver, np_place
from schemes.presets import get_preset, preset_names
from schemes.private_scheme import (
    hybrid_decode,
    hybrid_deliver_from,
    hybrid_place,
    placement_to_document,
    pv_decode,
    pv_deliver,
    pv_place,
)

logger = logging.getLogger("veilcache")

LIBRARY_SEED_FALLBACK = 0


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


class CommandParser(argparse.ArgumentParser):
    """Reports usage errors with the input-error exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = CommandParser(add_help=False)
    common.add_argument("--K", type=int, help="number of real users")
    common.add_argument("--N", type=int, help="number of files")
    common.add_argument("--F", type=int, help="file length in symbols")
    common.add_argument("--L", type=int, help="stripe length (F defaults to L*(K(N-1)+1))")
    common.add_argument("--p", type=int, help="prime field override")
    common.add_argument("--generator", type=Path, help="generator matrix JSON")
    common.add_argument("--library", type=Path, help="file library JSON")
    common.add_argument("--preset", choices=preset_names(), help="worked-example system")
    common.add_argument("--seed", type=int, help="seed (falls back to VEILCACHE_SEED)")
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--output", type=Path, help="output directory")
    common.add_argument("--log-level", choices=[level.value for level in LogLevel])

    parser = CommandParser(prog="veilcache", description="Demand-private coded caching toolkit.")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common], help="run one delivery")
    simulate.add_argument("--demand", required=True, help="comma-separated file labels, e.g. A,B")
    simulate.add_argument("--keys", type=_int_list, help="force privacy keys (non-private run)")
    simulate.add_argument("--nonprivate", action="store_true", help="run the (KN, N) scheme directly")
    simulate.add_argument("--M", help="memory point for the memory-sharing scheme, e.g. 1/6")

    audit = commands.add_parser("audit", parents=[common], help="exhaustive decodability and privacy")
    audit.add_argument("--break-privacy", choices=["identity-keys"], help="negative control")
    audit.add_argument("--cap", type=int, help="maximum number of (d, S) cases")
    audit.add_argument("--jobs", type=int, help="worker processes")

    rates = commands.add_parser("rates", parents=[common], help="rate tables")
    rates.add_argument("--grid", help="comma-separated rationals, e.g. 0,1/6,1/3")
    rates.add_argument("--at-mstar", action="store_true", help="only the comparison at M*")
    rates.add_argument("--format", choices=["csv", "json", "both"], default="both")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    mode = None
    if getattr(args, "nonprivate", False):
        mode = "nonprivate"
    elif getattr(args, "M", None) is not None:
        mode = "hybrid"
    overrides = {
        "K": args.K, "N": args.N, "F": args.F, "L": args.L, "p": args.p,
        "generator": args.generator, "library": args.library, "preset": args.preset,
        "seed": args.seed, "output": args.output, "log_level": args.log_level,
        "mode": mode, "M": getattr(args, "M", None), "keys": getattr(args, "keys", None),
        "cap": getattr(args, "cap", None), "jobs": getattr(args, "jobs", None),
    }
    return load_run_config(args.config, **overrides)


def build_system(config: RunConfig) -> Tuple[SystemParams, FileLibrary, GeneratorMatrix]:
    """Parameters, library and generator from a preset, files, or the defaults."""
    generator = None
    if config.preset:
        preset = get_preset(config.preset)
        for name in ("K", "N"):
            if name in config.model_fields_set and getattr(config, name) != getattr(preset, name):
                raise ConfigError(f"preset {preset.name} has {name}={getattr(preset, name)}, got {getattr(config, name)}")
        params, library, generator = preset.build()
        if config.library:
            params, library = load_library(config.library)
    elif config.library:
        params, library = load_library(config.library)
    else:
        params = SystemParams(K=config.K, N=config.N, F=config.file_length(), field=config.resolved_field())
        seed = config.seed if config.seed is not None else LIBRARY_SEED_FALLBACK
        library = random_library(params, seed)

    if config.generator:
        generator = load_generator(config.generator)
    if generator is None:
        generator = systematic_generator(params.virtual_user_count, params.subpacket_count, params.field)
    logger.info(f"System {params.describe()} over {params.field}")
    return params, library, generator


def _values(symbols: Sequence[FieldElement]) -> List[int]:
    return [s.value for s in symbols]


def _trace_document(x: TransmissionRecord, g: GeneratorMatrix, header: Dict[str, object]) -> Dict[str, object]:
    doc = trace_to_document(x, g).model_dump()
    doc["header"] = header
    return doc


def cmd_simulate(config: RunConfig, demand_text: str, metrics: RunMetrics) -> int:
    params, library, g = build_system(config)
    forced = config.keys is not None
    out = config.output

    with metrics.track("simulate"):
        if config.mode == "nonprivate":
            d = DemandVector.from_labels(demand_text, params.N)
            placement = np_place(params, library, g)
            x = np_deliver(placement, d)
            placement_doc: Dict[str, object] = {
                "params": params.describe(),
                "generator": generator_to_document(g).model_dump(),
                "virtual_caches": [c.values() for c in placement.caches],
            }
            users = range(1, params.virtual_user_count + 1)
            decode = lambda i: np_decode(i, placement.cache(i), d[i], x, g)  # noqa: E731
            memory = params.memory_point
        elif config.mode == "hybrid":
            d = DemandVector.from_labels(demand_text, params.N)
            memory = config.memory()
            if memory is None:
                raise ConfigError("hybrid mode needs M")
            hybrid = hybrid_place(params, library, g, config.seed, memory, keys=config.keys)
            x = hybrid_deliver_from(hybrid, library, d)
            placement_doc = {
                "params": params.describe(),
                "memory": fraction_text(memory),
                "prefix_length": hybrid.prefix_length,
                "private": None if hybrid.private is None else placement_to_document(hybrid.private),
            }
            users = range(1, params.K + 1)
            decode = lambda k: hybrid_decode(k, hybrid, d[k], x, g)  # noqa: E731
        else:
            d = DemandVector.from_labels(demand_text, params.N)
            placement = pv_place(params, library, g, seed=config.seed, keys=config.keys)
            x = pv_deliver(placement, d)
            placement_doc = placement_to_document(placement)
            users = range(1, params.K + 1)
            decode = lambda k: pv_decode(  # noqa: E731
                k, placement.real_caches[k - 1], placement.key(k), d[k], x, g, params.N,
            )
            memory = params.memory_point

        results = []
        for user in users:
            expected = _values(library.file(d[user]))
            try:
                decoded: Optional[List[int]] = _values(decode(user))
                error = ""
            except (DecodeError, SingularMatrixError) as e:
                decoded, error = None, str(e)
            ok = decoded == expected
            if not ok:
                metrics.count("decode_failures")
                logger.error(f"User {user} failed to decode file {d[user]}: {error or 'wrong symbols'}")
            results.append({"user": user, "demand": d[user], "ok": ok, "decoded": decoded, "error": error})

    private = config.mode != "nonprivate" and not forced
    header = {
        "mode": config.mode,
        "demand": d.labels(),
        "private": private,
        "note": "keys forced; this run is not private" if forced else "",
    }
    all_ok = all(r["ok"] for r in results)
    write_json(out / "placement.json", placement_doc)
    write_json(out / "trace.json", _trace_document(x, g, header))
    write_json(out / "decode.json", {
        "all_ok": all_ok,
        "rate": fraction_text(x.rate),
        "rate_matches_closed_form": check_measured_rate(x, params.K, params.N, memory),
        "users": results,
    })

    if forced:
        print("NOTE: keys were forced; this run is not private")
    for entry in x.entries:
        print(render_entry(entry, g))
    print(f"rate = {fraction_text(x.rate)}; all users decoded: {all_ok}")
    return ExitCode.SUCCESS if all_ok else ExitCode.DECODE_FAILURE


def cmd_audit(config: RunConfig, break_privacy: Optional[str], metrics: RunMetrics) -> int:
    params, library, g = build_system(config)
    out = config.output
    key_mode = KeyMode.IDENTITY if break_privacy == "identity-keys" else KeyMode.UNIFORM

    with metrics.track("decodability"):
        decodability = verify_decodability(params, library, g, cap=config.cap, jobs=config.jobs)
    metrics.count("decodability_cases", decodability.cases_checked)
    write_json(out / "decodability.json", decodability_to_document(decodability))
    print(f"decodability: {'PASS' if decodability.passed else 'FAIL'} "
          f"({decodability.cases_checked}/{decodability.total_cases} cases)")
    if not decodability.passed:
        for c in decodability.counterexamples[:5]:
            logger.error(f"Counterexample: d={list(c.demand)} S={list(c.keys)} user {c.user}: {c.error or 'wrong symbols'}")
        return ExitCode.DECODE_FAILURE
    if not decodability.complete:
        logger.warning(f"Partial coverage: {decodability.cases_checked} of {decodability.total_cases} cases")
        return ExitCode.CAP_EXCEEDED

    with metrics.track("privacy"):
        privacy = verify_privacy(params, library, g, cap=config.cap, jobs=config.jobs, key_mode=key_mode)
    write_json(out / "privacy.json", privacy_to_document(privacy))
    for verdict in privacy.verdicts:
        status = "private" if verdict.private else f"LEAKS (max TV {fraction_text(verdict.max_tv)})"
        print(f"privacy user {verdict.user}: {status}")

    if (params.K, params.N) == (2, 2) and key_mode == KeyMode.UNIFORM:
        with metrics.track("table"):
            table = table1_reconstruct(params, library, g)
        (out / "table1.txt").write_text(render_table(table))
        write_json(out / "table1.json", table_to_document(table))
        print(render_table(table), end="")

    return ExitCode.SUCCESS if privacy.passed else ExitCode.PRIVACY_FAILURE


def cmd_rates(config: RunConfig, grid_text: Optional[str], at_mstar: bool, fmt: str, metrics: RunMetrics) -> int:
    K, N = config.K, config.N
    if config.preset:
        preset = get_preset(config.preset)
        K, N = preset.K, preset.N
    with metrics.track("rates"):
        comparison = comparison_rates_at_mstar(K, N)
        rows = [] if at_mstar else tradeoff_table(K, N, parse_grid(grid_text) if grid_text else None)

    points = [p for row in rows for p in row.points()] + comparison.points
    out = config.output
    if fmt in ("csv", "both"):
        out.mkdir(parents=True, exist_ok=True)
        (out / "rates.csv").write_text(points_to_csv(points))
    if fmt in ("json", "both"):
        write_json(out / "rates.json", rates_to_document(K, N, rows, comparison))

    for row in rows:
        cells = ", ".join(f"{label}={'-' if r is None else fraction_text(r)}" for label, r in row.rates.items())
        print(f"M={fraction_text(row.M)}: {cells}")
    print(f"at M*={fraction_text(comparison.memory)}: "
          + ", ".join(f"{p.label}={fraction_text(p.R)}" for p in comparison.points))
    if comparison.footnote:
        print(comparison.footnote)
    return ExitCode.SUCCESS


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    metrics = RunMetrics()
    try:
        config = config_from_args(args)
        configure_logging(config.log_level)
        if args.command == "simulate":
            code = cmd_simulate(config, args.demand, metrics)
        elif args.command == "audit":
            code = cmd_audit(config, args.break_privacy, metrics)
        else:
            code = cmd_rates(config, args.grid, args.at_mstar, args.format, metrics)
    except CapExceededError as e:
        logger.warning(f"Partial coverage: {e}")
        return int(ExitCode.CAP_EXCEEDED)
    except VeilcacheError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return int(e.exit_code)
    logger.debug(f"Run metrics: {metrics.summary()}")
    return int(code)


if __name__ == "__main__":
    sys.exit(main())
