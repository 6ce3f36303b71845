"""Command-line entry point.

Verbs:
  run <config>        execute a scenario configuration file
  preset <name>       show or export a named preset configuration
  validate <config>   check a configuration and report every problem
  verify              run the built-in verification suite

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numeric divergence, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="seaquake",
        description="Spectral-element simulation of hydro-acoustic waves"
                    " and tsunamis in a stratified ocean.",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="cap the numerical worker pool (0 = library default)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario configuration")
    p_run.add_argument("config", help="configuration file or preset name")
    p_run.add_argument("--out-dir", default="out", help="output directory")
    p_run.add_argument("--dt", type=float, default=None,
                       help="override the time step")
    p_run.add_argument("--steps", type=int, default=None,
                       help="override the step count (with --dt sets duration)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--formulation", default=None,
                       choices=["velocity", "potential", "both"])

    p_pre = sub.add_parser("preset", help="print or export a preset")
    p_pre.add_argument("name", help="preset name (or 'list')")
    p_pre.add_argument("--export", default=None, metavar="FILE",
                       help="write the preset configuration to FILE")

    p_val = sub.add_parser("validate", help="validate a configuration file")
    p_val.add_argument("config")

    sub.add_parser("verify", help="run the built-in verification suite")
    return parser


def _apply_thread_cap(n: int):
    if n and n > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def _load_config(arg, scenario):
    from pathlib import Path

    from .errors import ConfigurationError

    if Path(arg).is_file():
        return scenario.parse_config(Path(arg).read_text())
    if arg in scenario.list_presets():
        return scenario.preset(arg)
    raise ConfigurationError(
        f"{arg!r} is neither a config file nor a preset"
        f" (presets: {', '.join(scenario.list_presets())})"
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _apply_thread_cap(args.threads)

    # imports deferred so --threads can shape the numeric libraries
    from . import scenario
    from .errors import ConfigurationError, DivergenceError, NumericError

    try:
        if args.verb == "verify":
            from .verify import run_verification
            results = run_verification(verbose=True)
            failed = [r for r in results if not r.ok]
            print(f"{len(results) - len(failed)}/{len(results)} checks passed")
            return 1 if failed else 0

        if args.verb == "preset":
            if args.name == "list":
                for n in scenario.list_presets():
                    print(n)
                return 0
            cfg = scenario.preset(args.name)
            text = scenario.format_config(
                cfg, header=f"preset: {args.name}\n"
                            f"{scenario.preset_provenance(args.name)}"
            )
            if args.export:
                with open(args.export, "w") as fh:
                    fh.write(text)
                print(f"wrote {args.export}")
            else:
                print(text, end="")
            return 0

        if args.verb == "validate":
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"I/O error: {exc}", file=sys.stderr)
                return 4
            try:
                scenario.parse_config(text)
            except ConfigurationError as exc:
                print(f"invalid configuration: {exc}", file=sys.stderr)
                for e in exc.errors:
                    print(f"  - {e}", file=sys.stderr)
                return 2
            print("configuration OK")
            return 0

        if args.verb == "run":
            cfg = _load_config(args.config, scenario)
            if args.seed is not None:
                cfg.seed = args.seed
                cfg.source_seed = args.seed
            if args.formulation is not None:
                cfg.formulation = args.formulation
            if args.dt is not None:
                cfg.dt = args.dt
            if args.steps is not None:
                dt = cfg.dt if cfg.dt > 0 else None
                if dt is None:
                    print("--steps requires --dt (or dt in the config)",
                          file=sys.stderr)
                    return 2
                cfg.duration = dt * args.steps
            manifest = scenario.run_scenario(cfg, args.out_dir)
            print(f"run complete: {len(manifest.files)} files in {args.out_dir}")
            for key in ("time.dt", "time.steps", "comparison.max_rel_diff"):
                if key in manifest.entries:
                    print(f"  {key} = {manifest.entries[key]}")
            return 0

    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        for e in getattr(exc, "errors", [])[:20]:
            print(f"  - {e}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
