"""Command-line front end.

Configuration may come from a `key = value` file (# comments allowed) and/or
flags; flags win.  Exit codes: 0 success, 2 configuration error, 3 blow-up.
"""

import argparse
import os
import sys

from .driver import RunConfig, convergence_study, run
from .errors import BlowUpError, ConfigError

_BOOLS = {"1": True, "true": True, "on": True, "yes": True,
          "0": False, "false": False, "off": False, "no": False}


def parse_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _build_parser():
    p = argparse.ArgumentParser(
        prog="ddgmps",
        description="Bound-preserving third-order DDG solver for weighted "
                    "convection-diffusion problems")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--problem", help="problem id (see --list-problems)")
    p.add_argument("--list-problems", action="store_true")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--beta0", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--gamma", help="interior test-point offset or 'auto'")
    p.add_argument("--dt", help="time step or 'auto'")
    p.add_argument("--safety", type=float)
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--limiter", choices=sorted(_BOOLS))
    p.add_argument("--lobatto-points", type=int, dest="lobatto_points")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--samples", type=int)
    p.add_argument("--snap-every", type=int, dest="snap_every")
    p.add_argument("--study", help="comma-separated 2:1 mesh sizes, e.g. 16,32,64")
    return p


_CASTS = {
    "nx": int, "ny": int, "beta0": float, "beta1": float, "safety": float,
    "t_final": float, "lobatto_points": int, "samples": int, "snap_every": int,
}


def _merge(file_cfg, args):
    merged = dict(file_cfg)
    for key in ("problem", "nx", "ny", "beta0", "beta1", "gamma", "dt", "safety",
                "t_final", "limiter", "lobatto_points", "out_dir", "samples",
                "snap_every", "study"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _config_from(merged):
    if "problem" not in merged:
        raise ConfigError("no problem selected (use --problem)")
    kwargs = {"problem": merged["problem"]}
    if "nx" not in merged:
        raise ConfigError("mesh size --nx is required")
    for key, val in merged.items():
        if key in ("problem", "study", "config", "list_problems"):
            continue
        if key == "limiter":
            val = _BOOLS.get(str(val).lower())
            if val is None:
                raise ConfigError(f"bad boolean for limiter: {merged['limiter']!r}")
        elif key in ("gamma", "dt"):
            val = val if val == "auto" else float(val)
        elif key in _CASTS:
            val = _CASTS[key](val)
        elif key == "out_dir":
            pass
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
        kwargs[key] = val
    return RunConfig(**kwargs)


def main(argv=None):
    if "MPS_DDG_THREADS" in os.environ:  # cap BLAS parallelism, best effort
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, os.environ["MPS_DDG_THREADS"])
    args = _build_parser().parse_args(argv)
    if args.list_problems:
        from .problems import problem_library
        for name in sorted(problem_library()):
            print(name)
        return 0
    try:
        file_cfg = parse_config_file(args.config) if args.config else {}
        merged = _merge(file_cfg, args)
        study = merged.pop("study", None)
        cfg = _config_from(merged)
        if study:
            sizes = [int(s) for s in str(study).split(",") if s.strip()]
            rep = convergence_study(cfg, sizes)
            print("N,e1,order1,e2,order2")
            for r in rep.rows:
                print(f"{r.n},{r.e1:.6e},{r.order1:.3f},{r.e2:.6e},{r.order2:.3f}")
        else:
            rep = run(cfg)
            last = rep.rows[-1]
            print(f"{rep.problem}: t = {last.t:.6g}  e1 = {last.e1:.4e}  "
                  f"e2 = {last.e2:.4e}  einf = {last.einf:.3e}  "
                  f"min/max = [{last.min_u:.6g}, {last.max_u:.6g}]")
            print(f"tau = {rep.cfl.tau:.6g} ({rep.cfl.binding}); "
                  f"mass drift = {last.mass_drift:.3e}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
