"""Command-line front end: cmatrix, period, family, chain, band, eigfun, pipeline."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import family_solver as fs
from . import landau_rep as lr
from . import pendulum
from . import potential_chain as pc
from .cmatrix import make_bundle
from .errors import TruncationWarning

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"invalid {field_name}: {message}")
        self.field = field_name


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage} failed: {message}")
        self.stage = stage


@dataclass
class RunConfig:
    m: int = 1
    B0: float = 1.0
    eps: float = 0.1
    eps_grid: list | None = None
    eig_index: int | None = None
    solver_tol: float = 1e-13
    chain_tol: float = 1e-8
    band_tol: float = 1e-6
    eig_tol: float = 1e-5
    n_series: int = 256
    levels: int = lr.DEFAULT_LEVELS
    channels: int = lr.DEFAULT_CHANNELS
    kn: int = 16
    k0: float = 0.0
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise ConfigError("m", f"must be an integer >= 1, got {self.m!r}")
        if not self.B0 > 0:
            raise ConfigError("B0", f"must be positive, got {self.B0!r}")
        for name in ("solver_tol", "chain_tol", "band_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)!r}")
        for name in ("n_series", "levels", "channels", "kn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if self.eig_index is not None and not -self.m <= self.eig_index < self.m:
            raise ConfigError("eig_index", f"must lie in [-{self.m}, {self.m})")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        return cls(**d).validate()


def dump_json(obj, path: Path | None = None) -> str:
    text = json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def _load(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# stages -------------------------------------------------------------------

def stage_family(cfg: RunConfig):
    bundle = make_bundle(cfg.m, cfg.B0, cfg.eig_index)
    sol = fs.iterate_family(cfg.eps, bundle, tol=cfg.solver_tol)
    if max(f.N for f in sol.v) >= cfg.n_series:
        raise StageError("family", f"series reached the cap n_series={cfg.n_series}")
    d = sol.to_dict()
    d["residual"] = fs.residual_check(sol, bundle)
    d["bundle"] = bundle.to_dict()
    return sol, d


def stage_chain(family: dict, tol: float):
    sol = fs.FamilySolution.from_dict(family)
    chain = pc.from_family(sol)
    rep = pc.verify_conditions(chain, tol=tol)
    rep["systems"] = list(pc.cross_check_systems(chain.u, chain.B, chain.m))
    return chain, chain.to_dict()


def stage_band(chain: pc.PotentialChain, kn: int, levels: int, channels: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        scan = lr.flat_band_scan(chain.V, chain.B, chain.m, kn, levels, channels)
    return scan


def stage_eigfun(chain: pc.PotentialChain, k0: float, levels: int, channels: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return lr.build_eigenfunction(chain, k0=k0, N=levels, P=channels)


def run_pipeline(cfg: RunConfig) -> int:
    cfg.validate()
    out = Path(cfg.out_dir)
    sol, fam = stage_family(cfg)
    dump_json(fam, out / "family.json")
    chain, ch = stage_chain(fam, cfg.chain_tol)
    dump_json(ch, out / "chain.json")
    rep = chain.report
    if rep["constant_potential"]:
        summary = {"schema": "1", "kind": "pipeline", "status": "constant potential",
                   "detail": "V is constant; the spectrum is the shifted Landau levels"}
        dump_json(summary, out / "summary.json")
        print("constant potential: nothing to verify", file=sys.stderr)
        return EXIT_OK
    if not rep["passed"]:
        raise StageError("chain", f"res_c={rep['res_c']:.3g}, res_b={rep['res_b']}")
    scan = stage_band(chain, cfg.kn, cfg.levels, cfg.channels)
    _write_band(scan, out)
    summary = {"schema": "1", "kind": "pipeline", "status": "ok", "m": cfg.m,
               "epsilon": cfg.eps, "residual": fam["residual"], "res_c": rep["res_c"],
               "band_deviation": scan.max_deviation / chain.B,
               "band_flatness": scan.flatness / chain.B}
    if scan.max_deviation > cfg.band_tol * chain.B or not scan.guard_ok:
        summary["status"] = "failed"
        dump_json(summary, out / "summary.json")
        raise StageError("band", f"deviation {scan.max_deviation:.3g} exceeds "
                                 f"{cfg.band_tol:.3g} B")
    dump_json(summary, out / "summary.json")
    return EXIT_OK


def _write_band(scan: lr.BandScan, out: Path) -> None:
    write_csv(out / "band.csv", ["k", "lambda_near", "deviation"],
              zip(scan.k, scan.nearest, scan.deviation))
    dump_json(scan.to_dict(), out / "band.json")


# argument handling --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landau-eig",
                                description="Periodic potentials with a flat Landau band.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override flags")
    common.add_argument("--out-dir", default=None)

    s = sub.add_parser("cmatrix", parents=[common])
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--b0", type=float, default=1.0)
    s.add_argument("--eig-index", type=int, default=None)

    s = sub.add_parser("period", parents=[common])
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--curve", nargs=3, type=float, metavar=("A_MIN", "A_MAX", "N"))

    for name in ("family", "family-sweep", "pipeline"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--m", type=int, default=1)
        s.add_argument("--b0", type=float, default=1.0)
        s.add_argument("--eig-index", type=int, default=None)
        s.add_argument("--tol", type=float, default=1e-13)
        if name == "family-sweep":
            s.add_argument("--eps-grid", nargs="+", type=float, required=True)
        else:
            s.add_argument("--eps", type=float, default=0.1)
        if name == "pipeline":
            s.add_argument("--kn", type=int, default=16)
            s.add_argument("--levels", type=int, default=lr.DEFAULT_LEVELS)
            s.add_argument("--channels", type=int, default=lr.DEFAULT_CHANNELS)

    s = sub.add_parser("chain", parents=[common])
    s.add_argument("--from-family", required=True)
    s.add_argument("--tol", type=float, default=1e-8)

    s = sub.add_parser("band", parents=[common])
    s.add_argument("--from-chain", required=True)
    s.add_argument("--kn", type=int, default=16)
    s.add_argument("--levels", type=int, default=lr.DEFAULT_LEVELS)
    s.add_argument("--channels", type=int, default=lr.DEFAULT_CHANNELS)

    s = sub.add_parser("eigfun", parents=[common])
    s.add_argument("--from-chain", required=True)
    s.add_argument("--k0", type=float, default=0.0)
    s.add_argument("--levels", type=int, default=lr.DEFAULT_LEVELS)
    s.add_argument("--channels", type=int, default=lr.DEFAULT_CHANNELS)
    return p


def _config_from_args(args) -> RunConfig:
    d = {"m": args.m, "B0": args.b0, "eig_index": args.eig_index, "solver_tol": args.tol}
    if hasattr(args, "eps"):
        d["eps"] = args.eps
    if hasattr(args, "eps_grid"):
        d["eps_grid"] = args.eps_grid
    for name in ("kn", "levels", "channels"):
        if hasattr(args, name):
            d[name] = getattr(args, name)
    if args.out_dir is not None:
        d["out_dir"] = args.out_dir
    if args.config:
        d.update(_load(args.config))
    return RunConfig.from_dict(d)


def _overrides(args) -> None:
    """Apply ``--config`` keys to the parsed flags of the simple commands."""
    if getattr(args, "config", None):
        for k, v in _load(args.config).items():
            setattr(args, k.replace("-", "_"), v)


def _emit(text: str, out_dir, name: str) -> None:
    sys.stdout.write(text)
    if out_dir is not None:
        p = Path(out_dir) / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)


def _dispatch(args) -> int:
    cmd = args.command
    if cmd in ("family", "family-sweep", "pipeline"):
        cfg = _config_from_args(args)
        if cmd == "pipeline":
            return run_pipeline(cfg)
        if cmd == "family":
            _, d = stage_family(cfg)
            _emit(dump_json(d), args.out_dir, "family.json")
            return EXIT_OK if d["residual"] <= 1e-9 else EXIT_FAILED
        bundle = make_bundle(cfg.m, cfg.B0, cfg.eig_index)
        rows = fs.family_sweep(cfg.eps_grid, bundle, tol=cfg.solver_tol)
        out = Path(cfg.out_dir) / "family_sweep.csv"
        write_csv(out, ["epsilon", "tau", "B_eff", "residual"],
                  [(r["epsilon"], r["tau"], r["B_eff"], r["residual"]) for r in rows])
        sys.stdout.write(out.read_text())
        return EXIT_OK

    _overrides(args)
    if cmd == "cmatrix":
        if args.m is None or args.m < 1:
            raise ConfigError("m", f"must be an integer >= 1, got {args.m!r}")
        bundle = make_bundle(args.m, args.b0, args.eig_index)
        d = {"schema": "1", "kind": "cmatrix", **bundle.to_dict()}
        _emit(dump_json(d), args.out_dir, "cmatrix.json")
        return EXIT_OK
    if cmd == "period":
        if args.curve:
            a0, a1, n = args.curve
            alphas, T = pendulum.period_curve(a0, a1, int(n), args.b)
            out = Path(args.out_dir or ".") / "period.csv"
            write_csv(out, ["alpha", "T"], zip(alphas, T))
            sys.stdout.write(out.read_text())
            return EXIT_OK
        um, up = pendulum.amplitude_bounds(args.alpha, args.b)
        d = {"schema": "1", "kind": "period", "alpha": args.alpha, "B": args.b,
             "T": pendulum.period_integral(args.alpha, args.b), "u_minus": um, "u_plus": up,
             "T_small_amplitude": pendulum.small_amplitude_period(args.alpha, args.b)}
        _emit(dump_json(d), args.out_dir, "period.json")
        return EXIT_OK
    if cmd == "chain":
        chain, d = stage_chain(_load(args.from_family), args.tol)
        out = Path(args.out_dir or ".")
        dump_json(d, out / "chain.json")
        chain.V.write_csv(out / "V.csv")
        sys.stdout.write(dump_json(chain.report))
        return EXIT_OK if chain.report["passed"] else EXIT_FAILED
    chain = pc.PotentialChain.from_dict(_load(args.from_chain))
    if cmd == "band":
        scan = stage_band(chain, args.kn, args.levels, args.channels)
        _write_band(scan, Path(args.out_dir or "."))
        sys.stdout.write(dump_json({k: v for k, v in scan.to_dict().items()
                                    if k in ("max_deviation", "flatness", "guard_ok")}))
        return EXIT_OK if scan.guard_ok else EXIT_FAILED
    if cmd == "eigfun":
        ef = stage_eigfun(chain, args.k0, args.levels, args.channels)
        _emit(dump_json(ef.to_dict()), args.out_dir, "eigfun.json")
        return EXIT_OK
    raise ConfigError("command", f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
