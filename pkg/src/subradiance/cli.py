"""Command-line harness: ``subradiance <experiment> [options]``."""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

from . import __version__, experiments
from .hilbert import BlockTooLargeError

EXPERIMENTS = ("fig3", "fig4", "fig5", "fig6", "dispersion", "disorder", "si-defects", "intensity")

DEFAULT_N = {
    "fig3": "10,20,40,60,80,100",
    "fig4": "10..60:5",
    "fig5": "8,10,12,14",
    "fig6": "8,10,12,14,16",
    "disorder": "20",
    "si-defects": "20",
    "intensity": "50",
}
DEFAULT_FZ = {"fig3": "-max", "fig4": "-max+1", "si-defects": "-max+2", "fig5": "0",
              "disorder": "-max", "intensity": "-max"}


@dataclasses.dataclass
class ExperimentConfig:
    experiment: str
    N: str | None = None
    d: str | None = None
    fz: str | None = None
    engineered: bool = False
    sigma: str = "0,0.05,0.1"
    realizations: int = 200
    seed: int = 0
    samples: int = 512
    ny: int = 200
    nz: int = 400
    filtered: str = ""
    threads: int = 1
    out: str = "."
    format: str = "csv"

    def resolved(self):
        c = dataclasses.replace(self)
        if c.N is None:
            c.N = DEFAULT_N.get(c.experiment, "")
        if c.fz is None:
            c.fz = DEFAULT_FZ.get(c.experiment, "")
        if c.d is None:
            c.d = "0.2,0.3,0.4" if c.experiment == "fig3" else "0.3"
        return c

    def payload(self) -> dict:
        """Fields that determine the numbers (output location and threading excluded)."""
        skip = {"out", "format", "threads"}
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name not in skip}

    def digest(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class UsageError(ValueError):
    pass


def parse_N(text: str) -> list[int]:
    """'10..100', '10..60:5', '8,10,12' or mixtures joined by commas."""
    out = []
    for part in filter(None, (p.strip() for p in str(text).split(","))):
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            try:
                lo, hi, step = int(lo), int(hi), int(step or 1)
            except ValueError:
                raise UsageError(f"bad N range '{part}'") from None
            if step < 1 or hi < lo:
                raise UsageError(f"bad N range '{part}'")
            out.extend(range(lo, hi + 1, step))
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise UsageError(f"bad N value '{part}'") from None
    if any(n < 1 for n in out):
        raise UsageError("N must be positive")
    return out


def parse_floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad value for --{name}: '{text}'") from None
    if not vals:
        raise UsageError(f"--{name} needs at least one value")
    return vals


def read_config_file(path) -> dict:
    """key = value lines; lines of a previous output header ('# config.key = value') also work."""
    vals = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                line = line.lstrip("#").strip()
                if not line.startswith("config."):
                    continue
                line = line[len("config."):]
            if not line or "=" not in line:
                continue
            key, _, value = line.partition("=")
            vals[key.strip().replace("-", "_")] = value.strip()
    return vals


def _coerce(field: dataclasses.Field, value):
    if field.type in ("bool", bool):
        if isinstance(value, bool):
            return value
        v = str(value).lower()
        if v not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"config field '{field.name}' expects a boolean, got '{value}'")
        return v in ("true", "1", "yes")
    if field.type in ("int", int):
        try:
            return int(value)
        except ValueError:
            raise UsageError(f"config field '{field.name}' expects an integer, got '{value}'") from None
    return None if value in (None, "None") else str(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subradiance", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value file (an earlier output file works too)")
        s.add_argument("--N", help="atom counts: '10..100', '10..60:5' or '8,10,12'")
        s.add_argument("--d", help="lattice constant(s) in units of lambda_0")
        s.add_argument("--fz", help="block: 'max', '-max+1', '0', '1/2', ...")
        s.add_argument("--engineered", action="store_true", default=None)
        s.add_argument("--sigma", help="disorder strengths in units of d (comma list)")
        s.add_argument("--realizations", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int, help="k points per dispersion curve")
        s.add_argument("--ny", type=int)
        s.add_argument("--nz", type=int)
        s.add_argument("--filtered", help="N values for the free-space filtered search (fig6)")
        s.add_argument("--threads", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--format", choices=("csv", "json"))
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> ExperimentConfig:
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key not in fields:
                raise UsageError(f"unknown config field '{key}'")
            values[key] = _coerce(fields[key], value)
    for key in fields:
        v = getattr(args, key, None)
        if v is not None and key != "experiment":
            values[key] = v
    values.pop("experiment", None)
    return ExperimentConfig(args.experiment, **values).resolved()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, float):
        return float(f"{v:.17g}")
    return v


def metadata(cfg: ExperimentConfig, table) -> dict:
    return {
        "program": "subradiance",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "table": table.name,
        "config": cfg.payload(),
        **{k: v for k, v in table.meta.items()},
    }


def write_table(cfg: ExperimentConfig, table, directory) -> str:
    meta = metadata(cfg, table)
    stem = f"{cfg.experiment}_{table.name}"
    if cfg.format == "json":
        path = os.path.join(directory, stem + ".json")
        body = {"meta": {k: _json_num(v) for k, v in meta.items()},
                "columns": table.columns,
                "rows": [[_json_num(x) for x in row] for row in table.rows]}
        with open(path, "w") as fh:
            json.dump(body, fh, indent=1, sort_keys=False)
            fh.write("\n")
        return path
    path = os.path.join(directory, stem + ".csv")
    with open(path, "w") as fh:
        for key in ("program", "version", "timestamp", "config_hash", "seed", "table"):
            fh.write(f"# {key}: {meta[key]}\n")
        for key, value in meta["config"].items():
            fh.write(f"# config.{key} = {value}\n")
        for key, value in table.meta.items():
            fh.write(f"# {key}: {_fmt(value) if value is not None else 'none'}\n")
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def run_experiment(cfg: ExperimentConfig):
    exp = cfg.experiment
    if exp not in EXPERIMENTS:
        raise UsageError(f"unknown experiment '{exp}'")
    d_vals = parse_floats(cfg.d, "d")
    if any(d <= 0 for d in d_vals):
        raise UsageError("--d must be positive")
    d = d_vals[0]
    threads = max(1, cfg.threads)
    if exp == "fig3":
        return experiments.fig3(parse_N(cfg.N), d_vals, cfg.fz, threads)
    if exp == "fig4":
        return experiments.fig4(parse_N(cfg.N), d, cfg.fz, threads)
    if exp == "si-defects":
        return experiments.si_defects(parse_N(cfg.N), d, cfg.fz, threads)
    if exp == "fig5":
        return experiments.fig5(parse_N(cfg.N), d, cfg.fz, threads=threads)
    if exp == "fig6":
        filt = parse_N(cfg.filtered) if cfg.filtered else None
        return experiments.fig6(parse_N(cfg.N), d, cfg.engineered, filt, threads)
    if exp == "dispersion":
        if cfg.samples < 2:
            raise UsageError("--samples must be at least 2")
        return experiments.dispersion(d, cfg.engineered, cfg.samples)
    if exp == "disorder":
        sig = parse_floats(cfg.sigma, "sigma")
        if any(s < 0 for s in sig):
            raise UsageError("--sigma must be non-negative")
        if cfg.realizations < 1:
            raise UsageError("--realizations must be at least 1")
        return experiments.disorder(parse_N(cfg.N), d, cfg.fz, sig, cfg.realizations, cfg.seed, threads)
    if exp == "intensity":
        Ns = parse_N(cfg.N)
        if len(Ns) != 1:
            raise UsageError("intensity takes a single --N")
        if cfg.ny < 0 or cfg.nz < 0:
            raise UsageError("grid sizes must be non-negative")
        return experiments.intensity(Ns[0], d, cfg.fz, cfg.engineered, cfg.ny, cfg.nz)
    raise UsageError(f"unknown experiment '{exp}'")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got '{cfg.format}'")
        tables = run_experiment(cfg)
        os.makedirs(cfg.out, exist_ok=True)
        for t in tables:
            print(write_table(cfg, t, cfg.out))
    except UsageError as exc:
        parser.error(str(exc))
    except (BlockTooLargeError, MemoryError) as exc:
        print(f"subradiance: aborted, {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"subradiance: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
