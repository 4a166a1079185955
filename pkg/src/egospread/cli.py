"""Command line interface: ``egospread {census,region,ratio,plot,report}``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import catalog
from .census import EgoCensusTable, PointCloud, ego_censuses, x_axis_coverage
from .errors import (
    CertificateRejectedError,
    EgoSpreadError,
    EmptyCloudError,
    ParseError,
    SolverError,
    VerificationFailedError,
)
from .flags.compute import IN_PROCESS, SOLVER_ENV, compute_region
from .graph import load_edge_list
from .plot import composite, panel
from .region import (
    FeasibleRegion,
    brute_force_region,
    bundled_region,
    combine,
    kruskal_katona_region,
    load_region,
    save_region,
)
from .spread import PruneParams, SpreadResult, outlier_mask, spread_ratio

log = logging.getLogger("egospread")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_EMPTY = 4
EXIT_COVERAGE = 5
EXIT_SOLVER = 6
EXIT_VERIFY = 7

_SOURCE = re.compile(r"^(?:bundled(?::(flag5|flag6))?|kruskal-katona|brute-force\((\d+)\)|flag-sdp\((\d+)\))$")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    datasets: list[str] = field(default_factory=list)
    targets: list[str] = field(default_factory=catalog.names)
    min_degree: int = 10
    bins: int = 100
    alpha: float = 0.95
    epsilon: float = 1e-6
    mc_samples: int = 10**6
    seed: int = 0
    region_source: str = "bundled"
    region_dir: str | None = None
    solver_command: str | None = None
    output: str = "egospread-out"
    coverage_lo: float = 0.05
    coverage_hi: float = 0.95
    coverage_gate: bool = True
    workers: int = 1

    def validate(self) -> "RunConfig":
        try:
            self.targets = [catalog.get(t).name for t in self.targets]
        except EgoSpreadError as exc:
            raise ConfigError(str(exc)) from None
        if not self.targets:
            raise ConfigError("no targets selected")
        if self.min_degree < 0:
            raise ConfigError("min_degree must be nonnegative")
        if self.bins < 1:
            raise ConfigError("bins must be positive")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.mc_samples < 10**4:
            raise ConfigError("mc_samples must be at least 10^4")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        m = _SOURCE.match(self.region_source)
        if not m:
            raise ConfigError(
                f"unknown region source {self.region_source!r}; use bundled[:flag5|:flag6], kruskal-katona, "
                "brute-force(n) or flag-sdp(n)"
            )
        if m.group(2) and not 4 <= int(m.group(2)) <= 8:
            raise ConfigError("brute-force host order must lie in 4..8")
        if m.group(3) and not 4 <= int(m.group(3)) <= 7:
            raise ConfigError("flag-sdp host order must lie in 4..7")
        if not 0 <= self.coverage_lo < self.coverage_hi <= 1:
            raise ConfigError("coverage bounds must satisfy 0 <= lo < hi <= 1")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        for d in self.datasets:
            if not Path(d).is_file():
                raise ConfigError(f"dataset not found: {d}")
        if self.region_dir is not None and not Path(self.region_dir).is_dir():
            raise ConfigError(f"region directory not found: {self.region_dir}")
        return self

    def resolved(self) -> dict:
        """Fields that determine results; output location and worker count do not."""
        d = asdict(self)
        d.pop("output")
        d.pop("workers")
        d["datasets"] = [os.path.basename(p) for p in self.datasets]
        d["solver_command"] = self.solver_command or os.environ.get(SOLVER_ENV) or IN_PROCESS
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def stamp(self) -> str:
        return f"egospread config-hash={self.config_hash()} seed={self.seed}"


def read_config_file(path) -> dict:
    """``key = value`` lines; values are JSON literals or bare strings, ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value.split("#", 1)[0].strip().strip("'")
        out[key] = parsed
    names = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(out) - names)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    return out


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _safe(name: str) -> str:
    return name.replace(",", "_").replace("+", "p")


def dataset_name(path: str) -> str:
    return Path(path).name.split(".")[0]


# ---------------------------------------------------------------- census


@dataclass
class DatasetCensus:
    name: str
    table: EgoCensusTable
    clouds: dict[str, PointCloud]
    gate: dict[str, bool]
    summary: dict


def run_census(cfg: RunConfig, path: str, write: bool = True) -> DatasetCensus:
    name = dataset_name(path)
    g = load_edge_list(path)
    table = ego_censuses(g, cfg.min_degree, cfg.workers)
    clouds, gate = {}, {}
    for t in cfg.targets:
        try:
            clouds[t] = table.cloud(t)
        except EmptyCloudError:
            continue
        gate[t] = x_axis_coverage(clouds[t], cfg.coverage_lo, cfg.coverage_hi)
    if not clouds:
        raise EmptyCloudError(f"{name}: no qualifying ego network for any target")
    summary = {
        "dataset": name,
        "graph": g.summary(),
        "qualifying_vertices": len(table.vertices),
        "targets": {
            t: {
                "points": len(c),
                "x_range": [float(c.x.min()), float(c.x.max())],
                "coverage_ok": gate[t],
            }
            for t, c in clouds.items()
        },
        "config": cfg.resolved(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
    }
    if write:
        out = Path(cfg.output) / name
        (out / "clouds").mkdir(parents=True, exist_ok=True)
        for t, c in clouds.items():
            final = out / "clouds" / f"{_safe(t)}.csv"
            tmp = final.with_suffix(".tmp")
            c.to_csv(tmp, comment=cfg.stamp())
            os.replace(tmp, final)
        tmp = out / "census.tmp"
        table.write_dump(tmp)
        _atomic_write(out / "census.csv", f"# {cfg.stamp()}\n" + tmp.read_text())
        tmp.unlink()
        _atomic_write(out / "summary.json", json.dumps(summary, indent=1) + "\n")
    return DatasetCensus(name, table, clouds, gate, summary)


# ---------------------------------------------------------------- regions


def region_for(cfg: RunConfig, target: str) -> FeasibleRegion:
    """Resolve the configured region source for one target."""
    cls = catalog.get(target)
    if cfg.region_dir is not None:
        path = Path(cfg.region_dir) / f"{_safe(cls.name)}.json"
        if not path.is_file():
            raise FileNotFoundError(f"no region file {path}")
        r = load_region(path)
        if r.bins != cfg.bins:
            raise ConfigError(f"{path} has {r.bins} bins, configuration asks for {cfg.bins}")
        return r
    m = _SOURCE.match(cfg.region_source)
    flavour, brute, flag = m.groups()
    two_sided = cls.is_complete or cls.is_empty
    if cfg.region_source.startswith("bundled"):
        return bundled_region(cls.name, flavour or "flag6", cfg.bins)
    if cfg.region_source == "kruskal-katona":
        return kruskal_katona_region(cls.name, cfg.bins)
    if brute:
        return brute_force_region(cls.name, cfg.bins, int(brute), minimize=two_sided)
    solver = cfg.solver_command or os.environ.get(SOLVER_ENV) or IN_PROCESS
    workdir = Path(cfg.output) / "flag-work"
    if two_sided:
        low = compute_region(cls.name, cfg.bins, int(flag), solver, "min", workdir)
        return combine(kruskal_katona_region(cls.name, cfg.bins), low)
    return compute_region(cls.name, cfg.bins, int(flag), solver, "max", workdir)


def cmd_region(cfg: RunConfig) -> int:
    out = Path(cfg.output) / "regions"
    status = EXIT_OK
    for t in cfg.targets:
        try:
            r = region_for(cfg, t)
        except (SolverError, VerificationFailedError, CertificateRejectedError) as exc:
            print(f"{t}: {exc} (solver files under {Path(cfg.output) / 'flag-work'})", file=sys.stderr)
            status = status or (EXIT_SOLVER if isinstance(exc, SolverError) else EXIT_VERIFY)
            continue
        except EgoSpreadError as exc:
            print(f"{t}: {exc}", file=sys.stderr)
            status = status or EXIT_ERROR
            continue
        r.meta = dict(r.meta, config_hash=cfg.config_hash(), seed=cfg.seed)
        save_region(r, out / f"{_safe(t)}.json")
        print(f"{t}: {r.provenance}, max upper {r.upper.max():.6f}")
    return status


# ---------------------------------------------------------------- ratios


def _result_doc(cfg: RunConfig, dataset: str, res: SpreadResult) -> dict:
    return {"dataset": dataset, "config": cfg.resolved(), "config_hash": cfg.config_hash(), "seed": cfg.seed,
            "result": res.to_dict()}


def ratios_for(cfg: RunConfig, dc: DatasetCensus) -> tuple[dict[str, SpreadResult], list[str]]:
    """Spread ratios of the admitted targets; returns results and gate rejections."""
    rejected = [t for t in cfg.targets if t in dc.gate and not dc.gate[t] and cfg.coverage_gate]
    todo = [t for t in cfg.targets if t in dc.clouds and t not in rejected]
    params = PruneParams(cfg.alpha, cfg.epsilon)

    def one(t):
        return t, spread_ratio(dc.clouds[t], region_for(cfg, t), params, cfg.mc_samples, cfg.seed, target=t)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            results = dict(ex.map(one, todo))
    else:
        results = dict(one(t) for t in todo)
    out = Path(cfg.output) / dc.name / "ratios"
    for t, res in results.items():
        _atomic_write(out / f"{_safe(t)}.json", json.dumps(_result_doc(cfg, dc.name, res), indent=1) + "\n")
    return results, rejected


def average_ratio(results: dict[str, SpreadResult]) -> float:
    """Unweighted mean over the targets present."""
    return float(np.mean([r.ratio for r in results.values()])) if results else float("nan")


def write_table(cfg: RunConfig, rows: dict[str, dict[str, SpreadResult]]) -> Path:
    path = Path(cfg.output) / "ratios.csv"
    buf = io.StringIO()
    buf.write(f"# {cfg.stamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset"] + cfg.targets + ["average"])
    ranked = sorted(rows.items(), key=lambda kv: average_ratio(kv[1]))
    for name, res in ranked:
        cells = [f"{res[t].ratio:.3f}" if t in res else "" for t in cfg.targets]
        w.writerow([name] + cells + [f"{average_ratio(res):.3f}"])
    _atomic_write(path, buf.getvalue())
    return path


# ---------------------------------------------------------------- plots


def write_plots(cfg: RunConfig, dc: DatasetCensus, results: dict[str, SpreadResult]) -> list[Path]:
    out = Path(cfg.output) / dc.name / "plots"
    panels = {}
    written = []
    for t in cfg.targets:
        if t not in dc.clouds:
            continue
        cloud = dc.clouds[t]
        res = results.get(t)
        mask = ~outlier_mask(len(cloud), res.kept) if res is not None else None
        try:
            region = region_for(cfg, t)
        except (EgoSpreadError, FileNotFoundError):
            region = None
        title = catalog.get(t).label + (f"  ratio {res.ratio:.3f}" if res is not None else "")
        svg = panel(cloud.points, mask, region, title, diameter=res.diameter if res else None, comment=cfg.stamp())
        panels[t] = svg
        path = out / f"{_safe(t)}.svg"
        _atomic_write(path, svg + "\n")
        written.append(path)
    path = out / "all.svg"
    _atomic_write(path, composite(panels, comment=f"{cfg.stamp()} dataset={dc.name}") + "\n")
    written.append(path)
    return written


# ---------------------------------------------------------------- driver


def _pipeline(cfg: RunConfig, stage: str) -> int:
    if not cfg.datasets:
        raise ConfigError(f"{stage} needs at least one dataset")
    status = EXIT_OK
    rows = {}
    for path in cfg.datasets:
        dc = run_census(cfg, path)
        gated = [t for t, ok in dc.gate.items() if not ok]
        if stage == "census":
            print(f"{dc.name}: {len(dc.table.vertices)} ego networks, {len(dc.clouds)} clouds written")
            if gated:
                print(f"{dc.name}: x-axis coverage gate failed for {', '.join(gated)}", file=sys.stderr)
                if cfg.coverage_gate:
                    status = status or EXIT_COVERAGE
            continue
        results, rejected = ratios_for(cfg, dc)
        if rejected:
            print(f"{dc.name}: coverage gate rejected {', '.join(rejected)}", file=sys.stderr)
            status = status or EXIT_COVERAGE
        rows[dc.name] = results
        for t, r in results.items():
            print(f"{dc.name} {t}: ratio {r.ratio:.3f} (kept {len(r.kept)}/{r.n_points}, d={r.diameter:.4g})")
        if results:
            print(f"{dc.name} average: {average_ratio(results):.3f}")
        if stage in ("plot", "report"):
            write_plots(cfg, dc, results)
    if rows:
        table = write_table(cfg, rows)
        print(f"table written to {table}")
    if stage == "report":
        report = {
            "config": cfg.resolved(),
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "datasets": {
                name: {"ratios": {t: r.ratio for t, r in res.items()}, "average": average_ratio(res)}
                for name, res in rows.items()
            },
        }
        _atomic_write(Path(cfg.output) / "report.json", json.dumps(report, indent=1) + "\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("datasets", nargs="*", help="edge list files (SNAP / MUSAE style)")
    common.add_argument("--config", help="key = value configuration file; flags override it")
    common.add_argument("--targets", help="comma separated target names (default: all 15)")
    common.add_argument("--min-degree", type=int)
    common.add_argument("--bins", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--mc-samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--region-source", help="bundled[:flag5|:flag6] | kruskal-katona | brute-force(n) | flag-sdp(n)")
    common.add_argument("--region-dir", help="directory of region files written by 'egospread region'")
    common.add_argument("--solver-command", help=f"external SDP solver template with {{in}} and {{out}}; default ${SOLVER_ENV} or in-process")
    common.add_argument("--output", "-o")
    common.add_argument("--coverage", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--no-coverage-gate", action="store_true")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="egospread", description="Subgraph spread ratios of ego-centric networks.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("census", parents=[common], help="localized point clouds per target")
    sub.add_parser("region", parents=[common], help="feasible region files per target")
    sub.add_parser("ratio", parents=[common], help="subgraph spread ratios and the summary table")
    sub.add_parser("plot", parents=[common], help="ratios plus SVG plots")
    sub.add_parser("report", parents=[common], help="census, ratios, plots and report.json")
    return ap


def split_targets(text: str) -> list[str]:
    # a comma followed by a digit belongs to K1,3
    return [t.strip() for t in re.split(r"[;]|,(?!\d)", text) if t.strip()]


def config_from_args(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    flags = {
        "min_degree": args.min_degree,
        "bins": args.bins,
        "alpha": args.alpha,
        "epsilon": args.epsilon,
        "mc_samples": args.mc_samples,
        "seed": args.seed,
        "region_source": args.region_source,
        "region_dir": args.region_dir,
        "solver_command": args.solver_command,
        "output": args.output,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.datasets:
        values["datasets"] = args.datasets
    if args.targets:
        values["targets"] = split_targets(args.targets)
    if args.coverage:
        values["coverage_lo"], values["coverage_hi"] = args.coverage
    if args.no_coverage_gate:
        values["coverage_gate"] = False
    if isinstance(values.get("datasets"), str):
        values["datasets"] = [values["datasets"]]
    if isinstance(values.get("targets"), str):
        values["targets"] = split_targets(values["targets"])
    try:
        return RunConfig(**values).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "region":
            return cmd_region(cfg)
        return _pipeline(cfg, args.command)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyCloudError as exc:
        print(f"empty point cloud: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (VerificationFailedError, CertificateRejectedError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (EgoSpreadError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
