"""Per-bin feasible-region construction through certified flag algebra bounds."""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import catalog
from ..errors import CertificateRejectedError, SolverError, VerificationFailedError
from ..region import FeasibleRegion
from .assemble import GraphProgram, assemble
from .certificate import Certificate, certificate_from_raw, import_solution, verify
from .sdpa import export_sdpa
from .solve import DEFAULT_SOLVER, solve_in_process

log = logging.getLogger(__name__)

SOLVER_ENV = "EGOSPREAD_SOLVER"
IN_PROCESS = "inprocess"


def default_solver_command() -> str:
    """Solver command template with ``{in}`` and ``{out}`` placeholders."""
    return os.environ.get(SOLVER_ENV) or f"{shlex.quote(sys.executable)} -m egospread.flags.solve {{in}} {{out}}"


def solver_id(command: str | None) -> str:
    if command is None or command == IN_PROCESS:
        return f"cvxpy-{DEFAULT_SOLVER}"
    return shlex.split(command)[0].rsplit("/", 1)[-1] if "egospread.flags.solve" not in command else "egospread-cvxpy"


def run_external(command: str, problem, workdir: Path, timeout: float | None = None) -> Certificate:
    """Export, invoke ``command``, import.  Solutions are cached by content hash."""
    workdir.mkdir(parents=True, exist_ok=True)
    digest = problem.content_hash()
    src = workdir / f"{digest}.dat-s"
    out = workdir / f"{digest}.sol"
    if not out.exists():
        export_sdpa(problem, src)
        argv = [a.replace("{in}", str(src)).replace("{out}", str(out)) for a in shlex.split(command)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError as exc:
            raise SolverError(f"solver not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverError(f"solver timed out on {src}") from exc
        if not out.exists():
            out.unlink(missing_ok=True)
            raise SolverError(f"solver exited {proc.returncode} without a solution for {src}: {proc.stderr.strip()[-400:]}")
    return import_solution(out, problem)


def certify_bin(prog: GraphProgram, solver_command: str | None = None, workdir=None) -> tuple[float, Certificate]:
    problem = assemble(prog)
    if solver_command is None or solver_command == IN_PROCESS:
        raw = solve_in_process(problem)
        cert = certificate_from_raw(problem, raw.blocks, raw.diag, meta={"solver_bound": raw.objective})
    else:
        cert = run_external(solver_command, problem, Path(workdir or "flag-work"))
    bound = verify(problem, cert)
    if workdir is not None:
        cdir = Path(workdir) / "certificates"
        cdir.mkdir(parents=True, exist_ok=True)
        cert.save(cdir / f"{problem.content_hash()}.json")
    return bound, cert


def compute_region(
    target: str,
    bins: int = 100,
    host_order: int = 5,
    solver_command: str | None = IN_PROCESS,
    sense: str = "max",
    workdir=None,
    workers: int = 1,
    progress=None,
) -> FeasibleRegion:
    """Certified per-bin bound curve for ``target``.

    ``sense="max"`` gives the upper curve (lower curve zero); ``sense="min"``,
    allowed only for cliques and empty graphs, gives the lower curve with a
    trivial upper curve of 1.  Bins whose solve or verification fails take the
    larger verified neighbouring value and are listed in ``meta["unverified_bins"]``.
    """
    cls = catalog.get(target)
    if sense == "min" and not (cls.is_complete or cls.is_empty):
        raise ValueError(f"lower curves of {cls.name} are identically zero; minimisation is only for cliques and empty graphs")

    def one(i):
        prog = GraphProgram(cls.name, sense, (i, bins), host_order)
        try:
            bound, _ = certify_bin(prog, solver_command, workdir)
        except (SolverError, CertificateRejectedError, VerificationFailedError) as exc:
            log.warning("bin %d of %s failed: %s", i, cls.name, exc)
            return None
        if progress:
            progress(i, bound)
        return bound

    if solver_command in (None, IN_PROCESS) or workers <= 1:
        bounds = [one(i) for i in range(bins)]
    else:
        with ThreadPoolExecutor(workers) as ex:
            bounds = list(ex.map(one, range(bins)))
    failed = [i for i, b in enumerate(bounds) if b is None]
    if len(failed) == bins:
        raise SolverError(f"every bin failed for {cls.name}")
    filled = []
    for i, b in enumerate(bounds):
        if b is None:
            near = [bounds[j] for j in (i - 1, i + 1) if 0 <= j < bins and bounds[j] is not None]
            if sense == "max":
                b = max(near) if near else 1.0
            else:
                b = min(near) if near else 0.0
        filled.append(b)
    values = np.clip(np.array(filled), 0.0, 1.0)
    ident = solver_id(solver_command)
    meta = {"host_order": host_order, "sense": sense, "solver": ident, "unverified_bins": failed}
    if sense == "max":
        return FeasibleRegion(cls.name, bins, values, np.zeros(bins), f"flag-sdp({host_order}, {ident})", True, meta=meta)
    return FeasibleRegion(cls.name, bins, np.ones(bins), values, f"flag-sdp-min({host_order}, {ident})", True, meta=meta)
