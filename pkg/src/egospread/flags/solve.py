"""Numerical SDP solving through cvxpy.

Two entry points: :func:`solve_sdpa_file` is a generic solver command for
exported ``.dat-s`` files (``python -m egospread.flags.solve IN OUT``), and
:class:`BinSolver` solves many programs sharing one host order in-process,
compiling the cvxpy problem once and re-binding the objective and bin edges
as parameters.  Both return the matrix side of the SDP; soundness is
established afterwards by :mod:`egospread.flags.certificate`.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
from scipy import sparse

from ..errors import SolverError
from .assemble import SDPProblem, flag_data, host_vectors
from .sdpa import read_sdpa, write_solution

log = logging.getLogger(__name__)

DEFAULT_SOLVER = "CLARABEL"
_OK = ("optimal", "optimal_inaccurate")


@dataclass
class RawSolution:
    """Floating-point matrix side: type blocks then the diagonal block."""

    blocks: list[np.ndarray]
    diag: np.ndarray
    objective: float
    status: str
    solver: str


def _solve(problem: cp.Problem, solver: str) -> None:
    try:
        problem.solve(solver=solver)
    except cp.error.SolverError as exc:
        raise SolverError(f"{solver} failed: {exc}") from exc
    if problem.status not in _OK:
        raise SolverError(f"{solver} returned status {problem.status}")


def solve_sdpa_file(in_path, out_path, solver: str = DEFAULT_SOLVER) -> float:
    """Solve ``max F0.X  s.t.  Fi.X = ci, X >= 0`` and write a CSDP-style solution."""
    f = read_sdpa(in_path)
    m = f.mdim
    X = []
    lhs = [0] * m
    objective = 0
    for b, size in enumerate(f.block_sizes, start=1):
        k = abs(size)
        ent = [(mat, i - 1, j - 1, v) for mat, bb, i, j, v in f.entries if bb == b]
        if size < 0:
            var = cp.Variable(k, nonneg=True)
            flat = var
            col = lambda i, j: i  # noqa: E731
            width = k
        else:
            var = cp.Variable((k, k), PSD=True)
            flat = cp.vec(var, order="C")
            col = lambda i, j: i * k + j  # noqa: E731
            width = k * k
        X.append(var)
        rows, cols, vals = [], [], []
        for mat, i, j, v in ent:
            if size > 0 and i != j:
                # symmetric entry contributes twice to the trace inner product
                rows += [mat, mat]
                cols += [col(i, j), col(j, i)]
                vals += [v, v]
            else:
                rows.append(mat)
                cols.append(col(i, j))
                vals.append(v)
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(m + 1, width))
        objective = objective + A[0] @ flat
        Am = A[1:]
        lhs = [lhs[r] + Am[r] @ flat if Am[r].nnz else lhs[r] for r in range(m)]
    constraints = [lhs[r] == f.cost[r] for r in range(m)]
    prob = cp.Problem(cp.Maximize(objective), constraints)
    _solve(prob, solver)
    y = np.array([float(np.ravel(c.dual_value)[0]) for c in constraints])
    write_solution(out_path, y, [np.asarray(v.value) for v in X])
    return float(prob.value)


class BinSolver:
    """Reusable parametrised relaxation for one host order, sense and bin usage."""

    def __init__(self, host_order: int, sense: str = "max", with_bin: bool = True, solver: str = DEFAULT_SOLVER):
        self.host_order = host_order
        self.sense = sense
        self.with_bin = with_bin
        self.solver = solver
        hosts, blocks = flag_data(host_order)
        edge, _ = host_vectors(host_order)
        nh = len(hosts)
        self.p = cp.Parameter(nh)
        self.lam = cp.Variable()
        self.Q = [cp.Variable((b.size, b.size), PSD=True) for b in blocks]
        expr = 0
        for b, Q in zip(blocks, self.Q):
            A = sparse.csr_matrix(b.counts.reshape(nh, -1) / b.denominator)
            expr = expr + A @ cp.vec(Q, order="C")
        e = np.array([float(x) for x in edge])
        if with_bin:
            self.lo = cp.Parameter()
            self.hi = cp.Parameter()
            self.c = cp.Variable(2, nonneg=True)
            expr = expr + self.c[0] * e - self.c[0] * self.lo + self.c[1] * self.hi - self.c[1] * e
        if sense == "max":
            self.slack = self.lam - self.p - expr
            objective = cp.Minimize(self.lam)
        else:
            self.slack = self.p - self.lam - expr
            objective = cp.Maximize(self.lam)
        self.problem = cp.Problem(objective, [self.slack >= 0])

    def solve(self, problem: SDPProblem) -> RawSolution:
        prog = problem.program
        if prog.host_order != self.host_order or prog.sense != self.sense or (prog.bin is not None) != self.with_bin:
            raise ValueError("program does not match this solver's structure")
        self.p.value = np.array([float(v) for v in problem.objective])
        if self.with_bin:
            i, N = prog.bin
            self.lo.value = i / N
            self.hi.value = (i + 1) / N
        _solve(self.problem, self.solver)
        lam = float(self.lam.value)
        slack = np.asarray(self.slack.value, dtype=float).ravel()
        mult = list(np.asarray(self.c.value, dtype=float)) if self.with_bin else []
        # matrix-side normalisation pair encodes the free bound variable
        norm = -lam if self.sense == "max" else lam
        diag = np.array(list(slack) + mult + [max(norm, 0.0), max(-norm, 0.0)])
        blocks = [np.asarray(Q.value, dtype=float) for Q in self.Q]
        return RawSolution(blocks, diag, lam, self.problem.status, self.solver)


_CACHE: dict = {}


def solve_in_process(problem: SDPProblem, solver: str = DEFAULT_SOLVER) -> RawSolution:
    prog = problem.program
    key = (prog.host_order, prog.sense, prog.bin is not None, solver)
    if key not in _CACHE:
        _CACHE[key] = BinSolver(prog.host_order, prog.sense, prog.bin is not None, solver)
    return _CACHE[key].solve(problem)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m egospread.flags.solve", description="Solve a sparse SDPA file with cvxpy.")
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--solver", default=DEFAULT_SOLVER)
    args = ap.parse_args(argv)
    try:
        value = solve_sdpa_file(args.input, args.output, args.solver)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"objective {value!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
