"""Rounding solver output into exact certificates and checking them.

Verification never trusts the solver: block entries and multipliers are
rationals, positive semidefiniteness is decided by exact LDL^T elimination,
and every host inequality is evaluated in exact arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import CertificateRejectedError, VerificationFailedError
from .assemble import GraphProgram, SDPProblem
from .sdpa import read_solution, sdpa_data

DENOMINATOR = 10**6
DEFAULT_TOLERANCE = 1e-9
MAX_SHIFT = Fraction(1, 10**4)


@dataclass
class Certificate:
    """Bound ``lam`` with PSD blocks ``Q_sigma`` and bin multipliers.

    For a maximisation the claim is ``p(H) <= lam`` on the bin; for a
    minimisation ``p(H) >= lam``.
    """

    lam: Fraction
    blocks: list[list[list[Fraction]]]
    multipliers: tuple[Fraction, ...] = ()
    tolerance: float = DEFAULT_TOLERANCE
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format": "egospread-certificate",
            "version": 1,
            "lambda": str(self.lam),
            "tolerance": self.tolerance,
            "multipliers": [str(c) for c in self.multipliers],
            "blocks": [[[str(v) for v in row] for row in Q] for Q in self.blocks],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        if data.get("format") != "egospread-certificate" or data.get("version") != 1:
            raise CertificateRejectedError("not a version 1 certificate file")
        return cls(
            Fraction(data["lambda"]),
            [[[Fraction(v) for v in row] for row in Q] for Q in data["blocks"]],
            tuple(Fraction(c) for c in data["multipliers"]),
            float(data["tolerance"]),
            dict(data.get("meta", {})),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Certificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


def program_to_dict(prog: GraphProgram) -> dict:
    return {
        "objective": {k: str(v) for k, v in prog.terms().items()},
        "sense": prog.sense,
        "bin": list(prog.bin) if prog.bin is not None else None,
        "host_order": prog.host_order,
    }


def program_from_dict(data: dict) -> GraphProgram:
    return GraphProgram(
        {k: Fraction(v) for k, v in data["objective"].items()},
        data["sense"],
        tuple(data["bin"]) if data["bin"] is not None else None,
        int(data["host_order"]),
    )


def is_psd_exact(Q: list[list[Fraction]], shift: Fraction = Fraction(0)) -> bool:
    """Exact test of ``Q + shift*I >= 0`` by symmetric elimination."""
    n = len(Q)
    A = [[Q[i][j] + (shift if i == j else 0) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            if A[i][j] != A[j][i]:
                return False
    for k in range(n):
        piv = A[k][k]
        if piv < 0:
            return False
        if piv == 0:
            if any(A[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        row = A[k]
        for i in range(k + 1, n):
            f = A[i][k] / piv
            if f:
                Ai = A[i]
                for j in range(k + 1, n):
                    if row[j]:
                        Ai[j] -= f * row[j]
    return True


def _common_denominator(Q: list[list[Fraction]]) -> tuple[list[list[int]], int]:
    den = 1
    for row in Q:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    return [[int(v * den) for v in row] for row in Q], den


def pair_terms(problem: SDPProblem, blocks: list[list[list[Fraction]]]) -> list[Fraction]:
    """Exact ``sum_sigma <Q_sigma, M_sigma(G)>`` for every host ``G``."""
    totals = [Fraction(0)] * problem.n_hosts
    for b, Q in zip(problem.blocks, blocks):
        qint, qden = _common_denominator(Q)
        qarr = np.array(qint, dtype=object)
        flat = b.counts.reshape(problem.n_hosts, -1).astype(object)
        sums = flat.dot(qarr.reshape(-1))
        den = qden * b.denominator
        totals = [t + Fraction(int(s), den) for t, s in zip(totals, sums)]
    return totals


def _host_values(problem: SDPProblem, cert_blocks, multipliers) -> list[Fraction]:
    """``p(H;G) + c.bin_rows(G) + pairs(G)`` (max) or ``p - c.bin_rows - pairs`` (min)."""
    pairs = pair_terms(problem, cert_blocks)
    low, high = problem.bin_rows()
    out = []
    for g in range(problem.n_hosts):
        bin_term = Fraction(0)
        if problem.has_bin:
            bin_term = multipliers[0] * low[g] + multipliers[1] * high[g]
        if problem.program.sense == "max":
            out.append(problem.objective[g] + bin_term + pairs[g])
        else:
            out.append(problem.objective[g] - bin_term - pairs[g])
    return out


def _rationalize(x: float) -> Fraction:
    return Fraction(round(x * DENOMINATOR), DENOMINATOR)


def certificate_from_raw(
    problem: SDPProblem,
    blocks: list[np.ndarray],
    diag: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    meta: dict | None = None,
) -> Certificate:
    """Round a floating solution to a fixed denominator, repair PSD-ness, fix ``lam`` exactly."""
    if len(blocks) != len(problem.blocks):
        raise CertificateRejectedError(f"expected {len(problem.blocks)} PSD blocks, got {len(blocks)}")
    layout = problem.slack_layout()
    if len(diag) != len(layout):
        raise CertificateRejectedError(f"diagonal block has {len(diag)} entries, expected {len(layout)}")
    mult = []
    if problem.has_bin:
        for name in ("bin_low", "bin_high"):
            v = float(diag[layout.index(name)])
            if v < -max(tolerance, 1e-7):
                raise CertificateRejectedError(f"negative multiplier {name} = {v}")
            mult.append(max(_rationalize(v), Fraction(0)))
    shifts = []
    qs = []
    for b, Q in zip(problem.blocks, blocks):
        Q = np.asarray(Q, dtype=float)
        if Q.shape != (b.size, b.size):
            raise CertificateRejectedError(f"block for type {b.type_code} has shape {Q.shape}, expected {b.size}")
        Q = (Q + Q.T) / 2
        R = [[_rationalize(Q[i, j]) for j in range(b.size)] for i in range(b.size)]
        shift = Fraction(0)
        if not is_psd_exact(R):
            lo_eig = float(np.linalg.eigvalsh(np.array(R, dtype=float)).min())
            shift = Fraction(math.ceil(max(-lo_eig, 0.0) * DENOMINATOR) + 1, DENOMINATOR)
            while not is_psd_exact(R, shift):
                shift *= 2
                if shift > MAX_SHIFT:
                    raise CertificateRejectedError(
                        f"block for type {b.type_code} needs diagonal shift beyond {float(MAX_SHIFT)}"
                    )
            for i in range(b.size):
                R[i][i] += shift
        shifts.append(shift)
        qs.append(R)
    values = _host_values(problem, qs, mult)
    lam = max(values) if problem.program.sense == "max" else min(values)
    info = dict(meta or {})
    info.update(
        content_hash=problem.content_hash(),
        program=program_to_dict(problem.program),
        max_shift=str(max(shifts, default=Fraction(0))),
    )
    return Certificate(lam, qs, tuple(mult), tolerance, info)


def import_solution(path, problem: SDPProblem, tolerance: float = DEFAULT_TOLERANCE) -> Certificate:
    """Read a CSDP-style solution written for the exported block structure."""
    sizes = sdpa_data(problem)[0]
    y, X = read_solution(path, sizes)
    if len(y) != problem.n_hosts:
        raise CertificateRejectedError(f"solution has {len(y)} dual values, problem has {problem.n_hosts} hosts")
    layout = problem.slack_layout()
    diag = X[-1]
    norm = float(diag[layout.index("norm_plus")] - diag[layout.index("norm_minus")])
    solver_lam = -norm if problem.program.sense == "max" else norm
    return certificate_from_raw(problem, X[:-1], diag, tolerance, {"solver_bound": solver_lam, "source": str(path)})


def verify(problem: SDPProblem, c: Certificate) -> float:
    """Certified bound implied by ``c``, or :class:`VerificationFailedError`.

    Entries are checked exactly.  With tolerance ``tol`` each block need only
    satisfy ``Q + tol*I >= 0`` and each host inequality may be short by
    ``tol``; since flag-density vectors have unit mass this loosens the bound
    by at most ``tol * (1 + number of blocks)``.
    """
    if len(c.blocks) != len(problem.blocks):
        raise VerificationFailedError(f"certificate has {len(c.blocks)} blocks, problem has {len(problem.blocks)}")
    expected_mult = 2 if problem.has_bin else 0
    if len(c.multipliers) != expected_mult:
        raise VerificationFailedError(f"expected {expected_mult} multipliers, got {len(c.multipliers)}")
    for k, m in enumerate(c.multipliers):
        if m < 0:
            raise VerificationFailedError(f"multiplier {k} is negative ({m})")
    tol = Fraction(c.tolerance)
    for b, Q in zip(problem.blocks, c.blocks):
        if len(Q) != b.size or any(len(row) != b.size for row in Q):
            raise VerificationFailedError(f"block for type {b.type_code} has wrong dimension")
        if not is_psd_exact(Q, tol):
            raise VerificationFailedError(f"block for type {b.type_code} is not PSD within tolerance {c.tolerance}")
    values = _host_values(problem, c.blocks, c.multipliers)
    for g, v in enumerate(values):
        slack = c.lam - v if problem.program.sense == "max" else v - c.lam
        if slack < -tol:
            raise VerificationFailedError(
                f"inequality fails on host class {g} (code {problem.hosts[g].bits}) by {float(-slack):.3g}",
                witness=problem.hosts[g],
            )
    margin = tol * (1 + len(problem.blocks))
    if problem.program.sense == "max":
        return math.nextafter(float(c.lam + margin), math.inf)
    return math.nextafter(float(c.lam - margin), -math.inf)


def vacuous_certificate(problem: SDPProblem, lam=1) -> Certificate:
    """Zero blocks and multipliers with a trivial bound."""
    blocks = [[[Fraction(0)] * b.size for _ in range(b.size)] for b in problem.blocks]
    mult = (Fraction(0), Fraction(0)) if problem.has_bin else ()
    return Certificate(Fraction(lam), blocks, mult)


def bundled_certificate_names() -> list[str]:
    root = resources.files("egospread") / "data" / "certificates"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_certificate(name: str) -> tuple[GraphProgram, Certificate]:
    """A shipped certificate together with the program it was issued for."""
    path = resources.files("egospread") / "data" / "certificates" / f"{name}.json"
    if not path.is_file():
        raise CertificateRejectedError(f"no bundled certificate {name!r}; have {bundled_certificate_names()}")
    cert = Certificate.from_dict(json.loads(path.read_text()))
    return program_from_dict(cert.meta["program"]), cert
