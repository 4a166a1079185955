"""SDPA sparse (.dat-s) export, a reparser, and CSDP-style solution files.

The exported problem is the host-distribution side: one variable per host
class, ``min c.y`` subject to ``sum_G y_G F_G - F_0 >= 0``.  Its dual, the
matrix side ``max F_0 . X`` subject to ``F_G . X = c_G``, carries the
certificate: the type blocks of ``X`` are the ``Q_sigma`` and the diagonal
block holds host slacks, bin multipliers and the two halves of the free
bound variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .assemble import SDPProblem

_SEP = re.compile(r"[\s,{}()]+")


def _fmt(x) -> str:
    return repr(float(x))


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def sdpa_data(p: SDPProblem):
    """Block sizes, cost vector, F_0 entries and per-host F entries (1-based, upper triangle)."""
    sizes = [b.size for b in p.blocks]
    layout = p.slack_layout()
    diag_block = len(sizes) + 1
    sizes.append(-len(layout))
    sign = -1 if p.program.sense == "max" else 1
    cost = [sign * v for v in p.objective]
    norm_plus, norm_minus = layout.index("norm_plus") + 1, layout.index("norm_minus") + 1
    f0 = [(diag_block, norm_plus, norm_plus, Fraction(1)), (diag_block, norm_minus, norm_minus, Fraction(-1))]
    low, high = p.bin_rows()
    per_host = []
    for g in range(p.n_hosts):
        entries = []
        for bi, b in enumerate(p.blocks, start=1):
            c = b.counts[g]
            rows, cols = np.nonzero(np.triu(c))
            for i, j in zip(rows, cols):
                entries.append((bi, int(i) + 1, int(j) + 1, Fraction(int(c[i, j]), b.denominator)))
        entries.append((diag_block, g + 1, g + 1, Fraction(1)))
        if p.has_bin:
            nh = p.n_hosts
            if low[g]:
                entries.append((diag_block, nh + 1, nh + 1, low[g]))
            if high[g]:
                entries.append((diag_block, nh + 2, nh + 2, high[g]))
        entries.append((diag_block, norm_plus, norm_plus, Fraction(1)))
        entries.append((diag_block, norm_minus, norm_minus, Fraction(-1)))
        per_host.append(entries)
    return sizes, cost, f0, per_host


def export_sdpa(p: SDPProblem, path) -> str:
    """Write ``p`` as sparse SDPA; returns the content hash recorded in the header."""
    sizes, cost, f0, per_host = sdpa_data(p)
    digest = p.content_hash()
    prog = p.program
    header = [
        "egospread flag-sdp export",
        f"program: {prog.describe()}",
        f"sense: {prog.sense}",
        f"bin: {'none' if prog.bin is None else f'{prog.bin[0]} {prog.bin[1]}'}",
        f"host-order: {prog.host_order}",
        f"content-hash: {digest}",
        "block-denominators: " + " ".join(str(b.denominator) for b in p.blocks),
        f"cost-denominator: {_lcm(v.denominator for v in cost)}",
        f"bin-denominator: {_lcm(v.denominator for v in p.bin_rows()[0]) if p.has_bin else 1}",
        "diagonal-layout: " + " ".join(p.slack_layout()),
    ]
    lines = [f"* {h}" for h in header]
    lines.append(f"{p.n_hosts} = mDIM")
    lines.append(f"{len(sizes)} = nBLOCK")
    lines.append(" ".join(str(s) for s in sizes))
    lines.append(" ".join(_fmt(c) for c in cost))
    for b, i, j, v in f0:
        lines.append(f"0 {b} {i} {j} {_fmt(v)}")
    for g, entries in enumerate(per_host, start=1):
        for b, i, j, v in entries:
            lines.append(f"{g} {b} {i} {j} {_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")
    return digest


@dataclass
class SDPAFile:
    mdim: int
    block_sizes: list[int]
    cost: np.ndarray
    entries: list[tuple[int, int, int, int, float]]
    header: dict[str, str] = field(default_factory=dict)

    def matrices(self):
        """Dense ``F_0..F_m`` per block: list over blocks of arrays shaped (m+1, k, k)."""
        mats = [np.zeros((self.mdim + 1, abs(s), abs(s))) for s in self.block_sizes]
        for mat, b, i, j, v in self.entries:
            mats[b - 1][mat, i - 1, j - 1] = v
            mats[b - 1][mat, j - 1, i - 1] = v
        return mats


def read_sdpa(path) -> SDPAFile:
    """Parse a sparse SDPA file (comments ``*``/``"`` before the size line)."""
    header = {}
    numbers: list[list[str]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if not numbers and line[0] in '*"':
                body = line[1:].strip()
                if ":" in body:
                    key, _, val = body.partition(":")
                    header[key.strip()] = val.strip()
                continue
            tokens = []
            for tok in _SEP.split(line):
                if not tok:
                    continue
                try:
                    float(tok)
                except ValueError:
                    if tok.startswith("="):
                        break  # trailing annotation such as "= mDIM"
                    raise ParseError(f"bad token {tok!r}", lineno) from None
                tokens.append(tok)
            numbers.append((lineno, tokens))
    stream = [(ln, t) for ln, toks in numbers for t in toks]
    pos = 0

    def take(kind, what):
        nonlocal pos
        if pos >= len(stream):
            raise ParseError(f"unexpected end of file reading {what}")
        ln, tok = stream[pos]
        pos += 1
        try:
            return kind(tok) if kind is float else int(tok)
        except ValueError:
            raise ParseError(f"bad {what}: {tok!r}", ln) from None

    mdim = take(int, "mDIM")
    nblock = take(int, "nBLOCK")
    sizes = [take(int, "block size") for _ in range(nblock)]
    cost = np.array([take(float, "cost") for _ in range(mdim)])
    entries = []
    while pos < len(stream):
        ln = stream[pos][0]
        mat, b, i, j = (take(int, "entry index") for _ in range(4))
        v = take(float, "entry value")
        if not (0 <= mat <= mdim and 1 <= b <= nblock):
            raise ParseError(f"entry refers to matrix {mat} block {b}", ln)
        k = abs(sizes[b - 1])
        if not (1 <= i <= k and 1 <= j <= k) or (sizes[b - 1] < 0 and i != j):
            raise ParseError(f"entry ({i},{j}) outside block {b} of size {sizes[b - 1]}", ln)
        entries.append((mat, b, min(i, j), max(i, j), v))
    return SDPAFile(mdim, sizes, cost, entries, header)


def write_solution(path, y, blocks: list[np.ndarray], z_blocks: list[np.ndarray] | None = None) -> None:
    """CSDP solution layout: ``y`` on the first line, then ``1``(Z)/``2``(X) block entries.

    Diagonal blocks are passed as 1-d arrays.
    """
    lines = [" ".join(_fmt(v) for v in y)]
    for matno, mats in ((1, z_blocks), (2, blocks)):
        if mats is None:
            continue
        for b, m in enumerate(mats, start=1):
            m = np.asarray(m)
            if m.ndim == 1:
                for i, v in enumerate(m, start=1):
                    if v != 0:
                        lines.append(f"{matno} {b} {i} {i} {_fmt(v)}")
            else:
                for i in range(m.shape[0]):
                    for j in range(i, m.shape[1]):
                        if m[i, j] != 0:
                            lines.append(f"{matno} {b} {i + 1} {j + 1} {_fmt(m[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_solution(path, block_sizes: list[int]):
    """Return ``(y, X blocks)`` from a CSDP-style solution file.

    Diagonal blocks come back as 1-d arrays.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError("empty solution file")
    try:
        y = np.array([float(t) for t in lines[0].split()])
    except ValueError:
        raise ParseError("first line must hold the y vector", 1) from None
    X = [np.zeros(-s) if s < 0 else np.zeros((s, s)) for s in block_sizes]
    for lineno, line in enumerate(lines[1:], start=2):
        tok = line.split()
        if len(tok) != 5:
            raise ParseError(f"expected 5 fields, got {len(tok)}", lineno)
        try:
            matno, b, i, j = (int(t) for t in tok[:4])
            v = float(tok[4])
        except ValueError:
            raise ParseError(f"malformed entry {line!r}", lineno) from None
        if matno != 2:
            continue
        if not 1 <= b <= len(block_sizes):
            raise ParseError(f"block {b} does not exist (file has {len(block_sizes)})", lineno)
        s = block_sizes[b - 1]
        k = abs(s)
        if not (1 <= i <= k and 1 <= j <= k):
            raise ParseError(f"entry ({i},{j}) outside block {b} of size {k}", lineno)
        if s < 0:
            if i != j:
                raise ParseError(f"off-diagonal entry in diagonal block {b}", lineno)
            X[b - 1][i - 1] = v
        else:
            X[b - 1][i - 1, j - 1] = v
            X[b - 1][j - 1, i - 1] = v
    return y, X
