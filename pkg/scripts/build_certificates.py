"""Regenerate the reference certificates under src/egospread/data/certificates."""

import time
from pathlib import Path

from egospread.flags.assemble import GraphProgram, assemble
from egospread.flags.certificate import certificate_from_raw, verify
from egospread.flags.solve import solve_in_process

OUT = Path(__file__).resolve().parents[1] / "src" / "egospread" / "data" / "certificates"

PROGRAMS = {
    "goodman": GraphProgram({"K3": 1, "K3bar": 1}, "min", None, 3),
    "P3bar_max_h5": GraphProgram("P3bar", "max", None, 5),
    "P4_max_h6": GraphProgram("P4", "max", None, 6),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, prog in PROGRAMS.items():
        t0 = time.time()
        problem = assemble(prog)
        raw = solve_in_process(problem)
        cert = certificate_from_raw(problem, raw.blocks, raw.diag, meta={"solver_bound": raw.objective})
        bound = verify(problem, cert)
        cert.save(OUT / f"{name}.json")
        print(f"{name}: {prog.describe()} -> {bound!r} ({time.time() - t0:.1f}s)", flush=True)


if __name__ == "__main__":
    main()
