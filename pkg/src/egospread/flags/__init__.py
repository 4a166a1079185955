"""Flag algebra relaxations: assembly, SDPA interchange, solving and exact certificates."""

from .assemble import GraphProgram, SDPProblem, assemble
from .certificate import Certificate, certificate_from_raw, import_solution, verify
from .compute import certify_bin, compute_region
from .sdpa import export_sdpa, read_sdpa

__all__ = [
    "Certificate",
    "GraphProgram",
    "SDPProblem",
    "assemble",
    "certificate_from_raw",
    "certify_bin",
    "compute_region",
    "export_sdpa",
    "import_solution",
    "read_sdpa",
    "verify",
]
