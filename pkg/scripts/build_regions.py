"""Regenerate the bundled feasible regions under src/egospread/data/regions."""

import argparse
import logging
import time
from pathlib import Path

from egospread import catalog
from egospread.flags.compute import compute_region
from egospread.region import bundled_filename, combine, kruskal_katona_region, save_region

OUT = Path(__file__).resolve().parents[1] / "src" / "egospread" / "data" / "regions"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--host-order", type=int, default=5)
    ap.add_argument("--bins", type=int, default=100)
    ap.add_argument("--targets", nargs="*", default=catalog.names())
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)
    source = f"flag{args.host_order}"
    for name in args.targets:
        path = OUT / bundled_filename(name, source, args.bins)
        if path.exists():
            continue
        t0 = time.time()
        cls = catalog.get(name)
        if cls.is_complete or cls.is_empty:
            low = compute_region(name, args.bins, args.host_order, sense="min")
            region = combine(kruskal_katona_region(name, args.bins), low)
            region.provenance = f"kruskal-katona+lower:{low.provenance}"
        else:
            region = compute_region(name, args.bins, args.host_order)
        save_region(region, path)
        print(f"{name}: max {region.upper.max():.6f} peak bin {region.peak_bin()} ({time.time() - t0:.0f}s)", flush=True)


if __name__ == "__main__":
    main()
