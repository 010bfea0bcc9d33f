"""Sweep Krein matrices over a parameter grid and compare with the closed forms.

    python scripts/krein_sweep.py --family bessel --out sweep.csv
"""

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from slkvn import make_problem
from slkvn.errors import SLError
from slkvn.extensions import krein
from slkvn.oracles import bessel_rk_closed, blackhole_rk_closed, jacobi_case, jacobi_rk_closed


@dataclass
class SweepConfig:
    family: str = "bessel"
    alphas: list = field(default_factory=lambda: [-0.5, 0.0, 0.5, 1.0])
    betas: list = field(default_factory=lambda: [-1.0, 0.0, 0.5, 0.9])
    gammas: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.9])
    bs: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    verify: bool = False


def points(cfg: SweepConfig):
    if cfg.family == "bessel":
        for a in cfg.alphas:
            for b in cfg.betas:
                for g in cfg.gammas:
                    yield {"family": "bessel", "alpha": a, "beta": b, "gamma": g, "b": 1.0}
    elif cfg.family == "jacobi":
        for a in cfg.alphas:
            for b in cfg.betas:
                if jacobi_case(a, b) is not None:
                    yield {"family": "jacobi", "alpha": a, "beta": b}
    elif cfg.family == "blackhole":
        for a, b in ((1, 0), (2, 2), (1.5, 1)):
            for end in cfg.bs:
                yield {"family": "blackhole", "alpha": a, "beta": b, "b": end}
    else:
        raise SystemExit(f"unknown family {cfg.family!r}")


def closed_form(desc):
    if desc["family"] == "bessel":
        return bessel_rk_closed(desc["alpha"], desc["beta"], desc["gamma"], desc["b"])
    if desc["family"] == "jacobi":
        return jacobi_rk_closed(desc["alpha"], desc["beta"])
    return blackhole_rk_closed()


def sweep(cfg: SweepConfig):
    rows = []
    for desc in points(cfg):
        t = time.perf_counter()
        row = {k: desc.get(k) for k in ("alpha", "beta", "gamma", "b")}
        try:
            R = np.array(krein(make_problem(desc), verify=cfg.verify).R)
            C = closed_form(desc)
            row.update(R11=R[0, 0], R12=R[0, 1], R21=R[1, 0], R22=R[1, 1],
                       max_dev=float(np.max(np.abs(R - C)) / max(1.0, np.max(np.abs(C)))), error="")
        except SLError as exc:
            row.update(error=f"{type(exc).__name__}: {exc}")
        row["seconds"] = round(time.perf_counter() - t, 3)
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--family", default="bessel", choices=["bessel", "jacobi", "blackhole"])
    ap.add_argument("--verify", action="store_true", help="cross-check against the null-basis construction")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args(argv)
    cfg = SweepConfig(family=args.family, verify=args.verify)
    if cfg.family == "jacobi":
        cfg.alphas = cfg.betas = [-0.8, -0.5, -0.3, 0.0, 0.3, 0.6]
    rows = sweep(cfg)
    keys = ["alpha", "beta", "gamma", "b", "R11", "R12", "R21", "R22", "max_dev", "seconds", "error"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        fh.close()
    worst = max((r.get("max_dev", 0.0) for r in rows), default=0.0)
    print(f"{len(rows)} points, worst relative deviation {worst:.2e}", file=sys.stderr)


if __name__ == "__main__":
    main()
