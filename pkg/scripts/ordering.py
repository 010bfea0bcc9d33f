"""Eigenvalues of Krein, Friedrichs and separated extensions of -u'' on (0, 1).

Prints the first few eigenvalues side by side and marks where the Krein <= T <= Friedrichs
ordering breaks (it can only hold for nonnegative extensions).
"""

import argparse
import math
from dataclasses import dataclass, field

from slkvn import make_problem
from slkvn.boundary import boundary_frame
from slkvn.extensions import friedrichs, krein, separated
from slkvn.spectra import eigenvalues


@dataclass
class OrderingConfig:
    angles: list = field(default_factory=lambda: [(math.pi / 4, math.pi / 4), (math.pi / 2, math.pi / 2),
                                                  (0.0, math.pi / 2), (0.3, 1.2)])
    window: tuple = (-5.0, 200.0)
    nodes: int = 200
    count: int = 4
    slack: float = 1e-7


def run(cfg: OrderingConfig):
    prob = make_problem({"family": "generic", "a": 0, "b": 1})
    fr = boundary_frame(prob)
    spec = lambda ext: eigenvalues(prob, fr, ext, cfg.window, nodes=cfg.nodes).values[:cfg.count]
    lk, lf = spec(krein(prob, frame=fr)), spec(friedrichs(prob, fr))
    print(f"{'n':>2} {'Krein':>12} {'Friedrichs':>12}")
    for n, (k, f) in enumerate(zip(lk, lf), 1):
        print(f"{n:>2} {k:12.6f} {f:12.6f}")
    for g, d in cfg.angles:
        lt = spec(separated(g, d))
        print(f"\n(gamma, delta) = ({g:.4f}, {d:.4f})")
        for n, t in enumerate(lt, 1):
            ok = lk[n - 1] - cfg.slack <= t <= lf[n - 1] + cfg.slack
            print(f"{n:>2} {t:12.6f}  {'ordered' if ok else 'VIOLATED'}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--count", type=int, default=4)
    args = ap.parse_args(argv)
    run(OrderingConfig(nodes=args.nodes, count=args.count))


if __name__ == "__main__":
    main()
