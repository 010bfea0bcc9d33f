"""Numerical endpoint classification of the Jacobi family against the closed-form table."""

import argparse
from dataclasses import dataclass, field

from slkvn import make_problem
from slkvn.classify import classify_endpoint
from slkvn.errors import SLError
from slkvn.oracles import classification_closed

SHORT = {"Regular": "R", "LimitCircle": "LC", "LimitPoint": "LP"}


@dataclass
class TableConfig:
    grid: list = field(default_factory=lambda: [-0.9, -0.5, 0.0, 0.5, 0.9, 1.5])
    gammas: list = field(default_factory=lambda: [0.0, 0.5, 0.99, 1.0, 1.5])


def classify(desc, end):
    try:
        return SHORT[classify_endpoint(make_problem(desc), end, method="numeric").kind]
    except SLError as exc:
        return type(exc).__name__


def run(cfg: TableConfig):
    mismatches = 0
    print("Jacobi: numeric a/b class (closed form in brackets when different)")
    print("alpha\\beta " + "".join(f"{b:>12}" for b in cfg.grid))
    for a in cfg.grid:
        cells = []
        for b in cfg.grid:
            desc = {"family": "jacobi", "alpha": a, "beta": b}
            want = {k: SHORT[v] for k, v in classification_closed("jacobi", desc).items()}
            got = {e: classify(desc, e) for e in "ab"}
            cell = f"{got['a']}/{got['b']}"
            if got != want:
                mismatches += 1
                cell += f"[{want['a']}/{want['b']}]"
            cells.append(f"{cell:>12}")
        print(f"{a:>10} " + "".join(cells))
    print("\nBessel (alpha = beta = 0) at x = 0:")
    for g in cfg.gammas:
        print(f"  gamma = {g:<5} {classify({'family': 'bessel', 'alpha': 0, 'beta': 0, 'gamma': g}, 'a')}")
    print(f"\nJacobi mismatches: {mismatches}")


def main(argv=None):
    argparse.ArgumentParser(description=__doc__).parse_args(argv)
    run(TableConfig())


if __name__ == "__main__":
    main()
