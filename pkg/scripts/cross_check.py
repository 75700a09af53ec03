"""Run every exact solver on seeded random graphs and report agreement and timings."""

import argparse
import random
import time
from dataclasses import dataclass

from maxmod import connsub, oracle, twdp, vcsolver
from maxmod.graph import Graph


@dataclass
class Config:
    count: int = 100
    min_n: int = 4
    max_n: int = 9
    p: float = 0.4
    seed: int = 0


SOLVERS = {
    "brute": oracle.brute_force,
    "tw": twdp.solve_exact,
    "connsub": connsub.solve,
    "vc": vcsolver.solve,
}


def random_graph(rng, n, p):
    return Graph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = Config(**vars(ap.parse_args()))
    rng = random.Random(cfg.seed)
    totals = dict.fromkeys(SOLVERS, 0.0)
    disagreements = 0
    for k in range(cfg.count):
        G = random_graph(rng, rng.randint(cfg.min_n, cfg.max_n), cfg.p)
        values = {}
        for name, solve in SOLVERS.items():
            t0 = time.perf_counter()
            values[name] = solve(G).q
            totals[name] += time.perf_counter() - t0
        if len(set(values.values())) > 1:
            disagreements += 1
            print(f"graph {k}: {G.edges} -> {values}")
    print(f"{cfg.count} graphs, {disagreements} disagreements")
    for name, secs in totals.items():
        print(f"{name:8s} {secs:8.3f} s")


if __name__ == "__main__":
    main()
