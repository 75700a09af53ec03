"""List the (boundary, vol, m) triples where the per-unit deficit equals 2 sqrt(2/m)."""

import argparse

from maxmod.gadget import EQUAL, per_unit_deficit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-boundary", type=int, default=6)
    ap.add_argument("--max-vol", type=int, default=200)
    ap.add_argument("--max-m", type=int, default=100)
    args = ap.parse_args()
    by_boundary = {}
    for bd in range(args.max_boundary + 1):
        for m in range(1, args.max_m + 1):
            for vol in range(1, args.max_vol + 1):
                if per_unit_deficit(bd, vol, m).relation == EQUAL:
                    by_boundary.setdefault(bd, []).append((vol, m))
    for bd, hits in sorted(by_boundary.items()):
        shown = ", ".join(f"vol={v} m={m}" for v, m in hits[:6])
        print(f"boundary {bd}: {len(hits)} equality cases ({shown}{', ...' if len(hits) > 6 else ''})")


if __name__ == "__main__":
    main()
