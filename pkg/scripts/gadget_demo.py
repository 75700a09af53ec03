"""Build the gadget for the subdivided-K4 instance and lift the hand witness."""

import argparse

from maxmod import gadget


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=int, default=8, help="alpha override (parity of s+1)")
    args = ap.parse_args()
    inst, witness = gadget.subdivided_k4()
    out = gadget.build_gadget(inst, alpha_override=args.alpha)
    print(f"alpha={out.alpha} beta={out.beta} m={out.m} sqrt(2m)={out.root} q0={out.q0}")
    for w in out.warnings:
        print("warning:", w)
    lift = gadget.witness_to_partition(inst, out, gadget.parts_from_labels(inst.H, witness))
    for part, (bd, vol, rel) in zip(witness, lift.anchor_parts):
        print(f"  {' '.join(part):14s} + {out.alpha} leaves: boundary={bd} vol={vol} f {rel} threshold")
    print(f"lifted partition scores {lift.q} ({'=' if lift.q == out.q0 else '!='} q0)")
    default = gadget.build_gadget(inst)
    print(f"default alpha={default.alpha} m={default.m} checks={gadget.gadget_inequalities(default)}")


if __name__ == "__main__":
    main()
