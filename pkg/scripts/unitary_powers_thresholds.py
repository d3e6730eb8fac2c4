"""Pair and triple acceptance of the unitary-powers procedures at several sizes.

Uses the exact per-register estimate distributions. At n=4 the far-pair
(distance > 9/2^n) and far-triple (> 14/2^n) classes are empty because circle
distances never exceed 1/2; larger n exercises them.
"""

import argparse
import itertools

import numpy as np

from qvpkit import simcore
from qvpkit.problems import unitary_powers as up
from qvpkit.problems.oracles import query_unitary, unitary_powers_oracle


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[4, 5])
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--skip-triples", action="store_true")
    args = parser.parse_args()
    print(f"{'n':>2} {'seed':>4} {'min close pair':>15} {'max far pair':>13} {'min equal triple':>17} {'max far triple':>15}")
    for n in args.n:
        dim = 1 << n
        for seed in range(args.seeds):
            o = unitary_powers_oracle(seed, n)
            phases, vecs = up.eigenphases(query_unitary(o))
            dists = up.estimate_distribution(o, vecs)
            d = np.array([[simcore.circle_distance(a, b) for b in phases] for a in phases])
            close, far = [], []
            for i, j in itertools.combinations(range(dim), 2):
                v = up.antisymmetric_pair_acceptance(dists[:, i], dists[:, j], n)
                if d[i, j] <= 1 / dim:
                    close.append(v)
                if d[i, j] > 9 / dim:
                    far.append(v)
            equal = min(up.product_acceptance([dists[:, i]] * 3, n) for i in range(dim))
            far3 = []
            if not args.skip_triples:
                for i, j, k in itertools.combinations_with_replacement(range(dim), 3):
                    if max(d[i, j], d[i, k], d[j, k]) > 14 / dim:
                        far3.append(up.product_acceptance([dists[:, i], dists[:, j], dists[:, k]], n))
            fmt = lambda xs, f: f"{f(xs):.4f}" if xs else "empty"
            print(f"{n:>2} {seed:>4} {fmt(close, min):>15} {fmt(far, max):>13} {equal:>17.4f} {fmt(far3, max):>15}")


if __name__ == "__main__":
    main()
