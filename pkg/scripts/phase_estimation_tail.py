"""Tail of the phase-estimation error distribution against the 1/(2k-1) bound."""

import argparse

import numpy as np

from qvpkit import simcore
from qvpkit.rng import stream


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bits", type=int, default=6)
    parser.add_argument("--phases", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 5, 8])
    args = parser.parse_args()
    dim = 1 << args.bits
    phases = stream(args.seed, "tail-phases").random(args.phases)
    tails = np.zeros((len(phases), len(args.k)))
    for i, phi in enumerate(phases):
        probs = simcore.phase_estimation_probabilities(phi, args.bits)
        dist = np.array([simcore.circle_distance(phi, y / dim) for y in range(dim)])
        tails[i] = [probs[dist > k / dim + 1e-15].sum() for k in args.k]
    print(f"{'k':>3} {'max tail':>10} {'mean tail':>10} {'bound':>8}")
    for j, k in enumerate(args.k):
        print(f"{k:>3} {tails[:, j].max():>10.5f} {tails[:, j].mean():>10.5f} {1 / (2 * k - 1):>8.5f}")


if __name__ == "__main__":
    main()
