"""Grover search versus random classical probes against a marked-state oracle.

Prints, for each n, the Grover query count, its success probability, the
closed-form prediction and the mean success of 2^n/10 random probes.
"""

import argparse

from qvpkit import qvp
from qvpkit.problems import marked
from qvpkit.problems.oracles import marked_state_oracle


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[2, 4, 6, 8])
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--haar", action="store_true", help="mark a Haar-random state instead of a basis state")
    args = parser.parse_args()
    print(f"{'n':>2} {'seed':>4} {'queries':>7} {'budget':>6} {'grover':>8} {'formula':>8} {'probes':>6} {'classical':>9}")
    for n in args.n:
        for seed in range(args.seeds):
            o = marked_state_oracle(seed, n, basis_state=not args.haar)
            state, queries = marked.grover_search(o)
            p = qvp.acceptance_probability(marked.build_marked_state_procedure(o), state)
            base = marked.classical_baseline(o, trials=args.trials, seed=seed)
            print(f"{n:>2} {seed:>4} {queries:>7} {marked.query_budget(n):>6} {p:>8.4f} "
                  f"{marked.grover_success_closed_form(n, queries):>8.4f} {base.probes:>6} {base.mean_success:>9.4f}")


if __name__ == "__main__":
    main()
