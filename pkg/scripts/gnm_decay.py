"""Best flag-1 acceptance of the group non-membership procedure as repetitions grow.

For a target inside the subgroup every quantum witness should be rejected more
often as closure tests are added; for a target outside it, the uniform
subgroup state keeps acceptance 1/2.
"""

import argparse

from qvpkit.problems import groups as gp
from qvpkit.problems.oracles import cyclic_table, dihedral_table, group_oracle, make_group_spec

CASES = {
    "Z8": (cyclic_table(8), [2], 4, 1),
    "Z64": (cyclic_table(64), [2], 4, 1),
    "D8": (dihedral_table(8), [2, 8], 10, 1),
    "D16": (dihedral_table(16), [4, 16], 20, 1),
    "D32": (dihedral_table(32), [2, 32], 4, 3),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--groups", nargs="+", default=sorted(CASES), choices=sorted(CASES))
    parser.add_argument("--repetitions", type=int, nargs="+", default=[1, 2, 4, 8])
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    for name in args.groups:
        table, gens, member, nonmember = CASES[name]
        o = group_oracle(make_group_spec(table, gens, member, seed=args.seed), seed=args.seed)
        decay = [gp.max_quantum_branch_acceptance(gp.build_gnm_procedure(o, repetitions=t, seed=args.seed))
                 for t in args.repetitions]
        o = group_oracle(make_group_spec(table, gens, nonmember, seed=args.seed), seed=args.seed)
        gnm = gp.build_gnm_procedure(o, repetitions=2, seed=args.seed)
        psi = gp.uniform_label_state(o.n, gp.subgroup_labels(o))
        outside = gp.quantum_branch_acceptance(gnm, psi[:, None])[0]
        cells = "  ".join(f"t={t}: {v:.5f}" for t, v in zip(args.repetitions, decay))
        print(f"{name:>4}  member {cells}  |  nonmember subgroup state {outside:.6f}")


if __name__ == "__main__":
    main()
