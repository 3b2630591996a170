"""Compare prover verdicts on random ground sequents with a bounded
finite-model search and, when z3 is importable, with z3.

    python scripts/solver_soundness.py --count 1000 --seed 0 --z3
"""

import argparse
import random
import sys
import time
from collections import Counter
from dataclasses import dataclass

from drsax.modelcheck import SequentGen, find_countermodel, search_countermodel
from drsax.pretty import pretty
from drsax.prover import Status, entails


@dataclass
class Experiment:
    count: int = 1000
    seed: int = 0
    names: int = 3
    depth: int = 2
    max_hyps: int = 3
    z3: bool = False


def _z3(hyps, goal):
    from drsax.smtlib import export_smtlib, run_z3
    return run_z3(export_smtlib(hyps, goal))


def run(exp: Experiment) -> int:
    gen = SequentGen(names=tuple("abcdefgh"[: exp.names]), depth=exp.depth, max_hyps=exp.max_hyps)
    rng = random.Random(exp.seed)
    tally, problems = Counter(), []
    t0 = time.perf_counter()
    for i in range(exp.count):
        hyps, goal = gen.sequent(rng)
        v = entails(hyps, goal)
        tally[v.status.value] += 1
        text = f"{'; '.join(map(pretty, hyps))} |- {pretty(goal)}"
        if v.status is Status.VALID and find_countermodel(hyps, goal) is not None:
            problems.append((i, "valid but a countermodel exists", text))
        elif v.status is Status.REFUTED and search_countermodel(hyps, goal)[0] is None:
            problems.append((i, "refuted but no countermodel found", text))
        if exp.z3:
            z = _z3(hyps, goal)
            if (v.status is Status.VALID and z != "unsat") or (v.status is Status.REFUTED and z != "sat"):
                problems.append((i, f"z3 says {z}", text))
            tally[f"z3 {z}"] += 1
    for i, why, text in problems:
        print(f"#{i}: {why}: {text}")
    print(f"{exp.count} sequents in {time.perf_counter() - t0:.1f}s: {dict(sorted(tally.items()))}")
    print(f"disagreements: {len(problems)}")
    return 1 if problems else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = Experiment()
    ap.add_argument("--count", type=int, default=d.count)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--names", type=int, default=d.names)
    ap.add_argument("--depth", type=int, default=d.depth)
    ap.add_argument("--max-hyps", type=int, default=d.max_hyps)
    ap.add_argument("--z3", action="store_true")
    return run(Experiment(**vars(ap.parse_args(argv))))


if __name__ == "__main__":
    sys.exit(main())
