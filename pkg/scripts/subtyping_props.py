"""Reflexivity and transitivity of subtyping over random refined types.

    python scripts/subtyping_props.py --reflexive 500 --chains 200
"""

import argparse
import random
import sys
import time
from dataclasses import dataclass

from drsax.pretty import pretty
from drsax.subtyping import subtype
from drsax.typegen import TypeGen, pool_signature


@dataclass
class Experiment:
    reflexive: int = 500
    chains: int = 200
    seed: int = 0
    max_depth: int = 5


def run(exp: Experiment) -> int:
    sig = pool_signature()
    rng = random.Random(exp.seed)
    t0 = time.perf_counter()
    bad = []
    for _ in range(exp.reflexive):
        a = TypeGen(sig).rtype(rng, exp.max_depth)
        if not subtype(sig, a, a).valid:
            bad.append(f"not reflexive: {pretty(a)}")
    for _ in range(exp.chains):
        g = TypeGen(sig)
        a = g.rtype(rng, exp.max_depth)
        up = rng.random() < 0.5
        b = g.weaken(rng, a, up)
        c = g.weaken(rng, b, up)
        a, b, c = (a, b, c) if up else (c, b, a)
        if not (subtype(sig, a, b).valid and subtype(sig, b, c).valid):
            bad.append(f"generated chain is not a chain: {pretty(a)} / {pretty(b)} / {pretty(c)}")
        elif not subtype(sig, a, c).valid:
            bad.append(f"not transitive: {pretty(a)} <= {pretty(c)}")
    for m in bad:
        print(m)
    print(f"reflexivity {exp.reflexive - sum(m.startswith('not refl') for m in bad)}/{exp.reflexive}, "
          f"chains {exp.chains - sum(not m.startswith('not refl') for m in bad)}/{exp.chains}, "
          f"{time.perf_counter() - t0:.1f}s")
    return 1 if bad else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = Experiment()
    for name in ("reflexive", "chains", "seed", "max_depth"):
        ap.add_argument("--" + name.replace("_", "-"), type=int, default=getattr(d, name))
    return run(Experiment(**vars(ap.parse_args(argv))))


if __name__ == "__main__":
    sys.exit(main())
