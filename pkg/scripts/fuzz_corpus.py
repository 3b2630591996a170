"""Run the dynamic soundness fuzz over a corpus and write a JSON report.

    python scripts/fuzz_corpus.py --seeds 100 --report fuzz-report.json
"""

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

from drsax.harness import FuzzConfig, soundness_fuzz
from drsax.runtime import DEFAULT_FUEL

ROOT = Path(__file__).resolve().parents[1]


@dataclass
class Experiment:
    corpus: Path = ROOT / "corpus"
    seeds: int = 100
    fuel: int = DEFAULT_FUEL
    sample_every: int = 1
    jobs: int = 1
    report: Path = Path("fuzz-report.json")


def run(exp: Experiment) -> int:
    cfg = FuzzConfig(seeds=exp.seeds, fuel=exp.fuel, sample_every=exp.sample_every, jobs=exp.jobs)
    rep = soundness_fuzz(exp.corpus, cfg)
    print(rep.to_text())
    exp.report.write_text(rep.to_json())
    print(f"report: {exp.report}")
    return 0 if rep.ok else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in dataclasses.fields(Experiment):
        ap.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), default=f.default)
    return run(Experiment(**vars(ap.parse_args(argv))))


if __name__ == "__main__":
    sys.exit(main())
