"""Cross-check the accelerated radius-limit classifier against plain iteration.

    python3 scripts/radius_corpus.py --n 2000 --seed 7
"""
import argparse
import collections
import random
import time

from padyn.radius import VerdictKind, brute_force_limit, classify_limit, case_label
from padyn.sampling import probe_radii, spec_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    tally = collections.defaultdict(collections.Counter)
    t0 = time.perf_counter()
    for spec in spec_corpus(args.n, seed=args.seed):
        label = case_label(spec)
        for r in probe_radii(spec, rng):
            fast = classify_limit(spec, r)
            slow = brute_force_limit(spec, r, steps=args.steps)
            if slow.kind is VerdictKind.NO_CYCLE:
                tally[label]["undecided"] += 1
            elif fast.same_outcome(slow):
                tally[label][fast.kind.value] += 1
            else:
                tally[label]["MISMATCH"] += 1
                print(f"mismatch {label}: {spec.to_json()} r={r}: {fast.to_json()} vs {slow.to_json()}")

    print(f"# seed={args.seed} specs={args.n} ({time.perf_counter() - t0:.1f}s)")
    for label in sorted(tally):
        row = ", ".join(f"{k}={v}" for k, v in sorted(tally[label].items()))
        print(f"{label:24s} {row}")
    bad = sum(c["MISMATCH"] for c in tally.values())
    print(f"mismatches: {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
