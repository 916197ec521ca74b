"""Sphere-by-sphere fate of sampled points around an attracting fixed point.

    python3 scripts/basin_scan.py --radii=-4,-3,-2,-1,0,1,2 --samples 20
"""
import argparse
import json

from padyn.orbit import basin_probe
from padyn.rational_map import MapParams, fixed_points


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", default="3")
    ap.add_argument("--a", default="1")
    ap.add_argument("--b", default="1")
    ap.add_argument("--c", default="1")
    ap.add_argument("--d", default="0")
    ap.add_argument("--radii", default="-3,-2,-1,0,1,2")
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = MapParams.parse(args.p, args.a, args.b, args.c, args.d)
    (fp,) = fixed_points(params)
    print(json.dumps({"seed": args.seed, "fixed_point": str(fp.point), "delta": fp.delta.to_json(),
                      "multiplier_norm": fp.multiplier_norm.to_json()}))
    radii = [int(e) for e in args.radii.split(",")]
    for s in basin_probe(params, radii, args.samples, args.steps, seed=args.seed):
        print(json.dumps(s.to_json()))


if __name__ == "__main__":
    main()
