"""How often does one step leave the sphere it started on?

Samples points on spheres S_r(x0) about the unique fixed point and reports,
per radius, the fraction whose orbit ever changes distance to x0.  With the
defaults this is the indifferent map f(x) = (x^2 + 2)/(x + 1) at p = 5, where
the sphere of radius |x0 + d| = 1 contains the pole and is not invariant.

    python3 scripts/sphere_invariance.py --samples 200
"""
import argparse
import random
from fractions import Fraction

from padyn.orbit import iterate
from padyn.rational_map import MapParams, fixed_points
from padyn.sampling import point_on_sphere


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", default="5")
    ap.add_argument("--a", default="0")
    ap.add_argument("--b", default="2")
    ap.add_argument("--c", default="1")
    ap.add_argument("--d", default="1")
    ap.add_argument("--radii", default="-3,-2,-1,0,1,2,3")
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--steps", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = MapParams.parse(args.p, args.a, args.b, args.c, args.d)
    (fp,) = fixed_points(params)
    rng = random.Random(args.seed)
    print(f"# seed={args.seed} x0={fp.point} |f'(x0)| exp={fp.multiplier_norm.exp} delta exp={fp.delta.exp}")
    print("radius_exp  left_sphere  first_exit_exps")
    for e in (Fraction(s) for s in args.radii.split(",")):
        left, exits = 0, {}
        for _ in range(args.samples):
            x = point_on_sphere(fp.point, e, params.p, rng)
            log = iterate(params, x, args.steps, backend="auto", ceiling_bits=1 << 12).radius_logs["x0"]
            moved = next((r for r in log if r.exp != e), None)
            if moved is not None:
                left += 1
                exits[moved.exp] = exits.get(moved.exp, 0) + 1
        hist = " ".join(f"{k}:{v}" for k, v in sorted(exits.items()))
        print(f"{str(e):>10}  {left:>4}/{args.samples:<6} {hist}")


if __name__ == "__main__":
    main()
