"""Length spectrum of a regular-polygon surface with multiplicities.

    python3 scripts/bolza_spectrum.py --cutoff 9.1
    python3 scripts/bolza_spectrum.py --genus 3 --cutoff 5 --histogram
"""
import argparse
from liftmin.curves import self_intersection_number
from liftmin.fuchsian import build_regular_polygon_rep, enumerate_short_classes
from liftmin import words as W


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--genus", type=int, default=2)
    ap.add_argument("--cutoff", type=float, default=9.1)
    ap.add_argument("--histogram", action="store_true", help="text bars instead of sample words")
    args = ap.parse_args()

    rep = build_regular_polygon_rep(args.genus)
    en = enumerate_short_classes(rep, args.cutoff)
    groups = {}
    for c in en:
        groups.setdefault(round(c.length, 5), []).append(c)
    print(f"genus {args.genus}, {rep.metric_id}, cutoff {args.cutoff}: "
          f"{len(en)} oriented classes ({en.completeness})")
    print(f"{'length':>9}  {'mult':>5}  {'simple':>6}  sample")
    for length in sorted(groups):
        cs = groups[length]
        simple = sum(not W.is_proper_power(c.form, rep.genus) and self_intersection_number(rep, c.word) == 0
                     for c in cs)
        extra = "#" * max(1, len(cs) // 8) if args.histogram else str(cs[0].form)
        print(f"{length:9.5f}  {len(cs):5d}  {simple:6d}  {extra}")


if __name__ == "__main__":
    main()
