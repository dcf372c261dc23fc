"""Certify a handful of simple closed geodesics and write their certificates.

    python3 scripts/certify_examples.py --out certificates/
"""
import argparse
import json
import time
from pathlib import Path

from liftmin import words as W
from liftmin.certify import certify, verify_certificate
from liftmin.cli import dumps
from liftmin.fuchsian import build_regular_polygon_rep

EXAMPLES = [
    (2, "a1"),
    (2, "a1 a3"),
    (2, "a1 a2 A1 A2"),
    (2, "a3 a4 A3 A4"),
    (3, "a1"),
    (3, "a1 a2 A1 A2"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="directory for certificate JSON files")
    args = ap.parse_args()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)

    reps = {}
    print(f"{'genus':>5}  {'curve':<14} {'verdict':<12} {'tower':<44} {'index':>5} {'check':>6} {'sec':>6}")
    for genus, text in EXAMPLES:
        rep = reps.setdefault(genus, build_regular_polygon_rep(genus))
        t0 = time.perf_counter()
        cert = certify(rep, W.parse_word(text))
        secs = time.perf_counter() - t0
        doc = cert.to_json()
        problems = verify_certificate(json.loads(json.dumps(doc)), rep)
        tower = " > ".join(f"{s.rationale}({s.stage_index})" for s in cert.tower.stages) or "-"
        print(f"{genus:5d}  {text:<14} {cert.verdict:<12} {tower:<44} "
              f"{cert.tower.total_index:5d} {'ok' if not problems else 'FAIL':>6} {secs:6.1f}")
        for p in problems:
            print("        ", p)
        if args.out:
            name = f"g{genus}_" + text.replace(" ", "_") + ".json"
            (args.out / name).write_text(dumps(doc))


if __name__ == "__main__":
    main()
