"""Command-line entry point: ``liftmin <command> [options]``.

Exit status is 0 on success, 2 when a certificate is inconclusive and 1 on
any error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import __version__
from . import words as W
from .certify import CertifyConfig, CertifyError, INCONCLUSIVE, certify
from .config import ConfigError, RunConfig, load_config
from .covers import (
    CoverError,
    FiniteCover,
    custom_cover,
    lift_curve,
    parity_cover,
    subgroup_lemma61,
    subgroup_lemma63,
    trivial_cover,
)
from .curves import CurveError, curve_class, minimal_disjoint_partition
from .fuchsian import FuchsianRep, GeometryError, build_regular_polygon_rep, enumerate_short_classes, read_matrix_file
from .measures import MeasureError, min_action_on_partition, periodic_measure_of_curve, shift_measure

SCHEMA_VERSION = "1"
COMMANDS = ("lengths", "cover", "lift", "partition-min", "measure", "certify")

_ERROR_CODES = [
    (ConfigError, "config"),
    (GeometryError, "fuchsian"),
    (CoverError, "covers"),
    (CurveError, "curves"),
    (MeasureError, "measures"),
    (CertifyError, "certify"),
    (OSError, "io"),
    (ValueError, "input"),
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="liftmin", description="Covers, lifts and minimal partitions of closed geodesics.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--curve", help='curve word, e.g. "a1 a2 A1 A2"')
    p.add_argument("--length-cutoff", type=float, help="length bound for `lengths`")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--reproducible", action="store_true", help="omit timestamps")
    p.add_argument("--genus", type=int)
    p.add_argument("--cover", help="trivial | lemma61:m | lemma63:n1,n2 | parity:f1,...,f2g")
    p.add_argument("--start", type=int, dest="start_coset", help="start coset for `lift`")
    p.add_argument("--homology", help="comma separated homology vector")
    p.add_argument("--period", help="period T (decimal or p/q)")
    p.add_argument("--shift", help="shift factor a")
    p.add_argument("--matrix-file", help="custom generator matrices")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


# ---------------------------------------------------------------------------
# helpers


def load_schema(name: str) -> dict:
    text = resources.files("liftmin").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc: dict, name: str) -> None:
    jsonschema.validate(doc, load_schema(name))


def round_reals(obj: Any) -> Any:
    """Floats to 15 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {k: round_reals(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_reals(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(round_reals(doc), indent=2, sort_keys=True) + "\n"


def make_rep(cfg: RunConfig) -> FuchsianRep:
    if cfg.matrix_file:
        rep = read_matrix_file(cfg.matrix_file)
        if rep.genus != cfg.genus:
            raise ConfigError(f"matrix file has genus {rep.genus}, config says {cfg.genus}")
        return rep
    gluing = {"regular-polygon": None, "bolza": "bolza", "commutator": "commutator"}[cfg.metric]
    return build_regular_polygon_rep(cfg.genus, gluing)


def make_cover(cfg: RunConfig) -> FiniteCover:
    group = W.SurfaceGroup(cfg.genus)
    text = (cfg.cover or "trivial").strip()
    kind, _, arg = text.partition(":")
    nums = [int(x) for x in arg.replace(",", " ").split()] if arg else []
    if kind == "trivial":
        return trivial_cover(group)
    if kind == "lemma61" and len(nums) == 1:
        return subgroup_lemma61(group, nums[0])
    if kind == "lemma63" and len(nums) == 2:
        return subgroup_lemma63(group, nums[0], nums[1])
    if kind == "parity":
        return parity_cover(group, nums)
    if kind == "custom":
        # custom:q;img1;img2;...  with images as comma lists
        parts = arg.split(";")
        moduli = [int(x) for x in parts[0].split(",")]
        images = [[int(x) for x in p.split(",")] for p in parts[1:]]
        return custom_cover(group, moduli, images)
    raise ConfigError(f"cannot parse cover description {text!r}")


def _require_curve(cfg: RunConfig) -> W.Word:
    if not cfg.curve:
        raise ConfigError("this command needs a curve (--curve or curve = ...)")
    w = W.parse_word(cfg.curve)
    W.SurfaceGroup(cfg.genus).check(w)
    return w


def envelope(command: str, cfg: RunConfig, result: dict | None, reproducible: bool,
             completeness: str | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "tool_version": __version__,
        "config": cfg.echo(),
        "completeness": completeness,
        "result": result,
    }
    if not reproducible:
        doc["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


# ---------------------------------------------------------------------------
# commands


def cmd_lengths(cfg: RunConfig, args) -> tuple[str, int]:
    rep = make_rep(cfg)
    cutoff = args.length_cutoff or cfg.length_cutoff
    if cutoff is None:
        raise ConfigError("lengths needs --length-cutoff")
    if cutoff > cfg.length_cutoff_max:
        raise ConfigError(f"cutoff {cutoff} exceeds length_cutoff_max {cfg.length_cutoff_max}")
    en = enumerate_short_classes(rep, cutoff, word_cutoff_max=cfg.word_cutoff_max)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["form", "length"] + [f"h{i}" for i in range(1, 2 * rep.genus + 1)])
    for c in en:
        wr.writerow([str(c.form), f"{c.length:.15g}"] + list(c.homology))
    logging.getLogger(__name__).info("completeness: %s", en.completeness)
    return buf.getvalue(), 0


def cmd_cover(cfg: RunConfig, args) -> tuple[dict, int, str | None]:
    cover = make_cover(cfg)
    d = cover.to_json()
    d["homology_rank"] = cover.homology.rank
    validate(d, "cover")
    return d, 0, None


def cmd_lift(cfg: RunConfig, args) -> tuple[dict, int, str | None]:
    rep = make_rep(cfg)
    cover = make_cover(cfg)
    w = _require_curve(cfg)
    lifted = lift_curve(cover, w, cfg.start_coset)
    d = lifted.to_json()
    d["length"] = lifted.degree * rep.translation_length(w)
    d["cover_genus"] = cover.homology.cover_genus
    validate(d, "lift")
    return d, 0, None


def _homology(cfg: RunConfig, rep: FuchsianRep) -> tuple[int, ...]:
    if cfg.homology is None:
        if cfg.curve:
            return W.abelianize(_require_curve(cfg), rep.genus)
        raise ConfigError("this command needs --homology or a curve")
    if len(cfg.homology) != 2 * rep.genus:
        raise ConfigError(f"homology vector must have {2 * rep.genus} entries")
    return tuple(cfg.homology)


def cmd_partition_min(cfg: RunConfig, args) -> tuple[dict, int, str | None]:
    rep = make_rep(cfg)
    h = _homology(cfg, rep)
    hint = cfg.length_cutoff or min(rep.translation_length(W.Word((1,))), cfg.length_cutoff_max)
    part = minimal_disjoint_partition(rep, h, hint, max_cutoff=cfg.length_cutoff_max)
    en = enumerate_short_classes(rep, min(cfg.length_cutoff_max, hint))
    d = {
        "homology": list(h),
        "found": part is not None,
        "total_length": part.total_length if part else None,
        "entries": part.to_json() if part else [],
    }
    validate(round_reals(d), "partition")
    return d, 0, en.completeness


def cmd_measure(cfg: RunConfig, args) -> tuple[dict, int, str | None]:
    rep = make_rep(cfg)
    if cfg.curve:
        c = curve_class(rep, _require_curve(cfg), check_simple=False)
        mu = periodic_measure_of_curve(c, cfg.period)
    else:
        h = _homology(cfg, rep)
        part = minimal_disjoint_partition(rep, h, rep.translation_length(W.Word((1,))),
                                          max_cutoff=cfg.length_cutoff_max)
        if part is None:
            raise MeasureError("no disjoint partition found below length_cutoff_max")
        mu = min_action_on_partition(part, h, cfg.period)
    if cfg.shift is not None:
        mu = shift_measure(mu, cfg.shift)
    d = mu.to_json()
    validate(round_reals(d), "measure")
    return d, 0, None


def cmd_certify(cfg: RunConfig, args) -> tuple[dict, int, str | None]:
    rep = make_rep(cfg)
    w = _require_curve(cfg)
    cert = certify(rep, w, CertifyConfig(length_cutoff_max=cfg.length_cutoff_max,
                                         max_stages=cfg.max_stages, max_index=cfg.max_index))
    d = cert.to_json()
    if args.reproducible:
        d["flags"].pop("seconds", None)
    validate(round_reals(d), "certificate")
    code = 2 if cert.verdict == INCONCLUSIVE else 0
    return d, code, cert.completeness


_COMMANDS = {
    "cover": cmd_cover,
    "lift": cmd_lift,
    "partition-min": cmd_partition_min,
    "measure": cmd_measure,
    "certify": cmd_certify,
}


def _error_code(exc: BaseException) -> str:
    if isinstance(exc, ConfigError):
        return exc.kind
    for cls, code in _ERROR_CODES:
        if isinstance(exc, cls):
            return code
    return "internal"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {
            "curve": args.curve,
            "length_cutoff": args.length_cutoff,
            "genus": args.genus,
            "cover": args.cover,
            "start_coset": args.start_coset,
            "homology": tuple(int(x) for x in args.homology.replace(",", " ").split()) if args.homology else None,
            "period": Fraction(args.period) if args.period else None,
            "shift": Fraction(args.shift) if args.shift else None,
            "matrix_file": args.matrix_file,
        }
        cfg = load_config(args.config, overrides)
        if args.command == "lengths":
            text, code = cmd_lengths(cfg, args)
        else:
            result, code, completeness = _COMMANDS[args.command](cfg, args)
            doc = envelope(args.command, cfg, result, args.reproducible, completeness)
            doc = round_reals(doc)
            validate(doc, "document")
            text = dumps(doc)
    except Exception as exc:  # surfaced with a module code
        print(f"error[{_error_code(exc)}]: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return 1
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
