"""Covering towers that make the lift of a simple closed geodesic a shortest
disjoint partition of its homology class.

Starting from the surface itself, each stage passes to a finite cover of the
current one, built from homology functionals of the current cover:

* a homologically trivial curve first gets an index-2 parity cover in which
  its lift is nontrivial in homology;
* a shorter curve homologous to the lift is separated from it by a further
  double cover (found by search and then verified);
* a shorter multi-curve partition is broken with the cover cut out by
  ``n1 | phi1, n2 | phi2, phi1/n1 + phi2/n2 even`` where ``phi1, phi2`` are
  dual to two of its entries.

The loop stops when no disjoint partition of the lift's class is shorter than
the lift.  Every stage is verified after construction, and the certificate
stores enough data for :func:`verify_certificate` to redo the checks.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from . import words as W
from .covers import (
    CoverError,
    FiniteCover,
    SubgroupSpec,
    extend_cover,
    iter_parity_functionals,
    lift_curve,
    projection_map,
    subgroup_lemma61,
    trivial_cover,
)
from .curves import (
    CurveClass,
    CurveError,
    DisjointPartition,
    PartitionEquivClass,
    Surface,
    curve_class,
    enumerate_partitions_below,
    make_partition,
    partitions_equivalent,
)
from .fuchsian import FuchsianRep, GeodesicClass, enumerate_short_classes
from .snf import matmul, smith_normal_form
from .words import SurfaceGroup, Word

log = logging.getLogger(__name__)

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


class CertifyError(ValueError):
    pass


@dataclass
class CertifyConfig:
    length_cutoff_max: float = 12.0
    max_stages: int = 8
    max_index: int = 256
    #: parity functionals tried per homologous competitor
    max_parity_candidates: int = 400


# ---------------------------------------------------------------------------
# input validation


def check_input(rep: FuchsianRep, w: Word) -> CurveClass:
    """Validated simple closed geodesic class of ``w``."""
    g = rep.genus
    rep.group.check(w)
    if W.is_trivial(w, g):
        raise CertifyError("input word is homotopically trivial")
    if W.is_proper_power(w, g):
        raise CertifyError(f"input word {w} is not primitive (a proper power)")
    c = curve_class(rep, w)
    if not c.simple:
        raise CertifyError(f"input curve {w} is not simple")
    return c


def _class_in_enumeration(rep: FuchsianRep, c: CurveClass) -> GeodesicClass:
    en = enumerate_short_classes(rep, c.length + 1e-6)
    for k in en.classes:
        if k.form == c.form:
            return k
    raise CertifyError(f"class {c.form} missing from its own length enumeration")


# ---------------------------------------------------------------------------
# tower data


@dataclass
class Stage:
    rationale: str
    target: str
    cover: FiniteCover
    stage_index: int
    spec: SubgroupSpec
    notes: dict = field(default_factory=dict)
    broken: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "rationale": self.rationale,
            "target": self.target,
            "stage_index": self.stage_index,
            "composite_index": self.cover.index,
            "spec": self.spec.to_json(),
            "notes": self.notes,
            "broken": self.broken,
            "cover": self.cover.to_json(),
        }


@dataclass
class CoverTower:
    genus: int
    stages: list[Stage] = field(default_factory=list)

    @property
    def composite(self) -> FiniteCover:
        if self.stages:
            return self.stages[-1].cover
        return trivial_cover(SurfaceGroup(self.genus))

    @property
    def total_index(self) -> int:
        return math.prod(s.stage_index for s in self.stages)

    def check(self) -> None:
        if self.composite.index != self.total_index:
            raise CertifyError("composite index differs from the product of stage indices")


@dataclass
class Certificate:
    input: str
    metric: str
    genus: int
    tower: CoverTower
    lift: dict
    competitors: list
    cutoff: float
    completeness: str
    verdict: str
    flags: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "input": self.input,
            "metric": self.metric,
            "genus": self.genus,
            "tower": [s.to_json() for s in self.tower.stages],
            "total_index": self.tower.total_index,
            "lift": self.lift,
            "competitors": {
                "cutoff": float(f"{self.cutoff:.15g}"),
                "completeness": self.completeness,
                "partitions": self.competitors,
            },
            "flags": self.flags,
            "diagnostics": self.diagnostics,
            "verdict": self.verdict,
            "tool_version": __version__,
        }


# ---------------------------------------------------------------------------
# competitors


def find_competitors(rep: FuchsianRep, surface: Surface, lift: CurveClass,
                     ) -> tuple[list[DisjointPartition], str]:
    """Disjoint partitions of the lift's class strictly shorter than the lift."""
    res = enumerate_partitions_below(rep, lift.homology, lift.length, surface.cover,
                                     strict=True, surface=surface)
    return res.partitions, res.completeness


def _lift_on(surface: Surface, geo: GeodesicClass, start: int = 0) -> CurveClass:
    c = surface.lift_of(geo, start)
    if c.degree != 1:
        raise CertifyError("the curve does not close up on the cover")
    return c


def _competitor_key(p: DisjointPartition) -> list:
    return [[str(c.form), sorted(c.cycle), n] for c, n in p.entries]


def _project(p: DisjointPartition, pmap: np.ndarray, lower: Surface) -> DisjointPartition:
    """Image of an upstairs partition on a lower cover."""
    entries = []
    for c, n in p.entries:
        down = lower.lift_of(c.geodesic, int(pmap[c.start]))
        entries.append((down, n * c.degree // down.degree))
    return make_partition(entries)


def _still_present(rep: FuchsianRep, target: DisjointPartition, lower: Surface,
                   upper: Surface, lift: CurveClass) -> list[DisjointPartition]:
    comps, _ = find_competitors(rep, upper, lift)
    pmap = projection_map(upper.cover, lower.cover) if lower.cover is not None else \
        np.zeros(upper.index, dtype=int)
    return [p for p in comps if partitions_equivalent(_project(p, pmap, lower), target)]


# ---------------------------------------------------------------------------
# stages


def stage_trivial_homology(rep: FuchsianRep, l: CurveClass) -> FiniteCover | None:
    """Index-2 cover on which a homologically trivial ``l`` lifts nontrivially."""
    if any(l.homology):
        return None
    group = SurfaceGroup(rep.genus)
    word = l.geodesic.word
    for m in range(1, rep.genus):
        cover = subgroup_lemma61(group, m)
        if cover.contains((2 * m - 1,)) or cover.contains((2 * m + 1,)):
            continue
        lifted = lift_curve(cover, word, 0)
        if lifted.degree == 1 and any(lifted.lift_homology):
            return cover
    raise CertifyError("no parity cover makes the lift homologically nontrivial")


def _lifts_over(surface_new: Surface, geo: GeodesicClass, pmap: np.ndarray, cycle: Sequence[int]):
    want = set(cycle)
    out = []
    for c in surface_new.lifts(geo):
        if int(pmap[c.start]) in want:
            out.append(c)
    return out


def stage_break_homologous(rep: FuchsianRep, surface: Surface, l: CurveClass, s: CurveClass,
                           config: CertifyConfig | None = None) -> Stage:
    """Double cover separating the homology of every lift of ``l`` from every lift of ``s``."""
    config = config or CertifyConfig()
    cover = surface.cover or trivial_cover(SurfaceGroup(rep.genus))
    if s.homology != l.homology:
        raise CertifyError("competitor is not homologous to the curve")
    if s.key == l.key:
        raise CertifyError("competitor is the curve itself")
    rank = cover.homology.rank
    tried = 0
    for f in iter_parity_functionals(rank):
        if sum(a * b for a, b in zip(f, l.homology)) % 2:
            continue
        tried += 1
        if tried > config.max_parity_candidates:
            break
        spec = SubgroupSpec("parity", {"functional": list(f), "over_index": cover.index},
                            "kernel of a mod-2 homology functional of the current cover")
        new = extend_cover(cover, [f], [2], spec=spec)
        if new.index != 2 * cover.index:
            continue
        up = Surface(rep, new)
        pmap = new.projections[0]
        ls = _lifts_over(up, l.geodesic, pmap, l.cycle)
        ss = _lifts_over(up, s.geodesic, pmap, s.cycle)
        if not ls or any(c.degree != 1 for c in ls):
            continue
        hl = {c.homology for c in ls}
        if hl & {c.homology for c in ss}:
            continue
        if not all(up.is_simple(c) for c in ls):
            raise CertifyError("a lift of a simple curve is not simple")
        return Stage("break-homologous", s.label(), new, 2, spec,
                     {"candidates_tried": tried})
    raise CertifyError(f"no double cover separates {l.label()} from {s.label()}")


def dual_functionals(h1: Sequence[int], h2: Sequence[int]) -> tuple[list[int], list[int]] | None:
    """Integer functionals phi1, phi2 with phi_i(h_j) = delta_ij, if they exist."""
    snf = smith_normal_form([list(h1), list(h2)])
    if snf.diagonal[:2] != [1, 1]:
        return None
    n = len(h1)
    dplus = [[int(i == j) for j in range(2)] for i in range(n)]
    phi = matmul(matmul(snf.V, dplus), snf.U)
    check = matmul([list(h1), list(h2)], phi)
    if check != [[1, 0], [0, 1]]:
        return None
    return [row[0] for row in phi], [row[1] for row in phi]


def stage_break_partition(rep: FuchsianRep, surface: Surface, l: CurveClass, sigma: PartitionEquivClass,
                          config: CertifyConfig | None = None) -> Stage:
    """Cover on which no shorter partition of the lift projects to ``sigma``."""
    config = config or CertifyConfig()
    cover = surface.cover or trivial_cover(SurfaceGroup(rep.genus))
    part = sigma.representative
    entries = list(part.entries)
    homs = [c.homology for c, _ in entries]
    if len(set(homs)) < len(homs):
        raise CertifyError(
            f"partition {part.describe()} has homologous entries; no construction for that case")
    if len(entries) < 2:
        raise CertifyError("partition breaking needs at least two distinct entries")
    failures = []
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            (c1, n1), (c2, n2) = entries[i], entries[j]
            duals = dual_functionals(c1.homology, c2.homology)
            if duals is None:
                failures.append(f"{c1.label()},{c2.label()}: not part of a basis")
                continue
            phi1, phi2 = duals
            spec = SubgroupSpec(
                "lemma63",
                {"n1": n1, "n2": n2, "phi1": phi1, "phi2": phi2, "over_index": cover.index},
                "n1 | phi1, n2 | phi2, phi1/n1 + phi2/n2 even on the current cover")
            new = extend_cover(cover, [phi1, phi2], [2 * n1, 2 * n2], [(n1, n2)], spec=spec)
            ratio = new.index // cover.index
            if ratio != 2 * n1 * n2 or new.index > config.max_index:
                failures.append(f"{c1.label()},{c2.label()}: index ratio {ratio}")
                continue
            up = Surface(rep, new)
            pmap = new.projections[0]
            ls = _lifts_over(up, l.geodesic, pmap, l.cycle)
            base_lift = next((c for c in ls if c.start == 0), None)
            if base_lift is None or base_lift.degree != 1:
                failures.append(f"{c1.label()},{c2.label()}: curve does not lift")
                continue
            left = _still_present(rep, part, surface, up, base_lift)
            if left:
                failures.append(f"{c1.label()},{c2.label()}: {len(left)} projecting partitions remain")
                continue
            notes = {
                "n1": n1, "n2": n2,
                "enumerated_index": ratio,
                "index_2n1n2": 2 * n1 * n2,
                "alternative_index_formula": "eps1*eps2-2",
                "alternative_formula_status": "not evaluable: eps1, eps2 undefined for this construction; "
                                              "enumerated index reported instead",
                "entries": [c1.label(), c2.label()],
            }
            return Stage("break-partition", part.describe(), new, ratio, spec, notes)
    raise CertifyError(f"could not break {part.describe()}: " + "; ".join(failures))


# ---------------------------------------------------------------------------
# main loop


def certify(rep: FuchsianRep, w: Word, config: CertifyConfig | None = None) -> Certificate:
    config = config or CertifyConfig()
    t0 = time.perf_counter()
    curve = check_input(rep, w)
    geo = _class_in_enumeration(rep, curve)
    tower = CoverTower(rep.genus)
    diagnostics: list[str] = []
    flags: dict = {"completeness": None, "cutoff": geo.length}
    if geo.length > config.length_cutoff_max:
        return _finish(rep, w, tower, None, [], geo.length, "incomplete", INCONCLUSIVE,
                       flags, [f"curve length {geo.length:.6g} exceeds length_cutoff_max"])

    first = stage_trivial_homology(rep, curve)
    if first is not None:
        tower.stages.append(Stage("trivial-homology", str(curve.form), first, first.index,
                                  first.spec, {"m": first.spec.params.get("m")}))

    verdict = INCONCLUSIVE
    comps: list[DisjointPartition] = []
    completeness = "exhausted"
    while True:
        surface = Surface(rep, tower.composite if tower.stages else None)
        lift = _lift_on(surface, geo, 0)
        if not any(lift.homology):
            raise CertifyError("lift is homologically trivial on the composite cover")
        comps, completeness = find_competitors(rep, surface, lift)
        log.info("stage %d (index %d): %d competitors", len(tower.stages), tower.composite.index,
                 len(comps))
        if not comps:
            verdict = CERTIFIED if completeness in ("exhausted", "heuristic") else INCONCLUSIVE
            break
        if len(tower.stages) >= config.max_stages:
            diagnostics.append("stage limit reached")
            break
        singles = [p for p in comps if p.size == 1 and p.entries[0][1] == 1]
        try:
            if singles:
                s = singles[0].entries[0][0]
                stage = stage_break_homologous(rep, surface, lift, s, config)
                stage.broken = [_competitor_key(p) for p in singles[:1]]
            else:
                target = comps[0]
                stage = stage_break_partition(rep, surface, lift,
                                              PartitionEquivClass(target, target.total_length), config)
                stage.broken = [_competitor_key(target)]
        except CertifyError as exc:
            diagnostics.append(str(exc))
            break
        if stage.cover.index > config.max_index:
            diagnostics.append(f"index limit {config.max_index} exceeded")
            break
        tower.stages.append(stage)
    tower.check()
    flags["completeness"] = completeness
    flags["seconds"] = round(time.perf_counter() - t0, 3)
    return _finish(rep, w, tower, lift, comps, geo.length, completeness, verdict, flags, diagnostics)


def _finish(rep, w, tower, lift, comps, cutoff, completeness, verdict, flags, diagnostics) -> Certificate:
    cover = tower.composite
    lift_json = {}
    if lift is not None:
        lifted = lift_curve(cover, lift.geodesic.word, 0)
        lift_json = dict(lifted.to_json())
        lift_json["length"] = float(f"{lift.length:.15g}")
        lift_json["form"] = str(lift.form)
        lift_json["cover_genus"] = cover.homology.cover_genus
    return Certificate(
        input=str(w), metric=rep.metric_id, genus=rep.genus, tower=tower, lift=lift_json,
        competitors=[p.to_json() for p in comps], cutoff=cutoff, completeness=completeness,
        verdict=verdict, flags=flags, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# independent checker


def _rank_rational(rows: list[list[int]]) -> int:
    """Rank over Q by fraction-exact Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _edge_counts(cover: FiniteCover, letters, start: int) -> dict:
    counts: dict = {}
    c = start
    for x in letters:
        if x > 0:
            counts[(c, x)] = counts.get((c, x), 0) + 1
            c = cover.step(c, x)
        else:
            d = cover.step(c, x)
            counts[(d, -x)] = counts.get((d, -x), 0) - 1
            c = d
    return counts


def homologically_nontrivial(cover: FiniteCover, letters, start: int) -> bool:
    """Is the closed walk of ``letters`` from ``start`` nonzero in H_1 of the cover?

    Works on the full edge space: a cycle is null-homologous iff its edge
    vector is a rational combination of coset boundaries and relator loops.
    """
    g, k = cover.genus, cover.index
    edges = [(c, t) for c in range(k) for t in range(1, 2 * g + 1)]
    pos = {e: i for i, e in enumerate(edges)}
    rows = []
    # coboundary rows: vertex potentials
    for v in range(k):
        row = [0] * len(edges)
        for (c, t), i in pos.items():
            if c == v:
                row[i] -= 1
            if cover.step(c, t) == v:
                row[i] += 1
        rows.append(row)
    rel = W.relator_letters(g)
    for c in range(k):
        row = [0] * len(edges)
        for e, n in _edge_counts(cover, rel, c).items():
            row[pos[e]] += n
        rows.append(row)
    vec = [0] * len(edges)
    for e, n in _edge_counts(cover, letters, start).items():
        vec[pos[e]] += n
    # vec must be a cycle: boundary zero
    base = _rank_rational(rows[k:])
    return _rank_rational(rows[k:] + [vec]) > base


def verify_certificate(doc: dict, rep: FuchsianRep) -> list[str]:
    """Recompute the claims of a serialized certificate; returns the problems found."""
    problems: list[str] = []
    g = doc["genus"]
    if g != rep.genus or doc["metric"] != rep.metric_id:
        problems.append("certificate was produced for another surface")
        return problems
    w = W.parse_word(doc["input"])
    try:
        curve = check_input(rep, w)
    except (CertifyError, CurveError) as exc:
        return [f"input rejected: {exc}"]
    prev = trivial_cover(SurfaceGroup(g))
    product = 1
    for i, st in enumerate(doc["tower"]):
        try:
            cov = FiniteCover.from_json(st["cover"])
        except CoverError as exc:
            problems.append(f"stage {i}: invalid cover table: {exc}")
            return problems
        try:
            projection_map(cov, prev)
        except CoverError:
            problems.append(f"stage {i}: subgroup not contained in the previous stage")
        if cov.index != prev.index * st["stage_index"]:
            problems.append(f"stage {i}: index {cov.index} is not {prev.index} x {st['stage_index']}")
        product *= st["stage_index"]
        prev = cov
    if product != doc["total_index"] or prev.index != product:
        problems.append("total index is not the product of stage indices")
    lift = doc["lift"]
    geo = _class_in_enumeration(rep, curve)
    if lift:
        if W.parse_word(lift["base_word"]) != geo.word:
            problems.append("lift is not based on the class representative")
        cyc = []
        c = 0
        while True:
            cyc.append(c)
            c = prev.walk(geo.word, c)
            if c == 0:
                break
        if len(cyc) != lift["degree"]:
            problems.append("lift degree does not match the coset walk")
        if abs(lift["length"] - len(cyc) * rep.translation_length(geo.word)) > 1e-9:
            problems.append("lift length is not degree x base length")
        if not homologically_nontrivial(prev, geo.word.letters * len(cyc), 0):
            problems.append("lift is homologically trivial")
        hom = prev.homology.apply_map(prev.homology.edge_vector(geo.word.letters * len(cyc), 0))
        if list(hom) != lift["lift_homology"]:
            problems.append("lift homology vector does not match")
    verdict = doc["verdict"]
    if verdict == CERTIFIED:
        if doc["competitors"]["partitions"]:
            problems.append("certified with a nonempty competitor list")
        surface = Surface(rep, prev if doc["tower"] else None)
        up = surface.lift_of(geo, 0)
        res = enumerate_partitions_below(rep, up.homology, up.length, surface.cover, strict=True)
        if res.partitions:
            problems.append(f"recomputation found {len(res.partitions)} shorter partitions")
        if not surface.is_simple(up):
            problems.append("lift is not simple")
        # each recorded broken competitor must be gone for good
        for i, st in enumerate(doc["tower"]):
            for key in st.get("broken", []):
                for p in res.partitions:
                    if _competitor_key(p) == key:
                        problems.append(f"stage {i}: broken competitor reappears")
    return problems
