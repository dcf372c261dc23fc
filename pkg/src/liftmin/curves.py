"""Intersections of closed geodesics, on the surface and on finite covers,
and the search for disjoint partitions of a homology class.

Intersections are counted in the universal cover.  Conjugate the first
element so its axis is the imaginary axis, translating towards infinity.
Every crossing of the two closed geodesics is a translate ``v A2`` of the
second axis crossing the fundamental segment of the first axis.  Only the
``v`` with ``d(i, v i)`` below an explicit bound can do that, so searching
the orbit ball finds all of them.

On a cover given by right cosets of ``H``, a closed geodesic is a base class
together with a cycle of its coset permutation.  The line ``g1^j v A2``
crossing the lift through coset ``c1`` belongs to the lift through ``c2``
exactly when walking ``g1^j v`` from ``c1`` lands in the cycle of ``c2``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import words as W
from .covers import FiniteCover, lift_homology, orbit_of
from .fuchsian import (
    FuchsianRep,
    GeodesicClass,
    GeometryError,
    axis_distance,
    axis_endpoints,
    axis_normalizer,
    enumerate_short_classes,
    geodesic_class,
    recenter_word,
    _inverses,
)
from .words import Letters, Word

log = logging.getLogger(__name__)


class CurveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# crossing lines in the universal cover


@dataclass(frozen=True)
class Crossing:
    """The line ``elem . axis(w2)`` crosses the fundamental segment of ``w1``.

    ``position`` in [0, 1) locates the crossing along the segment and ``sign``
    is +1 when the line runs from the left of axis(w1) to its right.
    """

    elem: Letters
    position: float
    sign: int


def _max_distance(m: np.ndarray) -> float:
    """Largest distance from i to the fundamental segment centred at the foot."""
    tr = abs(m[0, 0] + m[1, 1])
    ln = 2 * math.acosh(tr / 2)
    delta = float(axis_distance(np.sum(m * m) / 2, tr))
    return math.acosh(math.cosh(delta) * math.cosh(ln / 2))


def recenter(rep: FuchsianRep, w: Word) -> Word:
    """A conjugate of ``w`` whose axis passes within the domain radius of i."""
    return recenter_word(rep, w)[1]


_CROSS_CACHE: dict[tuple, list[Crossing]] = {}


def crossing_lines(rep: FuchsianRep, w1: Word, w2: Word) -> list[Crossing]:
    """Distinct translates of axis(w2) crossing the fundamental segment of w1.

    The axis of ``w1`` itself is skipped when ``w2`` shares it.
    """
    key = (id(rep), w1.letters, w2.letters)
    hit = _CROSS_CACHE.get(key)
    if hit is not None:
        return hit
    m1, m2 = rep.holonomy(w1), rep.holonomy(w2)
    if m1[0, 0] + m1[1, 1] < 0:
        m1 = -m1
    if m2[0, 0] + m2[1, 1] < 0:
        m2 = -m2
    s = axis_normalizer(m1)
    lam2 = (s @ m1 @ np.linalg.inv(s))[0, 0] ** 2
    ln1 = math.log(lam2)
    if ln1 <= 0:
        raise GeometryError("normaliser failed to put the attracting point at infinity")
    p = (s[0, 0] * 1j + s[0, 1]) / (s[1, 0] * 1j + s[1, 1])
    y_foot = abs(p)
    radius = _max_distance(m1) + _max_distance(m2) + 1e-6
    ball = rep.ball(radius)
    idx = ball.within(radius)
    t = s[None] @ ball.mats[idx]
    rep2, att2 = axis_endpoints(m2)

    def image(x):
        if math.isinf(x):
            return t[:, 0, 0], t[:, 1, 0]
        return t[:, 0, 0] * x + t[:, 0, 1], t[:, 1, 0] * x + t[:, 1, 1]

    pr, qr = image(rep2)
    pa, qa = image(att2)
    crossing = (pr * qr) * (pa * qa) < 0
    # the line equal to axis(w1): t m2 t^-1 is diagonal
    conj = t @ m2[None] @ _inverses(t)
    off = np.abs(conj[:, 0, 1]) + np.abs(conj[:, 1, 0])
    same_axis = off < 1e-7 * (np.abs(conj[:, 0, 0]) + np.abs(conj[:, 1, 1]))
    sel = np.nonzero(crossing & ~same_axis)[0]
    er = pr[sel] / qr[sel]
    ea = pa[sel] / qa[sel]
    y = np.sqrt(-er * ea)
    pos = np.log(y / y_foot) / ln1 + 0.5
    shift = np.floor(pos)
    frac = pos - shift
    wrap = frac > 1 - 1e-9
    frac[wrap] = 0.0
    shift[wrap] += 1
    e_pos = np.where(er > 0, er, ea)
    shape = np.log(e_pos / y)
    g1 = w1.letters
    cand = []
    for j in np.lexsort((shape, frac)):
        k = int(shift[j])
        prefix = W.inverse(g1) * k if k > 0 else g1 * (-k)
        elem = W.free_reduce(prefix + ball.word(idx[sel[j]]))
        cand.append((float(frac[j]), float(shape[j]), elem, 1 if er[j] > 0 else -1))
    # far translates lose digits, so numerically close lines are only merged
    # when the word problem confirms they are the same line
    out: list[Crossing] = []
    kept: list[tuple] = []
    for f, sh, elem, sign in cand:
        if any(_same_crossing(rep, w1, w2, elem, f, sh, c) for c in kept):
            continue
        kept.append((f, sh, elem))
        out.append(Crossing(elem, f, sign))
    out.sort(key=lambda c: c.position)
    _CROSS_CACHE[key] = out
    return out


def _same_crossing(rep: FuchsianRep, w1: Word, w2: Word, elem, f: float, sh: float, other) -> bool:
    f0, sh0, elem0 = other
    df = abs(f - f0)
    if min(df, 1 - df) > 1e-4 or abs(sh - sh0) > 1e-3:
        return False
    # elem0^-1 w1^k elem maps axis(w2) to itself iff it commutes with w2
    for k in (0, 1, -1):
        step = w1.letters * k if k >= 0 else W.inverse(w1.letters) * -k
        x = W.free_reduce(W.inverse(elem0) + step + elem)
        comm = x + w2.letters + W.inverse(x) + W.inverse(w2.letters)
        if W.is_trivial(Word(comm), rep.genus):
            return True
    return False


def _require_primitive(rep: FuchsianRep, c: Word) -> None:
    if W.is_trivial(c, rep.genus):
        raise CurveError(f"{c} is homotopically trivial")
    if W.is_proper_power(c, rep.genus):
        raise CurveError(f"{c} is a proper power")


def self_intersection_number(rep: FuchsianRep, c: Word) -> int:
    """Transverse double points of the closed geodesic of a primitive class."""
    _require_primitive(rep, c)
    w = recenter(rep, c)
    lines = crossing_lines(rep, w, w)
    if len(lines) % 2:
        raise GeometryError(f"odd number of self-crossings for {c}: numerical trouble")
    return len(lines) // 2


def intersection_number(rep: FuchsianRep, c1: Word, c2: Word) -> int:
    """Geometric intersection number of the two closed geodesics.

    For a class against itself this counts every double point twice, so it
    is 0 exactly for simple curves.
    """
    for c in (c1, c2):
        if W.is_trivial(c, rep.genus):
            raise CurveError(f"{c} is homotopically trivial")
    r1, k1 = W.root_of(c1, rep.genus)
    r2, k2 = W.root_of(c2, rep.genus)
    lines = crossing_lines(rep, recenter(rep, r1), recenter(rep, r2))
    return len(lines) * k1 * k2


def algebraic_intersection(rep: FuchsianRep, c1: Word, c2: Word) -> int:
    """Signed count of the crossings."""
    r1, k1 = W.root_of(c1, rep.genus)
    r2, k2 = W.root_of(c2, rep.genus)
    lines = crossing_lines(rep, recenter(rep, r1), recenter(rep, r2))
    return k1 * k2 * sum(c.sign for c in lines)


def symplectic_form(h1: Sequence[int], h2: Sequence[int]) -> int:
    """Algebraic intersection of homology classes in the a-basis.

    a_{2j-1} . a_{2j} = 1 and all other basis pairs are 0.
    """
    return sum(h1[2 * j] * h2[2 * j + 1] - h1[2 * j + 1] * h2[2 * j] for j in range(len(h1) // 2))


# ---------------------------------------------------------------------------
# curves on a surface (the base, or a finite cover)


@dataclass(frozen=True)
class CurveClass:
    """A closed geodesic on a surface covering the base.

    On the base (``cover`` omitted) this is just a geodesic class.  On a cover
    it is the lift of ``geodesic`` through the cosets in ``cycle``; ``degree``
    is how many times it wraps the base geodesic.
    """

    geodesic: GeodesicClass
    homology: tuple[int, ...]
    simple: bool | None = None
    cycle: tuple[int, ...] = (0,)

    @property
    def degree(self) -> int:
        return len(self.cycle)

    @property
    def length(self) -> float:
        return self.degree * self.geodesic.length

    @property
    def form(self) -> Word:
        return self.geodesic.form

    @property
    def start(self) -> int:
        return self.cycle[0]

    @property
    def key(self) -> tuple:
        return (W.word_key(self.form.letters), tuple(sorted(self.cycle)))

    def label(self) -> str:
        return str(self.form) if self.cycle == (0,) else f"{self.form} @{self.start}"

    def to_json(self) -> dict:
        d = {
            "form": str(self.form),
            "length": float(f"{self.length:.15g}"),
            "homology": list(self.homology),
        }
        if self.cycle != (0,):
            d["start_coset"] = self.start
            d["degree"] = self.degree
        return d


def curve_class(rep: FuchsianRep, w: Word, check_simple: bool = True) -> CurveClass:
    geo = geodesic_class(rep, recenter(rep, w))
    simple = None
    if check_simple:
        simple = not W.is_proper_power(w, rep.genus) and self_intersection_number(rep, w) == 0
    return CurveClass(geo, geo.homology, simple)


class Surface:
    """The base surface or a finite cover of it, with cached intersection data."""

    def __init__(self, rep: FuchsianRep, cover: FiniteCover | None = None):
        self.rep = rep
        self.cover = cover
        self._simple: dict[tuple, bool] = {}
        self._meet: dict[tuple, int] = {}

    @property
    def index(self) -> int:
        return 1 if self.cover is None else self.cover.index

    def lifts(self, geo: GeodesicClass, max_length: float | None = None) -> list[CurveClass]:
        """Closed lifts of a base class, one per cycle of its coset permutation."""
        if self.cover is None:
            if max_length is not None and geo.length > max_length + 1e-9:
                return []
            return [CurveClass(geo, geo.homology)]
        out = []
        for cyc in self.cover.cycles(geo.word):
            if max_length is not None and len(cyc) * geo.length > max_length + 1e-9:
                continue
            h = lift_homology(self.cover, geo.word.letters, cyc[0], len(cyc))
            out.append(CurveClass(geo, h, None, cyc))
        return out

    def lift_of(self, geo: GeodesicClass, start: int) -> CurveClass:
        if self.cover is None:
            return CurveClass(geo, geo.homology)
        cyc = orbit_of(self.cover, geo.word, start)
        h = lift_homology(self.cover, geo.word.letters, cyc[0], len(cyc))
        # canonical start: least coset of the cycle, rotated accordingly
        j = cyc.index(min(cyc))
        cyc = cyc[j:] + cyc[:j]
        h = lift_homology(self.cover, geo.word.letters, cyc[0], len(cyc))
        return CurveClass(geo, h, None, cyc)

    def _crossings(self, x: CurveClass, y: CurveClass) -> int:
        lines = crossing_lines(self.rep, x.geodesic.word, y.geodesic.word)
        if self.cover is None:
            return len(lines)
        target = set(y.cycle)
        g1 = x.geodesic.word.letters
        count = 0
        for line in lines:
            for j in range(x.degree):
                c = self.cover.walk(g1 * j + line.elem, x.start)
                if c in target:
                    count += 1
        return count

    def is_simple(self, x: CurveClass) -> bool:
        if x.key in self._simple:
            return self._simple[x.key]
        if W.is_proper_power(x.form, self.rep.genus):
            ok = False
        elif self._base_simple(x.geodesic):
            # lifts of simple curves are simple
            ok = True
        else:
            ok = self.cover is not None and self._crossings(x, x) == 0
        self._simple[x.key] = ok
        return ok

    def _base_simple(self, geo: GeodesicClass) -> bool:
        k = ("base", W.word_key(geo.form.letters))
        if k not in self._simple:
            self._simple[k] = len(crossing_lines(self.rep, geo.word, geo.word)) == 0
        return self._simple[k]

    def self_intersection(self, x: CurveClass) -> int:
        n = self._crossings(x, x)
        if n % 2:
            raise GeometryError("odd self-crossing count on the cover")
        return n // 2

    def intersection(self, x: CurveClass, y: CurveClass) -> int:
        if x.key == y.key:
            return 2 * self.self_intersection(x)
        k = (x.key, y.key)
        if k not in self._meet:
            inverse_pair = (W.conjugacy_form(x.form.inverse(), self.rep.genus) == y.form
                            and set(x.cycle) == set(y.cycle))
            if inverse_pair:
                # the same closed geodesic with opposite orientation
                n = max(1, self._crossings(x, y))
            else:
                n = self._crossings(x, y)
            self._meet[k] = n
            self._meet[(y.key, x.key)] = n
        return self._meet[k]

    def disjoint(self, x: CurveClass, y: CurveClass) -> bool:
        if x.key == y.key:
            return self.is_simple(x)
        return self.intersection(x, y) == 0


# ---------------------------------------------------------------------------
# disjoint partitions


@dataclass(frozen=True)
class DisjointPartition:
    """Pairwise disjoint simple closed geodesics with multiplicities."""

    entries: tuple[tuple[CurveClass, int], ...]
    homology: tuple[int, ...]
    total_length: float

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def sort_key(self) -> tuple:
        return (round(self.total_length, 9), self.size,
                tuple((c.key, n) for c, n in self.entries))

    def to_json(self) -> list[dict]:
        return [dict(c.to_json(), multiplicity=n) for c, n in self.entries]

    def describe(self) -> str:
        return " + ".join(f"{n}*[{c.label()}]" if n > 1 else f"[{c.label()}]" for c, n in self.entries)


def make_partition(entries: Sequence[tuple[CurveClass, int]]) -> DisjointPartition:
    merged: dict[tuple, list] = {}
    for c, n in entries:
        if n < 1:
            raise CurveError("multiplicities must be positive")
        if c.key in merged:
            merged[c.key][1] += n
        else:
            merged[c.key] = [c, n]
    items = sorted(((c, n) for c, n in merged.values()), key=lambda e: e[0].key)
    dim = len(items[0][0].homology) if items else 0
    h = tuple(sum(n * c.homology[i] for c, n in items) for i in range(dim))
    total = sum(n * c.length for c, n in items)
    return DisjointPartition(tuple(items), h, total)


def validate_partition(surface: Surface, p: DisjointPartition, h: Sequence[int] | None = None) -> list[str]:
    """Problems with ``p`` as a disjoint partition (empty list when valid)."""
    errs = []
    dim = len(p.homology)
    hsum = tuple(sum(n * c.homology[i] for c, n in p.entries) for i in range(dim))
    if hsum != p.homology:
        errs.append("homology does not match the entries")
    if h is not None and tuple(h) != p.homology:
        errs.append("partition represents a different class")
    total = sum(n * c.length for c, n in p.entries)
    if abs(total - p.total_length) > 1e-9:
        errs.append("total length does not match the entries")
    for c, _ in p.entries:
        if not surface.is_simple(c):
            errs.append(f"{c.label()} is not simple")
    for i, (c, _) in enumerate(p.entries):
        for d, _ in p.entries[i + 1:]:
            if not surface.disjoint(c, d):
                errs.append(f"{c.label()} meets {d.label()}")
    return errs


def partitions_equivalent(a: DisjointPartition, b: DisjointPartition) -> bool:
    """Same number of entries, entrywise freely homotopic with equal multiplicities."""
    if a.size != b.size:
        return False
    ka = sorted((c.key, n) for c, n in a.entries)
    kb = sorted((c.key, n) for c, n in b.entries)
    return ka == kb


@dataclass
class PartitionEquivClass:
    representative: DisjointPartition
    min_total_arclength: float


@dataclass
class PartitionSearch:
    partitions: list[DisjointPartition]
    cutoff: float
    completeness: str
    candidates: int = 0

    def __iter__(self):
        return iter(self.partitions)

    def __len__(self):
        return len(self.partitions)


def _candidate_curves(surface: Surface, classes: Sequence[GeodesicClass], cutoff: float
                      ) -> list[CurveClass]:
    out = []
    for geo in classes:
        if W.is_proper_power(geo.form, surface.rep.genus):
            continue
        out.extend(surface.lifts(geo, cutoff))
    out.sort(key=lambda c: (c.length, c.key))
    return out


def enumerate_partitions_below(
    rep: FuchsianRep,
    h: Sequence[int],
    cutoff: float,
    cover: FiniteCover | None = None,
    *,
    strict: bool = False,
    surface: Surface | None = None,
    exclude: Sequence[tuple] = (),
    max_entries: int | None = None,
) -> PartitionSearch:
    """Every disjoint partition of ``h`` with total length <= cutoff.

    With ``strict`` the bound is ``< cutoff - 1e-9``.  ``exclude`` lists
    entry-key tuples of partitions to leave out.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    surface = surface or Surface(rep, cover)
    h = tuple(int(x) for x in h)
    limit = cutoff - 1e-9 if strict else cutoff + 1e-9
    en = enumerate_short_classes(rep, cutoff)
    cands = _candidate_curves(surface, en.classes, limit)
    by_hom: dict[tuple, list[int]] = {}
    for i, c in enumerate(cands):
        by_hom.setdefault(c.homology, []).append(i)
    found: list[list[tuple[int, int]]] = []

    def finish(residual, budget, start, chosen):
        # one more entry with multiplicity n closes the partition
        for n in range(1, int(budget / cands[start].length) + 2 if start < len(cands) else 1):
            if any(r % n for r in residual):
                continue
            need = tuple(r // n for r in residual)
            for i in by_hom.get(need, ()):
                if i >= start and n * cands[i].length <= budget:
                    found.append(chosen + [(i, n)])

    def dfs(residual, budget, start, chosen):
        if start < len(cands):
            finish(residual, budget, start, chosen)
        if max_entries is not None and len(chosen) + 1 >= max_entries:
            return
        for i in range(start, len(cands)):
            c = cands[i]
            if c.length * 2 > budget + 1e-12:
                # room for this entry plus at least one later (no shorter) entry is gone
                break
            n = 1
            while n * c.length + cands[i].length <= budget + 1e-12:
                res = tuple(r - n * x for r, x in zip(residual, c.homology))
                dfs(res, budget - n * c.length, i + 1, chosen + [(i, n)])
                n += 1

    dfs(h, limit, 0, [])
    excluded = {tuple(e) for e in exclude}
    out = []
    seen = set()
    for combo in found:
        entries = [(cands[i], n) for i, n in combo]
        if all(x == 0 for x in h) and not entries:
            continue
        p = make_partition(entries)
        if p.homology != h:
            continue
        key = tuple((c.key, n) for c, n in p.entries)
        if key in seen or key in excluded:
            continue
        seen.add(key)
        if len({c.key for c, _ in p.entries}) != len(p.entries):
            continue
        if not all(surface.is_simple(c) for c, _ in p.entries):
            continue
        ok = True
        for a in range(len(p.entries)):
            for b in range(a + 1, len(p.entries)):
                if not surface.disjoint(p.entries[a][0], p.entries[b][0]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(p)
    out.sort(key=lambda p: p.sort_key)
    return PartitionSearch(out, cutoff, en.completeness, len(cands))


def minimal_disjoint_partition(
    rep: FuchsianRep,
    h: Sequence[int],
    length_hint: float,
    cover: FiniteCover | None = None,
    *,
    max_cutoff: float = 12.0,
) -> DisjointPartition | None:
    """Shortest disjoint partition of ``h``, doubling the search bound from the hint."""
    cutoff = max(length_hint, 1e-3)
    surface = Surface(rep, cover)
    while True:
        cutoff = min(cutoff, max_cutoff)
        res = enumerate_partitions_below(rep, h, cutoff, cover, surface=surface)
        if res.partitions:
            return res.partitions[0]
        if cutoff >= max_cutoff:
            return None
        cutoff *= 2


def partition_classes(parts: Sequence[DisjointPartition]) -> list[PartitionEquivClass]:
    out: list[PartitionEquivClass] = []
    for p in sorted(parts, key=lambda p: p.sort_key):
        for cls in out:
            if partitions_equivalent(cls.representative, p):
                cls.min_total_arclength = min(cls.min_total_arclength, p.total_length)
                break
        else:
            out.append(PartitionEquivClass(p, p.total_length))
    return out
