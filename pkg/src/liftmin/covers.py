"""Finite covers of the genus-g surface as coset tables.

A cover is the right action of the generators on the cosets ``H g`` of a
finite-index subgroup ``H``; coset 0 is ``H`` itself and walking a word
multiplies on the right.  Cosets are numbered by breadth-first search from 0
trying letters in the order a1, A1, a2, A2, ..., which makes every table and
transversal canonical.

Subgroups come from homomorphisms to finite abelian groups: either of the
base group (exponent-sum conditions) or of a cover's fundamental group via
its first homology (``extend_cover``).  Reidemeister-Schreier rewriting
gives the homology of a cover and of lifted curves.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Sequence

import numpy as np

from . import words as W
from .snf import smith_normal_form
from .words import Letters, SurfaceGroup, Word


class CoverError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SubgroupSpec:
    """How a subgroup was built; ``params`` must be JSON-serialisable."""

    kind: str
    params: dict = field(default_factory=dict)
    description: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params, "description": self.description}

    @classmethod
    def from_json(cls, d: dict) -> "SubgroupSpec":
        return cls(d["kind"], dict(d.get("params", {})), d.get("description", ""))

    def __eq__(self, other):
        return isinstance(other, SubgroupSpec) and self.to_json() == other.to_json()


def _letter_order(genus: int) -> list[int]:
    out = []
    for t in range(1, 2 * genus + 1):
        out += [t, -t]
    return out


def _bfs_cosets(genus: int, start: Hashable, step: Callable[[Hashable, int], Hashable],
                limit: int = 100_000):
    """Canonical coset numbering from an action on arbitrary hashable states."""
    ids = {start: 0}
    states = [start]
    words: list[Letters] = [()]
    queue = deque([start])
    order = _letter_order(genus)
    while queue:
        s = queue.popleft()
        for x in order:
            nxt = step(s, x)
            if nxt not in ids:
                if len(states) >= limit:
                    raise CoverError(f"more than {limit} cosets")
                ids[nxt] = len(states)
                states.append(nxt)
                words.append(words[ids[s]] + (x,))
                queue.append(nxt)
    perms = [[ids[step(s, t)] for s in states] for t in range(1, 2 * genus + 1)]
    return states, perms, words


class FiniteCover:
    """Coset table of a finite-index subgroup of the genus-g surface group."""

    def __init__(self, genus: int, perms: Sequence[Sequence[int]], transversal: Sequence[Letters],
                 spec: SubgroupSpec):
        self.group = SurfaceGroup(genus)
        self.genus = genus
        self.spec = spec
        self.perms = np.array(perms, dtype=np.int64).reshape(2 * genus, -1)
        self.index = self.perms.shape[1]
        self.transversal = tuple(tuple(w) for w in transversal)
        k = self.index
        for t, p in enumerate(self.perms, 1):
            if sorted(p.tolist()) != list(range(k)):
                raise CoverError(f"generator a{t} does not act as a permutation")
        inv = np.empty_like(self.perms)
        for t in range(2 * genus):
            inv[t, self.perms[t]] = np.arange(k)
        self.inverse_perms = inv
        self._act = {t: self.perms[t - 1] for t in range(1, 2 * genus + 1)}
        self._act.update({-t: self.inverse_perms[t - 1] for t in range(1, 2 * genus + 1)})
        self._check()

    def _check(self):
        k = self.index
        if len(self.transversal) != k:
            raise CoverError("transversal length differs from index")
        for c in range(k):
            if self.walk(self.transversal[c], 0) != c:
                raise CoverError(f"transversal word of coset {c} does not reach it")
        r = W.relator_letters(self.genus)
        for c in range(k):
            if self.walk(r, c) != c:
                raise CoverError("relator does not act trivially: not a cover of the surface")

    # -- walking

    def step(self, c: int, x: int) -> int:
        return int(self._act[x][c])

    def walk(self, w: Word | Sequence[int], start: int = 0) -> int:
        letters = w.letters if isinstance(w, Word) else w
        c = start
        for x in letters:
            c = int(self._act[x][c])
        return c

    def walk_all(self, w: Word | Sequence[int]) -> np.ndarray:
        """Permutation of all cosets induced by ``w``."""
        letters = w.letters if isinstance(w, Word) else w
        c = np.arange(self.index)
        for x in letters:
            c = self._act[x][c]
        return c

    def contains(self, w: Word | Sequence[int]) -> bool:
        return self.walk(w, 0) == 0

    def cycles(self, w: Word | Sequence[int]) -> list[tuple[int, ...]]:
        """Cycles of the permutation of ``w``, each starting at its least coset."""
        perm = self.walk_all(w)
        seen = np.zeros(self.index, dtype=bool)
        out = []
        for c in range(self.index):
            if seen[c]:
                continue
            cyc = []
            x = c
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = int(perm[x])
            out.append(tuple(cyc))
        return out

    def __repr__(self):
        return f"FiniteCover(genus={self.genus}, index={self.index}, kind={self.spec.kind!r})"

    # -- homology

    @cached_property
    def homology(self) -> "CoverHomology":
        return schreier_presentation(self)

    # -- serialization

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "genus": self.genus,
            "index": self.index,
            "permutations": self.perms.tolist(),
            "transversal": [W.format_word(w) for w in self.transversal],
        }

    @classmethod
    def from_json(cls, d: dict) -> "FiniteCover":
        cover = cls(
            int(d["genus"]),
            d["permutations"],
            [W.parse_word(s).letters for s in d["transversal"]],
            SubgroupSpec.from_json(d["spec"]),
        )
        if cover.index != d["index"]:
            raise CoverError("index field disagrees with permutations")
        return cover

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def same_table(self, other: "FiniteCover") -> bool:
        return (self.genus == other.genus and self.index == other.index
                and np.array_equal(self.perms, other.perms))


# ---------------------------------------------------------------------------
# abelian quotients of the base group


def _subgroup_elements(moduli: tuple[int, ...], gens: Sequence[Sequence[int]]) -> list[tuple]:
    zero = tuple(0 for _ in moduli)
    elems = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                s = tuple((a + b) % q for a, b, q in zip(e, g, moduli))
                if s not in elems:
                    elems.add(s)
                    nxt.append(s)
        frontier = nxt
    return sorted(elems)


def abelian_cover(genus: int, moduli: Sequence[int], images: Sequence[Sequence[int]],
                  subgroup: Sequence[Sequence[int]] = (), spec: SubgroupSpec | None = None
                  ) -> FiniteCover:
    """Preimage of ``subgroup`` under a_t -> images[t-1] in (+) Z/q_i."""
    moduli = tuple(int(q) for q in moduli)
    if any(q < 1 for q in moduli):
        raise CoverError("moduli must be positive")
    if len(images) != 2 * genus or any(len(v) != len(moduli) for v in images):
        raise CoverError(f"need {2 * genus} images with {len(moduli)} coordinates")
    imgs = [tuple(int(a) % q for a, q in zip(v, moduli)) for v in images]
    sub = _subgroup_elements(moduli, [tuple(int(a) % q for a, q in zip(s, moduli)) for s in subgroup])

    def canon(a):
        return min(tuple((x + y) % q for x, y, q in zip(a, s, moduli)) for s in sub)

    def step(a, x):
        v = imgs[abs(x) - 1]
        sign = 1 if x > 0 else -1
        return canon(tuple((p + sign * b) % q for p, b, q in zip(a, v, moduli)))

    start = canon(tuple(0 for _ in moduli))
    _, perms, words = _bfs_cosets(genus, start, step)
    if spec is None:
        spec = SubgroupSpec("custom", {"moduli": list(moduli), "images": [list(v) for v in imgs],
                                       "subgroup": [list(s) for s in subgroup]})
    return FiniteCover(genus, perms, words, spec)


def trivial_cover(group: SurfaceGroup) -> FiniteCover:
    g = group.genus
    return abelian_cover(g, (), [()] * (2 * g), spec=SubgroupSpec("trivial", {}, "whole group"))


def subgroup_lemma61(group: SurfaceGroup, m: int) -> FiniteCover:
    """Index-2 kernel of chi_{2m-1} + chi_{2m+1} mod 2."""
    g = group.genus
    if not isinstance(m, int) or not 1 <= m < g:
        raise CoverError(f"m must satisfy 1 <= m < {g}, got {m!r}")
    images = [[0] for _ in range(2 * g)]
    images[2 * m - 2] = [1]
    images[2 * m] = [1]
    spec = SubgroupSpec("lemma61", {"m": m},
                        f"chi_{2 * m - 1} + chi_{2 * m + 1} = 0 mod 2")
    return abelian_cover(g, (2,), images, spec=spec)


def subgroup_lemma63(group: SurfaceGroup, n1: int, n2: int,
                     phi1: Sequence[int] | None = None, phi2: Sequence[int] | None = None
                     ) -> FiniteCover:
    """{a : n1 | phi1(a), n2 | phi2(a), phi1(a)/n1 + phi2(a)/n2 even}.

    ``phi1``/``phi2`` are integer functionals on the generators, defaulting to
    the exponent sums chi_1 and chi_2.
    """
    g = group.genus
    for n in (n1, n2):
        if not isinstance(n, int) or n < 1:
            raise CoverError(f"n1, n2 must be positive integers, got {n!r}")
    phi1 = list(phi1) if phi1 is not None else [int(t == 0) for t in range(2 * g)]
    phi2 = list(phi2) if phi2 is not None else [int(t == 1) for t in range(2 * g)]
    images = [[phi1[t], phi2[t]] for t in range(2 * g)]
    spec = SubgroupSpec(
        "lemma63",
        {"n1": n1, "n2": n2, "phi1": phi1, "phi2": phi2,
         "expected_index": 2 * n1 * n2},
        f"n1={n1}, n2={n2}")
    return abelian_cover(g, (2 * n1, 2 * n2), images, [(n1, n2)], spec=spec)


def lemma63_member(w: Word, n1: int, n2: int, phi1=None, phi2=None, genus: int | None = None) -> bool:
    """Direct exponent-sum test for the subgroup of :func:`subgroup_lemma63`."""
    letters = w.letters
    g = genus or max((abs(x) for x in letters), default=2)
    g = max(g, 2)
    h = W.abelianize(letters, max(g, (max((abs(x) for x in letters), default=1) + 1) // 2))
    phi1 = phi1 or [int(t == 0) for t in range(len(h))]
    phi2 = phi2 or [int(t == 1) for t in range(len(h))]
    c1 = sum(a * b for a, b in zip(phi1, h))
    c2 = sum(a * b for a, b in zip(phi2, h))
    if c1 % n1 or c2 % n2:
        return False
    return (c1 // n1 + c2 // n2) % 2 == 0


def parity_cover(group: SurfaceGroup, functional: Sequence[int]) -> FiniteCover:
    """Kernel of a -> sum f_t chi_t(a) mod 2."""
    f = [int(x) % 2 for x in functional]
    if len(f) != group.rank or not any(f):
        raise CoverError("parity functional must be a nonzero vector of length 2g")
    spec = SubgroupSpec("parity", {"functional": f}, "kernel of a mod-2 exponent-sum functional")
    return abelian_cover(group.genus, (2,), [[x] for x in f], spec=spec)


def custom_cover(group: SurfaceGroup, moduli, images, subgroup=()) -> FiniteCover:
    return abelian_cover(group.genus, moduli, images, subgroup)


def intersect(c1: FiniteCover, c2: FiniteCover, description: str = "") -> FiniteCover:
    """Cover for the intersection of the two subgroups (fiber product)."""
    if c1.genus != c2.genus:
        raise CoverError("covers of different surfaces")
    a1, a2 = c1._act, c2._act

    def step(s, x):
        return (int(a1[x][s[0]]), int(a2[x][s[1]]))

    states, perms, words = _bfs_cosets(c1.genus, (0, 0), step)
    spec = SubgroupSpec("composite", {"parts": [c1.spec.to_json(), c2.spec.to_json()]},
                        description or "intersection of subgroups")
    out = FiniteCover(c1.genus, perms, words, spec)
    out.projections = (np.array([s[0] for s in states]), np.array([s[1] for s in states]))
    return out


def extend_cover(cover: FiniteCover, functionals: Sequence[Sequence[int]], moduli: Sequence[int],
                 subgroup: Sequence[Sequence[int]] = (), spec: SubgroupSpec | None = None
                 ) -> FiniteCover:
    """Subgroup of ``H = pi_1(cover)`` cut out by homology functionals.

    ``functionals[i]`` is an integer vector on H_1(cover) coordinates; the new
    subgroup is the preimage of ``subgroup`` under H -> H_1 -> (+) Z/q_i.  The
    result is again a cover of the base surface, with ``projection`` giving
    the coset of ``H`` under each new coset.
    """
    hom = cover.homology
    moduli = tuple(int(q) for q in moduli)
    fun = np.array(functionals, dtype=object).reshape(len(moduli), -1)
    if fun.shape[1] != hom.rank:
        raise CoverError(f"functionals must have length {hom.rank}")
    amap = np.array(hom.abelianization_map, dtype=object).reshape(hom.num_generators, hom.rank)
    values = {}
    for (c, t), col in hom.edge_index.items():
        values[(c, t)] = tuple(int(v) % q for v, q in zip(amap[col].dot(fun.T), moduli))
    zero = tuple(0 for _ in moduli)
    sub = _subgroup_elements(moduli, [tuple(int(a) % q for a, q in zip(s, moduli)) for s in subgroup])

    def canon(a):
        return min(tuple((x + y) % q for x, y, q in zip(a, s, moduli)) for s in sub)

    def step(s, x):
        c, a = s
        if x > 0:
            v = values.get((c, x), zero)
            return (cover.step(c, x), canon(tuple((p + b) % q for p, b, q in zip(a, v, moduli))))
        d = cover.step(c, x)
        v = values.get((d, -x), zero)
        return (d, canon(tuple((p - b) % q for p, b, q in zip(a, v, moduli))))

    states, perms, words = _bfs_cosets(cover.genus, (0, canon(zero)), step)
    if spec is None:
        spec = SubgroupSpec("extension", {"moduli": list(moduli),
                                          "functionals": [list(map(int, f)) for f in fun],
                                          "subgroup": [list(s) for s in subgroup]})
    out = FiniteCover(cover.genus, perms, words, spec)
    out.projections = (np.array([s[0] for s in states]),)
    return out


def projection_map(upper: FiniteCover, lower: FiniteCover) -> np.ndarray:
    """Coset of ``lower`` under each coset of ``upper`` (upper subgroup inside lower)."""
    out = np.array([lower.walk(w, 0) for w in upper.transversal])
    for t in range(1, 2 * upper.genus + 1):
        if not np.array_equal(out[upper.perms[t - 1]], lower.perms[t - 1][out]):
            raise CoverError("subgroup of the upper cover is not inside the lower one")
    return out


# ---------------------------------------------------------------------------
# Reidemeister-Schreier


@dataclass
class CoverHomology:
    """First homology of a cover from its Schreier presentation.

    Columns are the non-tree edges ``(c, t)`` (coset ``c``, generator
    ``a_t``); ``abelianization_map`` sends an edge-count vector to Z^(2g').
    """

    cover_genus: int
    rank: int
    edge_index: dict[tuple[int, int], int]
    subgroup_generators: list[Word]
    relation_matrix: list[list[int]]
    abelianization_map: list[list[int]]
    section: list[list[int]]
    pushforward: list[list[int]]
    genus: int
    _act: dict = field(repr=False, default_factory=dict)

    @property
    def num_generators(self) -> int:
        return len(self.subgroup_generators)

    def edge_vector(self, w: Word | Sequence[int], start: int) -> list[int]:
        letters = w.letters if isinstance(w, Word) else w
        vec = [0] * self.num_generators
        c = start
        for x in letters:
            if x > 0:
                col = self.edge_index.get((c, x))
                if col is not None:
                    vec[col] += 1
                c = int(self._act[x][c])
            else:
                d = int(self._act[x][c])
                col = self.edge_index.get((d, -x))
                if col is not None:
                    vec[col] -= 1
                c = d
        return vec

    def rewrite(self, w: Word | Sequence[int], start: int) -> tuple[int, ...]:
        """Signed Schreier-generator indices (1-based) met along the walk."""
        letters = w.letters if isinstance(w, Word) else w
        out = []
        c = start
        for x in letters:
            if x > 0:
                col = self.edge_index.get((c, x))
                if col is not None:
                    out.append(col + 1)
                c = int(self._act[x][c])
            else:
                d = int(self._act[x][c])
                col = self.edge_index.get((d, -x))
                if col is not None:
                    out.append(-(col + 1))
                c = d
        return tuple(out)

    def apply_map(self, vec: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.rank
        for i, v in enumerate(vec):
            if v:
                row = self.abelianization_map[i]
                for j in range(self.rank):
                    out[j] += v * row[j]
        return tuple(out)

    def push(self, h: Sequence[int]) -> tuple[int, ...]:
        """Image in base homology of a class given in cover coordinates."""
        out = [0] * (2 * self.genus)
        for i, v in enumerate(h):
            if v:
                for j in range(2 * self.genus):
                    out[j] += v * self.pushforward[i][j]
        return tuple(out)


def schreier_presentation(cover: FiniteCover) -> CoverHomology:
    g, k = cover.genus, cover.index
    # spanning tree = the BFS edges that discovered each coset
    tree = set()
    for c in range(1, k):
        word = cover.transversal[c]
        p = cover.walk(word[:-1], 0)
        x = word[-1]
        tree.add((p, x) if x > 0 else (c, -x))
    edge_index: dict[tuple[int, int], int] = {}
    gens: list[Word] = []
    for c in range(k):
        for t in range(1, 2 * g + 1):
            if (c, t) in tree:
                continue
            edge_index[(c, t)] = len(gens)
            d = cover.step(c, t)
            gens.append(Word(cover.transversal[c] + (t,) + W.inverse(cover.transversal[d])))
    n = len(gens)
    if n != k * 2 * g - (k - 1):
        raise CoverError("spanning tree has the wrong size")
    hom = CoverHomology(0, 0, edge_index, gens, [], [], [], [], g, cover._act)
    rel = W.relator_letters(g)
    rows = [hom.edge_vector(rel, c) for c in range(k)]
    snf = smith_normal_form(rows)
    r = snf.rank
    if snf.torsion:
        raise CoverError(f"cover homology has torsion {snf.torsion}: table is inconsistent")
    if r != k - 1:
        raise CoverError(f"relation matrix has rank {r}, expected {k - 1}")
    free = n - r
    g_cover = 1 + k * (g - 1)
    if free != 2 * g_cover:
        raise CoverError(f"H_1 has rank {free}, Euler characteristic predicts {2 * g_cover}")
    amap = [row[r:] for row in snf.V]
    section = snf.V_inv[r:]
    push_gen = [list(W.abelianize(w, g)) for w in gens]
    pushforward = [[sum(section[i][e] * push_gen[e][j] for e in range(n)) for j in range(2 * g)]
                   for i in range(free)]
    hom.cover_genus = g_cover
    hom.rank = free
    hom.relation_matrix = rows
    hom.abelianization_map = amap
    hom.section = section
    hom.pushforward = pushforward
    return hom


# ---------------------------------------------------------------------------
# lifting curves


@dataclass(frozen=True)
class LiftedCurve:
    """Closed lift of ``base_word`` through ``start_coset``."""

    base_word: Word
    start_coset: int
    degree: int
    lift_word: tuple[int, ...]
    lift_homology: tuple[int, ...]
    cycle: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "base_word": str(self.base_word),
            "start_coset": self.start_coset,
            "degree": self.degree,
            "lift_word": format_schreier(self.lift_word),
            "lift_homology": list(self.lift_homology),
            "cycle": list(self.cycle),
        }


def format_schreier(letters: Sequence[int]) -> str:
    if not letters:
        return "e"
    return " ".join(f"s{x}" if x > 0 else f"S{-x}" for x in letters)


def orbit_of(cover: FiniteCover, w: Word | Sequence[int], start: int) -> tuple[int, ...]:
    out = [start]
    c = cover.walk(w, start)
    while c != start:
        out.append(c)
        c = cover.walk(w, c)
    return tuple(out)


def lift_curve(cover: FiniteCover, w: Word, start: int = 0) -> LiftedCurve:
    if W.is_trivial(w, cover.genus):
        raise CoverError("cannot lift a homotopically trivial curve")
    if not 0 <= start < cover.index:
        raise CoverError(f"coset {start} out of range")
    cyc = orbit_of(cover, w, start)
    d = len(cyc)
    hom = cover.homology
    power = w.letters * d
    return LiftedCurve(w, start, d, hom.rewrite(power, start),
                       hom.apply_map(hom.edge_vector(power, start)), cyc)


def lift_homology(cover: FiniteCover, w: Sequence[int], start: int, degree: int) -> tuple[int, ...]:
    hom = cover.homology
    return hom.apply_map(hom.edge_vector(tuple(w) * degree, start))


def cover_length(cover: FiniteCover, rep, lifted: LiftedCurve) -> float:
    return lifted.degree * rep.translation_length(lifted.base_word)


def lifted_holonomy_length(cover: FiniteCover, rep, lifted: LiftedCurve) -> float:
    """Length of the lift read off the subgroup element t_j w^d t_j^-1."""
    t = cover.transversal[lifted.start_coset]
    elem = Word(t + lifted.base_word.letters * lifted.degree + W.inverse(t))
    if not cover.contains(elem):
        raise CoverError("lifted loop is not in the subgroup")
    return rep.translation_length(elem)


def subgroup_element_from_lift(cover: FiniteCover, lifted: LiftedCurve) -> Word:
    """Rewrite a Schreier-generator word back into base generators."""
    gens = cover.homology.subgroup_generators
    out: Letters = ()
    for s in lifted.lift_word:
        out = out + (gens[s - 1].letters if s > 0 else gens[-s - 1].inverse().letters)
    return Word(out)


def index_product_ok(covers: Sequence[FiniteCover], composite: FiniteCover) -> bool:
    return math.prod(c.index for c in covers) == composite.index


def iter_parity_functionals(rank: int):
    """Nonzero vectors of (Z/2)^rank, lighter ones first."""
    for weight in range(1, rank + 1):
        for support in itertools.combinations(range(rank), weight):
            yield tuple(int(i in support) for i in range(rank))
