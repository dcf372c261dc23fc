"""Fuchsian realisations of surface groups and closed-geodesic lengths.

All matrices live in SL(2, R) acting on the upper half-plane by Moebius
maps; the basepoint is ``i``.  Regular-polygon representations carry their
Dirichlet domain (side-pairing words and circumradius), which lets
:class:`OrbitBall` list every group element moving ``i`` less than a given
distance.  That ball backs class enumeration, conjugacy tests and
intersection counting.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import words as W
from .words import Letters, Word

log = logging.getLogger(__name__)

DET_TOL = 1e-12
RELATOR_TOL = 1e-9
#: |trace| this close to 2 is treated as a broken representation.
PARABOLIC_TOL = 1e-6

_CAYLEY = np.array([[1j, 1j], [-1, 1]])
_CAYLEY_INV = np.linalg.inv(_CAYLEY)


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polygon construction (disk model, converted to the half-plane)


def _disk_to_uhp(m: np.ndarray) -> np.ndarray:
    x = _CAYLEY @ m @ _CAYLEY_INV
    x = x / np.sqrt(np.linalg.det(x))
    if np.max(np.abs(x.imag)) > 1e-9 * max(1.0, np.max(np.abs(x.real))):
        raise GeometryError("Cayley transform did not give a real matrix")
    return _normalize(x.real)


def _normalize(m: np.ndarray) -> np.ndarray:
    m = m / math.sqrt(abs(np.linalg.det(m)))
    if m[0, 0] < 0 or (m[0, 0] == 0 and m[0, 1] < 0):
        m = -m
    return m


def _geodesic_circle(p: complex, q: complex) -> tuple[complex, float]:
    """Euclidean circle orthogonal to the unit circle through ``p`` and ``q``."""
    a = np.array([[p.real, p.imag], [q.real, q.imag]])
    b = np.array([(abs(p) ** 2 + 1) / 2, (abs(q) ** 2 + 1) / 2])
    cx, cy = np.linalg.solve(a, b)
    c = complex(cx, cy)
    return c, math.sqrt(abs(c) ** 2 - 1)


def _side_pairing(vertices: list[complex], sigma: int, tau: int) -> np.ndarray:
    """Orientation-preserving map taking side ``sigma`` onto side ``tau``.

    Reflection in the diameter bisecting the two sides, then inversion in
    side ``tau``; the polygon lands on its neighbour across ``tau``.
    """
    n = len(vertices)
    theta = math.pi * (sigma + tau + 1) / n
    refl = np.array([[np.exp(1j * theta), 0], [0, np.exp(-1j * theta)]])
    c, r = _geodesic_circle(vertices[tau], vertices[(tau + 1) % n])
    inv = np.array([[c, r * r - abs(c) ** 2], [1, -np.conj(c)]])
    m = inv @ np.conj(refl)
    return m / np.sqrt(np.linalg.det(m))


def _regular_polygon(n: int) -> tuple[list[complex], float]:
    """Vertices of the regular n-gon with interior angle 2 pi / n, circumradius."""
    cosh_r = 1 / math.tan(math.pi / n) / math.tan(math.pi / n)
    radius = math.acosh(cosh_r)
    rho = math.tanh(radius / 2)
    return [rho * np.exp(2j * math.pi * k / n) for k in range(n)], radius


# Bolza surface: opposite sides of the regular octagon are glued by x_0..x_3.
# These four systoles satisfy [a1,a2][a3,a4] = 1 and generate the group:
#   a1 = x0, a2 = x3 x2^-1 x1, a3 = x3 x2^-1, a4 = x1 x2^-1
# and conversely the side pairings are the words below.
_BOLZA_SIDE_WORDS: tuple[Letters, ...] = ((1,), (-3, 2), (-4, -3, 2), (3, -4, -3, 2))


def _bolza_generators() -> tuple[np.ndarray, list[Letters], float]:
    verts, radius = _regular_polygon(8)
    x = [_side_pairing(verts, k, (k + 4) % 8) for k in range(4)]
    xi = [np.linalg.inv(m) for m in x]
    a = [x[0], x[3] @ xi[2] @ x[1], x[3] @ xi[2], x[1] @ xi[2]]
    gens = np.array([_disk_to_uhp(m) for m in a])
    pairings = [_disk_to_uhp(m) for m in x]
    side_words = []
    for w, target in zip(_BOLZA_SIDE_WORDS, pairings):
        got = _product(gens, w)
        if not _same_isometry(got, target, 1e-9):
            raise GeometryError("Bolza side-pairing words do not match")
        side_words += [w, W.inverse(w)]
    return gens, side_words, radius


def _commutator_polygon_generators(genus: int) -> tuple[np.ndarray, list[Letters], float]:
    n = 4 * genus
    verts, radius = _regular_polygon(n)
    gens = []
    for j in range(genus):
        s = 4 * j
        gens.append(np.linalg.inv(_side_pairing(verts, s, s + 2)))
        gens.append(_side_pairing(verts, s + 1, s + 3))
    gens = np.array([_disk_to_uhp(m) for m in gens])
    side_words = []
    for t in range(1, 2 * genus + 1):
        side_words += [(t,), (-t,)]
    return gens, side_words, radius


# ---------------------------------------------------------------------------
# representation


def _product(gens: np.ndarray, letters: Sequence[int]) -> np.ndarray:
    m = np.eye(2)
    inv = None
    for x in letters:
        if x > 0:
            m = m @ gens[x - 1]
        else:
            if inv is None:
                inv = _inverses(gens)
            m = m @ inv[-x - 1]
    return m


def _inverses(gens: np.ndarray) -> np.ndarray:
    out = np.empty_like(gens)
    out[:, 0, 0] = gens[:, 1, 1]
    out[:, 1, 1] = gens[:, 0, 0]
    out[:, 0, 1] = -gens[:, 0, 1]
    out[:, 1, 0] = -gens[:, 1, 0]
    return out


def _same_isometry(m1: np.ndarray, m2: np.ndarray, tol: float) -> bool:
    return bool(np.allclose(m1, m2, atol=tol) or np.allclose(m1, -m2, atol=tol))


@dataclass(frozen=True, eq=False)
class FuchsianRep:
    """Images of a_1..a_2g in SL(2, R).

    ``side_words``/``domain_radius`` describe a Dirichlet domain centred at
    ``i`` whose side pairings are the given words; they are ``None`` for
    representations read from a file.
    """

    genus: int
    generators: np.ndarray
    metric_id: str
    model: str = "upper-half-plane"
    side_words: tuple[Letters, ...] | None = None
    domain_radius: float | None = None
    _balls: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        gens = np.asarray(self.generators, dtype=float)
        if gens.shape != (2 * self.genus, 2, 2):
            raise GeometryError(f"expected {2 * self.genus} 2x2 matrices, got shape {gens.shape}")
        dets = np.linalg.det(gens)
        if np.max(np.abs(dets - 1)) > DET_TOL * 1e3:
            raise GeometryError(f"generator determinant off by {np.max(np.abs(dets - 1)):.3g}")
        gens = np.array([g / math.sqrt(d) for g, d in zip(gens, dets)])
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_inv", _inverses(gens))
        ld = gens.astype(np.longdouble)
        object.__setattr__(self, "_gens_ld", np.concatenate([ld, _inverses(ld)]))
        traces = np.abs(gens[:, 0, 0] + gens[:, 1, 1])
        if np.any(traces <= 2 + PARABOLIC_TOL):
            raise GeometryError("every generator must be hyperbolic (|trace| > 2)")
        res = self.relator_residual()
        if res > RELATOR_TOL:
            raise GeometryError(f"relator holonomy is {res:.3g} away from +-I")

    @property
    def group(self) -> W.SurfaceGroup:
        return W.SurfaceGroup(self.genus)

    @property
    def has_domain(self) -> bool:
        return self.side_words is not None

    def relator_residual(self) -> float:
        m = self.holonomy(Word(W.relator_letters(self.genus)))
        return float(min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2)))))

    def holonomy(self, w: Word | Sequence[int]) -> np.ndarray:
        letters = w.letters if isinstance(w, Word) else tuple(w)
        m = np.eye(2)
        for x in letters:
            t = abs(x)
            if t < 1 or t > 2 * self.genus:
                raise IndexError(f"generator index {t} exceeds {2 * self.genus}")
            m = m @ (self.generators[t - 1] if x > 0 else self._inv[t - 1])
        return m

    def trace(self, w: Word) -> float:
        # extended precision: conjugated words have large entries but a
        # moderate trace, so float64 products lose digits to cancellation
        letters = w.letters if isinstance(w, Word) else tuple(w)
        gens = self._gens_ld
        m = np.eye(2, dtype=np.longdouble)
        for x in letters:
            t = abs(x)
            if t < 1 or t > 2 * self.genus:
                raise IndexError(f"generator index {t} exceeds {2 * self.genus}")
            m = m @ gens[t - 1 if x > 0 else 2 * self.genus + t - 1]
        return float(m[0, 0] + m[1, 1])

    def translation_length(self, w: Word) -> float:
        if W.is_trivial(w, self.genus):
            raise GeometryError(f"{w} is homotopically trivial; it has no closed geodesic")
        return length_from_trace(self.trace(w))

    def axis_endpoints(self, w: Word) -> tuple[float, float]:
        """(repelling, attracting) fixed points on the real line (inf allowed)."""
        return axis_endpoints(self.holonomy(w))

    def ensure_domain(self) -> bool:
        """Attach a certified Dirichlet domain if none is known; True on success."""
        if self.side_words is None and not self._balls.get("domain-failed"):
            try:
                sides, big_r = dirichlet_domain(self)
            except GeometryError as exc:
                log.warning("%s; falling back to a generator search", exc)
                self._balls["domain-failed"] = True
            else:
                object.__setattr__(self, "side_words", sides)
                object.__setattr__(self, "domain_radius", big_r)
        return self.has_domain

    @property
    def effective_radius(self) -> float:
        """Domain radius when known, else the largest generator displacement."""
        if self.ensure_domain():
            return self.domain_radius
        sq = np.einsum("nij,nij->n", self.generators, self.generators)
        return float(np.max(np.arccosh(np.maximum(sq / 2, 1.0))))

    def ball(self, radius: float, max_depth: int | None = None) -> "OrbitBall":
        """All elements g with d(i, g i) <= radius.

        Exact for representations with a Dirichlet domain, heuristic
        otherwise (see :class:`OrbitBall`).
        """
        self.ensure_domain()
        for r, b in self._balls.items():
            if isinstance(r, float) and r >= radius - 1e-12 and (b.exact or not b.truncated):
                return b
        b = OrbitBall(self, radius, max_depth=max_depth)
        failed = self._balls.get("domain-failed")
        self._balls.clear()
        if failed:
            self._balls["domain-failed"] = True
        self._balls[float(radius)] = b
        return b

    def to_matrix_text(self) -> str:
        lines = [" ".join(repr(float(v)) for v in g.ravel()) for g in self.generators]
        return "\n".join(lines) + "\n"


def length_from_trace(tr: float) -> float:
    a = abs(tr)
    if a <= 2 + PARABOLIC_TOL:
        raise GeometryError(f"|trace| = {a:.12g} is not hyperbolic; representation is broken")
    return 2 * math.acosh(a / 2)


def axis_endpoints(m: np.ndarray) -> tuple[float, float]:
    a, b, c, d = (float(v) for v in m.ravel())
    tr = a + d
    if abs(tr) <= 2 + PARABOLIC_TOL:
        raise GeometryError("non-hyperbolic element has no axis")
    if tr < 0:
        a, b, c, d = -a, -b, -c, -d
        tr = -tr
    disc = math.sqrt(tr * tr - 4)
    if abs(c) <= 1e-13 * (abs(a) + abs(b) + abs(d)):
        # z -> (a z + b)/d: fixed points b/(d - a) and infinity
        fin = b / (d - a)
        return (fin, math.inf) if a > d else (math.inf, fin)
    # roots of c z^2 + (d - a) z - b without cancellation
    big = (a - d) + math.copysign(disc, a - d)
    p = big / (2 * c)
    q = -2 * b / big
    # derivative at the fixed point x is 1/(c x + d)^2; attracting when < 1
    att, rep = (p, q) if abs(c * p + d) > 1 else (q, p)
    return rep, att


def mobius(m: np.ndarray, x: float) -> float:
    a, b, c, d = (float(v) for v in m.ravel())
    if math.isinf(x):
        return math.inf if c == 0 else a / c
    den = c * x + d
    return math.inf if den == 0 else (a * x + b) / den


def build_regular_polygon_rep(genus: int, gluing: str | None = None) -> FuchsianRep:
    """Regular 4g-gon with angles 2 pi / 4g.

    For genus 2 the default is the Bolza surface (opposite sides glued),
    expressed in a basis of four systoles satisfying the commutator relator.
    ``gluing="commutator"`` glues sides ``4j+k`` and ``4j+k+2`` instead, which
    for genus >= 3 is the only option.
    """
    if not isinstance(genus, int) or genus < 2:
        raise GeometryError(f"genus must be >= 2, got {genus!r}")
    if gluing is None:
        gluing = "bolza" if genus == 2 else "commutator"
    if gluing == "bolza":
        if genus != 2:
            raise GeometryError("the Bolza gluing exists only in genus 2")
        gens, sides, radius = _bolza_generators()
        metric_id = "bolza"
    elif gluing == "commutator":
        gens, sides, radius = _commutator_polygon_generators(genus)
        metric_id = f"regular-{4 * genus}gon-commutator"
    else:
        raise GeometryError(f"unknown gluing {gluing!r}")
    return FuchsianRep(genus, gens, metric_id, side_words=tuple(sides), domain_radius=radius)


def read_matrix_file(path: str | Path, metric_id: str | None = None) -> FuchsianRep:
    """One matrix per line, four numbers row-major; ``#`` starts a comment."""
    path = Path(path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 4:
                raise GeometryError(f"{path}:{lineno}: expected 4 numbers, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if len(rows) < 4 or len(rows) % 2:
        raise GeometryError(f"{path}: need 2g >= 4 matrices, got {len(rows)}")
    gens = np.array(rows).reshape(-1, 2, 2)
    rep = FuchsianRep(len(rows) // 2, gens, metric_id or f"file:{path.name}")
    return with_dirichlet_domain(rep)


# ---------------------------------------------------------------------------
# Dirichlet domains of arbitrary representations


def _generator_orbit(rep: FuchsianRep, radius: float, slack: float) -> tuple[np.ndarray, list[Letters]]:
    """Elements within ``radius`` of i found by generator steps, pruned at
    ``radius + slack``.  Not guaranteed complete; callers verify."""
    g2 = 2 * rep.genus
    moves = [(t,) for t in range(1, g2 + 1)] + [(-t,) for t in range(1, g2 + 1)]
    steps = np.array([rep.holonomy(w) for w in moves])
    limit = 2 * math.cosh(radius + slack)
    seen = set(_disk_keys(np.eye(2)[None]).tolist())
    frontier, fwords = np.eye(2)[None], [()]
    mats, words = [], []
    while len(frontier):
        cand = np.einsum("nij,sjk->nsik", frontier, steps).reshape(-1, 2, 2)
        keep = np.nonzero(np.einsum("nij,nij->n", cand, cand) <= limit)[0]
        keys = _disk_keys(cand[keep])
        nxt, nwords = [], []
        for j, k in zip(keep, keys.tolist()):
            if k in seen:
                continue
            seen.add(k)
            nxt.append(cand[j])
            nwords.append(fwords[j // len(moves)] + moves[j % len(moves)])
        frontier = np.array(nxt).reshape(-1, 2, 2)
        fwords = nwords
        mats += nxt
        words += nwords
    mats = np.array(mats).reshape(-1, 2, 2)
    sq = np.einsum("nij,nij->n", mats, mats)
    inside = np.nonzero(sq <= 2 * math.cosh(radius) * (1 + 1e-12))[0]
    return mats[inside], [W.free_reduce(words[i]) for i in inside]


def _clip(poly: list[np.ndarray], u: np.ndarray, c: float) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of a convex polygon to {x : x.u <= c}."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = p @ u - c, q @ u - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + (q - p) * (fp / (fp - fq)))
    return out


def _poincare_angle(v: complex, a: complex, b: complex) -> float:
    # move v to 0; geodesics through 0 are diameters
    f = lambda z: (z - v) / (1 - np.conj(v) * z)  # noqa: E731
    pa, pb = f(a), f(b)
    ang = abs(np.angle(pb / pa))
    return float(ang)


def dirichlet_domain(rep: FuchsianRep, max_rounds: int = 6) -> tuple[tuple[Letters, ...], float]:
    """Side-pairing words and circumradius of the Dirichlet domain at i.

    Orbit points g i become half-planes {x . u_g <= tanh(d_g / 2)} in the
    Klein model centred at i.  The clipped polygon contains the true domain;
    it is accepted once its Gauss-Bonnet area equals 4 pi (g - 1), which
    forces equality, and every orbit point within twice its circumradius has
    been used.
    """
    sq = np.einsum("nij,nij->n", rep.generators, rep.generators)
    slack = float(np.max(np.arccosh(np.maximum(sq / 2, 1.0))))
    radius = slack
    target = 4 * math.pi * (rep.genus - 1)
    for _ in range(max_rounds):
        mats, words = _generator_orbit(rep, radius, slack)
        a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
        z = (a * 1j + b) / (c * 1j + d)
        disk = (z - 1j) / (z + 1j)
        cosh_d = np.einsum("nij,nij->n", mats, mats) / 2
        moved = cosh_d > 1 + 1e-9
        disk, cosh_d = disk[moved], cosh_d[moved]
        words = [w for w, m in zip(words, moved) if m]
        dist = np.arccosh(cosh_d)
        poly = [np.array(v, dtype=float) for v in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
        owner: list[int] = []
        for j in np.argsort(dist):
            u = np.array([disk[j].real, disk[j].imag])
            u /= np.linalg.norm(u)
            poly = _clip(poly, u, math.tanh(dist[j] / 2))
        # bisectors meeting at a vertex leave near-duplicate corners
        merged: list[np.ndarray] = []
        for v in poly:
            if not merged or np.linalg.norm(v - merged[-1]) > 1e-10:
                merged.append(v)
        while len(merged) > 1 and np.linalg.norm(merged[0] - merged[-1]) <= 1e-10:
            merged.pop()
        klein = np.array(merged)
        kr = np.linalg.norm(klein, axis=1)
        if np.max(kr) >= 1 - 1e-12:
            radius *= 2
            continue
        big_r = float(np.max(np.arctanh(kr)))
        pts = [complex(*v) / (1 + math.sqrt(1 - float(v @ v))) for v in klein]
        n = len(pts)
        angles = sum(_poincare_angle(pts[i], pts[i - 1], pts[(i + 1) % n]) for i in range(n))
        area = (n - 2) * math.pi - angles
        if abs(area - target) > 1e-6 or 2 * big_r > radius:
            radius = max(2 * big_r + 1e-3, radius * 1.5)
            continue
        # sides: the half-plane whose boundary carries each edge
        dirs = np.stack([disk.real, disk.imag], axis=1) / np.abs(disk)[:, None]
        offs = np.tanh(dist / 2)
        for i in range(n):
            mid = (klein[i] + klein[(i + 1) % n]) / 2
            owner.append(int(np.argmin(np.abs(dirs @ mid - offs))))
        sides = tuple(dict.fromkeys(tuple(words[j]) for j in owner))
        return sides, big_r
    raise GeometryError("could not certify a Dirichlet domain for this representation")


def with_dirichlet_domain(rep: FuchsianRep) -> FuchsianRep:
    if rep.has_domain:
        return rep
    sides, big_r = dirichlet_domain(rep)
    return FuchsianRep(rep.genus, rep.generators, rep.metric_id, rep.model, sides, big_r)


def write_matrix_file(rep: FuchsianRep, path: str | Path) -> None:
    Path(path).write_text(rep.to_matrix_text())


# ---------------------------------------------------------------------------
# orbit ball


def _disk_keys(mats: np.ndarray) -> np.ndarray:
    """Integer key of the orbit point g(i), via its disk coordinate."""
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    z = (a * 1j + b) / (c * 1j + d)
    w = (z - 1j) / (z + 1j)
    scale = float(2 ** 31)
    xi = np.round(w.real * scale).astype(np.int64)
    yi = np.round(w.imag * scale).astype(np.int64)
    return xi * (2 ** 32) + yi


class OrbitBall:
    """Group elements g with d(i, g i) <= radius, sorted by that distance.

    Breadth-first search over tiles of the Dirichlet domain.  For a Dirichlet
    domain the geodesic from ``i`` to ``g i`` enters ``gD`` through a face
    shared with a tile at most as far away, so restricting the search to the
    ball never disconnects it.

    Without a domain the search steps by the generators and keeps elements up
    to ``radius + slack`` so that paths may wander outside the ball; this is
    only a heuristic, and ``exact`` is False.  ``max_depth`` caps the number
    of steps, and ``truncated`` records whether the cap was hit.
    """

    def __init__(self, rep: FuchsianRep, radius: float, max_depth: int | None = None):
        self.rep = rep
        self.radius = radius
        self.exact = rep.has_domain
        if self.exact:
            self.step_words = tuple(rep.side_words)
            reach = radius
        else:
            g2 = 2 * rep.genus
            self.step_words = tuple((t,) for t in range(1, g2 + 1)) + tuple((-t,) for t in range(1, g2 + 1))
            reach = radius + rep.effective_radius
        steps = np.array([rep.holonomy(w) for w in self.step_words])
        limit = 2 * math.cosh(reach) + 1e-9 * math.cosh(reach)
        mats = [np.eye(2)[None]]
        parents = [np.array([-1])]
        stepidx = [np.array([-1])]
        seen = np.array(sorted(_disk_keys(mats[0])), dtype=np.int64)
        frontier = mats[0]
        frontier_ids = np.array([0])
        total = 1
        depth = 0
        self.truncated = False
        while len(frontier):
            if max_depth is not None and depth >= max_depth:
                self.truncated = True
                break
            depth += 1
            cand = np.einsum("nij,sjk->nsik", frontier, steps).reshape(-1, 2, 2)
            par = np.repeat(frontier_ids, len(steps))
            stp = np.tile(np.arange(len(steps)), len(frontier))
            sq = np.einsum("nij,nij->n", cand, cand)
            keep = sq <= limit
            cand, par, stp = cand[keep], par[keep], stp[keep]
            keys = _disk_keys(cand)
            keys, first = np.unique(keys, return_index=True)
            cand, par, stp = cand[first], par[first], stp[first]
            pos = np.searchsorted(seen, keys)
            pos = np.minimum(pos, len(seen) - 1)
            new = seen[pos] != keys
            cand, par, stp, keys = cand[new], par[new], stp[new], keys[new]
            if not len(cand):
                break
            seen = np.union1d(seen, keys)
            ids = np.arange(total, total + len(cand))
            total += len(cand)
            mats.append(cand)
            parents.append(par)
            stepidx.append(stp)
            frontier, frontier_ids = cand, ids
        self.mats = np.concatenate(mats)
        self.parent = np.concatenate(parents)
        self.step = np.concatenate(stepidx)
        sq = np.einsum("nij,nij->n", self.mats, self.mats)
        self.cosh_dist = np.maximum(sq / 2, 1.0)
        self.order = np.argsort(self.cosh_dist, kind="stable")
        self._sorted_cosh = self.cosh_dist[self.order]
        self._words: dict[int, Letters] = {0: ()}
        tr = np.abs(self.mats[:, 0, 0] + self.mats[:, 1, 1])
        self.abs_trace = tr
        log.debug("orbit ball r=%.3f: %d elements", radius, len(self.mats))

    def __len__(self) -> int:
        return len(self.mats)

    def within(self, radius: float) -> np.ndarray:
        """Indices of elements with d(i, g i) <= radius."""
        n = np.searchsorted(self._sorted_cosh, math.cosh(radius) * (1 + 1e-12), side="right")
        return self.order[:n]

    def word(self, idx: int) -> Letters:
        idx = int(idx)
        chain = []
        while idx not in self._words:
            chain.append(idx)
            idx = int(self.parent[idx])
        w = self._words[idx]
        for i in reversed(chain):
            w = W.free_reduce(w + self.step_words[self.step[i]])
            self._words[i] = w
        return w


# ---------------------------------------------------------------------------
# geodesic classes


def axis_distance(cosh_d: np.ndarray | float, abs_trace: np.ndarray | float):
    """Distance from ``i`` to the axis of g, from cosh d(i, g i) and |tr g|.

    Uses sinh(d/2) = cosh(delta) sinh(l/2).
    """
    sinh_half_d = np.sqrt(np.maximum((np.asarray(cosh_d) - 1) / 2, 0.0))
    sinh_half_l = np.sqrt(np.maximum(np.asarray(abs_trace) ** 2 / 4 - 1, 1e-300))
    return np.arccosh(np.maximum(sinh_half_d / sinh_half_l, 1.0))


@dataclass(frozen=True)
class GeodesicClass:
    """An oriented free homotopy class of closed curves and its geodesic.

    ``form`` is the canonical cyclic word; ``word`` is a representative whose
    axis passes close to the basepoint and is what geometric routines use.
    """

    form: Word
    length: float
    trace: float
    homology: tuple[int, ...]
    word: Word
    axis_distance: float = 0.0

    @property
    def key(self) -> tuple:
        return (round(self.length, 9), W.word_key(self.form.letters))

    def to_json(self) -> dict:
        return {
            "form": str(self.form),
            "length": float(f"{self.length:.15g}"),
            "trace": float(f"{self.trace:.15g}"),
            "homology": list(self.homology),
            "word": str(self.word),
        }


def geodesic_class(rep: FuchsianRep, w: Word) -> GeodesicClass:
    m = rep.holonomy(w)
    tr = abs(float(m[0, 0] + m[1, 1]))
    ln = length_from_trace(tr)
    cd = float(np.sum(m * m) / 2)
    return GeodesicClass(
        form=W.conjugacy_form(w, rep.genus),
        length=ln,
        trace=tr,
        homology=W.abelianize(w, rep.genus),
        word=w,
        axis_distance=float(axis_distance(cd, tr)),
    )


def axis_normalizer(m: np.ndarray) -> np.ndarray:
    """SL2 matrix sending the repelling point to 0 and the attracting one to infinity."""
    rep, att = axis_endpoints(m)
    if math.isinf(att):
        s = np.array([[1.0, -rep], [0.0, 1.0]])
    elif math.isinf(rep):
        s = np.array([[0.0, -1.0], [1.0, -att]])
    else:
        s = np.array([[1.0, -rep], [1.0, -att]])
    det = np.linalg.det(s)
    if det < 0:
        s[0] = -s[0]
        det = -det
    return s / math.sqrt(det)


def axis_foot(m: np.ndarray) -> complex:
    """Point of the axis of ``m`` closest to i."""
    s = axis_normalizer(m)
    p = _apply(s, 1j)
    return _apply(np.linalg.inv(s), 1j * abs(p))


def reduce_point(rep: FuchsianRep, z: complex, max_steps: int = 10_000) -> tuple[Letters, complex]:
    """(g, z0) with z = g z0 and z0 in the Dirichlet domain at i.

    Greedy: apply whichever side pairing brings the point closest to i until
    none helps.
    """
    if not rep.ensure_domain():
        raise GeometryError("point reduction needs a Dirichlet domain")
    sides = [np.asarray(rep.holonomy(w)) for w in rep.side_words]
    g: Letters = ()
    for _ in range(max_steps):
        best, arg = _cosh_to_i(z), None
        for k, s in enumerate(sides):
            y = _apply(s, z)
            cd = _cosh_to_i(y)
            if cd < best * (1 - 1e-13):
                best, arg = cd, (k, y)
        if arg is None:
            return W.free_reduce(g), z
        k, z = arg
        # z_new = s z  so  z_old = s^-1 z_new
        g = g + W.inverse(rep.side_words[k])
    raise GeometryError("point reduction did not terminate")


def _apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _cosh_to_i(z: complex) -> float:
    return 1 + abs(z - 1j) ** 2 / (2 * z.imag)


def recenter_word(rep: FuchsianRep, w: Word) -> tuple[Word, Word]:
    """(u, w') with w' = u w u^-1 and the axis of w' within the domain radius of i."""
    m = rep.holonomy(w)
    foot = axis_foot(m)
    g, _ = reduce_point(rep, foot)
    u = Word(W.inverse(g))
    return u, w.conjugate(u)


#: orbit balls beyond this radius are too large to search
MAX_CONJUGATOR_RADIUS = 15.0


def conjugator(rep: FuchsianRep, w1: Word, w2: Word) -> Word | None:
    """A word u with u w1 u^-1 = w2 in the group, or None.

    Both words are first conjugated so their axes pass within the domain
    radius R of i; a conjugator then moves i by at most
    R + arccosh(cosh R cosh(l / 2)), so searching that orbit ball is exact.
    """
    m1, m2 = rep.holonomy(w1), rep.holonomy(w2)
    t1, t2 = abs(np.trace(m1)), abs(np.trace(m2))
    if abs(t1 - t2) > 1e-7 * max(1.0, t1):
        return None
    if W.abelianize(w1, rep.genus) != W.abelianize(w2, rep.genus):
        return None
    u1, v1 = recenter_word(rep, w1)
    u2, v2 = recenter_word(rep, w2)
    m1, m2 = rep.holonomy(v1), rep.holonomy(v2)
    ln = length_from_trace(t1)
    d1 = float(axis_distance(np.sum(m1 * m1) / 2, t1))
    d2 = float(axis_distance(np.sum(m2 * m2) / 2, t2))
    radius = d1 + math.acosh(math.cosh(d2) * math.cosh(ln / 2)) + 1e-6
    if radius > MAX_CONJUGATOR_RADIUS:
        raise GeometryError(f"class of length {ln:.3g} is too long for the conjugator search")
    ball = rep.ball(radius)
    idx = ball.within(radius)
    u = ball.mats[idx]
    ui = _inverses(u)
    conj = u @ m1[None] @ ui
    tol = 1e-7 * max(1.0, float(np.max(np.abs(m2))))
    hit = np.all(np.abs(conj - m2[None]) <= tol, axis=(1, 2)) | np.all(
        np.abs(conj + m2[None]) <= tol, axis=(1, 2)
    )
    found = np.nonzero(hit)[0]
    if not len(found):
        return None
    # v2 = x v1 x^-1 with v_i = u_i w_i u_i^-1, so w2 = (u2^-1 x u1) w1 (...)^-1
    x = Word(ball.word(idx[found[0]]))
    return Word(u2.inverse().letters + x.letters + u1.letters)


def are_conjugate(rep: FuchsianRep, w1: Word, w2: Word) -> bool:
    if W.conjugacy_form(w1, rep.genus) == W.conjugacy_form(w2, rep.genus):
        return True
    return conjugator(rep, w1, w2) is not None


@dataclass
class ClassEnumeration:
    """Result of :func:`enumerate_short_classes`.

    ``completeness`` is ``"exhausted"`` when the orbit-ball argument covers
    every class up to ``cutoff``, ``"heuristic"`` when the ball came from a
    generator search without a Dirichlet domain,
    and ``"incomplete"`` when a configured limit stopped the search early.
    """

    classes: list[GeodesicClass]
    cutoff: float
    completeness: str
    word_cutoff: int | None = None

    def __iter__(self):
        return iter(self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, i):
        return self.classes[i]


_CLASS_CACHE: dict[tuple[int, float], ClassEnumeration] = {}


def enumerate_short_classes(
    rep: FuchsianRep,
    cutoff: float,
    *,
    word_cutoff_max: int = 24,
    primitive_only: bool = False,
) -> ClassEnumeration:
    """Every oriented conjugacy class with translation length <= cutoff.

    Sorted by ``(length, form)``; inverse classes appear as separate entries.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    key = (id(rep), round(cutoff, 12))
    res = _CLASS_CACHE.get(key)
    if res is None:
        for (rid, c), cached in _CLASS_CACHE.items():
            if rid == id(rep) and c >= cutoff:
                res = ClassEnumeration(
                    [k for k in cached.classes if k.length <= cutoff + 1e-9],
                    cutoff, cached.completeness, cached.word_cutoff)
                break
    if res is None:
        res = _classes_from_ball(rep, cutoff, word_cutoff_max)
        _CLASS_CACHE[key] = res
    if primitive_only:
        return ClassEnumeration(
            [c for c in res.classes if not W.is_proper_power(c.form, rep.genus)],
            res.cutoff, res.completeness, res.word_cutoff)
    return res


def _merge_geometric(rep: FuchsianRep, found: dict[Letters, GeodesicClass]) -> list[GeodesicClass]:
    groups: dict[tuple, list[GeodesicClass]] = {}
    for c in found.values():
        groups.setdefault((round(c.length, 7), c.homology), []).append(c)
    out = []
    for members in groups.values():
        members.sort(key=lambda c: W.word_key(c.form.letters))
        reps: list[GeodesicClass] = []
        for c in members:
            if any(conjugator(rep, r.word, c.word) is not None for r in reps):
                continue
            reps.append(c)
        out += reps
    out.sort(key=lambda c: c.key)
    return out


def _classes_from_ball(rep: FuchsianRep, cutoff: float, max_depth: int | None = None) -> ClassEnumeration:
    # every class has a representative whose axis passes within the domain
    # radius R of i, and such an element moves i by at most cutoff + 2R
    big_r = rep.effective_radius
    radius = cutoff + 2 * big_r + 1e-6
    ball = rep.ball(radius, max_depth=None if rep.has_domain else max_depth)
    idx = ball.within(radius)
    tr = ball.abs_trace[idx]
    hyper = tr > 2 + PARABOLIC_TOL
    idx, tr = idx[hyper], tr[hyper]
    lengths = 2 * np.arccosh(tr / 2)
    ok = lengths <= cutoff + 1e-9
    idx, tr, lengths = idx[ok], tr[ok], lengths[ok]
    dist = axis_distance(ball.cosh_dist[idx], tr)
    ok = dist <= big_r + 1e-7
    idx, tr, lengths, dist = idx[ok], tr[ok], lengths[ok], dist[ok]
    order = np.lexsort((dist, lengths))
    found: dict[Letters, GeodesicClass] = {}
    for j in order:
        w = Word(ball.word(idx[j]))
        form = W.conjugacy_form(w, rep.genus)
        prev = found.get(form.letters)
        if prev is not None and prev.axis_distance <= dist[j] + 1e-12:
            continue
        found[form.letters] = GeodesicClass(
            form=form, length=float(lengths[j]), trace=float(tr[j]),
            homology=W.abelianize(w, rep.genus), word=w, axis_distance=float(dist[j]))
    classes = _merge_geometric(rep, found)
    if ball.exact:
        return ClassEnumeration(classes, cutoff, "exhausted")
    return ClassEnumeration(classes, cutoff, "incomplete" if ball.truncated else "heuristic",
                            word_cutoff=max_depth)
