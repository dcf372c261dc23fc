"""Words in the fundamental group of a closed orientable genus-g surface.

Letters are nonzero integers: ``t`` stands for the generator ``a_t`` and
``-t`` for its inverse.  The group is

    < a_1, ..., a_2g | [a_1, a_2] ... [a_{2g-1}, a_{2g}] >

with ``[x, y] = x y x^-1 y^-1``.  Hot loops work on plain tuples of letters;
:class:`Word` is the user-facing immutable wrapper.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Letters = tuple[int, ...]

#: Half-swap orbits larger than this are truncated (see ``dehn_reduce``).
MAX_SWAP_ORBIT = 4000


def letter_key(x: int) -> tuple[int, int]:
    """Sort key realising a1 < A1 < a2 < A2 < ..."""
    return (abs(x), 0 if x > 0 else 1)


def word_key(letters: Sequence[int]) -> tuple:
    """Shortlex key with the letter order of :func:`letter_key`."""
    return (len(letters), tuple(2 * abs(x) + (x < 0) for x in letters))


def free_reduce(raw: Iterable[int]) -> Letters:
    out: list[int] = []
    for x in raw:
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(letters: Sequence[int]) -> Letters:
    return tuple(-x for x in reversed(letters))


def cyclic_reduce(letters: Sequence[int]) -> Letters:
    w = free_reduce(letters)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i:j + 1])


def rotations(letters: Letters) -> list[Letters]:
    return [letters[i:] + letters[:i] for i in range(len(letters))] or [()]


def primitive_root(letters: Letters) -> tuple[Letters, int]:
    """Return ``(u, k)`` with ``letters == u * k`` and ``k`` maximal."""
    n = len(letters)
    for p in range(1, n + 1):
        if n % p == 0 and letters[:p] * (n // p) == letters:
            return letters[:p], n // p
    return letters, 1


@dataclass(frozen=True)
class SurfaceGroup:
    genus: int

    def __post_init__(self):
        if not isinstance(self.genus, int) or self.genus < 2:
            raise ValueError(f"genus must be an integer >= 2, got {self.genus!r}")

    @property
    def rank(self) -> int:
        return 2 * self.genus

    @property
    def generators(self) -> list[Word]:
        return [Word((t,)) for t in range(1, self.rank + 1)]

    @property
    def relator(self) -> Word:
        return Word(relator_letters(self.genus))

    def check(self, w: "Word") -> None:
        bad = [x for x in w.letters if abs(x) > self.rank]
        if bad:
            raise ValueError(f"letter {bad[0]} out of range for genus {self.genus}")


def relator_letters(genus: int) -> Letters:
    out: list[int] = []
    for j in range(genus):
        a, b = 2 * j + 1, 2 * j + 2
        out += [a, b, -a, -b]
    return tuple(out)


def commutator(x: Sequence[int], y: Sequence[int]) -> Letters:
    return free_reduce(tuple(x) + tuple(y) + inverse(x) + inverse(y))


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    letters: Letters = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(tuple(int(x) for x in self.letters)))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        base = self.letters if n >= 0 else inverse(self.letters)
        return Word(base * abs(n))

    def inverse(self) -> "Word":
        return Word(inverse(self.letters))

    def conjugate(self, u: "Word") -> "Word":
        """``u w u^-1``."""
        return Word(u.letters + self.letters + inverse(u.letters))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "Word":
        return parse_word(text)


_TOKEN = re.compile(r"([aA])([1-9][0-9]*)")


def parse_word(text: str) -> Word:
    """Parse ``"a1 a2 A1 A2"``; ``"e"`` or blank is the identity."""
    tokens = text.split()
    if tokens == ["e"] or not tokens:
        return Word()
    letters = []
    for tok in tokens:
        m = _TOKEN.fullmatch(tok)
        if m is None:
            raise ValueError(f"bad word token {tok!r}")
        t = int(m.group(2))
        letters.append(t if m.group(1) == "a" else -t)
    return Word(letters)


def format_word(w: Word | Sequence[int]) -> str:
    letters = w.letters if isinstance(w, Word) else tuple(w)
    if not letters:
        return "e"
    return " ".join(f"a{x}" if x > 0 else f"A{-x}" for x in letters)


# ---------------------------------------------------------------------------
# exponent sums


def chi(w: Word | Sequence[int], t: int, genus: int | None = None) -> int:
    """Signed exponent sum of generator ``t`` in ``w``."""
    if t < 1 or (genus is not None and t > 2 * genus):
        raise IndexError(f"generator index {t} out of range")
    letters = w.letters if isinstance(w, Word) else w
    return sum(1 if x > 0 else -1 for x in letters if abs(x) == t)


def abelianize(w: Word | Sequence[int], genus: int) -> tuple[int, ...]:
    letters = w.letters if isinstance(w, Word) else w
    v = [0] * (2 * genus)
    for x in letters:
        if abs(x) > 2 * genus:
            raise ValueError(f"letter {x} out of range for genus {genus}")
        v[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(v)


# ---------------------------------------------------------------------------
# Dehn's algorithm


@lru_cache(maxsize=None)
def _tables(genus: int) -> tuple[dict[Letters, Letters], dict[Letters, Letters]]:
    """Long-piece replacements (length > 2g) and half-swaps (length == 2g)."""
    r = relator_letters(genus)
    n = len(r)
    long: dict[Letters, Letters] = {}
    half: dict[Letters, Letters] = {}
    for base in (r, inverse(r)):
        for rot in rotations(base):
            for k in range(n // 2, n + 1):
                piece, rest = rot[:k], rot[k:]
                if k == n // 2:
                    half[piece] = inverse(rest)
                else:
                    long[piece] = inverse(rest)
    return long, half


def _dehn_pass(w: Letters, genus: int) -> Letters:
    long, _ = _tables(genus)
    n4 = 4 * genus
    changed = True
    while changed:
        changed = False
        for i in range(len(w)):
            for k in range(min(n4, len(w) - i), 2 * genus, -1):
                rep = long.get(w[i:i + k])
                if rep is not None:
                    w = free_reduce(w[:i] + rep + w[i + k:])
                    changed = True
                    break
            if changed:
                break
    return w


def _swaps(w: Letters, genus: int):
    _, half = _tables(genus)
    h = 2 * genus
    for i in range(len(w) - h + 1):
        rep = half.get(w[i:i + h])
        if rep is not None:
            yield w[:i] + rep + w[i + h:]


def dehn_reduce(w: Word, genus: int, max_orbit: int = MAX_SWAP_ORBIT) -> Word:
    """Shortest word equal to ``w``.

    Dehn's algorithm removes subwords longer than half a cyclic relator.  The
    output is then closed under length-preserving half-relator swaps; any
    orbit member admitting a further reduction restarts the loop.  Returns the
    shortlex-least orbit member, so the result is a normal form on its orbit
    and the identity comes back as the empty word.
    """
    cur = _dehn_pass(free_reduce(w.letters), genus)
    while True:
        orbit = {cur}
        stack = [cur]
        shorter = None
        while stack and shorter is None and len(orbit) < max_orbit:
            u = stack.pop()
            for v in _swaps(u, genus):
                red = _dehn_pass(free_reduce(v), genus)
                if len(red) < len(cur):
                    shorter = red
                    break
                if v not in orbit:
                    orbit.add(v)
                    stack.append(v)
        if shorter is None:
            return Word(min(orbit, key=word_key))
        cur = shorter


def is_trivial(w: Word, genus: int) -> bool:
    return not _dehn_pass(free_reduce(w.letters), genus)


# ---------------------------------------------------------------------------
# conjugacy


def _cyclic_dehn(w: Letters, genus: int) -> Letters:
    long, _ = _tables(genus)
    w = cyclic_reduce(w)
    changed = True
    while changed and w:
        changed = False
        n = len(w)
        for i in range(n):
            rot = w[i:] + w[:i]
            for k in range(min(4 * genus, n), 2 * genus, -1):
                rep = long.get(rot[:k])
                if rep is not None:
                    w = cyclic_reduce(rep + rot[k:])
                    changed = True
                    break
            if changed:
                break
    return w


def _min_rotation(w: Letters) -> Letters:
    if not w:
        return w
    code = [2 * x if x > 0 else -2 * x + 1 for x in w]
    n = len(w)
    doubled = code + code
    best = min(range(n), key=lambda i: doubled[i:i + n])
    return w[best:] + w[:best]


def _cyclic_swaps(w: Letters, genus: int):
    _, half = _tables(genus)
    h = 2 * genus
    if len(w) < h:
        return
    for i in range(len(w)):
        rot = w[i:] + w[:i]
        rep = half.get(rot[:h])
        if rep is not None:
            yield rep + rot[h:]


def _swap_closure(
    start: Letters, genus: int, limit: int, collect: bool = False
) -> tuple[Letters | None, set[Letters]] | list[Letters]:
    """Cyclic half-swap orbit of ``start`` (min rotations).

    Returns ``(shorter, orbit)`` where ``shorter`` is a strictly shorter cyclic
    word found along the way, or ``None``.  With ``collect`` the search runs to
    the end and returns every shorter word met instead.
    """
    n = len(start)
    start = _min_rotation(start)
    orbit = {start}
    stack = [start]
    found: list[Letters] = []
    while stack and len(orbit) < limit:
        u = stack.pop()
        for v in _cyclic_swaps(u, genus):
            red = _cyclic_dehn(v, genus)
            if len(red) < n:
                if not collect:
                    return red, orbit
                found.append(red)
                continue
            v = _min_rotation(v)
            if v not in orbit:
                orbit.add(v)
                stack.append(v)
    return found if collect else (None, orbit)


#: Orbit cap for the lengthened words explored by the conjugation step.
_LIFT_ORBIT = 64


def _letter_conjugates(u: Letters, genus: int):
    """Conjugates ``x r x^-1`` of rotations ``r`` of ``u`` admitting a new swap.

    ``u`` is already closed under swaps, so only windows touching one of the
    two added letters can start something new.
    """
    _, half = _tables(genus)
    h = 2 * genus
    seen = set()
    for r in rotations(u):
        for t in range(1, 2 * genus + 1):
            for x in (t, -t):
                if x == -r[0] or x == r[-1]:
                    continue
                v = (x,) + r + (-x,)
                m = len(v)
                hit = False
                for s0 in range(-h + 1, 1):
                    for s in (s0, s0 + m - 1):
                        win = tuple(v[(s + k) % m] for k in range(h))
                        if win in half:
                            hit = True
                            break
                    if hit:
                        break
                if not hit:
                    continue
                v = _min_rotation(v)
                if v not in seen:
                    seen.add(v)
                    yield v


def _conjugacy_orbit(w: Letters, genus: int, max_orbit: int) -> tuple[Letters, set[Letters]]:
    """Cyclic words of minimal length in the conjugacy class of ``w``.

    Half-swaps alone do not connect all of them: two minimal cyclic words can
    be joined only through a conjugate two letters longer.  So after the swap
    orbit closes, every member is conjugated by one letter and the swap orbit
    of the longer word is searched for words of the original length.
    """
    cur = _cyclic_dehn(w, genus)
    while True:
        if not cur:
            return cur, {cur}
        shorter, orbit = _swap_closure(cur, genus, max_orbit)
        if shorter is None:
            n = len(cur)
            todo = list(orbit)
            while todo and shorter is None and len(orbit) < max_orbit:
                u = todo.pop()
                for v in _letter_conjugates(u, genus):
                    for found in _swap_closure(v, genus, _LIFT_ORBIT, collect=True):
                        if len(found) < n:
                            shorter = found
                            break
                        if len(found) > n or _min_rotation(found) in orbit:
                            continue
                        more, sub = _swap_closure(found, genus, max_orbit)
                        if more is not None:
                            shorter = more
                            break
                        for m in sub - orbit:
                            orbit.add(m)
                            todo.append(m)
                    if shorter is not None:
                        break
        if shorter is None:
            return min(orbit, key=word_key), orbit
        cur = shorter


@lru_cache(maxsize=200_000)
def _orbit_of_reduced(w: Letters, genus: int) -> tuple[Letters, frozenset[Letters]]:
    form, orbit = _conjugacy_orbit(w, genus, MAX_SWAP_ORBIT)
    return form, frozenset(orbit)


def _orbit(w: Letters, genus: int) -> tuple[Letters, frozenset[Letters]]:
    cd = _cyclic_dehn(free_reduce(w), genus)
    return _orbit_of_reduced(_min_rotation(cd) if cd else cd, genus)


def conjugacy_form(w: Word, genus: int) -> Word:
    """Canonical cyclic word of the free homotopy class of ``w``."""
    return Word(_orbit(w.letters, genus)[0])


def is_proper_power(w: Word, genus: int) -> bool:
    """True when some cyclically reduced form of ``w`` is periodic."""
    _, orbit = _orbit(w.letters, genus)
    return any(primitive_root(u)[1] > 1 for u in orbit)


def root_of(w: Word, genus: int) -> tuple[Word, int]:
    """Primitive root ``u`` and exponent ``k`` with ``w`` conjugate to ``u^k``."""
    form, orbit = _orbit(w.letters, genus)
    best = (form, 1)
    for u in orbit:
        r, k = primitive_root(u)
        if k > best[1]:
            best = (r, k)
    return Word(best[0]), best[1]
