import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from liftmin import words as W
from liftmin.fuchsian import are_conjugate
from liftmin.words import SurfaceGroup, Word

GENUS = 2
letter = st.sampled_from([1, 2, 3, 4, -1, -2, -3, -4])
raw_words = st.lists(letter, max_size=14)
words = raw_words.map(Word)


def random_relator_insertion(rng: random.Random, w: tuple, genus: int) -> tuple:
    """Insert u r^(+-1) u^-1 at a random place, with a random rotation of r."""
    r = W.relator_letters(genus)
    k = rng.randrange(len(r))
    r = r[k:] + r[:k]
    if rng.random() < 0.5:
        r = W.inverse(r)
    u = tuple(rng.choice([1, -1]) * rng.randint(1, 2 * genus) for _ in range(rng.randint(0, 5)))
    i = rng.randint(0, len(w))
    return w[:i] + u + r + W.inverse(u) + w[i:]


@pytest.mark.parametrize("genus", [2, 3, 4, 5])
def test_relator_has_4g_letters(genus):
    r = W.relator_letters(genus)
    assert len(r) == 4 * genus
    assert W.abelianize(r, genus) == (0,) * (2 * genus)
    assert str(Word(W.relator_letters(2))) == "a1 a2 A1 A2 a3 a4 A3 A4"


def test_genus_must_exceed_one():
    with pytest.raises(ValueError):
        SurfaceGroup(1)


@given(words)
def test_parse_format_round_trip(w):
    assert W.parse_word(str(w)) == w


@pytest.mark.parametrize("text", ["a0", "b1", "a1 x", "a-1"])
def test_parse_rejects_garbage(text):
    with pytest.raises(ValueError):
        W.parse_word(text)


def test_letter_out_of_range(g2):
    with pytest.raises(ValueError):
        g2.check(W.parse_word("a5"))
    with pytest.raises(IndexError):
        W.chi(Word((1,)), 5, genus=2)


@given(raw_words)
def test_free_reduce_idempotent(letters):
    once = W.free_reduce(letters)
    assert W.free_reduce(once) == once
    assert all(a != -b for a, b in zip(once, once[1:]))


@given(words, words)
def test_inverse_is_antihomomorphism(u, v):
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert (u * u.inverse()).is_identity


@given(words, st.integers(0, 10_000))
def test_chi_ignores_relator_insertions(w, seed):
    rng = random.Random(seed)
    letters = w.letters
    for _ in range(3):
        letters = random_relator_insertion(rng, letters, GENUS)
    assert W.abelianize(letters, GENUS) == W.abelianize(w, GENUS)


def test_shortlex_order():
    ordered = sorted([Word((2,)), Word((-1,)), Word((1, 1)), Word((1,))], key=lambda w: W.word_key(w.letters))
    assert [str(w) for w in ordered] == ["a1", "A1", "a2", "a1 a1"]


# -- word problem -----------------------------------------------------------


@pytest.fixture(scope="module")
def length_table(bolza):
    return oracles.word_length_table(bolza.generators, 5)


@given(raw_words)
def test_dehn_reduce_preserves_element(bolza, letters):
    r = W.dehn_reduce(Word(letters), GENUS)
    gens = bolza.generators
    assert np.allclose(oracles.word_matrix(gens, r.letters), oracles.word_matrix(gens, letters), atol=1e-7)


def test_dehn_reduce_is_geodesic(bolza, length_table):
    # word lengths measured in a Cayley ball built from matrices
    rng = random.Random(11)
    checked = 0
    for _ in range(1500):
        w = W.free_reduce([rng.choice([1, 2, 3, 4, -1, -2, -3, -4]) for _ in range(rng.randint(0, 12))])
        key = oracles.element_key(bolza.generators, w)
        if key in length_table:
            checked += 1
            assert len(W.dehn_reduce(Word(w), GENUS)) == length_table[key], w
    assert checked > 500


@given(words, st.integers(0, 10_000))
def test_relator_insertions_are_trivial(w, seed):
    rng = random.Random(seed)
    trivial = random_relator_insertion(rng, (), GENUS)
    assert W.is_trivial(Word(trivial), GENUS)
    assert W.dehn_reduce(Word(w.letters + trivial), GENUS) == W.dehn_reduce(w, GENUS)


def test_dehn_reduce_normal_form_is_canonical():
    a = W.parse_word("a1 a2 A1")
    # the same element written through the relator
    b = W.parse_word("a1 a2 A1 A2 a3 a4 A3 A4 a4 a3 A4 A3 a2")
    assert W.dehn_reduce(b, GENUS) == W.dehn_reduce(a * W.parse_word("A2 a2"), GENUS)
    assert W.dehn_reduce(a, GENUS) == a


# -- conjugacy --------------------------------------------------------------


@given(words.filter(lambda w: not W.is_trivial(w, GENUS)), words)
def test_conjugacy_form_is_class_invariant(w, u):
    assert W.conjugacy_form(w.conjugate(u), GENUS) == W.conjugacy_form(w, GENUS)


@given(words.filter(lambda w: len(w) > 0))
def test_conjugacy_form_of_rotation(w):
    rot = Word(w.letters[1:] + w.letters[:1])
    assert W.conjugacy_form(rot, GENUS) == W.conjugacy_form(w, GENUS)


def test_conjugacy_form_needs_lengthening():
    # these two cyclic words are linked only through a longer conjugate
    u = W.parse_word("a1 a3 a4 A3 A3 A4")
    v = W.parse_word("a1 a1 A2 A1 A3 a2")
    assert W.conjugacy_form(u, GENUS) == W.conjugacy_form(v, GENUS)


def test_conjugacy_form_matches_geometry(bolza):
    # equal traces but different forms must not be conjugate, and vice versa
    rng = random.Random(5)
    samples = {}
    for _ in range(400):
        w = Word([rng.choice([1, 2, 3, 4, -1, -2, -3, -4]) for _ in range(rng.randint(1, 7))])
        if W.is_trivial(w, GENUS):
            continue
        samples.setdefault(round(abs(bolza.trace(w)), 7), []).append(w)
    pairs = 0
    for group in samples.values():
        for x, y in zip(group, group[1:]):
            pairs += 1
            same = W.conjugacy_form(x, GENUS) == W.conjugacy_form(y, GENUS)
            assert same == are_conjugate(bolza, x, y), (x, y)
    assert pairs > 50


@pytest.mark.parametrize("text,k", [("a1", 1), ("a1 a1", 2), ("a1 a2 a1 a2 a1 a2", 3), ("a1 a2 A1 A2", 1)])
def test_root_of(text, k):
    w = W.parse_word(text)
    root, exp = W.root_of(w, GENUS)
    assert exp == k
    assert W.is_proper_power(w, GENUS) == (k > 1)
    assert W.conjugacy_form(root ** exp, GENUS) == W.conjugacy_form(w, GENUS)


@given(words.filter(lambda w: not W.is_trivial(w, GENUS)), st.integers(2, 3))
def test_powers_are_detected(w, k):
    assert W.is_proper_power(w ** k, GENUS)
