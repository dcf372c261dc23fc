import copy

import pytest

from liftmin import words as W
from liftmin.certify import (
    CERTIFIED,
    INCONCLUSIVE,
    CertifyConfig,
    CertifyError,
    certify,
    check_input,
    dual_functionals,
    homologically_nontrivial,
    verify_certificate,
)
from liftmin.covers import FiniteCover
from liftmin.curves import Surface, enumerate_partitions_below
from liftmin.fuchsian import enumerate_short_classes


@pytest.fixture(scope="module")
def commutator_cert(bolza):
    return certify(bolza, W.parse_word("a1 a2 A1 A2"))


@pytest.fixture(scope="module")
def commutator_doc(commutator_cert):
    return commutator_cert.to_json()


@pytest.fixture(scope="module")
def commutator_geo(bolza, commutator_doc):
    # the certified lift starts at coset 0 of this particular representative;
    # other lifts of the same curve can have shorter competitors
    base = W.parse_word(commutator_doc["lift"]["base_word"])
    (geo,) = [c for c in enumerate_short_classes(bolza, 9.1) if c.word == base]
    return geo


@pytest.mark.parametrize("word", ["a1", "A2", "a1 a3"])
def test_nonseparating_curves_need_no_cover(bolza, word):
    cert = certify(bolza, W.parse_word(word))
    assert cert.verdict == CERTIFIED
    assert cert.tower.stages == []
    assert cert.tower.total_index == 1
    assert cert.competitors == []
    assert verify_certificate(cert.to_json(), bolza) == []


def test_commutator_tower(commutator_cert):
    stages = commutator_cert.tower.stages
    assert commutator_cert.verdict == CERTIFIED
    assert stages[0].rationale == "trivial-homology"
    assert stages[0].stage_index == 2
    assert [s.rationale for s in stages] == ["trivial-homology", "break-homologous", "break-partition"]
    assert commutator_cert.tower.total_index == 8 == stages[-1].cover.index
    assert commutator_cert.competitors == []
    assert commutator_cert.completeness == "exhausted"


def test_commutator_certificate_verifies(bolza, commutator_doc):
    assert verify_certificate(commutator_doc, bolza) == []


def test_lift_is_shortest_in_its_class(bolza, commutator_cert, commutator_geo):
    # recompute directly on the top cover, with a non-strict bound
    cover = commutator_cert.tower.composite
    surface = Surface(bolza, cover)
    up = surface.lift_of(commutator_geo, 0)
    assert up.degree == 1
    assert surface.is_simple(up)
    res = enumerate_partitions_below(bolza, up.homology, up.length, cover)
    # ties are allowed: other curves of exactly the same length may appear
    assert f"[{up.label()}]" in [p.describe() for p in res]
    assert all(p.total_length == pytest.approx(up.length, abs=1e-9) for p in res)


def test_each_stage_removes_a_competitor(bolza, commutator_cert, commutator_geo):
    # on the cover before each breaking stage the recorded competitor exists
    stages = commutator_cert.tower.stages
    for prev, stage in zip(stages, stages[1:]):
        surface = Surface(bolza, prev.cover)
        up = surface.lift_of(commutator_geo, 0)
        comps = enumerate_partitions_below(bolza, up.homology, up.length, prev.cover, strict=True)
        assert len(comps) >= 1
        assert stage.broken


def test_genus3_separating_curve(genus3):
    cert = certify(genus3, W.parse_word("a1 a2 A1 A2"))
    assert cert.verdict == CERTIFIED
    assert cert.tower.stages[0].rationale == "trivial-homology"
    assert verify_certificate(cert.to_json(), genus3) == []


@pytest.mark.parametrize("word,msg", [
    ("a1 a1", "proper power"),
    ("a1 a3 a2", "not simple"),
    ("a1 a2 A1 A2 a3 a4 A3 A4", "trivial"),
])
def test_rejected_inputs(bolza, word, msg):
    with pytest.raises(CertifyError, match=msg):
        certify(bolza, W.parse_word(word))


def test_letters_outside_the_group(bolza):
    with pytest.raises(ValueError):
        check_input(bolza, W.parse_word("a5"))


def test_length_limit_gives_inconclusive(bolza):
    cert = certify(bolza, W.parse_word("a1 a2 A1 A2"), CertifyConfig(length_cutoff_max=5.0))
    assert cert.verdict == INCONCLUSIVE
    assert cert.diagnostics


def test_stage_limit_gives_inconclusive(bolza):
    cert = certify(bolza, W.parse_word("a1 a2 A1 A2"), CertifyConfig(max_stages=1))
    assert cert.verdict == INCONCLUSIVE
    assert "stage limit reached" in cert.diagnostics
    assert cert.competitors


def _tamper(doc, fn):
    d = copy.deepcopy(doc)
    fn(d)
    return d


def _drop_stage(d):
    d["tower"].pop(1)


def _bump_total(d):
    d["total_index"] = 16


def _stretch_lift(d):
    d["lift"]["length"] += 0.5


def _flip_homology(d):
    d["lift"]["lift_homology"] = [-x for x in d["lift"]["lift_homology"]] or [1]


def _fake_competitor(d):
    d["competitors"]["partitions"] = [[{"form": "a1", "multiplicity": 1}]]


def _other_metric(d):
    d["metric"] = "regular-8gon-commutator"


def _swap_last_cover(d):
    d["tower"][-1]["cover"] = d["tower"][0]["cover"]


@pytest.mark.parametrize("tamper", [_drop_stage, _bump_total, _stretch_lift, _flip_homology,
                                    _fake_competitor, _other_metric, _swap_last_cover])
def test_tampering_is_detected(bolza, commutator_doc, tamper):
    assert verify_certificate(_tamper(commutator_doc, tamper), bolza) != []


def test_stage_covers_nest(commutator_cert):
    stages = commutator_cert.tower.stages
    for lower, upper in zip(stages, stages[1:]):
        assert upper.cover.index == lower.cover.index * upper.stage_index
        back = FiniteCover.from_json(upper.cover.to_json())
        assert back.same_table(upper.cover)


def test_homologically_nontrivial(double_cover):
    comm = W.parse_word("a1 a2 A1 A2").letters
    assert homologically_nontrivial(double_cover, comm, 0)
    assert not homologically_nontrivial(double_cover, comm + W.inverse(comm), 0)


@pytest.mark.parametrize("h1,h2", [((1, 0, 0), (0, 1, 0)), ((1, 1, 0), (1, 0, 1)), ((3, 2, 0), (1, 1, 5))])
def test_dual_functionals(h1, h2):
    f1, f2 = dual_functionals(h1, h2)
    dot = lambda f, h: sum(a * b for a, b in zip(f, h))  # noqa: E731
    assert [[dot(f, h) for h in (h1, h2)] for f in (f1, f2)] == [[1, 0], [0, 1]]


@pytest.mark.parametrize("h1,h2", [((2, 0, 0), (0, 1, 0)), ((1, 0, 0), (2, 0, 0)), ((1, 1, 0), (1, 1, 0))])
def test_dual_functionals_need_a_primitive_pair(h1, h2):
    assert dual_functionals(h1, h2) is None
