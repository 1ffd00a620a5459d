import pytest

from noetherlab.catalog import (
    CatalogError,
    all_conserved_vectors,
    build_generator,
    commutator,
    commutator_table,
    conserved_vectors,
    decompose,
    entry,
    equivalence_generators,
    generators,
    printed_generator,
    verify_admitted,
    verify_classifying,
)
from noetherlab.expr import is_zero
from noetherlab.model import ModelConfig

CONFIGS = [ModelConfig(), ModelConfig(entropy="isentropic"), ModelConfig("2"), ModelConfig("2", "isentropic")]


def test_unknown_id():
    with pytest.raises(CatalogError, match="unknown catalog id"):
        entry("T999")


def test_applicability_split():
    iso = {e.id for e in conserved_vectors(ModelConfig(entropy="isentropic"))}
    gen = {e.id for e in conserved_vectors(ModelConfig())}
    assert {"Th", "T8t"} <= iso and not {"T8", "T9", "TF"} & iso
    assert {"T8", "T9", "TF"} <= gen and "T7" not in gen
    assert "T7" in {e.id for e in conserved_vectors(ModelConfig("2"))}
    assert "X7" in {e.id for e in generators(ModelConfig("2"))}


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.label())
def test_every_generator_is_admitted(cfg):
    for e in generators(cfg):
        r = verify_admitted(e.id, cfg)
        assert r.passed, r.to_text()


def test_equivalence_generators_are_admitted():
    cfg = ModelConfig("2")
    ids = [e.id for e in equivalence_generators(cfg)]
    assert "Xe10" in ids
    for i in ids:
        assert verify_admitted(i, cfg).passed, i


def test_x7_is_not_admitted_away_from_two():
    assert not verify_admitted("X7", ModelConfig("5/3")).passed


def test_combination_resolves():
    cfg = ModelConfig(entropy="isentropic")
    X = build_generator("X8t", cfg)
    assert set(X.coeffs) == {"t", "xi", "phi1", "phi2"}


def test_printed_x9hat_differs_from_combination():
    cfg = ModelConfig()
    built = build_generator("X9hat", cfg)
    printed = printed_generator("X9hat", cfg)
    assert not is_zero(built.coeff("eta") - printed.coeff("eta"))
    assert is_zero(built.coeff("xi") - printed.coeff("xi"))


def test_classifying_equation():
    recs = verify_classifying()
    assert len(recs) == 2
    for r in recs:
        assert r.passed, r.to_text()
        assert r.details["c7-obstruction-gamma-2"]


def test_commutators_close():
    recs = commutator_table()
    assert recs and all(r.passed for r in recs)


def test_commutator_of_time_translation_and_dilation():
    cfg = ModelConfig(entropy="isentropic")
    X6, X8 = build_generator("X6", cfg), build_generator("X8", cfg)
    Z = commutator(X6, X8)
    k, rest = decompose(Z, [X6])
    assert not rest.coeffs
    assert k[0] != 0


def test_every_vector_has_components_of_length_three():
    for e in all_conserved_vectors():
        assert len(e.data["components"]) == 3, e.id
