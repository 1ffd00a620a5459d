import pytest

from noetherlab.catalog import conserved_vectors, entry
from noetherlab.euler_map import NoEulerianRepresentation, to_eulerian, eulerian_vector, verify_eulerian_claw
from noetherlab.expr import canonical_eq
from noetherlab.model import ModelConfig, eulerian_relations
from noetherlab.noether import ConservedVector
from noetherlab.suite import eulerian_checks, literal_momentum_control

CONFIGS = [ModelConfig(), ModelConfig(entropy="isentropic"), ModelConfig("2"), ModelConfig("2", "isentropic")]


def _vec(id, cfg):
    e = entry(id)
    return ConservedVector(e.components(cfg), cfg.frame(), id)


def test_mass_law():
    cfg = ModelConfig()
    img = to_eulerian(_vec("Tmass", cfg), cfg)
    E = ModelConfig(frame_name="eulerian")
    for got, s in zip(img.components, ("rho", "rho*u", "rho*v")):
        assert canonical_eq(got, E.frame().parse(s))


def test_momentum_image():
    cfg = ModelConfig()
    img = to_eulerian(_vec("T1", cfg), cfg)
    E = ModelConfig(frame_name="eulerian").frame()
    for got, s in zip(img.components, ("rho*u", "rho*u^2 + rho^gamma*S", "rho*u*v")):
        assert canonical_eq(got, E.parse(s))


@pytest.mark.parametrize("id,cfg", [("T9", ModelConfig()), ("T8t", ModelConfig(entropy="isentropic"))])
def test_no_eulerian_representation(id, cfg):
    with pytest.raises(NoEulerianRepresentation) as exc:
        to_eulerian(_vec(id, cfg), cfg)
    assert "xi" in exc.value.survivors


def test_t8t_maps_at_gamma_two():
    cfg = ModelConfig("2", "isentropic")
    assert to_eulerian(_vec("T8t", cfg), cfg).components


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.label())
def test_images_are_conserved(cfg):
    for e in conserved_vectors(cfg):
        try:
            img = to_eulerian(_vec(e.id, cfg), cfg)
        except NoEulerianRepresentation:
            continue
        r = verify_eulerian_claw(img, config=cfg)
        assert r.passed, r.to_text()


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.label())
def test_printed_vectors_except_energy(cfg):
    for e in conserved_vectors(cfg):
        for r in eulerian_checks(e, cfg):
            if r.id == "eT6":
                continue
            assert r.passed, r.to_text()


def test_printed_energy_misses_pressure_work():
    cfg = ModelConfig(entropy="isentropic")
    recs = {(r.id, r.check): r for r in eulerian_checks(entry("T6"), cfg)}
    assert not recs[("eT6", "eulerian-map")].passed
    assert not recs[("eT6", "eulerian-conservation")].passed
    assert recs[("eT6/erratum", "eulerian-map")].passed
    assert recs[("eT6/erratum", "eulerian-conservation")].passed
    assert recs[("eT6/image", "eulerian-conservation")].passed


def test_literal_momentum_typo_breaks_momentum_law():
    assert literal_momentum_control(ModelConfig()).passed


def test_psi2_constraint_ledgers_s_y():
    cfg = ModelConfig()
    info = entry("T8").eulerian(cfg)
    r = verify_eulerian_claw(eulerian_vector(info["components"], cfg, "eT8"), eulerian_relations("general"), cfg)
    assert r.passed
    assert r.details.get("ledger") == "S_y != 0"
