import pytest

from noetherlab.catalog import build_generator, conserved_vectors, entry, relations_for
from noetherlab.expr import is_zero
from noetherlab.jet import Generator
from noetherlab.model import ModelConfig, build_lagrangian, euler_lagrange
from noetherlab.noether import (
    CertificateError,
    ConservedVector,
    DivergenceCertificate,
    divergence_symmetry_test,
    integrate,
    search_certificate,
    verify_conservation_law,
)
from noetherlab.suite import constraint_check, noether_chain, _relations

ISO = ModelConfig(entropy="isentropic")
GEN = ModelConfig()


def test_integrate_rejects_logarithm():
    F = ISO.frame()
    a = next(iter(F.parse("phi1").atoms()))
    with pytest.raises(CertificateError):
        integrate(F.parse("phi1^-1"), a)
    assert is_zero(integrate(F.parse("2*phi1"), a) - F.parse("phi1^2"))


def test_certificate_search_for_galilean_boost():
    L = build_lagrangian(ISO)
    res = divergence_symmetry_test(build_generator("X3", ISO), L)
    assert res.accepted
    assert is_zero(res.certificate.components[0] - ISO.frame().parse("phi1"))


def test_certificate_search_rejects_nonaffine():
    F = ISO.frame()
    with pytest.raises(CertificateError):
        search_certificate(F.parse("phi1_t^2"), F)


def test_wrong_certificate_is_rejected():
    L = build_lagrangian(ISO)
    cert = DivergenceCertificate.temporal(ISO.frame().parse("phi2"))
    assert not divergence_symmetry_test(build_generator("X3", ISO), L, cert).accepted


@pytest.mark.parametrize("gid", ["X8", "X9"])
def test_scalings_alone_are_not_divergence_symmetries(gid):
    res = divergence_symmetry_test(build_generator(gid, ISO), build_lagrangian(ISO))
    assert not res.accepted and res.witness is not None


def test_x8_alone_is_variational_at_gamma_two():
    cfg = ModelConfig("2", "isentropic")
    assert divergence_symmetry_test(build_generator("X8", cfg), build_lagrangian(cfg)).accepted


def test_non_symmetry_is_rejected():
    F = ISO.frame()
    X = Generator.from_text({"phi1": "phi1^2"}, "bad", F)
    assert not divergence_symmetry_test(X, build_lagrangian(ISO)).accepted


@pytest.mark.parametrize("cfg", [ISO, GEN, ModelConfig("2"), ModelConfig("2", "isentropic")], ids=lambda c: c.label())
def test_noether_chain(cfg):
    for e in conserved_vectors(cfg):
        if e.source:
            for r in noether_chain(e, cfg):
                assert r.passed, r.to_text()


@pytest.mark.parametrize("cfg", [ISO, GEN, ModelConfig("2"), ModelConfig("2", "isentropic")], ids=lambda c: c.label())
def test_conservation(cfg):
    sys = euler_lagrange(cfg)
    for e in conserved_vectors(cfg):
        T = ConservedVector(e.components(cfg), cfg.frame(), e.id)
        r = verify_conservation_law(T, sys, _relations(e, cfg))
        assert r.passed, r.to_text()


def test_perturbed_vector_is_not_conserved():
    e = entry("T1")
    comps = list(e.components(ISO))
    comps[0] = comps[0] + ISO.frame().parse("phi1_xi")
    r = verify_conservation_law(ConservedVector(tuple(comps), ISO.frame(), "T1"), euler_lagrange(ISO))
    assert not r.passed and r.residual_witness


def test_literal_t5_variant_is_not_conserved():
    e = entry("T5")
    (_, alt), = e.alternates(ISO)
    r = verify_conservation_law(ConservedVector(alt, ISO.frame(), "T5"), euler_lagrange(ISO))
    assert not r.passed


def test_t8t_literal_variant_passes_only_at_two():
    e = entry("T8t")
    for cfg, want in ((ISO, False), (ModelConfig("2", "isentropic"), True)):
        (_, alt), = e.alternates(cfg)
        assert verify_conservation_law(ConservedVector(alt, cfg.frame(), "T8t"), euler_lagrange(cfg)).passed is want


@pytest.mark.parametrize("cid,cfg", [("C-isentropic", ISO), ("C-general", GEN)])
def test_constraints(cid, cfg):
    r = constraint_check(entry(cid), cfg)
    assert r.passed, r.to_text()
    assert len(r.details["conditions"]) == 1


def test_constraint_at_gamma_two_forces_c9():
    r = constraint_check(entry("C-isentropic"), ModelConfig("2", "isentropic"))
    assert r.passed
    assert r.details["conditions"] == ["c9 = 0"]


def test_psi_relations_needed_for_nonisentropic_dilation():
    L = build_lagrangian(GEN)
    X = build_generator("X8n", GEN)
    assert divergence_symmetry_test(X, L, relations=relations_for("psi", GEN)).accepted
    assert not divergence_symmetry_test(X, L).accepted
