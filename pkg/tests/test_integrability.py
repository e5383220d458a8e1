from fractions import Fraction as F

import pytest

from mtasep import algebra, catalog, integrability
from mtasep.integrability import check_yang_baxter, recheck_witness
from mtasep.scattering import Rule

FAST = dict(samples=2)


def swap_particles(m: catalog.TwoSpeciesMatrix) -> catalog.TwoSpeciesMatrix:
    """Conjugate by the flip of the two particles: labels 12 <-> 21."""
    p = (0, 2, 1, 3)
    out = algebra.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            out[p[i], p[j]] = m.entries[i, j]
    return catalog.TwoSpeciesMatrix(f"flip({m.label})", out)


def test_b2_passes():
    v = check_yang_baxter(catalog.resolve("b02", 3))
    assert v.passes and v.samples == 5 and not v.witnesses


def test_identity_passes():
    assert check_yang_baxter(catalog.resolve("b01", 3), **FAST).passes


def test_mixture_2_3_fails_with_witness():
    B = catalog.resolve("mix(2,3,1/2)", 3)
    v = check_yang_baxter(B, **FAST)
    assert not v.passes_c and v.passes_a
    w = v.witnesses[0]
    assert w.relation == "c" and w.violation != 0
    assert recheck_witness(B, w, Rule.BACKWARD) == w.violation


def test_determinism():
    B = catalog.resolve("mix(2,5,1/4)", 3)
    a = check_yang_baxter(B, seed=11, **FAST).to_dict()
    b = check_yang_baxter(B, seed=11, **FAST).to_dict()
    assert a == b


def test_spectral_samples_are_distinct_and_bounded():
    import random
    rng = random.Random(1)
    for _ in range(50):
        xi = integrability.spectral_sample(rng, 4)
        assert len(set(xi)) == 4 and all(x != 0 for x in xi)
        assert all(abs(x.numerator) <= 64 and x.denominator <= 64 for x in xi)


def test_monotone_failure_across_samples():
    B = catalog.resolve("mix(2,3,1/4)", 3)
    one = check_yang_baxter(B, samples=1)
    more = check_yang_baxter(B, samples=3)
    assert not one.passes and not more.passes


@pytest.mark.parametrize("point", [(1, 1), (F(1, 2), F(1, 3)), (0, 1)])
def test_param_points(point):
    (v,) = integrability.classify_param_family([point], **FAST, workers=1)
    assert v.passes


def test_natural_sweep_drop_push():
    res = integrability.classify_natural_extensions(rule=Rule.DROP_PUSH, workers=1, **FAST)
    assert res.found == {1, 2, 3, 4, 5, 11, 13}
    assert "inconsistent" in res.excluded[6] and "inconsistent" in res.excluded[10]


def test_convex_examples():
    res = integrability.classify_convex_mixtures(pairs=[(1, 13), (4, 11), (2, 3)], workers=1, **FAST)
    assert res.found == {(1, 13), (4, 11)}
    assert res.verdicts[(2, 3)][0].witnesses


def test_convex_pairs_cover_the_seven():
    pairs = integrability.convex_pairs()
    assert len(pairs) == 22 and (1, 1) in pairs and (11, 13) in pairs


def test_asymmetric_examples():
    res = integrability.classify_asymmetric_extensions(workers=1, **FAST)
    assert 14 in res.found and 16 not in res.found and 20 not in res.found
    assert "not applicable" in res.excluded[20]


def test_modified_matches_natural():
    assert integrability.modified_matches_natural(14)
    assert not integrability.modified_matches_natural(18)
    with pytest.raises(catalog.NotApplicable):
        integrability.modified_matches_natural(16)


@pytest.mark.parametrize("k", [3, 4, 11, 13])
def test_particle_flip_relates_rules(k):
    flipped = {3: 4, 4: 3, 11: 13, 13: 11}[k]
    assert swap_particles(catalog.get(k)) == catalog.get(flipped)


@pytest.mark.parametrize("pair,flipped", [((4, 11), (3, 13)), ((3, 13), (4, 11)), ((3, 5), (4, 5))])
def test_drop_push_mixture_equals_backward_of_flipped(pair, flipped):
    # the drop-push relations for B coincide with the backward ones for the particle-flipped B
    a = F(1, 2)
    dp = check_yang_baxter(catalog.resolve(f"mix({pair[0]},{pair[1]},{a})", 3), rule=Rule.DROP_PUSH, **FAST)
    bw = check_yang_baxter(catalog.resolve(f"mix({flipped[0]},{flipped[1]},{a})", 3), **FAST)
    assert dp.passes == bw.passes


def test_witness_serializes():
    v = check_yang_baxter(catalog.resolve("mix(2,3,1/2)", 3), samples=1)
    d = v.to_dict()
    assert d["passes"] is False and d["witnesses"][0]["relation"] == "c"
    assert d["witnesses"][0]["violation"] != "0"


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("MTASEP_THREADS", "3")
    assert integrability.default_workers() == 3
    monkeypatch.setenv("MTASEP_THREADS", "junk")
    assert integrability.default_workers() == 1


@pytest.mark.slow
def test_natural_extension_four_species_spot_check():
    v = check_yang_baxter(catalog.resolve("b02", 4), samples=1, check_b=False)
    assert v.passes
