import math
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from mtasep import algebra, catalog
from mtasep.bethe.kernel import kernel
from mtasep.scattering import Rule
from mtasep.simulator import (ColumnSampler, Configuration, NonStochasticMatrix, SimOutcome,
                              estimate_kernel_entry, simulate, step)
from mtasep.validate import cross_validate

MTASEP = catalog.resolve("mtasep", 2)


def test_mtasep_faster_species_overtakes():
    c = step(Configuration((0, 1), (2, 1)), 0, MTASEP, Rule.BACKWARD)
    assert c == Configuration((0, 1), (1, 2))


def test_mtasep_slower_species_blocked():
    c = step(Configuration((0, 1), (1, 2)), 0, MTASEP, Rule.BACKWARD)
    assert c == Configuration((0, 1), (1, 2))


def test_free_jump_and_backward_return():
    B = catalog.resolve("b02", 3)
    assert step(Configuration((0, 5), (1, 2)), 0, B) == Configuration((1, 5), (1, 2))
    c = step(Configuration((3, 4), (3, 1)), 0, B)
    assert c.positions == (3, 4)


def test_b5_deterministic_infection():
    B = catalog.resolve("b05", 3)
    assert step(Configuration((0, 1), (1, 3)), 0, B).species == (3, 3)
    assert step(Configuration((0, 1), (3, 2)), 0, B).species == (3, 3)
    assert step(Configuration((0, 1), (2, 2)), 0, B).species == (2, 2)


def test_column_sampling_matches_distribution():
    B = catalog.resolve("param(1/2,1/3)", 3)
    sampler = ColumnSampler(B)
    rng = random.Random(3)
    draws = 10_000
    for jumper, occupant in [(1, 2), (3, 1), (2, 3)]:
        col = algebra.word_rank((jumper, occupant), 3)
        counts = Counter(sampler.sample(jumper, occupant, rng) for _ in range(draws))
        for row, word in enumerate(algebra.all_words(2, 3)):
            p = float(B.entries[row, col])
            sd = math.sqrt(p * (1 - p) / draws)
            assert abs(counts[word] / draws - p) <= 4 * sd + 1e-12


def test_drop_push_cascade():
    B = catalog.resolve("b01", 2)
    c = step(Configuration((0, 1, 2), (1, 2, 1)), 0, B, Rule.DROP_PUSH)
    assert c == Configuration((1, 2, 3), (1, 2, 1))
    c = step(Configuration((0, 1, 2, 5), (1, 1, 1, 1)), 1, B, Rule.DROP_PUSH)
    assert c.positions == (0, 2, 3, 5)


def test_drop_push_cascade_resamples_each_collision():
    # b5 turns every mixed hidden state into 22, so the push wave infects as it travels
    B = catalog.resolve("b05", 2)
    c = step(Configuration((0, 1, 2), (2, 1, 1)), 0, B, Rule.DROP_PUSH)
    assert c == Configuration((1, 2, 3), (2, 2, 2))


@given(st.integers(0, 10 ** 6), st.sampled_from(list(Rule)),
       st.sampled_from(["b02", "b05", "mtasep", "param(1/2,1/3)", "asym(14)"]))
def test_exclusion_and_count_invariants(seed, rule, sel):
    B = catalog.resolve(sel, 3)
    sampler = ColumnSampler(B)
    rng = random.Random(seed)
    c = Configuration((0, 1, 2, 4), (3, 1, 2, 1))
    for _ in range(30):
        k = rng.randrange(4)
        before = c
        c = step(c, k, sampler, rule, rng)
        assert len(c.positions) == 4
        assert all(a < b for a, b in zip(c.positions, c.positions[1:]))
        if rule is Rule.BACKWARD:
            assert c.positions[k] >= before.positions[k]


def test_non_stochastic_rejected():
    with pytest.raises(NonStochasticMatrix):
        simulate(Configuration((0, 1), (1, 2)), catalog.resolve("b16", 2), t=1.0, trials=10)


def test_configuration_validation_and_keys():
    with pytest.raises(ValueError):
        Configuration((1, 1), (1, 2))
    with pytest.raises(ValueError):
        Configuration((0, 1), (1,))
    c = Configuration((-2, 0, 7), (3, 1, 2))
    assert c.key() == "-2,0,7|312"
    assert Configuration.from_key(c.key()) == c


def test_single_particle_poisson():
    out = simulate(Configuration((0,), (1,)), catalog.resolve("b01", 2), t=1.0, trials=100_000, seed=4)
    for k in range(6):
        p = math.exp(-1) / math.factorial(k)
        est = out.histogram.get(f"{k}|1", 0) / out.trials
        assert abs(est - p) <= 4 * math.sqrt(p * (1 - p) / out.trials)


def test_identity_rule_never_swaps():
    out = simulate(Configuration((0, 1), (2, 1)), catalog.resolve("b01", 3), t=2.0, trials=5000, seed=2)
    assert all(k.endswith("|21") for k in out.histogram)


@pytest.mark.parametrize("start,end", [((2, 1), (1, 2)), ((1, 2), (2, 1))])
def test_b2_entry_against_kernel(start, end):
    init, final = Configuration((0, 1), start), Configuration((0, 1), end)
    B = catalog.resolve("b02", 2)
    p, se = estimate_kernel_entry(init, final, B, Rule.BACKWARD, 1.0, 100_000, seed=9)
    exact = kernel(B, Rule.BACKWARD, (0, 1), (0, 1), 1.0).matrix[algebra.word_rank(end, 2),
                                                                algebra.word_rank(start, 2)]
    sd = math.sqrt(max(exact * (1 - exact), 0.0) / 100_000)
    assert abs(p - exact) <= 4 * sd + 1e-12
    # under b2 species 1 overtakes species 2 but never falls behind it
    assert (exact > 0.1) == (start == (1, 2))


def test_estimate_at_time_zero():
    c = Configuration((0, 1), (2, 1))
    assert estimate_kernel_entry(c, c, MTASEP, Rule.BACKWARD, 0.0, 1000, 1) == (1.0, 0.0)


def test_poisson_mass_estimate():
    p, se = estimate_kernel_entry(Configuration((0,), (1,)), Configuration((2,), (1,)),
                                  catalog.resolve("b01", 2), Rule.BACKWARD, 1.0, 100_000, seed=5)
    assert abs(p - math.exp(-1) / 2) <= 4 * se


def test_param_top5_against_kernel():
    rep = cross_validate(catalog.resolve("param(1/2,1/2)", 3), Rule.BACKWARD, Configuration((0, 1), (3, 1)),
                         1.0, 100_000, seed=13, top=5)
    assert len(rep.rows) == 5 and rep.passes


def test_same_seed_same_outcome_any_workers():
    init = Configuration((0, 1), (2, 1))
    a = simulate(init, MTASEP, Rule.DROP_PUSH, 1.0, 25_000, seed=77)
    b = simulate(init, MTASEP, Rule.DROP_PUSH, 1.0, 25_000, seed=77, workers=2)
    assert a.to_json() == b.to_json()
    assert sum(a.histogram.values()) == a.trials
    c = simulate(init, MTASEP, Rule.DROP_PUSH, 1.0, 25_000, seed=78)
    assert c.to_json() != a.to_json()


def test_outcome_requires_consistent_counts():
    with pytest.raises(ValueError):
        SimOutcome(Configuration((0,), (1,)), {"0|1": 3}, 4, 1.0, Rule.BACKWARD, 0)
