import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rse_defense.corpus import LabeledExample
from rse_defense.encoder import (RseConfig, RseHook, SubstitutionPlan, apply_plan, derived_rng,
                                 plan_substitution, round_half_up, rse_encode, sample_rate,
                                 substitutable_positions)
from rse_defense.lexicon import SynonymTable, symmetric_closure

TABLE = SynonymTable({"good": ["great"], "bad": ["poor"]})
FULL = symmetric_closure(SynonymTable({
    "good": ["great", "fine"], "movie": ["film"], "very": ["really", "truly"], "funny": ["comic"],
}))


def test_config_validation():
    with pytest.raises(ValueError):
        RseConfig(0.3, 0.2)
    with pytest.raises(ValueError):
        RseConfig(-0.1, 0.2)
    with pytest.raises(ValueError):
        RseConfig(0.1, 1.5)


def test_sample_rate_degenerate():
    rng = np.random.default_rng(0)
    assert sample_rate(RseConfig(0.2, 0.2), rng) == 0.2
    assert sample_rate(RseConfig(0.0, 0.0), rng) == 0.0


def test_sample_rate_monte_carlo_mean():
    rng = np.random.default_rng(123)
    cfg = RseConfig(0.1, 0.3)
    xs = np.array([sample_rate(cfg, rng) for _ in range(10_000)])
    assert xs.min() >= 0.1 and xs.max() <= 0.3
    # uniform on [0.1, 0.3]: sd of the mean is 0.2/sqrt(12*1e4) ~ 5.8e-4
    assert abs(xs.mean() - 0.2) < 0.005


def test_sample_rate_deterministic():
    cfg = RseConfig(0.1, 0.3)
    a = sample_rate(cfg, np.random.default_rng(5))
    b = sample_rate(cfg, np.random.default_rng(5))
    assert a == b


def test_round_half_up():
    assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 0.49, 2.51)] == [1, 2, 3, 0, 3]


def test_plan_empty_when_nothing_substitutable():
    plan = plan_substitution(["the", "of", "and"], TABLE, RseConfig(1, 1), np.random.default_rng(0))
    assert plan.positions == ()
    assert apply_plan(["the", "of", "and"], plan) == ["the", "of", "and"]


def test_plan_full_rate_substitutes_everything():
    toks = ["good", "movie", "very", "funny"]
    plan = plan_substitution(toks, FULL, RseConfig(1.0, 1.0), np.random.default_rng(0))
    out = apply_plan(toks, plan)
    assert plan.positions == (0, 1, 2, 3)
    for a, b in zip(toks, out):
        assert b in FULL.synonyms_of(a)


def test_plan_position_frequencies_match_enumeration():
    # with sr = 0.5 and m = 2 substitutable words, K = round(1.0) = 1 and the
    # sample space is {0} or {1}, each with probability 1/2
    toks = ["good", "bad", "ugly"]
    cfg = RseConfig(0.5, 0.5)
    counts = np.zeros(3)
    trials = 10_000
    for t in range(trials):
        plan = plan_substitution(toks, TABLE, cfg, np.random.default_rng(t))
        assert len(plan.positions) == 1
        counts[plan.positions[0]] += 1
    freq = counts / trials
    assert freq[2] == 0
    assert abs(freq[0] - 0.5) <= 0.02 and abs(freq[1] - 0.5) <= 0.02


def test_plan_ignores_pad_and_unk():
    table = SynonymTable({"<unk>": ["x"], "<pad>": ["y"], "good": ["great"]})
    assert substitutable_positions(["<unk>", "good", "<pad>"], table) == [1]


def test_apply_plan_examples():
    assert apply_plan(["good", "movie"], SubstitutionPlan(0.0)) == ["good", "movie"]
    plan = SubstitutionPlan(0.5, (0,), {0: "great"})
    assert apply_plan(["good", "movie"], plan) == ["great", "movie"]


def test_apply_plan_out_of_range():
    with pytest.raises(IndexError):
        apply_plan(["good"], SubstitutionPlan(1.0, (3,), {3: "x"}))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["good", "movie", "very", "funny", "the", "a"]), min_size=1, max_size=30),
       st.floats(0, 1), st.integers(0, 2**31))
def test_hamming_distance_equals_positions(tokens, rate, seed):
    plan = plan_substitution(tokens, FULL, RseConfig(rate, rate), np.random.default_rng(seed))
    out = apply_plan(tokens, plan)
    assert len(out) == len(tokens)
    diff = [i for i, (a, b) in enumerate(zip(tokens, out)) if a != b]
    assert diff == list(plan.positions)
    assert list(plan.positions) == sorted(set(plan.positions))


def test_rse_encode_zero_rate_identity():
    e = LabeledExample(("good", "movie", "very", "funny"), 1)
    assert rse_encode(e, FULL, RseConfig(0, 0, 9), np.random.default_rng(0)) == e


def test_rse_encode_deterministic_per_seed_and_call():
    e = LabeledExample(("good", "movie", "very", "funny") * 5, 1)
    cfg = RseConfig(0.2, 0.6)
    r1, r2 = np.random.default_rng(7), np.random.default_rng(7)
    a = [rse_encode(e, FULL, cfg, r1) for _ in range(5)]
    b = [rse_encode(e, FULL, cfg, r2) for _ in range(5)]
    assert a == b
    assert len({x.tokens for x in a}) > 1


def test_rse_encode_fraction_within_rate_bounds():
    e = LabeledExample(("good", "movie", "very", "funny") * 5, 2)
    cfg = RseConfig(0.1, 0.3)
    rng = np.random.default_rng(3)
    m = 20
    for _ in range(1000):
        out = rse_encode(e, FULL, cfg, rng)
        changed = sum(a != b for a, b in zip(e.tokens, out.tokens))
        assert round_half_up(0.1 * m) <= changed <= round_half_up(0.3 * m)
        assert out.label == 2


def test_hook_streams_depend_on_epoch_and_index():
    e = LabeledExample(("good", "movie", "very", "funny") * 5, 0)
    hook = RseHook(FULL, RseConfig(0.2, 0.4, seed=1))
    assert hook(e, 0, 3) == hook(e, 0, 3)
    per_epoch = {hook(e, epoch, 3).tokens for epoch in range(10)}
    assert len(per_epoch) > 5


def test_different_seeds_differ():
    e = LabeledExample(("good", "movie", "very", "funny") * 5, 0)
    cfg = RseConfig(0.3, 0.3)
    outs = {rse_encode(e, FULL, cfg, derived_rng(s)).tokens for s in range(50)}
    assert len(outs) > 40
