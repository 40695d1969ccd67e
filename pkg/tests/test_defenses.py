import math
from fractions import Fraction
import random

import networkx as nx
import numpy as np
import pytest
import torch

from rse_defense import synthetic
from rse_defense.corpus import LabeledExample, build_vocab, encode_tokens
from rse_defense.defenses import (DefendedModel, DefenseSpec, SemEncoding, build_sem_encoding,
                                  craft_adversarial, train_at, train_nt, train_rse, train_sem)
from rse_defense.encoder import RseConfig
from rse_defense.lexicon import SynonymTable, bundled_lexicon, symmetric_closure
from rse_defense.models import TrainConfig, build_classifier, evaluate_accuracy, train

CFG = dict(embed_dim=8, hidden_dim=8, num_layers=1, num_filters=4, epochs=2, batch_size=16)
TABLE = bundled_lexicon()


@pytest.fixture(scope="module")
def news():
    rows = synthetic.generate_corpus(60, seed=3)
    data = [LabeledExample(tuple(t.split()), y) for y, t in rows]
    return data[:200], data[200:]


def test_sem_two_node_component():
    enc = build_sem_encoding(symmetric_closure(SynonymTable({"good": ["great"]})))
    assert enc("good") == "good" and enc("great") == "good"


def test_sem_unlisted_word_maps_to_itself():
    enc = build_sem_encoding(symmetric_closure(SynonymTable({"good": ["great"]})))
    assert enc("zebra") == "zebra"


@pytest.mark.parametrize("seed", range(3))
def test_sem_components_match_networkx(seed):
    rng = random.Random(seed)
    words = [f"w{i:04d}" for i in range(1000)]
    entries = {w: rng.sample(words, rng.choice([0, 0, 1, 1, 2])) for w in words}
    table = symmetric_closure(SynonymTable(entries))
    enc = build_sem_encoding(table)
    g = nx.Graph()
    g.add_nodes_from(table.words())
    for w, syns in table.entries.items():
        g.add_edges_from((w, s) for s in syns)
    for comp in nx.connected_components(g):
        rep = min(comp)
        assert {enc(w) for w in comp} == {rep}
    for w in table.words():
        assert enc(enc(w)) == enc(w)


def test_nt_equals_plain_training(news):
    train_data, _ = news
    cfg = TrainConfig(**CFG)
    model = train_nt(train_data, "lstm", cfg, padding_length=40)
    clf = build_classifier("lstm", build_vocab(train_data), 4, 40, cfg)
    train(clf, train_data, cfg)
    assert model.clf.parameter_digest() == clf.parameter_digest()
    again = train_nt(train_data, "lstm", cfg, padding_length=40)
    assert again.clf.parameter_digest() == model.clf.parameter_digest()


def test_nt_beats_majority_baseline(news):
    train_data, test_data = news
    cfg = TrainConfig(**{**CFG, "epochs": 8, "optimizer": "adam", "lr": 0.01})
    model = train_nt(train_data, "word_cnn", cfg, padding_length=50)
    majority = max(np.bincount([ex.label for ex in test_data])) / len(test_data)
    assert evaluate_accuracy(model.clf, test_data) > majority


def test_rse_zero_rate_matches_nt(news):
    train_data, _ = news
    cfg = TrainConfig(**CFG)
    nt = train_nt(train_data, "lstm", cfg, padding_length=40)
    rse = train_rse(train_data, "lstm", cfg, RseConfig(0, 0, 3), TABLE, padding_length=40)
    assert rse.clf.parameter_digest() == nt.clf.parameter_digest()
    assert rse.clf.history == nt.clf.history


def test_rse_epochs_see_different_neighbours(news):
    train_data, _ = news
    spec = DefenseSpec("rse", rse=RseConfig(0.2, 0.3, 1), table=TABLE)
    hook = spec.train_hook()
    ex = train_data[0]
    variants = {hook(ex, epoch, 0).tokens for epoch in range(10)}
    assert len(variants) >= 8
    assert all(hook(ex, e, 0).label == ex.label for e in range(10))


def test_rse_trains_on_same_number_of_examples(news, monkeypatch):
    train_data, _ = news
    calls = []
    spec = DefenseSpec("rse", rse=RseConfig(0.1, 0.2, 0), table=TABLE)
    hook = spec.train_hook()
    cfg = TrainConfig(**CFG)
    clf = build_classifier("lstm", build_vocab(train_data), 4, 40, cfg)
    train(clf, train_data, cfg, encoder_hook=lambda ex, e, i: calls.append(e) or hook(ex, e, i))
    assert [calls.count(e) for e in range(cfg.epochs)] == [len(train_data)] * cfg.epochs


def test_sem_identity_encoding_equals_nt(news):
    train_data, _ = news
    cfg = TrainConfig(**CFG)
    nt = train_nt(train_data, "bilstm", cfg, padding_length=40)
    sem = train_sem(train_data, "bilstm", cfg, SemEncoding({}), padding_length=40)
    assert sem.clf.parameter_digest() == nt.clf.parameter_digest()


def test_sem_within_cluster_swap_is_invisible(news):
    train_data, test_data = news
    enc = build_sem_encoding(TABLE)
    model = train_sem(train_data, "word_cnn", TrainConfig(**CFG), enc, padding_length=50)
    rng = np.random.default_rng(0)
    for ex in test_data[:30]:
        swapped = [t if not TABLE.synonyms_of(t) else str(rng.choice(TABLE.synonyms_of(t)))
                   for t in ex.tokens]
        a = encode_tokens(model.spec.transform(ex.tokens, rng), model.clf.vocab, 50)[0]
        b = encode_tokens(model.spec.transform(swapped, rng), model.clf.vocab, 50)[0]
        np.testing.assert_array_equal(a, b)
        p = model.predict_proba_tokens([list(ex.tokens), swapped])
        np.testing.assert_array_equal(p[0], p[1])


def test_at_augmentation(news):
    train_data, _ = news
    cfg = TrainConfig(**{**CFG, "epochs": 4, "optimizer": "adam", "lr": 0.01})
    nt = train_nt(train_data, "lstm", cfg, padding_length=40)
    model = train_at(train_data, "lstm", cfg, TABLE, 0.1, padding_length=40, nt_model=nt,
                     max_rate=0.5)
    report = model.spec.report
    assert report["target"] == math.ceil(Fraction(1, 10) * len(train_data))
    assert len(model.augmented) == len(train_data) + report["crafted"]
    assert report["shortfall"] == report["target"] - report["crafted"]
    if report["shortfall"] == 0:
        assert len(model.augmented) == math.ceil(Fraction(11, 10) * len(train_data))
    adversarial = model.augmented[len(train_data):]
    assert adversarial, "expected at least one successful attack"
    nt.reseed(0)
    probs = nt.predict_proba_tokens([ex.tokens for ex in adversarial])
    assert (probs.argmax(axis=1) != np.array([ex.label for ex in adversarial])).all()


def test_at_with_unattackable_model_is_nt_retraining(news):
    train_data, _ = news
    cfg = TrainConfig(**CFG)
    nt = train_nt(train_data, "lstm", cfg, padding_length=40)
    with torch.no_grad():
        nt.clf.net.fc.weight.zero_()
        nt.clf.net.fc.bias.copy_(torch.tensor([9.0, 0.0, 0.0, 0.0]))
    model = train_at(train_data, "lstm", cfg, TABLE, 0.1, padding_length=40, nt_model=nt)
    assert model.spec.report["crafted"] == 0
    fresh = train_nt(train_data, "lstm", cfg, padding_length=40)
    assert model.clf.parameter_digest() == fresh.clf.parameter_digest()


def test_craft_target_uses_exact_fraction(news):
    nt = train_nt(news[0][:30], "lstm", TrainConfig(**CFG), padding_length=40)
    _, report = craft_adversarial(nt, news[0][:30], TABLE, 0.1, 0.25)
    assert report["target"] == 3


def test_craft_rejects_bad_fraction(news):
    with pytest.raises(ValueError):
        craft_adversarial(None, news[0], TABLE, 0.0, 0.25)


@pytest.mark.parametrize("kind", ["nt", "sem", "rse"])
def test_defended_checkpoint_round_trip(kind, news, tmp_path):
    train_data, test_data = news
    cfg = TrainConfig(**CFG)
    if kind == "nt":
        model = train_nt(train_data, "lstm", cfg, padding_length=40)
    elif kind == "sem":
        model = train_sem(train_data, "lstm", cfg, build_sem_encoding(TABLE), padding_length=40)
    else:
        model = train_rse(train_data, "lstm", cfg, RseConfig(0.1, 0.3, 2), TABLE, padding_length=40)
    model.save(tmp_path / "m.pt")
    back = DefendedModel.load(tmp_path / "m.pt")
    assert back.kind == kind
    toks = [list(ex.tokens) for ex in test_data[:20]]
    model.reseed(4)
    back.reseed(4)
    np.testing.assert_array_equal(model.predict_proba_tokens(toks), back.predict_proba_tokens(toks))


def test_rse_test_time_encoding_is_seeded(news):
    train_data, test_data = news
    model = train_rse(train_data, "lstm", TrainConfig(**CFG), RseConfig(0.3, 0.5, 0), TABLE,
                      padding_length=40)
    toks = [list(ex.tokens) for ex in test_data[:20]]
    model.reseed(1)
    a = model.predict_proba_tokens(toks)
    model.reseed(1)
    b = model.predict_proba_tokens(toks)
    model.reseed(2)
    c = model.predict_proba_tokens(toks)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_vote_returns_vote_fractions(news):
    train_data, test_data = news
    model = train_rse(train_data, "lstm", TrainConfig(**CFG), RseConfig(0.1, 0.3, 0), TABLE,
                      padding_length=40, vote_k=5)
    p = model.predict_proba_tokens([list(ex.tokens) for ex in test_data[:5]])
    np.testing.assert_allclose(p.sum(axis=1), 1.0)
    assert set(np.unique(p * 5)) <= set(range(6))


def test_spec_validation():
    with pytest.raises(ValueError):
        DefenseSpec("rse")
    with pytest.raises(ValueError):
        DefenseSpec("sem")
    with pytest.raises(ValueError):
        DefenseSpec("dropout")
    assert DefenseSpec("nt").train_hook() is None
    assert DefenseSpec("nt").transform(["a"], None) == ["a"]
