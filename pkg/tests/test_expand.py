import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from requery.corpus import MASK, Vocabulary
from requery.errors import ConfigError, EmptyQuery, EmptySpan
from requery.expand import (CandidateExpansion, ExpanderConfig, Strategy,
                            enumerate_candidates, expand, information_gain,
                            mean_log_prob, splice)
from requery.model.infill import SpanPrediction


def dist(vocab_size, *pairs):
    """Distribution with given (index, probability) entries, zero elsewhere."""
    d = np.zeros(vocab_size)
    for idx, p in pairs:
        d[idx] = p
    return d


def uniform(vocab_size):
    return np.full(vocab_size, 1.0 / vocab_size)


class TestEnumerateCandidates:
    def test_four_word_query_gets_five_variants(self):
        query = "convert string to list".split()
        variants = enumerate_candidates(query)
        assert len(variants) == 5
        assert variants[0] == [MASK] + query
        assert variants[-1] == query + [MASK]
        assert variants[2] == ["convert", "string", MASK, "to", "list"]

    def test_single_word_query(self):
        assert enumerate_candidates(["sort"]) == [[MASK, "sort"], ["sort", MASK]]

    def test_empty_query_rejected(self):
        with pytest.raises(EmptyQuery):
            enumerate_candidates([])

    @given(st.lists(st.sampled_from(["sort", "list", "map", "file", "fast"]),
                    min_size=1, max_size=12))
    @settings(max_examples=150)
    def test_every_variant_has_one_mask_and_original_order(self, query):
        variants = enumerate_candidates(query)
        assert len(variants) == len(query) + 1
        for v in variants:
            assert v.count(MASK) == 1
            assert [t for t in v if t != MASK] == query
            assert len(v) == len(query) + 1


class TestInformationGain:
    def test_uniform_steps_give_negative_log_vocab(self):
        pred = SpanPrediction(span=[7, 8], distributions=np.stack(
            [uniform(1000), uniform(1000), uniform(1000)]))  # third row = end step
        assert information_gain(pred) == pytest.approx(-math.log(1000), abs=1e-9)

    def test_one_hot_steps_give_zero(self):
        pred = SpanPrediction(span=[5], distributions=np.stack(
            [dist(50, (5, 1.0)), dist(50, (4, 1.0))]))
        assert information_gain(pred) == 0.0

    def test_half_half_then_one_hot(self):
        rows = np.stack([dist(40, (6, 0.5), (7, 0.5)), dist(40, (6, 1.0))])
        pred = SpanPrediction(span=[6, 6], distributions=rows)
        assert information_gain(pred) == pytest.approx((-math.log(2)) / 2, abs=1e-12)

    def test_end_step_excluded_from_average(self):
        # content step one-hot, end step uniform: average must stay 0
        rows = np.stack([dist(40, (6, 1.0)), uniform(40)])
        pred = SpanPrediction(span=[6], distributions=rows)
        assert information_gain(pred) == 0.0

    def test_empty_span_raises(self):
        pred = SpanPrediction(span=[], distributions=uniform(40)[None, :])
        with pytest.raises(EmptySpan):
            information_gain(pred)

    def test_matches_independent_entropy_on_random_distributions(self):
        rng = np.random.default_rng(0)
        raw = rng.random((4, 64))
        rows = raw / raw.sum(axis=1, keepdims=True)
        pred = SpanPrediction(span=[5, 6, 7, 8], distributions=rows)
        expected = sum(sum(p * math.log(p) for p in row if p > 0) for row in rows) / 4
        assert information_gain(pred) == pytest.approx(expected, abs=1e-12)


class TestMeanLogProb:
    def test_mean_of_chosen_token_log_probs(self):
        rows = np.stack([dist(10, (5, 0.5), (6, 0.5)), dist(10, (6, 0.25), (7, 0.75))])
        pred = SpanPrediction(span=[5, 6], distributions=rows)
        assert mean_log_prob(pred) == pytest.approx(
            (math.log(0.5) + math.log(0.25)) / 2, abs=1e-12)

    def test_empty_span_raises(self):
        with pytest.raises(EmptySpan):
            mean_log_prob(SpanPrediction(span=[], distributions=uniform(10)[None, :]))


class TestSplice:
    def test_append_at_end(self):
        assert splice("convert string to list".split(), 4, ["in", "java"]) == \
            "convert string to list in java"

    def test_insert_in_middle(self):
        assert splice("fetch the events".split(), 3, ["from", "the", "server"]) == \
            "fetch the events from the server"

    def test_prepend_at_zero(self):
        assert splice(["sort", "list"], 0, ["quickly"]) == "quickly sort list"

    def test_position_out_of_range(self):
        with pytest.raises(IndexError):
            splice(["a", "b"], 3, ["x"])
        with pytest.raises(IndexError):
            splice(["a", "b"], -1, ["x"])

    def test_empty_span_rejected(self):
        with pytest.raises(ValueError):
            splice(["a"], 0, [])


class StubModel:
    """Carries only what expand() needs besides infill: a vocabulary."""

    def __init__(self, vocab):
        self.vocab = vocab


@pytest.fixture()
def stub_vocab():
    return Vocabulary([f"t{i}" for i in range(20)])


def patch_infill(monkeypatch, table):
    """Route requery.expand's infill calls through a fixed lookup table."""
    def fake_infill(model, corrupted, m=10, mode="greedy", rng=None):
        return table[tuple(corrupted)]
    monkeypatch.setattr("requery.expand.infill", fake_infill)


def one_step(vocab_size, token_id, *pairs):
    """Prediction with one content step and an uninformative end step."""
    return SpanPrediction(span=[token_id],
                          distributions=np.stack([dist(vocab_size, *pairs),
                                                  uniform(vocab_size)]))


class TestExpand:
    def test_entr_puts_strictly_lowest_entropy_position_first(self, monkeypatch, stub_vocab):
        query = ["t0", "t1", "t2"]
        V = stub_vocab.size
        spreads = {0: [(5, 0.25), (6, 0.25), (7, 0.25), (8, 0.25)],
                   1: [(5, 0.5), (6, 0.5)],
                   2: [(5, 1.0)],
                   3: [(5, 0.4), (6, 0.6)]}
        table = {tuple(v): one_step(V, 9 + pos, *spreads[pos])
                 for pos, v in enumerate(enumerate_candidates(query))}
        patch_infill(monkeypatch, table)
        out = expand(query, StubModel(stub_vocab), ExpanderConfig(k=2, strategy=Strategy.ENTR))
        assert [c.position for c in out] == [2, 3]
        # verify against an independent entropy computation
        entropies = {pos: -sum(p * math.log(p) for _, p in spreads[pos])
                     for pos in spreads}
        best = sorted(entropies, key=lambda pos: (entropies[pos], pos))[:2]
        assert [c.position for c in out] == best
        assert out[0].ig == pytest.approx(0.0, abs=1e-12)

    def test_scores_sorted_non_increasing_and_bounded(self, monkeypatch, stub_vocab):
        query = ["t0", "t1", "t2", "t3"]
        V = stub_vocab.size
        rng = np.random.default_rng(1)
        table = {}
        for pos, v in enumerate(enumerate_candidates(query)):
            raw = rng.random(V)
            row = raw / raw.sum()
            table[tuple(v)] = SpanPrediction(span=[5 + pos], distributions=row[None, :])
        patch_infill(monkeypatch, table)
        out = expand(query, StubModel(stub_vocab), ExpanderConfig(k=5, strategy=Strategy.ENTR))
        scores = [c.score for c in out]
        assert scores == sorted(scores, reverse=True)
        assert all(-math.log(V) - 1e-9 <= c.ig <= 0.0 for c in out)
        assert len(out) <= 5

    def test_prob_and_entr_can_disagree(self, monkeypatch, stub_vocab):
        # position 0: peaked argmax but long tail (high prob, high entropy)
        # position 1: two-way split (lower prob, lower entropy)
        query = ["t0"]
        V = stub_vocab.size
        tail = [(i, 0.4 / 10) for i in range(6, 16)]
        table = {tuple(enumerate_candidates(query)[0]): one_step(V, 5, (5, 0.6), *tail),
                 tuple(enumerate_candidates(query)[1]): one_step(V, 5, (5, 0.5), (6, 0.5))}
        patch_infill(monkeypatch, table)
        stub = StubModel(stub_vocab)
        entr = expand(query, stub, ExpanderConfig(k=1, strategy=Strategy.ENTR))
        prob = expand(query, stub, ExpanderConfig(k=1, strategy=Strategy.PROB))
        assert entr[0].position == 1
        assert prob[0].position == 0
        assert prob[0].score == pytest.approx(math.log(0.6), abs=1e-12)

    def test_duplicate_reformulations_collapse_to_best(self, monkeypatch, stub_vocab):
        query = ["t7", "t7"]  # inserting t7 anywhere yields "t7 t7 t7"
        V = stub_vocab.size
        spreads = {0: [(5, 0.5), (6, 0.5)], 1: [(5, 1.0)], 2: [(5, 0.25)] + [(6, 0.75)]}
        table = {tuple(v): one_step(V, 12, *spreads[pos])  # token 12 == "t7"
                 for pos, v in enumerate(enumerate_candidates(query))}
        patch_infill(monkeypatch, table)
        out = expand(query, StubModel(stub_vocab), ExpanderConfig(k=3, strategy=Strategy.ENTR))
        assert len(out) == 1
        assert out[0].reformulated == "t7 t7 t7"
        assert out[0].position == 1  # the zero-entropy variant wins

    def test_tie_breaks_by_smaller_position(self, monkeypatch, stub_vocab):
        query = ["t0", "t1"]
        V = stub_vocab.size
        table = {tuple(v): one_step(V, 6 + pos, (5, 1.0))
                 for pos, v in enumerate(enumerate_candidates(query))}
        patch_infill(monkeypatch, table)
        out = expand(query, StubModel(stub_vocab), ExpanderConfig(k=3, strategy=Strategy.ENTR))
        assert [c.position for c in out] == [0, 1, 2]

    def test_empty_spans_are_skipped(self, monkeypatch, stub_vocab):
        query = ["t0", "t1"]
        V = stub_vocab.size
        empty = SpanPrediction(span=[], distributions=uniform(V)[None, :])
        table = {tuple(v): empty for v in enumerate_candidates(query)}
        table[tuple(enumerate_candidates(query)[1])] = one_step(V, 7, (5, 0.5), (6, 0.5))
        patch_infill(monkeypatch, table)
        out = expand(query, StubModel(stub_vocab), ExpanderConfig(k=3, strategy=Strategy.ENTR))
        assert [c.position for c in out] == [1]

    def test_all_empty_spans_give_empty_result(self, monkeypatch, stub_vocab):
        query = ["t0"]
        empty = SpanPrediction(span=[], distributions=uniform(stub_vocab.size)[None, :])
        table = {tuple(v): empty for v in enumerate_candidates(query)}
        patch_infill(monkeypatch, table)
        assert expand(query, StubModel(stub_vocab),
                      ExpanderConfig(k=2, strategy=Strategy.ENTR)) == []

    def test_rand_returns_positions_in_order_and_reproducibly(self, monkeypatch, stub_vocab):
        query = ["t0", "t1", "t2", "t3", "t4"]
        V = stub_vocab.size
        table = {tuple(v): one_step(V, 6, (5, 0.5), (6, 0.5))
                 for v in enumerate_candidates(query)}
        patch_infill(monkeypatch, table)
        stub = StubModel(stub_vocab)
        cfg = ExpanderConfig(k=3, strategy=Strategy.RAND)
        a = expand(query, stub, cfg, rng=np.random.default_rng(7))
        b = expand(query, stub, cfg, rng=np.random.default_rng(7))
        assert [c.position for c in a] == [c.position for c in b]
        assert [c.position for c in a] == sorted(c.position for c in a)
        assert len(a) == 3
        assert len(set(c.position for c in a)) == 3

    def test_rand_without_rng_rejected(self, stub_vocab):
        with pytest.raises(ConfigError):
            expand(["t0"], StubModel(stub_vocab),
                   ExpanderConfig(k=1, strategy=Strategy.RAND))

    def test_empty_query_propagates(self, stub_vocab):
        with pytest.raises(EmptyQuery):
            expand([], StubModel(stub_vocab), ExpanderConfig())

    def test_expander_config_validation(self):
        with pytest.raises(ConfigError):
            ExpanderConfig(k=0)
        with pytest.raises(ConfigError):
            ExpanderConfig(m=0)

    def test_defaults_are_k3_m10_entr(self):
        cfg = ExpanderConfig()
        assert (cfg.k, cfg.m, cfg.strategy) == (3, 10, Strategy.ENTR)


class TestExpandWithRealModel:
    def test_candidates_keep_original_words_in_order(self, toy_setup):
        model = toy_setup["model"]
        query = toy_setup["queries"][0]
        out = expand(query, model, ExpanderConfig(k=3, m=5))
        assert out, "trained model should produce at least one non-empty span"
        for cand in out:
            assert cand.reformulated.split() == \
                query[:cand.position] + cand.span + query[cand.position:]
            assert -math.log(model.vocab.size) - 1e-9 <= cand.ig <= 0.0
            assert cand.span
        scores = [c.score for c in out]
        assert scores == sorted(scores, reverse=True)
