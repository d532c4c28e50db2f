import json

import numpy as np
import pytest

from requery.corpus import Document
from requery.errors import CorpusFormatError, CorruptFixture, EmptyEvaluation
from requery.evaluate import (EvalCase, ablate_k, ablate_strategy, evaluate,
                              format_report, format_table, load_eval_cases,
                              make_reformulator, mrr, write_report)
from requery.expand import ExpanderConfig, Strategy
from requery.search import build_index

DOCS = [Document(f"d{i}", text, "pass") for i, text in enumerate([
    "reverse an array in java",
    "reverse an array in python",
    "sort a list quickly",
    "parse json into a dictionary",
    "read lines from a file",
    "merge two sorted arrays",
    "split a string by comma",
    "walk a binary tree",
    "copy a file to a directory",
    "join strings with separator",
])]

CASES = [EvalCase("reverse array java", "d0"),
         EvalCase("reverse array python", "d1"),
         EvalCase("sort list", "d2"),
         EvalCase("parse json dictionary", "d3"),
         EvalCase("read file lines", "d4"),
         EvalCase("merge sorted arrays", "d5"),
         EvalCase("split string comma", "d6"),
         EvalCase("binary tree walk", "d7"),
         EvalCase("copy file directory", "d8"),
         EvalCase("join strings separator", "d9")]


class TestMrr:
    def test_single_perfect_hit(self):
        assert mrr([1.0]) == 1.0

    def test_ranks_one_two_four(self):
        assert mrr([1.0, 0.5, 0.25]) == pytest.approx(0.5833333333333334, abs=1e-12)

    def test_all_misses(self):
        assert mrr([0.0, 0.0, 0.0]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyEvaluation):
            mrr([])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            mrr([0.5, 1.5])

    def test_permutation_invariant(self):
        values = [1.0, 0.0, 0.25, 0.5, 1.0]
        rng = np.random.default_rng(0)
        shuffled = list(values)
        rng.shuffle(shuffled)
        assert mrr(values) == pytest.approx(mrr(shuffled), abs=1e-15)


def independent_mrr(index, cases, top_n=100):
    """Plain re-implementation of the no-reformulation protocol."""
    total = 0.0
    for case in cases:
        rank = None
        for i, r in enumerate(index.search(case.query, top_n=top_n), start=1):
            if r.doc_id == case.relevant_doc_id:
                rank = i
                break
        total += 0.0 if rank is None else 1.0 / rank
    return total / len(cases)


@pytest.fixture(scope="module")
def index():
    return build_index(DOCS)


class TestEvaluate:

    def test_no_reformulator_equals_independent_oracle(self, index):
        report = evaluate(index, None, CASES)
        assert report.mrr == independent_mrr(index, CASES)
        assert len(report.per_query) == len(CASES)

    def test_best_rank_across_candidates(self, index):
        # the original query ranks d1 below d0; a candidate naming python wins
        case = EvalCase("reverse array", "d1")
        plain = evaluate(index, None, [case])
        assert plain.per_query[0].best_rank == 2
        reformulator = lambda q: [q, q + " in python", q + " in java"]
        report = evaluate(index, reformulator, [case], use_first=3)
        assert report.per_query[0].best_rank == 1
        assert report.per_query[0].reciprocal == 1.0
        assert report.per_query[0].chosen_reformulation == "reverse array in python"

    def test_use_first_limits_candidates(self, index):
        case = EvalCase("reverse array", "d1")
        reformulator = lambda q: [q + " in scala", q + " in python"]
        only_first = evaluate(index, reformulator, [case], use_first=1)
        both = evaluate(index, reformulator, [case], use_first=2)
        assert only_first.per_query[0].best_rank == 2
        assert both.per_query[0].best_rank == 1

    def test_miss_scores_zero(self, index):
        report = evaluate(index, None, [EvalCase("quaternion manifold flux", "d0")])
        assert report.mrr == 0.0
        assert report.per_query[0].best_rank is None

    def test_missing_relevant_doc_fails_fast(self, index):
        with pytest.raises(CorruptFixture):
            evaluate(index, None, [EvalCase("anything", "no-such-doc")])

    def test_reformulator_with_no_candidates_counts_as_miss(self, index):
        report = evaluate(index, lambda q: [], [EvalCase("reverse array", "d0")])
        assert report.mrr == 0.0

    def test_monotone_in_k_with_prefix_candidates(self, index):
        # candidate lists are prefixes across use_first values by protocol
        reformulator = lambda q: [q + " in scala", q, q + " in python"]
        cases = [EvalCase("reverse array", "d1"), EvalCase("sort list", "d2")]
        values = [evaluate(index, reformulator, cases, use_first=k).mrr
                  for k in (1, 2, 3)]
        assert values == sorted(values)

    def test_config_snapshot_recorded(self, index):
        report = evaluate(index, None, CASES, top_n=7, config_snapshot={"tag": 1})
        assert report.config_snapshot["top_n"] == 7
        assert report.config_snapshot["tag"] == 1
        assert report.config_snapshot["reformulated"] is False


class TestAblations:
    def test_strategy_table_holds_exactly_requested_strategies(self, toy_setup):
        docs = [Document(f"d{i}", " ".join(q), "pass")
                for i, q in enumerate(toy_setup["queries"][:8])]
        index = build_index(docs)
        cases = [EvalCase(" ".join(q[:3]), f"d{i}") for i, q in
                 enumerate(toy_setup["queries"][:8])]
        table = ablate_strategy(index, toy_setup["model"], cases,
                                strategies=(Strategy.ENTR, Strategy.RAND),
                                seeds=(1, 2), k=2, m=4)
        assert set(table) == {"ENTR", "RAND"}
        assert all(0.0 <= v <= 1.0 for v in table.values())

    def test_k_table_keys_and_monotonicity(self, toy_setup):
        docs = [Document(f"d{i}", " ".join(q), "pass")
                for i, q in enumerate(toy_setup["queries"][:8])]
        index = build_index(docs)
        cases = [EvalCase(" ".join(q[:3]), f"d{i}") for i, q in
                 enumerate(toy_setup["queries"][:8])]
        table = ablate_k(index, toy_setup["model"], cases, k_values=(1, 2, 3), m=4)
        assert list(table) == [1, 2, 3]
        assert table[1] <= table[2] <= table[3]


class TestReformulatorFactory:
    def test_rand_reformulator_reproducible(self, toy_setup):
        cfg = ExpanderConfig(k=2, m=4, strategy=Strategy.RAND)
        a = make_reformulator(toy_setup["model"], cfg, seed=5)
        b = make_reformulator(toy_setup["model"], cfg, seed=5)
        query = " ".join(toy_setup["queries"][0][:4])
        assert a(query) == b(query)

    def test_entr_reformulator_returns_strings(self, toy_setup):
        cfg = ExpanderConfig(k=2, m=4, strategy=Strategy.ENTR)
        out = make_reformulator(toy_setup["model"], cfg)(" ".join(toy_setup["queries"][0][:4]))
        assert all(isinstance(s, str) and s for s in out)
        assert len(out) <= 2


class TestReportOutput:
    def test_write_report_jsonl_layout(self, tmp_path):
        index = build_index(DOCS)
        report = evaluate(index, None, CASES[:3])
        path = tmp_path / "report.jsonl"
        write_report(report, path)
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert lines[0]["type"] == "summary"
        assert lines[0]["mrr"] == pytest.approx(report.mrr)
        assert [l["type"] for l in lines[1:]] == ["case"] * 3
        assert {"query", "best_rank", "reciprocal", "chosen_reformulation"} <= set(lines[1])

    def test_write_report_deterministic_bytes(self, tmp_path):
        index = build_index(DOCS)
        report = evaluate(index, None, CASES[:3])
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_report(report, a)
        write_report(report, b)
        assert a.read_bytes() == b.read_bytes()

    def test_format_helpers(self):
        index = build_index(DOCS)
        report = evaluate(index, None, CASES[:3])
        assert "MRR" in format_report(report)
        table = format_table({"ENTR": 0.5, "RAND": 0.25}, ("strategy", "MRR"))
        assert "ENTR" in table and "0.5000" in table


class TestLoadCases:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "cases.jsonl"
        path.write_text('{"query": "q1", "relevant_doc_id": "d1"}\n')
        assert load_eval_cases(path) == [EvalCase("q1", "d1")]

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "cases.jsonl"
        path.write_text('{"query": "q1"}\n')
        with pytest.raises(CorpusFormatError):
            load_eval_cases(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "cases.jsonl"
        path.write_text("")
        with pytest.raises(CorpusFormatError):
            load_eval_cases(path)
