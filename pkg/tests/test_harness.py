"""Synthetic corpus, replay accounting and pacing, auto-label statistics."""

import json

import pytest

from smstriage.errors import ValidationError
from smstriage.harness import (
    LocalClient,
    ReplayAborted,
    ReplayPlan,
    SyntheticCategory,
    SyntheticSpec,
    auto_label,
    default_health_spec,
    generate_synthetic,
    load_corpus,
    replay,
    truth_map,
)


class TestSynthetic:
    def test_deterministic_bytes(self, tmp_path):
        spec = default_health_spec(messages=300, seed=11)
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        generate_synthetic(spec, a)
        generate_synthetic(default_health_spec(messages=300, seed=11), b)
        assert a.read_bytes() == b.read_bytes()

    def test_char_limit_respected(self, tmp_path):
        spec = default_health_spec(messages=400, seed=3, char_limit=60)
        path = tmp_path / "c.jsonl"
        generate_synthetic(spec, path)
        for row in load_corpus(path):
            assert 1 <= len(row["text"]) <= 60

    def test_true_category_recorded(self, tmp_path):
        spec = default_health_spec(messages=50, seed=1)
        path = tmp_path / "d.jsonl"
        generate_synthetic(spec, path)
        names = {c.name for c in spec.categories}
        rows = load_corpus(path)
        assert len(rows) == 50
        assert all(row["trueCategory"] in names for row in rows)

    def test_equal_weights_balanced_chi_square(self, tmp_path):
        spec = default_health_spec(messages=8000, seed=5)
        path = tmp_path / "e.jsonl"
        generate_synthetic(spec, path)
        counts: dict[str, int] = {}
        for row in load_corpus(path):
            counts[row["trueCategory"]] = counts.get(row["trueCategory"], 0) + 1
        expected = 8000 / 8
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        # 99.9th percentile of chi-square with 7 degrees of freedom
        from scipy.stats import chi2 as chi2_dist

        assert chi2 < chi2_dist.ppf(0.999, df=7)

    def test_weight_sum_violation(self, tmp_path):
        spec = SyntheticSpec(
            categories=[
                SyntheticCategory("A", ["a"], 0.5),
                SyntheticCategory("B", ["b"], 0.6),
            ],
            noise_tokens=["x"],
            messages=10,
            seed=0,
        )
        with pytest.raises(ValidationError):
            generate_synthetic(spec, tmp_path / "f.jsonl")

    def test_spec_roundtrip_from_dict(self):
        data = {
            "categories": [
                {"name": "A", "keywords": ["aa", "ab"], "weight": 0.5},
                {"name": "B", "keywords": ["ba"], "weight": 0.5},
            ],
            "noiseTokens": ["x", "y"],
            "messages": 5,
            "seed": 2,
        }
        spec = SyntheticSpec.from_dict(data)
        assert spec.messages == 5
        assert spec.categories[1].name == "B"


def setup_target(sync_service, n_messages=0, **schema_overrides):
    service = sync_service()
    coll = service.create_collection("replay-target", 160)
    defaults = dict(retrain_every=100000, num_trees=10, k=100, seed=9)
    defaults.update(schema_overrides)
    schema = service.create_classifier(
        coll.id,
        [(name, desc) for name, desc in
         [("Alpha", "a"), ("Beta", "b"), ("Gamma", "c"), ("Delta", "d")]],
        **defaults,
    )
    return service, coll, schema


class TestReplay:
    def _write_corpus(self, path, rows):
        path.write_text(
            "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
        )

    def test_accounting_reconciles(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        rows = [{"text": "message %d" % i} for i in range(40)]
        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, rows)
        plan = ReplayPlan(source_file=path, endpoint_path=coll.endpoint_path)
        report = replay(plan, LocalClient(service))
        assert report.sent == 40
        assert report.rejected == 0
        assert report.sent + report.rejected + report.skipped_by_limit == 40
        assert service.get_collection(coll.id).received == 40

    def test_malformed_lines_rejected(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        path = tmp_path / "corpus.jsonl"
        lines = [
            json.dumps({"text": "good one"}),
            "{not json at all",
            json.dumps({"noText": True}),
            json.dumps({"text": "another good"}),
            json.dumps({"text": ""}),  # fails gateway validation
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        report = replay(
            ReplayPlan(source_file=path, endpoint_path=coll.endpoint_path),
            LocalClient(service),
        )
        assert report.sent == 2
        assert report.rejected == 3

    def test_limit_zero_immediate(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, [{"text": "m %d" % i} for i in range(10)])
        report = replay(
            ReplayPlan(source_file=path, endpoint_path=coll.endpoint_path, limit=0),
            LocalClient(service),
        )
        assert report.sent == 0
        assert report.skipped_by_limit == 10

    def test_limit_beyond_file_rejected(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, [{"text": "m"}])
        with pytest.raises(ValidationError):
            replay(
                ReplayPlan(
                    source_file=path, endpoint_path=coll.endpoint_path, limit=5
                ),
                LocalClient(service),
            )

    def test_pacing(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, [{"text": "m %d" % i} for i in range(150)])
        report = replay(
            ReplayPlan(
                source_file=path, endpoint_path=coll.endpoint_path, rate=500.0
            ),
            LocalClient(service),
        )
        # schedule lower bound: message i sends no earlier than i/rate
        assert report.elapsed >= 149 / 500.0
        assert report.elapsed < 0.9
        assert report.achieved_rate <= 510

    def test_shuffle_seed_changes_order_not_count(self, tmp_path, sync_service):
        service, coll, _ = setup_target(sync_service)
        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, [{"text": "m %d" % i} for i in range(30)])
        report = replay(
            ReplayPlan(
                source_file=path,
                endpoint_path=coll.endpoint_path,
                shuffle_seed=7,
            ),
            LocalClient(service),
        )
        assert report.sent == 30
        texts = [
            service.gateway.messages[mid].text for mid in report.message_ids
        ]
        assert texts != ["m %d" % i for i in range(30)]
        assert sorted(texts) == sorted("m %d" % i for i in range(30))

    def test_unreachable_target_aborts_with_partial_report(self, tmp_path):
        from smstriage.harness import HttpClient

        path = tmp_path / "corpus.jsonl"
        self._write_corpus(path, [{"text": "m"}])
        client = HttpClient("http://127.0.0.1:9", retries=2)
        with pytest.raises(ReplayAborted) as info:
            replay(
                ReplayPlan(source_file=path, endpoint_path="whatever"), client
            )
        client.close()
        assert info.value.report is not None
        assert info.value.report.sent == 0


def vote_pattern_oracle(accuracy: float, n_categories: int):
    """Exact 2-of-3 outcome probabilities by enumerating vote sequences.

    Votes are 'T' (true category, probability = accuracy) or one of the
    n-1 wrong categories (uniform split of the rest). Returns
    (p_resolved_correct, p_resolved_wrong, p_discarded).
    """
    wrong = ["W%d" % i for i in range(n_categories - 1)]
    p_wrong = (1.0 - accuracy) / len(wrong)

    def options():
        yield "T", accuracy
        for w in wrong:
            yield w, p_wrong

    def walk(votes, prob, totals):
        tally = {}
        for v in votes:
            tally[v] = tally.get(v, 0) + 1
        winner = [v for v, n in tally.items() if n >= 2]
        if winner:
            key = "correct" if winner[0] == "T" else "wrong"
            totals[key] += prob
            return
        if len(votes) == 3:
            totals["discarded"] += prob
            return
        for choice, p in options():
            if p > 0:
                walk(votes + [choice], prob * p, totals)

    totals = {"correct": 0.0, "wrong": 0.0, "discarded": 0.0}
    walk([], 1.0, totals)
    return totals["correct"], totals["wrong"], totals["discarded"]


class TestAutoLabel:
    def _flood(self, service, coll, n, seed=4):
        spec = default_health_spec(messages=n, seed=seed)
        names = [c.name for c in spec.categories][:4]
        truth = {}
        import random as _random

        rng = _random.Random(seed)
        for i in range(n):
            cat = names[i % 4]
            text = "q%d %s %s" % (i, cat.lower().replace(" ", ""), rng.choice("abcdef"))
            service.ingest(coll.endpoint_path, text)
            truth[text] = ["Alpha", "Beta", "Gamma", "Delta"][i % 4]
        return truth

    def test_perfect_accuracy_two_votes_per_task(self, sync_service):
        service, coll, schema = setup_target(sync_service)
        truth = self._flood(service, coll, 60)
        client = LocalClient(service)
        report = auto_label(
            client, schema.id, truth, labeler_count=2, accuracy=1.0, seed=1
        )
        assert report.resolved == 60
        assert report.discarded == 0
        assert report.votes == 2 * report.resolved
        assert report.wrong_resolutions == 0

    def test_zero_accuracy_discard_rate(self, sync_service):
        service, coll, schema = setup_target(sync_service)
        truth = self._flood(service, coll, 450)
        client = LocalClient(service)
        report = auto_label(
            client, schema.id, truth, labeler_count=3, accuracy=0.0, seed=2
        )
        total = report.resolved + report.discarded
        assert total == 450
        _, _, p_discard = vote_pattern_oracle(0.0, 4)
        assert p_discard == pytest.approx(2 / 9, abs=1e-12)
        observed = report.discarded / total
        # 3 sigma of a binomial with p = 2/9, n = 450 is ~0.059
        assert abs(observed - p_discard) < 0.06
        assert report.wrong_resolutions == report.resolved

    def test_point_nine_accuracy_error_rate(self, sync_service):
        service, coll, schema = setup_target(sync_service)
        truth = self._flood(service, coll, 500)
        client = LocalClient(service)
        report = auto_label(
            client, schema.id, truth, labeler_count=3, accuracy=0.9, seed=3
        )
        p_correct, p_wrong, p_discard = vote_pattern_oracle(0.9, 4)
        assert p_correct + p_wrong + p_discard == pytest.approx(1.0, abs=1e-12)
        observed_error = report.wrong_resolutions / report.resolved
        expected_error = p_wrong / (p_correct + p_wrong)
        assert abs(observed_error - expected_error) < 0.04
        observed_discard = report.discarded / 500
        assert abs(observed_discard - p_discard) < 0.04

    def test_max_labels_stops_early(self, sync_service):
        service, coll, schema = setup_target(sync_service)
        truth = self._flood(service, coll, 40)
        report = auto_label(
            LocalClient(service), schema.id, truth,
            labeler_count=2, accuracy=1.0, seed=1, max_labels=10,
        )
        assert report.resolved == 10

    def test_deterministic_under_seed(self, sync_service):
        results = []
        for _ in range(2):
            service, coll, schema = setup_target(sync_service)
            truth = self._flood(service, coll, 80)
            report = auto_label(
                LocalClient(service), schema.id, truth,
                labeler_count=3, accuracy=0.7, seed=42,
            )
            results.append(report.to_dict())
        assert results[0] == results[1]


def test_truth_map(tmp_path):
    path = tmp_path / "t.jsonl"
    rows = [
        {"text": "hello there", "trueCategory": "A"},
        {"text": "other text", "trueCategory": "B"},
        {"text": "hello there", "trueCategory": "B"},  # first mapping wins
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    mapping = truth_map(path)
    assert mapping == {"hello there": "A", "other text": "B"}
