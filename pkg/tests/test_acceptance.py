"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line with the measured values. Run with `pytest -s` to see the
lines as they go."""

import hashlib
import random
import string
import subprocess
import sys

import numpy as np

from crisisbot import classifier, corpus, embednet, evalkit
from crisisbot.classifier import UncalibratableError
from crisisbot.corpus import LabeledExample
from crisisbot.datastore import ConversationStore
from crisisbot.dialogue import build_engine
from crisisbot.embednet import Hyperparams, cosine, init_model, loss, loss_and_gradients
from crisisbot.featurizer import SparseVector, Vocabulary, build_vocabulary, char_ngrams, normalize


def _report(name, ok, details):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {details}")
    assert ok, f"{name}: {details}"


class TestTrainingSeparability:
    def test_seed_corpus_separates_with_default_hyperparameters(self, seed_bundle):
        catalog = seed_bundle.catalog
        n_intents = len(catalog.entries)
        n_groups = len(catalog.groups)
        train_acc = seed_bundle.report.final_train_accuracy
        val_acc = classifier.evaluate_accuracy(seed_bundle.model, seed_bundle.val_set)
        runtime = seed_bundle.train_seconds
        ok = (
            n_intents >= 25
            and n_groups == 6
            and train_acc == 1.0
            and val_acc >= 0.8
            and runtime < 300.0
        )
        _report(
            "training separability",
            ok,
            f"{n_intents} intents, {n_groups} groups, train_accuracy={train_acc}, "
            f"validation_accuracy={val_acc:.3f}, runtime={runtime:.1f}s (< 300s)",
        )


class TestThresholdFormula:
    N_FIXTURES = 200

    def _random_fixture(self, rng):
        intents = [f"intent{i}" for i in range(int(rng.integers(2, 6)))]
        words = ["red", "blue", "green", "apple", "wave", "tree", "sea", "pie", "salem"]
        examples = []
        for intent in intents:
            for _ in range(int(rng.integers(1, 4))):
                text = " ".join(rng.choice(words, size=int(rng.integers(1, 4))))
                examples.append(LabeledExample(text, intent))
        vocab = build_vocabulary(examples)
        hp = Hyperparams(dim_hidden=8, dim_embed=6, rng_seed=int(rng.integers(1 << 31)))
        return init_model(vocab, hp), examples

    def test_threshold_is_exactly_min_over_correct(self):
        rng = np.random.default_rng(2026)
        formula_checked = dominance_checked = uncalibratable = 0
        for _ in range(self.N_FIXTURES):
            model, examples = self._random_fixture(rng)
            # the independent oracle: re-predict and take the plain min
            correct_confs = []
            for ex in examples:
                top_intent, conf = classifier.predict(model, ex.text).top
                if top_intent == ex.intent_id:
                    correct_confs.append(conf)
            try:
                report = classifier.calibrate_threshold(model, examples)
            except UncalibratableError:
                assert not correct_confs, "uncalibratable despite correct examples"
                uncalibratable += 1
                continue
            assert report.threshold == min(correct_confs)
            formula_checked += 1
            for row in report.per_example:
                if row.correct:
                    assert row.confidence >= report.threshold
                    dominance_checked += 1
        ok = formula_checked + uncalibratable == self.N_FIXTURES and formula_checked > 0
        _report(
            "threshold formula",
            ok,
            f"{self.N_FIXTURES} randomized fixtures ({formula_checked} calibratable, "
            f"{uncalibratable} uncalibratable-by-construction), exact min on all, "
            f"{dominance_checked} dominance checks, 0 violations",
        )


class TestGradientCheck:
    def test_tiny_model_gradients(self):
        vocab = Vocabulary(
            gram_to_index={f"g{i:02d}": i for i in range(10)},
            tag_to_index={f"intent{i}": i for i in range(3)},
        )
        hp = Hyperparams(dim_hidden=8, rng_seed=11)
        model = init_model(vocab, hp)
        x = SparseVector(pairs=((0, 1), (3, 2), (7, 1), (9, 1)), dimension=10)
        example, negatives = (x, 1), [0, 2]

        idx = np.array([i for i, _ in x.pairs])
        cnt = np.array([float(c) for _, c in x.pairs])
        _, pre1, _, out = embednet._forward(model, idx, cnt)
        scores = [cosine(out, model.label_table[j]) for j in (1, 0, 2)]
        assert np.min(np.abs(pre1)) > 1e-3, "relu kink too close"
        assert all(abs(s - hp.margin_pos) > 1e-3 and abs(s - hp.margin_neg) > 1e-3 for s in scores)

        _, grads = loss_and_gradients(model, example, negatives)
        step, worst = 1e-4, 0.0

        def numeric(arr, index):
            orig = arr[index]
            arr[index] = orig + step
            up = loss(model, example, negatives)
            arr[index] = orig - step
            down = loss(model, example, negatives)
            arr[index] = orig
            return (up - down) / (2 * step)

        for name in ("W1", "b1", "W2", "b2"):
            arr, g = getattr(model, name), grads[name]
            for index in np.ndindex(arr.shape):
                n = numeric(arr, index)
                worst = max(worst, abs(g[index] - n) / max(1e-6, abs(g[index]) + abs(n)))
        for table, rows in (("gram_table", grads["gram_rows"]), ("label_table", grads["label_rows"])):
            arr = getattr(model, table)
            for r in range(arr.shape[0]):
                g_row = rows.get(r, np.zeros(arr.shape[1]))
                for c in range(arr.shape[1]):
                    n = numeric(arr, (r, c))
                    worst = max(worst, abs(g_row[c] - n) / max(1e-6, abs(g_row[c]) + abs(n)))

        _report(
            "gradient check",
            worst < 1e-3,
            f"max relative error {worst:.2e} over every parameter group (< 1e-3)",
        )


class TestFeaturizerCountLaw:
    ALPHABETS = [
        string.ascii_lowercase + string.digits + "  '?-",
        "ابتثجحخدذرزسشصضطظعغفقكلمنهوي ءآأإ؟ ًٌٍَُِّ",
        "abcàéèêçñüß 3720",
        "干净的文本 空格 和标点。",
    ]

    def test_bag_mass_matches_formula_on_1000_strings(self):
        rng = random.Random(424242)
        failures = 0
        for k in range(1000):
            alphabet = self.ALPHABETS[k % len(self.ALPHABETS)]
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
            text = normalize(raw)
            m = len(text)
            expected = sum(max(0, m - n + 1) for n in range(2, 5))
            if char_ngrams(text).total_mass() != expected:
                failures += 1
        _report(
            "featurizer count law",
            failures == 0,
            f"1000 random Unicode strings across {len(self.ALPHABETS)} scripts, "
            f"{failures} failures",
        )


class TestEndToEndRouting:
    def test_every_seed_question_routes_and_gibberish_falls_back(self, seed_bundle, tmp_path):
        from fastapi.testclient import TestClient

        from crisisbot.gateway import create_app

        store = ConversationStore(tmp_path / "data")
        engine = build_engine(
            seed_bundle.model, seed_bundle.threshold, seed_bundle.catalog, store=store
        )
        app = create_app(engine)
        train_texts = {ex.text for ex in seed_bundle.train_set}
        by_id = {e.intent_id: e for e in seed_bundle.catalog.entries}

        train_total = train_ok = val_total = val_ok = 0
        with TestClient(app) as client:
            for entry in seed_bundle.catalog.entries:
                for question in entry.questions:
                    resp = client.post(
                        "/v1/messages",
                        json={"session_id": "acceptance", "text": question},
                    )
                    assert resp.status_code == 200
                    doc = resp.json()
                    good = (
                        doc["kind"] == "answer"
                        and doc["text"] == entry.answer
                        and doc["language_group"] == by_id[entry.intent_id].language_group
                    )
                    if question in train_texts:
                        train_total += 1
                        train_ok += good
                    else:
                        val_total += 1
                        val_ok += good

            rng = random.Random(20260810)
            gibberish = [
                "".join(rng.choice(string.ascii_lowercase + "    ")
                        for _ in range(rng.randint(3, 30)))
                for _ in range(50)
            ]
            lines_before = len(store.unanswered_lines())
            fallbacks = 0
            for text in gibberish:
                doc = client.post(
                    "/v1/messages", json={"session_id": "fuzz", "text": text}
                ).json()
                fallbacks += doc["kind"] == "fallback"
            lines_after = len(store.unanswered_lines())

        store.close()
        ok = (
            train_ok == train_total
            and fallbacks >= 45
            and lines_after - lines_before == fallbacks
        )
        _report(
            "end-to-end routing",
            ok,
            f"training questions {train_ok}/{train_total} exact answer+group, "
            f"validation {val_ok}/{val_total}, gibberish fallback {fallbacks}/50 "
            f"(>= 45), unanswered log +{lines_after - lines_before} "
            f"(= one line per fallback)",
        )


class TestSsaReproduction:
    def test_68_60_fixture(self, tmp_path):
        lines = ["conversation_id\tturn_index\tjudge_id\tsensible\tspecific"]
        for t in range(100):
            sensible = 1 if t < 68 else 0
            specific = 1 if t < 60 else 0
            for judge in ("j1", "j2", "j3"):
                lines.append(f"conv\t{t}\t{judge}\t{sensible}\t{specific}")
        path = tmp_path / "judgments.tsv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        report = evalkit.ssa(evalkit.ingest_judgments(path))
        ok = (
            abs(report.sensibleness - 0.68) <= 1e-3
            and abs(report.specificity - 0.60) <= 1e-3
            and abs(report.ssa - 0.64) <= 1e-3
        )
        _report(
            "SSA reproduction",
            ok,
            f"sensibleness={report.sensibleness:.4f} (0.68±0.001), "
            f"specificity={report.specificity:.4f} (0.60±0.001), "
            f"ssa={report.ssa:.4f} (0.64±0.001)",
        )


class TestStickinessFormula:
    def test_scaled_fixture_and_conversation_stats(self, tmp_path):
        from datetime import date, datetime, timezone

        from crisisbot.datastore import rfc3339

        store = ConversationStore(tmp_path / "data")

        def ts(day, hour=12):
            return rfc3339(datetime(2020, 3, day, hour, tzinfo=timezone.utc))

        rows = []
        for k in range(10000):
            day = 25 if k < 1685 else 5 + (k % 19)
            rows.append((f"u{k:05d}", "web", ts(day), "q", "answer", None, 0.5))
        store.record_turns(rows)
        sticky = store.usage_stats(
            datetime(2020, 3, 1, tzinfo=timezone.utc),
            datetime(2020, 4, 1, tzinfo=timezone.utc),
            day=date(2020, 3, 25),
            month_start=date(2020, 3, 1),
        )
        store.close()

        store2 = ConversationStore(tmp_path / "data2")
        counts = [1, 32, 4, 5, 6, 7, 8, 2, 3, 6]  # sums to 74 over 10 conversations
        rows = []
        for k, n in enumerate(counts):
            for i in range(n):
                rows.append((f"conv{k}", "web", ts(23, hour=1 + i % 20), f"q{i}", "answer", None, 0.5))
        store2.record_turns(rows)
        table = store2.usage_stats(
            datetime(2020, 3, 23, tzinfo=timezone.utc),
            datetime(2020, 6, 19, tzinfo=timezone.utc),
        )
        store2.close()

        ok = (
            sticky.stickiness == 0.1685
            and table.avg_q_per_conv == 7.4
            and table.min_q_per_conv == 1
            and table.max_q_per_conv == 32
        )
        _report(
            "stickiness formula",
            ok,
            f"1685/10000 sessions -> stickiness={sticky.stickiness} (exactly 0.1685); "
            f"conversation stats avg={table.avg_q_per_conv} min={table.min_q_per_conv} "
            f"max={table.max_q_per_conv} (exactly 7.4/1/32)",
        )


class TestDeterminism:
    def test_two_full_train_calibrate_runs_are_bit_identical(self, tmp_path):
        catalog = str(corpus.seed_catalog_path())
        digests, thresholds = [], []
        for run in ("a", "b"):
            model_path = tmp_path / f"model_{run}.cbem"
            result = subprocess.run(
                [sys.executable, "-m", "crisisbot", "train",
                 "--catalog", catalog, "--out", str(model_path), "--seed", "42"],
                capture_output=True, text=True, timeout=290,
            )
            assert result.returncode == 0, result.stderr
            digests.append(hashlib.sha256(model_path.read_bytes()).hexdigest())

            report_path = tmp_path / f"calibration_{run}.tsv"
            result = subprocess.run(
                [sys.executable, "-m", "crisisbot", "calibrate",
                 "--catalog", catalog, "--model", str(model_path),
                 "--out", str(report_path), "--seed", "42"],
                capture_output=True, text=True, timeout=120,
            )
            assert result.returncode == 0, result.stderr
            thresholds.append(classifier.read_calibration_threshold(report_path))

        ok = digests[0] == digests[1] and thresholds[0] == thresholds[1]
        _report(
            "determinism",
            ok,
            f"model sha256 {digests[0][:16]}… == {digests[1][:16]}…, "
            f"threshold {thresholds[0]!r} == {thresholds[1]!r}",
        )
