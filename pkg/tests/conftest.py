import time

import pytest

from crisisbot import classifier, corpus, embednet, featurizer


class SeedBundle:
    """Everything trained once per session on the shipped seed corpus."""

    def __init__(self):
        self.catalog = corpus.load_catalog(corpus.seed_catalog_path())
        self.examples = corpus.flatten(self.catalog)
        self.train_set, self.val_set = corpus.split(self.examples, 0.2, 42)
        self.vocab = featurizer.build_vocabulary(self.train_set)
        self.hp = embednet.Hyperparams(rng_seed=42)
        model = embednet.init_model(self.vocab, self.hp)
        encoded = embednet.encode_examples(self.train_set, self.vocab)
        t0 = time.monotonic()
        self.model, self.report = embednet.train(model, encoded, self.hp)
        self.train_seconds = time.monotonic() - t0
        self.calibration = classifier.calibrate_threshold(self.model, self.val_set)
        self.threshold = self.calibration.threshold


@pytest.fixture(scope="session")
def seed_bundle():
    return SeedBundle()


@pytest.fixture()
def tiny_catalog_text():
    """A minimal valid catalog used by corpus/CLI tests."""
    return """
language_groups:
  english: "English"
  fr_tunizi: "French"

fallbacks:
  english: "Sorry, could you rephrase?"
  fr_tunizi: "Desole, pouvez-vous reformuler ?"

intents:
  - id: hello.english
    category: chitchat
    language_group: english
    questions: ["hello there", "hi there", "hello bot", "hi bot", "hey there"]
    answer: "Hello! How can I help?"
  - id: hours.english
    category: faq
    language_group: english
    questions:
      - "what are your opening hours"
      - "when are you open"
      - "opening hours please"
      - "what time do you open"
      - "when do you open"
    answer: "We are open all day, every day."
  - id: merci.fr_tunizi
    category: chitchat
    language_group: fr_tunizi
    questions: ["merci", "merci beaucoup", "merci bien", "grand merci", "merci merci"]
    answer: "Avec plaisir."
"""


@pytest.fixture()
def tiny_catalog(tmp_path, tiny_catalog_text):
    path = tmp_path / "catalog.yaml"
    path.write_text(tiny_catalog_text, encoding="utf-8")
    return corpus.load_catalog(path)
