import pytest

import reptrack


def test_clean_and_prepare():
    assert reptrack.clean("Look https://t.co/x #MeToo #Brave :)") == "look brave"
    tokens, pos = reptrack.prepare("He grabbed me.")
    assert tokens == ["he", "grabbed", "me", "."]
    assert len(pos) == len(tokens)


def test_filter_examples():
    assert reptrack.extract_tuples("a jerk grab my vagina at a night club in nyc") == [
        ("a jerk", "grab", "my vagina at a night club in nyc")
    ]
    assert not reptrack.passes_filter("he didn't kiss her")
    assert not reptrack.passes_filter("women can abuse men")


def test_ranking_metrics():
    rel = [1, 0, 1, 1]
    assert reptrack.precision_at_k(rel, 2) == 0.5
    assert reptrack.avg_precision_at_k(rel, 4) == pytest.approx((1 + 2 / 3 + 3 / 4) / 3)
    with pytest.raises(ValueError):
        reptrack.precision_at_k(rel, 5)


def test_synth_is_deterministic():
    a = reptrack.synth(50, seed=3)
    assert a == reptrack.synth(50, seed=3)
    assert len(a) == 50 and {"id", "text", "annotation"} <= set(a[0])


@pytest.fixture(scope="module")
def model():
    corpus = reptrack.synth(250, seed=8)
    return reptrack.Model.train(corpus, seed=42, forest__n_trees=10, boost__rounds=10, crf__max_iter=40)


def test_train_score_roundtrip(model, tmp_path):
    docs = [{"id": r["id"], "text": r["text"]} for r in reptrack.synth(60, seed=9)]
    reports = model.score(docs)
    assert [r["id"] for r in reports] == [d["id"] for d in docs]
    assert all(r["svr_prob"] >= model.threshold for r in reports if r["gated"])

    path = tmp_path / "model.bin"
    model.save(path)
    loaded = reptrack.Model.load(path)
    assert loaded.to_bytes() == model.to_bytes()
    assert loaded.score(docs) == reports

    summary = reptrack.analyze(reports)
    assert len(summary["perpetrators"]) == 5


def test_model_errors(model):
    data = model.to_bytes()
    with pytest.raises(reptrack.ModelFileError):
        reptrack.Model.from_bytes(data[: len(data) // 2])
    with pytest.raises(ValueError):
        model.threshold = 0.0
    with pytest.raises(reptrack.DataError):
        reptrack.Model.train([{"id": "a", "text": "x"}])
    with pytest.raises(reptrack.ConfigError):
        reptrack.Model.train(reptrack.synth(20), no_such_key=1)


def test_evaluate_structure():
    result = reptrack.evaluate(
        reptrack.synth(150, seed=1), folds=3, seed=2, forest__n_trees=5, boost__rounds=5, crf__max_iter=30
    )
    assert result["folds"] == 3
    assert [row["k"] for row in result["ranking"]] == [25, 50, 100, 300, 500, 1000, 2500]
