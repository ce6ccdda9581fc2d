import json
import math

import numpy as np
import pytest

import hiermetric as hm


def test_closed_forms():
    assert hm.adacos_init_scale(15) == pytest.approx(math.sqrt(2) * math.log(14), abs=1e-12)
    value, grad = hm.softmax_ce_loss(np.zeros((1, 3)), [0])
    assert value == pytest.approx(math.log(3), abs=1e-12)
    assert grad.shape == (1, 3)


def test_pairwise_threshold():
    e = np.array([[1.0, 0.0], [0.2, math.sqrt(1 - 0.04)]])
    neg, pos = hm.Polarity.NEGATIVE, hm.Polarity.POSITIVE
    value, grad = hm.pairwise_cosine_loss(e, [0, 1], [pos, neg], threshold=0.3)
    assert value == 0.0
    assert np.all(grad == 0.0)
    value, _ = hm.pairwise_cosine_loss(e, [0, 1], [pos, neg], threshold=0.1)
    assert value == pytest.approx(0.04, abs=1e-12)


def test_pair_target():
    a = hm.HierLabel(0, hm.Polarity.POSITIVE)
    assert hm.pair_target(a, hm.HierLabel(0, hm.Polarity.NEGATIVE)) == -1
    assert hm.pair_target(a, hm.HierLabel(0, hm.Polarity.POSITIVE)) == 1
    assert hm.pair_target(a, hm.HierLabel(1, hm.Polarity.POSITIVE)) == 0


def test_errors_carry_kind():
    with pytest.raises(hm.HiermetricError) as info:
        hm.unit_normalize(np.zeros(4))
    assert info.value.kind == "ZeroNorm"


def test_train_and_evaluate(tmp_path):
    train = hm.generate_synthetic(classes=3, dim=16, per_subclass=20, seed=5)
    test = hm.generate_synthetic(classes=3, dim=16, per_subclass=10, seed=5, test=True)
    assert len(train) == 180
    cfg = hm.TrainConfig()
    cfg.stage1_epochs = 3
    cfg.stage2_epochs = 3
    cfg.hidden_dims = [16]
    cfg.output_dim = 8
    epochs = []
    model = hm.train(train, cfg, lambda log: epochs.append((log.stage, log.epoch)))
    assert epochs == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]
    emb = model.embed(test.features)
    assert np.allclose(np.linalg.norm(emb, axis=1), 1.0)

    report = hm.evaluate(model, train, test)
    assert len(report["per_class_mae"]) == 3
    assert report["average_mae"] == pytest.approx(np.mean(report["per_class_mae"]))

    path = tmp_path / "model.json"
    hm.save_checkpoint(path, model)
    again = hm.load_checkpoint(path)
    assert np.array_equal(again.embed(test.features), emb)
    assert json.loads(path.read_text())["format_version"] == 1


def test_mds_and_svg():
    d = np.ones((3, 3)) - np.eye(3)
    coords, eig, stress = hm.classical_mds(d)
    assert coords.shape == (3, 2)
    assert stress < 1e-9
    assert np.allclose(hm.pairwise_distances(coords), d, atol=1e-9)
    data = hm.generate_synthetic(classes=2, dim=8, per_subclass=4)
    svg = hm.render_svg(data.features, data.labels, data.class_names, title="t")
    assert svg.count('class="point"') == 24


def test_dedup():
    kept, removed = hm.tfidf_dedup([("a", "red fox jumps"), ("b", "red fox jumps"), ("c", "blue whale")])
    assert kept == ["a", "c"]
    assert removed[0][:2] == ("b", "a")


def test_jsonl_round_trip(tmp_path):
    data = hm.generate_synthetic(classes=2, dim=4, per_subclass=3)
    path = tmp_path / "d.jsonl"
    hm.save_jsonl(path, data)
    back = hm.load_jsonl(path)
    assert back.ids == data.ids
    assert np.array_equal(back.features, data.features)
