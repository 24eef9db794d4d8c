"""Smoke tests for the pybind11 module: each main operation is callable and
returns sane values. Deep behavior is covered by the C++ suites."""

import numpy as np
import pytest

import _indist as m


@pytest.fixture(scope="module")
def support():
    return m.UniformPairSupport(dim=4)


@pytest.fixture(scope="module")
def trained(support):
    data = m.sample_dataset(support, 100, 5)
    cfg = m.TrainConfig()
    cfg.epochs = 100
    cfg.sgd_seed = 7
    model, losses = m.train(m.mlp_init(4, 4), data, cfg)
    return model, data, losses


def test_dataset_and_membership(support):
    data = m.sample_dataset(support, 10, 1)
    assert len(data.points) == 20
    assert sorted(set(data.labels)) == [0, 1]
    assert m.membership(support, np.zeros(4)) == m.Membership.Class0
    assert m.membership(support, np.full(4, 30.0)) == m.Membership.Class1
    assert m.membership(support, np.full(4, 15.0)) == m.Membership.Outside


def test_train_and_forward(trained):
    model, data, losses = trained
    assert model.dims == [4, 20, 4, 2, 2, 2]
    assert len(losses) == 100
    assert losses[-1] < losses[0]
    assert m.accuracy(model, data) > 0.9
    logits, probs, label = m.forward(model, np.zeros(4))
    assert probs.shape == (2,)
    assert abs(probs.sum() - 1.0) < 1e-9
    assert label in (0, 1)


def test_grad_check(trained):
    model, _, _ = trained
    assert m.grad_check(model, np.ones(4), 0) < 1e-4


def test_attack_point(trained, support):
    model, data, _ = trained
    cfg = m.AttackConfig()
    cfg.max_generations = 50
    start, label = next(
        (p, l)
        for p, l in zip(data.points, data.labels)
        if m.forward(model, p)[2] == l
    )
    outcome = m.attack_point(model, support, label, start, cfg, 42)
    assert outcome.evals_used > 0
    if outcome.success:
        assert m.membership(support, outcome.adversarial) != m.Membership.Outside
        assert outcome.distance > 0


def test_attack_rate(trained, support):
    model, data, _ = trained
    cfg = m.EvalConfig()
    cfg.n_starts = 4
    cfg.n_repeats = 2
    cfg.attack.max_generations = 30
    report = m.attack_rate(model, support, data, cfg, 9)
    assert len(report.per_repeat_rates) == 2
    assert 0.0 <= report.mean_rate <= 1.0


def test_scenes_and_oracle():
    scenes = m.sample_scenes(50, 11)
    assert len(scenes) == 50
    assert all(m.scene_membership(s) for s in scenes)
    scene = scenes[0]
    back = m.SceneVector.from_flat(scene.flat, scene.n_lights)
    assert np.array_equal(back.flat, scene.flat)

    oracle = m.SyntheticOracle(7, temperature=0.5)
    label, probs = oracle.classify(scene.flat, scene.n_lights)
    assert len(probs) == 11
    assert abs(sum(probs) - 1.0) < 1e-6
    assert label == int(np.argmax(probs))
