import copy
import json

import numpy as np
import pytest
import torch

from aesanet.core.losses import mse_loss
from aesanet.core.model import ModelConfig, init_params
from aesanet.core.training import (
    AdamMoments,
    EarlyStopping,
    TrainConfig,
    TrainState,
    adam_update,
    apply_parameters,
    fit,
    train_step,
    validation_mse,
)
from aesanet.data.manifest import ScoreScale, TrainingSample
from aesanet.evaluation.embedding import collect_embeddings, embedding_gap
from aesanet.features.audio import AudioClip
from aesanet.features.frontend import synthetic_frontend
from aesanet.utils.errors import ShapeError, ValidationError
from conftest import make_samples


class TestAdam:
    def test_hand_example(self):
        params = {"w": torch.tensor([0.0], dtype=torch.float64)}
        grads = {"w": torch.tensor([1.0], dtype=torch.float64)}
        new, moments = adam_update(params, grads, AdamMoments(), lr=0.1, step=1)
        assert new["w"].item() == pytest.approx(-0.1, abs=1e-8)
        assert moments.first["w"].item() == pytest.approx(0.1)
        assert moments.second["w"].item() == pytest.approx(0.001)

    def test_zero_gradient_keeps_params(self):
        params = {"w": torch.tensor([0.3, -1.2])}
        new, _ = adam_update(params, {"w": torch.zeros(2)}, AdamMoments(), lr=0.1, step=1)
        assert torch.equal(new["w"], params["w"])

    def test_inputs_untouched(self):
        params = {"w": torch.tensor([1.0])}
        moments = AdamMoments(first={"w": torch.tensor([0.5])}, second={"w": torch.tensor([0.25])})
        adam_update(params, {"w": torch.tensor([2.0])}, moments, lr=0.1, step=2)
        assert params["w"].item() == 1.0
        assert moments.first["w"].item() == 0.5

    def test_matches_torch_adam(self):
        rng = np.random.default_rng(0)
        start = torch.from_numpy(rng.normal(size=(3, 4)))
        reference = torch.nn.Parameter(start.clone())
        optimizer = torch.optim.Adam([reference], lr=1e-3, betas=(0.9, 0.999), eps=1e-8)

        params, moments = {"w": start.clone()}, AdamMoments()
        for step in range(1, 21):
            grad = torch.from_numpy(rng.normal(size=(3, 4)))
            reference.grad = grad.clone()
            optimizer.step()
            params, moments = adam_update(params, {"w": grad}, moments, lr=1e-3, step=step)
        torch.testing.assert_close(params["w"], reference.detach(), rtol=0, atol=1e-12)

    def test_identical_runs(self):
        grads = {"w": torch.tensor([0.5, -0.5])}
        a = adam_update({"w": torch.ones(2)}, grads, AdamMoments(), lr=0.01, step=1)[1]
        b = adam_update({"w": torch.ones(2)}, grads, AdamMoments(), lr=0.01, step=1)[1]
        assert torch.equal(a.first["w"], b.first["w"]) and torch.equal(a.second["w"], b.second["w"])

    def test_errors(self):
        with pytest.raises(ShapeError):
            adam_update({"w": torch.zeros(2)}, {"w": torch.zeros(3)}, AdamMoments(), lr=0.1, step=1)
        with pytest.raises(ValidationError):
            adam_update({"w": torch.zeros(2)}, {"w": torch.zeros(2)}, AdamMoments(), lr=0.1, step=0)


def test_early_stopping_trace():
    stopper = EarlyStopping(patience=3)
    improved = [stopper(val, epoch) for epoch, val in enumerate([1.0, 0.9, 0.9, 0.9, 0.9], start=1)]
    assert improved == [True, True, False, False, False]
    assert stopper.early_stop
    assert stopper.best_epoch == 2


class TestTrainStep:
    def test_first_step_has_no_triplet(self, tiny_model):
        state = TrainState.create(tiny_model, TrainConfig(learning_rate=1e-3))
        sample = make_samples(1, tiny_model.config)[0]
        _, breakdown = train_step(state, sample.stack, sample.targets)
        assert breakdown.triplet == 0.0
        assert breakdown.total == breakdown.mse
        assert breakdown.valid_triplet_axes == []
        assert state.buffer_occupancy() == {"PQ": 1, "PC": 1, "CE": 1, "CU": 1}
        assert state.step == 1

    def test_buffers_grow_up_to_capacity(self, tiny_model):
        state = TrainState.create(tiny_model, TrainConfig(buffer_capacity=3))
        samples = make_samples(5, tiny_model.config)
        sizes = []
        for sample in samples:
            train_step(state, sample.stack, sample.targets)
            sizes.append(len(state.buffers[0]))
        assert sizes == [1, 2, 3, 3, 3]

    def test_triplet_activates_once_buffer_spreads(self, tiny_model):
        state = TrainState.create(tiny_model, TrainConfig(epsilon=0.1))
        stack = make_samples(1, tiny_model.config)[0].stack
        for targets in ([0.1] * 4, [0.9] * 4):
            train_step(state, stack, np.array(targets))
        _, breakdown = train_step(state, stack, np.array([0.12] * 4))
        assert breakdown.valid_triplet_axes == ["PQ", "PC", "CE", "CU"]

    def test_rejects_unnormalized_targets(self, tiny_model):
        state = TrainState.create(tiny_model, TrainConfig())
        sample = make_samples(1, tiny_model.config)[0]
        with pytest.raises(ValidationError):
            train_step(state, sample.stack, np.array([0.1, 0.2, 0.3, 4.0]))

    def test_identical_runs(self, tiny_config):
        samples = make_samples(6, tiny_config)

        def run():
            state = TrainState.create(init_params(tiny_config, 0), TrainConfig(learning_rate=1e-2, seed=5))
            return [train_step(state, s.stack, s.targets)[1] for s in samples * 3]

        first, second = run(), run()
        assert [(b.mse, b.triplet, b.total) for b in first] == [(b.mse, b.triplet, b.total) for b in second]

    def test_alpha_zero_is_plain_mse_regression(self, tiny_config):
        samples = make_samples(6, tiny_config)
        config = TrainConfig(learning_rate=1e-2, alpha=0.0, seed=3)

        state = TrainState.create(init_params(tiny_config, 0), config)
        ours = [train_step(state, s.stack, s.targets)[1] for s in samples * 3]
        assert any(b.valid_triplet_axes for b in ours)
        assert len(state.buffers[0]) == 18

        model = init_params(tiny_config, 0)
        generator = torch.Generator().manual_seed(config.seed)
        moments, reference = AdamMoments(), []
        for step, sample in enumerate(samples * 3, start=1):
            model.train()
            out = model(sample.stack, generator=generator)
            loss = mse_loss(out.clip_scores, torch.as_tensor(sample.targets, dtype=out.clip_scores.dtype))
            model.zero_grad(set_to_none=True)
            loss.backward()
            params = {n: p.detach() for n, p in model.named_parameters()}
            grads = {n: p.grad for n, p in model.named_parameters()}
            new, moments = adam_update(params, grads, moments, config.learning_rate, step)
            apply_parameters(model, new)
            reference.append(loss.item())

        assert [b.total for b in ours] == reference
        assert [b.mse for b in ours] == reference


class TestFit:
    def test_scripted_early_stopping_restores_best(self, tiny_config):
        trace = iter([1.0, 0.9, 0.9, 0.9, 0.9, 0.1])
        snapshots = []

        def scripted(model, samples):
            snapshots.append(copy.deepcopy(model.state_dict()))
            return next(trace)

        samples = make_samples(3, tiny_config)
        result = fit(samples, samples[:1], TrainConfig(learning_rate=1e-2, patience=3, max_epochs=10),
                     init_params(tiny_config, 0), evaluate=scripted)

        assert len(result.history) == 5
        assert result.best_epoch == 2
        assert result.best_val_mse == 0.9
        assert [record.improved for record in result.history] == [True, True, False, False, False]
        restored = result.model.state_dict()
        assert all(torch.equal(restored[name], snapshots[1][name]) for name in restored)
        assert any(not torch.equal(restored[name], snapshots[4][name]) for name in restored)
        assert not result.model.training

    def test_runs_all_epochs_while_improving(self, tiny_config):
        trace = iter([5.0, 4.0, 3.0, 2.0])
        samples = make_samples(2, tiny_config)
        result = fit(samples, samples, TrainConfig(patience=10, max_epochs=4), init_params(tiny_config, 0),
                     evaluate=lambda model, val: next(trace))
        assert len(result.history) == 4
        assert result.best_epoch == 4

    def test_best_model_reproduces_validation_mse(self, tiny_config, tmp_path):
        samples = make_samples(8, tiny_config)
        history_path = tmp_path / "run.history.jsonl"
        result = fit(samples[:6], samples[6:], TrainConfig(learning_rate=1e-2, max_epochs=3),
                     init_params(tiny_config, 0), scale=ScoreScale(), history_path=history_path)

        assert validation_mse(result.model, samples[6:]) == pytest.approx(result.best_val_mse, abs=1e-12)
        lines = [json.loads(line) for line in history_path.read_text().splitlines()]
        assert [line["epoch"] for line in lines] == [1, 2, 3]
        assert lines[0]["buffer_occupancy"] == {"PQ": 6, "PC": 6, "CE": 6, "CU": 6}
        assert lines[0]["val_mse_raw"] == pytest.approx(lines[0]["val_mse"] * 81)

    def test_empty_sets(self, tiny_config):
        samples = make_samples(2, tiny_config)
        with pytest.raises(ValidationError):
            fit([], samples, TrainConfig(), init_params(tiny_config, 0))
        with pytest.raises(ValidationError):
            fit(samples, [], TrainConfig(), init_params(tiny_config, 0))


def synthetic_clips(count: int, config: ModelConfig, seed: int, latent=None) -> list[TrainingSample]:
    rng = np.random.default_rng(seed)
    latent = rng.uniform(size=count) if latent is None else latent
    samples = []
    t = np.arange(3200) / 16000
    for index, u in enumerate(latent):
        audio = 0.4 * np.sin(2 * np.pi * (150 + 1800 * u) * t) + 0.02 * rng.normal(size=t.size)
        clip = AudioClip(samples=np.clip(audio, -1, 1), sample_rate=16000, clip_id=f"s{index}")
        stack = synthetic_frontend(clip, seed=seed, num_layers=config.num_layers, dim=config.input_dim)
        samples.append(TrainingSample(clip_id=clip.clip_id, stack=stack,
                                      targets=np.clip(0.1 + 0.8 * u + np.array([0.0, 0.02, -0.02, 0.01]), 0, 1)))
    return samples


@pytest.mark.slow
def test_overfits_small_corpus():
    config = ModelConfig(input_dim=8, num_layers=3, adapter_dim=4, lstm_hidden=4, shared_dim=8,
                         attention_heads=2, dropout_rate=0.0)
    samples = synthetic_clips(16, config, seed=0)
    result = fit(samples, samples, TrainConfig(learning_rate=3e-3, max_epochs=500, patience=500, alpha=0.2),
                 init_params(config, 0))
    assert min(record.train_mse for record in result.history) < 0.01


@pytest.mark.slow
def test_triplet_term_structures_embeddings():
    config = ModelConfig(input_dim=16, num_layers=3, adapter_dim=16, lstm_hidden=8, shared_dim=16,
                         attention_heads=2, dropout_rate=0.0)
    samples = synthetic_clips(200, config, seed=1)
    gaps = {}
    for alpha in (0.0, 0.2):
        result = fit(samples[:180], samples[180:],
                     TrainConfig(learning_rate=1e-3, max_epochs=5, patience=5, alpha=alpha, seed=0),
                     init_params(config, 0))
        embeddings, targets = collect_embeddings(result.model, samples)
        gaps[alpha] = embedding_gap(embeddings, targets[:, 0], epsilon=0.1)

    assert gaps[0.2].near_mean < gaps[0.2].far_mean
    assert gaps[0.2].gap > gaps[0.0].gap
