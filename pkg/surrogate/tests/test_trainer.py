"""Trainer tests: loss values, the 1:2 update schedule, determinism,
prediction files, the discriminator probe, and interchange compatibility
with the primary toolchain's evaluator."""

import subprocess
import sys

import numpy as np
import pytest
import torch
from torch import nn

from stressgan.models import ConfigurationError, build_discriminator, build_generator
from stressgan.trainer import (
    TrainConfig,
    discriminator_probe,
    gan_step,
    l2_loss,
    load_checkpoint,
    predict,
    train,
)


class TestL2Loss:
    def test_identical_zero(self):
        x = torch.randn(4, 1, 8, 8)
        assert l2_loss(x, x).item() == 0.0

    def test_constant_offset(self):
        x = torch.zeros(2, 1, 4, 4)
        assert l2_loss(x + 3.0, x).item() == pytest.approx(9.0)

    def test_hand_mean(self):
        pred = torch.tensor([[1.0, 0.0]])
        truth = torch.tensor([[0.0, 0.0]])
        assert l2_loss(pred, truth).item() == pytest.approx(0.5)

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            l2_loss(torch.zeros(2, 1, 4, 4), torch.zeros(2, 1, 5, 5))


class ConstantHalfD(nn.Module):
    """Discriminator stub frozen at output 0.5 (logit 0), independent of its
    input, so the adversarial term contributes exactly zero gradient."""

    def forward_logits(self, conditions, stress):
        return torch.zeros(conditions.shape[0])

    def forward(self, conditions, stress):
        return torch.sigmoid(self.forward_logits(conditions, stress))


class CountingAdam(torch.optim.Adam):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.steps = 0

    def step(self, closure=None):
        self.steps += 1
        return super().step(closure)


def small_batch(m=32, b=4, seed=0):
    g = torch.Generator().manual_seed(seed)
    return (torch.randn(b, 3, m, m, generator=g), torch.randn(b, 1, m, m, generator=g))


class TestGanStep:
    def test_update_schedule_1d_2g(self):
        torch.manual_seed(0)
        g = build_generator(32)
        d = build_discriminator(32)
        opt_g = CountingAdam(g.parameters(), lr=1e-4)
        opt_d = CountingAdam(d.parameters(), lr=1e-4)
        record = gan_step(small_batch(), g, d, 1.0, (opt_g, opt_d))
        assert (opt_d.steps, opt_g.steps) == (1, 2)
        assert (record.n_d_updates, record.n_g_updates) == (1, 2)

    def test_frozen_half_d_lambda_zero_leaves_generator_unchanged(self):
        """With D constant the adversarial gradient vanishes, so at lambda=0
        the whole G gradient is zero and Adam makes no update."""
        torch.manual_seed(0)
        g = build_generator(32)
        before = {k: v.clone() for k, v in g.state_dict().items()}
        opt_g = torch.optim.Adam(g.parameters(), lr=1e-2)
        opt_d = torch.optim.Adam([torch.nn.Parameter(torch.zeros(1))], lr=1e-2)
        g.eval()  # keep batch-norm statistics out of the comparison
        gan_step(small_batch(), g, ConstantHalfD(), 0.0, (opt_g, opt_d))
        after = g.state_dict()
        assert all(torch.equal(before[k], after[k]) for k in before)

    def test_large_lambda_dominated_by_l2(self):
        """G update direction at lambda=1e6 matches the pure-L2 direction."""
        torch.manual_seed(0)
        x, y = small_batch()
        g = build_generator(32)
        d = build_discriminator(32)
        lam = 1e6

        g.zero_grad()
        fake = g(x)
        adv = torch.nn.functional.softplus(-d.forward_logits(x, fake)).mean()
        (adv + lam * l2_loss(fake, y)).backward()
        mixed = torch.cat([p.grad.flatten() for p in g.parameters()])

        g.zero_grad()
        (lam * l2_loss(g(x), y)).backward()
        pure = torch.cat([p.grad.flatten() for p in g.parameters()])

        cosine = torch.dot(mixed, pure) / (mixed.norm() * pure.norm())
        assert cosine.item() > 0.99

    def test_seeded_step_reproducible(self):
        records = []
        for _ in range(2):
            torch.manual_seed(7)
            g = build_generator(32)
            d = build_discriminator(32)
            opts = (torch.optim.Adam(g.parameters(), lr=1e-3),
                    torch.optim.Adam(d.parameters(), lr=1e-3))
            records.append(gan_step(small_batch(seed=5), g, d, 1.0, opts))
        assert records[0] == records[1]

    def test_minimax_flag(self):
        torch.manual_seed(0)
        g = build_generator(32)
        d = build_discriminator(32)
        opts = (torch.optim.Adam(g.parameters(), lr=1e-4),
                torch.optim.Adam(d.parameters(), lr=1e-4))
        record = gan_step(small_batch(), g, d, 1.0, opts, adversarial="minimax")
        assert np.isfinite(record.g_total)


class TestTrain:
    def test_zero_epochs_checkpoint_equals_initialization(self, coarse_dataset, tmp_path):
        config = TrainConfig(dataset=str(coarse_dataset), epochs=0, seed=11,
                             checkpoint_path=str(tmp_path / "ck.pt"))
        checkpoint, log = train(config)
        assert log == [] and checkpoint["epochs_run"] == 0
        torch.manual_seed(11)
        reference = build_generator(32)
        for key, value in reference.state_dict().items():
            assert torch.equal(checkpoint["generator"][key], value)

    def test_loss_log_deterministic(self, coarse_dataset):
        config = TrainConfig(dataset=str(coarse_dataset), lambda_l2=10.0,
                             batch_size=16, epochs=2, seed=5)
        _, log_a = train(config)
        _, log_b = train(config)
        assert log_a == log_b

    def test_srn_smoothed_loss_decreases(self, coarse_dataset):
        config = TrainConfig(dataset=str(coarse_dataset), model_kind="srn",
                             batch_size=16, epochs=40, seed=5)
        _, log = train(config)
        losses = [row["l2"] for row in log]
        first, last = np.mean(losses[:20]), np.mean(losses[-20:])
        assert last < first

    def test_lambda_defaults_by_family(self, coarse_dataset):
        """Unset lambda resolves to 10 on coarse-mesh datasets (1 on fine)."""
        checkpoint, _ = train(TrainConfig(dataset=str(coarse_dataset), epochs=0, seed=1))
        assert checkpoint["lambda_resolved"] == 10.0

    def test_invalid_config(self, coarse_dataset):
        with pytest.raises(ConfigurationError):
            TrainConfig(dataset=str(coarse_dataset), lambda_l2=0.0)
        with pytest.raises(ConfigurationError):
            TrainConfig(dataset=str(coarse_dataset), model_kind="vae")
        with pytest.raises(ConfigurationError):
            TrainConfig(dataset=str(coarse_dataset), lr_decay=0.0)


@pytest.fixture(scope="module")
def trained_checkpoint(coarse_dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("ck") / "stressgan.pt"
    config = TrainConfig(dataset=str(coarse_dataset), split="entire", side="train",
                         lambda_l2=10.0, batch_size=16, epochs=6, seed=2,
                         checkpoint_path=str(path))
    train(config)
    return path


class TestPredict:
    def test_repeatable_and_aligned(self, trained_checkpoint, coarse_dataset, tmp_path):
        out1, out2 = tmp_path / "p1.sgf1", tmp_path / "p2.sgf1"
        ids1, fields1 = predict(trained_checkpoint, coarse_dataset, "entire", out1)
        ids2, fields2 = predict(trained_checkpoint, coarse_dataset, "entire", out2)
        assert out1.read_bytes() == out2.read_bytes()
        assert len(ids1) == 10  # test side of the 80/20 split over 48 cases
        assert np.isfinite(fields1).all()
        assert np.array_equal(fields1, fields2)

    def test_m_mismatch_rejected(self, trained_checkpoint, fine64_dataset, tmp_path):
        with pytest.raises(ConfigurationError):
            predict(trained_checkpoint, fine64_dataset, None, tmp_path / "x.sgf1")

    def test_primary_evaluator_accepts_predictions(self, trained_checkpoint,
                                                   coarse_dataset, tmp_path):
        """Interchange law: prediction files must evaluate under the primary
        toolchain with zero alignment errors."""
        pred = tmp_path / "pred.sgf1"
        predict(trained_checkpoint, coarse_dataset, "entire", pred)
        result = subprocess.run(
            [sys.executable, "-m", "stressforge.cli", "evaluate",
             "--data", str(coarse_dataset), "--pred", str(pred),
             "--split", "entire", "--side", "test",
             "--out-json", str(tmp_path / "report.json")],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "cases=10" in result.stdout


class TestDiscriminatorProbe:
    def test_untrained_probe_near_half(self, coarse_dataset, tmp_path):
        path = tmp_path / "init.pt"
        train(TrainConfig(dataset=str(coarse_dataset), epochs=0, seed=1,
                          checkpoint_path=str(path)))
        mean_real, mean_fake = discriminator_probe(path, coarse_dataset, None, side="train")
        assert 0.0 < mean_real < 1.0 and 0.0 < mean_fake < 1.0

    def test_probe_repeatable(self, trained_checkpoint, coarse_dataset):
        a = discriminator_probe(trained_checkpoint, coarse_dataset, "entire")
        b = discriminator_probe(trained_checkpoint, coarse_dataset, "entire")
        assert a == b

    def test_srn_checkpoint_rejected(self, coarse_dataset, tmp_path):
        path = tmp_path / "srn.pt"
        train(TrainConfig(dataset=str(coarse_dataset), model_kind="srn", epochs=1,
                          batch_size=16, seed=1, checkpoint_path=str(path)))
        with pytest.raises(ConfigurationError):
            discriminator_probe(path, coarse_dataset, None)

    def test_checkpoint_version_gate(self, tmp_path):
        path = tmp_path / "bad.pt"
        torch.save({"format_version": 99}, path)
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)
