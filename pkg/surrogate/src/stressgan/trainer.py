"""Training harness: losses, the 1-D/2-G update schedule, checkpointing,
prediction-file writing, and the discriminator probe.

Each training step runs one discriminator update (maximizing
log D(x,y) + log(1 - D(x, G(x)))) followed by two generator updates
minimizing the adversarial term plus lambda times the L2 loss. The
generator's adversarial term defaults to the non-saturating form
(minimize -log D(x, G(x))); the minimax form of the original objective is
available behind a flag. Optimizers are Adam with betas (0.5, 0.999).

Targets are scaled internally (by 1/std of the training targets when
``target_scale="auto"``) and the inverse scale is baked into checkpoints,
so predictions always come back in MPa.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from . import sgf
from .models import (
    ConfigurationError,
    build_discriminator,
    build_generator,
    build_srn,
)

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    dataset: str
    model_kind: str = "stressgan"       # stressgan | srn
    split: str | None = None            # manifest split name; None = all records
    side: str = "train"
    lambda_l2: float | None = None      # None: 1 for fine-mesh, 10 for coarse-mesh
    learning_rate: float = 1e-3
    lr_decay: float = 1.0               # per-epoch exponential decay factor
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0
    adversarial: str = "non-saturating"  # or "minimax"
    target_scale: float | str = "auto"
    checkpoint_path: str | None = None
    log_path: str | None = None
    eval_every: int = 0                 # epochs between train-PMAE evaluations; 0 = off
    target_pmae: float | None = None    # stop early once train PMAE drops below this

    def __post_init__(self):
        if self.model_kind not in ("stressgan", "srn"):
            raise ConfigurationError(f"unknown model kind {self.model_kind!r}")
        if self.adversarial not in ("non-saturating", "minimax"):
            raise ConfigurationError(f"unknown adversarial mode {self.adversarial!r}")
        if self.lambda_l2 is not None and not self.lambda_l2 > 0:
            raise ConfigurationError("lambda must be > 0")
        if self.batch_size < 1:
            raise ConfigurationError("batch size must be >= 1")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ConfigurationError("lr_decay must be in (0, 1]")


def l2_loss(pred: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """Mean squared pixel difference over the batch."""
    if pred.shape != truth.shape:
        raise ConfigurationError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(truth.shape)}")
    return torch.mean((pred - truth) ** 2)


def _adversarial_g_term(fake_logits: torch.Tensor, mode: str) -> torch.Tensor:
    """Generator's adversarial objective from discriminator logits.

    softplus(-l) = -log sigmoid(l) and -softplus(l) = log(1 - sigmoid(l)),
    so both forms stay finite even when the probabilities saturate.
    """
    if mode == "minimax":
        return -torch.nn.functional.softplus(fake_logits).mean()
    return torch.nn.functional.softplus(-fake_logits).mean()


@dataclass
class GanStepRecord:
    d_loss: float
    d_real: float
    d_fake: float
    g_adv: float
    g_l2: float
    g_total: float
    n_d_updates: int = 1
    n_g_updates: int = 2


def gan_step(batch, generator, discriminator, lambda_l2, optimizers,
             adversarial="non-saturating") -> GanStepRecord:
    """One training step: 1 discriminator update, then 2 generator updates."""
    x, y = batch
    opt_g, opt_d = optimizers
    softplus = torch.nn.functional.softplus

    opt_d.zero_grad(set_to_none=True)
    real_logits = discriminator.forward_logits(x, y)
    with torch.no_grad():
        fake = generator(x)
    fake_logits = discriminator.forward_logits(x, fake)
    # -log D(x,y) - log(1 - D(x,G(x))), computed from logits
    d_loss = softplus(-real_logits).mean() + softplus(fake_logits).mean()
    n_d_updates = 0
    if d_loss.requires_grad:  # a frozen constant D has no graph to step
        d_loss.backward()
        opt_d.step()
        n_d_updates = 1
    d_loss = d_loss.item()

    g_adv = g_l2 = g_total = 0.0
    for _ in range(2):
        opt_g.zero_grad(set_to_none=True)
        fake = generator(x)
        adv = _adversarial_g_term(discriminator.forward_logits(x, fake), adversarial)
        l2 = l2_loss(fake, y)
        total = adv + lambda_l2 * l2
        total.backward()
        opt_g.step()
        g_adv, g_l2, g_total = adv.item(), l2.item(), total.item()

    record = GanStepRecord(d_loss,
                           torch.sigmoid(real_logits).detach().mean().item(),
                           torch.sigmoid(fake_logits).detach().mean().item(),
                           g_adv, g_l2, g_total, n_d_updates=n_d_updates)
    for value in (record.d_loss, record.g_total):
        if not np.isfinite(value):
            raise ConfigurationError(
                f"non-finite training loss (d={record.d_loss}, g={record.g_total})"
            )
    return record


def _pmae_percent(truth: np.ndarray, pred: np.ndarray) -> float:
    """Mean over cases of MAE / (max - min of the true field) * 100."""
    values = []
    for t, p in zip(truth, pred):
        span = float(t.max() - t.min())
        if span > 0:
            values.append(float(np.abs(t - p).mean()) / span * 100.0)
    return float(np.mean(values)) if values else float("nan")


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _evaluate_fields(model, x, batch_size=16):
    model.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            outputs.append(model(x[start:start + batch_size]))
    model.train()
    return torch.cat(outputs)


def train(config: TrainConfig):
    """Train per the config; returns (checkpoint dict, per-epoch log)."""
    torch.manual_seed(config.seed)
    manifest = sgf.read_manifest(sgf.dataset_paths(config.dataset)[1])
    lambda_l2 = config.lambda_l2
    if lambda_l2 is None:
        lambda_l2 = 1.0 if manifest.get("family") == "fine" else 10.0
    m, ids, inputs, targets = sgf.load_dataset(config.dataset, config.split, config.side)
    x = torch.from_numpy(inputs)
    y_raw = torch.from_numpy(targets)
    if config.target_scale == "auto":
        std = float(y_raw.std())
        scale = 1.0 / std if std > 0 else 1.0
    else:
        scale = float(config.target_scale)
    y = y_raw * scale

    generator = build_generator(m)
    discriminator = build_discriminator(m) if config.model_kind == "stressgan" else None
    if config.model_kind == "stressgan":
        opt_g = torch.optim.Adam(generator.parameters(), lr=config.learning_rate,
                                 betas=(0.5, 0.999))
        opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.learning_rate,
                                 betas=(0.5, 0.999))
        model = generator
    else:
        model = build_srn(m)
        opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    rng = np.random.default_rng(config.seed)
    if config.model_kind == "stressgan":
        schedulers = [torch.optim.lr_scheduler.ExponentialLR(o, config.lr_decay)
                      for o in (opt_g, opt_d)]
    else:
        schedulers = [torch.optim.lr_scheduler.ExponentialLR(opt, config.lr_decay)]
    log = []
    started = time.perf_counter()
    for epoch in range(config.epochs):
        sums, n_steps = {}, 0
        for pick in _batches(x.shape[0], config.batch_size, rng):
            idx = torch.from_numpy(pick)
            batch = (x[idx], y[idx])
            if config.model_kind == "stressgan":
                record = gan_step(batch, generator, discriminator, lambda_l2,
                                  (opt_g, opt_d), config.adversarial)
                row = {"d_loss": record.d_loss, "d_real": record.d_real,
                       "d_fake": record.d_fake, "g_adv": record.g_adv,
                       "g_l2": record.g_l2, "g_total": record.g_total}
            else:
                opt.zero_grad(set_to_none=True)
                loss = l2_loss(model(batch[0]), batch[1])
                loss.backward()
                opt.step()
                row = {"l2": loss.item()}
            for key, value in row.items():
                sums[key] = sums.get(key, 0.0) + value
            n_steps += 1
        for scheduler in schedulers:
            scheduler.step()
        entry = {"epoch": epoch, **{k: v / n_steps for k, v in sums.items()}}
        if config.eval_every and (epoch + 1) % config.eval_every == 0:
            pred = _evaluate_fields(model, x).numpy() / scale
            entry["train_pmae"] = _pmae_percent(targets[:, 0], pred[:, 0])
        log.append(entry)
        if (config.target_pmae is not None and "train_pmae" in entry
                and entry["train_pmae"] < config.target_pmae):
            break
    elapsed = time.perf_counter() - started

    checkpoint = {
        "format_version": CHECKPOINT_VERSION,
        "kind": config.model_kind,
        "m": m,
        "target_scale": scale,
        "config": asdict(config),
        "lambda_resolved": lambda_l2,
        "epochs_run": len(log),
        "train_seconds": elapsed,
    }
    if config.model_kind == "stressgan":
        checkpoint["generator"] = generator.state_dict()
        checkpoint["discriminator"] = discriminator.state_dict()
    else:
        checkpoint["model"] = model.state_dict()
    if config.checkpoint_path:
        torch.save(checkpoint, config.checkpoint_path)
    if config.log_path:
        Path(config.log_path).write_text(json.dumps(log, indent=1) + "\n")
    return checkpoint, log


def load_checkpoint(path) -> dict:
    checkpoint = torch.load(path, map_location="cpu", weights_only=False)
    if checkpoint.get("format_version") != CHECKPOINT_VERSION:
        raise ConfigurationError(f"{path}: unsupported checkpoint version")
    return checkpoint


def _restore_predictor(checkpoint):
    if checkpoint["kind"] == "stressgan":
        model = build_generator(checkpoint["m"])
        model.load_state_dict(checkpoint["generator"])
    else:
        model = build_srn(checkpoint["m"])
        model.load_state_dict(checkpoint["model"])
    model.eval()
    return model


def predict(checkpoint, dataset_dir, split, out_path, side="test", batch_size=16):
    """Write von Mises predictions for every case of the split, in MPa,
    aligned by case id, as a 1-channel SGF1 file."""
    if isinstance(checkpoint, (str, Path)):
        checkpoint = load_checkpoint(checkpoint)
    m, ids, inputs, _ = sgf.load_dataset(dataset_dir, split, side)
    if m != checkpoint["m"]:
        raise ConfigurationError(
            f"checkpoint is for m={checkpoint['m']} but dataset has m={m}"
        )
    model = _restore_predictor(checkpoint)
    with torch.no_grad():
        fields = _evaluate_fields(model, torch.from_numpy(inputs), batch_size)
    fields = fields.numpy()[:, 0] / checkpoint["target_scale"]
    sgf.write_predictions(out_path, m, ids, fields)
    return ids, fields


def discriminator_probe(checkpoint, dataset_dir, split, side="test", batch_size=16):
    """Mean discriminator output over ground-truth pairs and over generated
    pairs. Requires a stressgan checkpoint."""
    if isinstance(checkpoint, (str, Path)):
        checkpoint = load_checkpoint(checkpoint)
    if checkpoint["kind"] != "stressgan":
        raise ConfigurationError("discriminator probe requires a stressgan checkpoint")
    m, ids, inputs, targets = sgf.load_dataset(dataset_dir, split, side)
    if m != checkpoint["m"]:
        raise ConfigurationError(
            f"checkpoint is for m={checkpoint['m']} but dataset has m={m}"
        )
    generator = _restore_predictor(checkpoint)
    discriminator = build_discriminator(m)
    discriminator.load_state_dict(checkpoint["discriminator"])
    discriminator.eval()
    scale = checkpoint["target_scale"]
    x = torch.from_numpy(inputs)
    y = torch.from_numpy(targets) * scale
    real_scores, fake_scores = [], []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            xs, ys = x[start:start + batch_size], y[start:start + batch_size]
            real_scores.append(discriminator(xs, ys))
            fake_scores.append(discriminator(xs, generator(xs)))
    return (float(torch.cat(real_scores).mean()),
            float(torch.cat(fake_scores).mean()))
