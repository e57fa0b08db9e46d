"""Two-phase fine-tuning of the backbone+head classifier.

Phase 1 freezes the backbone and trains only the two new dense layers;
phase 2 unfreezes everything and continues at a reduced learning rate.
The loss is a per-output weighted binary cross-entropy over the two
independent sigmoid outputs, with the ischaemia term weighted at least
as heavily as the infection term (it is the harder, rarer call).
Validation-loss early stopping guards phase 2; the best-validation
snapshot is restored before returning.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn
from torch.nn import functional as F

from .backbone import FeatureExtractorModel, build_model
from .data import DEFAULT_IMAGE_SIZE, load_training_set


@dataclass(frozen=True)
class ExtractorConfig:
    image_dir: str
    manifest_path: str
    backbone: str = "xception-mini"
    phase1_epochs: int = 10
    phase2_epochs: int = 40
    learning_rate: float = 1e-3
    phase2_lr_scale: float = 0.1
    class_weight_infection: float = 1.0
    class_weight_ischaemia: float = 2.0
    batch_size: int = 8
    val_fraction: float = 0.2
    patience: int = 5
    image_size: int = DEFAULT_IMAGE_SIZE
    seed: int = 0

    def __post_init__(self):
        if self.phase1_epochs < 0 or self.phase2_epochs < 0:
            raise ValueError("epoch counts must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 < self.phase2_lr_scale <= 1.0:
            raise ValueError("phase2_lr_scale must be in (0, 1]")
        if not (self.class_weight_infection > 0
                and self.class_weight_ischaemia > 0):
            raise ValueError("class weights must be > 0")
        if self.class_weight_ischaemia < self.class_weight_infection:
            raise ValueError(
                "class_weight_ischaemia must be >= class_weight_infection")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.image_size < 16:
            raise ValueError("image_size must be >= 16")


@dataclass
class FinetuneHistory:
    phase1_losses: list = field(default_factory=list)
    phase2_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    best_epoch: int = 0      # 1-based index into phase 2; 0 = n/a
    stopped_epoch: int = 0   # phase-2 epoch at which patience ran out


def weighted_bce(logits: torch.Tensor, targets: torch.Tensor,
                 weight_infection: float, weight_ischaemia: float
                 ) -> torch.Tensor:
    """Mean over the batch of
    w_inf * BCE(infection logit) + w_isch * BCE(ischaemia logit)."""
    if logits.shape != targets.shape or logits.shape[-1] != 2:
        raise ValueError("logits and targets must both be (N, 2)")
    per_output = F.binary_cross_entropy_with_logits(
        logits, targets, reduction="none")
    weighted = (weight_infection * per_output[:, 0]
                + weight_ischaemia * per_output[:, 1])
    return weighted.mean()


def _epoch(model, optimizer, images, targets, config, generator):
    """One shuffled pass; returns the mean per-batch training loss."""
    order = torch.randperm(len(images), generator=generator)
    total, batches = 0.0, 0
    for start in range(0, len(order), config.batch_size):
        batch = order[start:start + config.batch_size]
        optimizer.zero_grad()
        logits, _ = model(images[batch])
        loss = weighted_bce(logits, targets[batch],
                            config.class_weight_infection,
                            config.class_weight_ischaemia)
        loss.backward()
        optimizer.step()
        total += float(loss.detach())
        batches += 1
    return total / batches


def _validation_loss(model, images, targets, config) -> float:
    model.eval()
    with torch.no_grad():
        logits, _ = model(images)
        loss = float(weighted_bce(logits, targets,
                                  config.class_weight_infection,
                                  config.class_weight_ischaemia))
    model.train()
    return loss


def _clone_state(module: nn.Module) -> dict:
    return {k: v.detach().clone() for k, v in module.state_dict().items()}


def finetune(config: ExtractorConfig,
             initial: FeatureExtractorModel | None = None
             ) -> tuple[FeatureExtractorModel, FinetuneHistory]:
    """Train per the two-phase schedule; with both phase epoch counts at
    zero this degenerates to smoke mode (seeded init, no training)."""
    torch.manual_seed(config.seed)
    model = initial if initial is not None \
        else build_model(config.backbone, config.seed)
    history = FinetuneHistory()

    images, targets, _ = load_training_set(
        config.image_dir, config.manifest_path, config.image_size)
    if len(images) == 0:
        raise ValueError("training set is empty")

    # deterministic holdout for early stopping
    generator = torch.Generator().manual_seed(config.seed)
    n_val = int(len(images) * config.val_fraction)
    if n_val > 0:
        order = torch.randperm(len(images), generator=generator)
        val_idx, train_idx = order[:n_val], order[n_val:]
        val_images, val_targets = images[val_idx], targets[val_idx]
        images, targets = images[train_idx], targets[train_idx]
    if len(images) == 0:
        raise ValueError("validation holdout consumed every sample")

    model.train()

    # phase 1: backbone frozen, head only
    if config.phase1_epochs > 0:
        model.backbone.requires_grad_(False)
        optimizer = torch.optim.Adam(model.head.parameters(),
                                     lr=config.learning_rate)
        for _ in range(config.phase1_epochs):
            history.phase1_losses.append(
                _epoch(model, optimizer, images, targets, config, generator))
        model.backbone.requires_grad_(True)

    # phase 2: everything trains at a reduced rate, early stopping on
    # validation loss when a holdout exists
    if config.phase2_epochs > 0:
        optimizer = torch.optim.Adam(
            model.parameters(),
            lr=config.learning_rate * config.phase2_lr_scale)
        best_loss, best_state, misses = float("inf"), None, 0
        for epoch in range(1, config.phase2_epochs + 1):
            history.phase2_losses.append(
                _epoch(model, optimizer, images, targets, config, generator))
            if n_val == 0:
                continue
            val_loss = _validation_loss(model, val_images, val_targets,
                                        config)
            history.val_losses.append(val_loss)
            if val_loss < best_loss:
                best_loss, best_state = val_loss, _clone_state(model)
                history.best_epoch = epoch
                misses = 0
            else:
                misses += 1
                if misses >= config.patience:
                    history.stopped_epoch = epoch
                    break
        if best_state is not None:
            model.load_state_dict(best_state)

    model.eval()
    return model, history
