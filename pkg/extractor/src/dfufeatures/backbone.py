"""Compact depthwise-separable CNN backbone plus the two-layer head.

The backbone follows the Xception recipe — depthwise-separable
convolutions with residual connections, an entry stem, downsampling
blocks, and identity middle blocks — at laptop scale. Normalization is
GroupNorm rather than BatchNorm on purpose: GroupNorm carries no running
statistics, so a frozen backbone stays bit-identical through training of
the head (BatchNorm buffers would silently update on every forward pass
even with all parameters frozen).

The head is a 128-unit dense layer (whose post-activation output is the
exported feature vector) followed by a 2-unit output layer scored with
independent sigmoids: one logit for infection, one for ischaemia.
"""
from __future__ import annotations

import torch
from torch import nn

FEATURE_WIDTH = 128
N_OUTPUTS = 2  # (infection, ischaemia) logits
_GROUPS = 8

BACKBONE_NAMES = ("xception-mini",)


class SeparableConv2d(nn.Module):
    """Depthwise 3x3 followed by pointwise 1x1."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.depthwise = nn.Conv2d(in_channels, in_channels, 3, padding=1,
                                   groups=in_channels, bias=False)
        self.pointwise = nn.Conv2d(in_channels, out_channels, 1, bias=False)

    def forward(self, x):
        return self.pointwise(self.depthwise(x))


class DownBlock(nn.Module):
    """Two separable convs, a stride-2 pool, and a projected residual."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.skip = nn.Conv2d(in_channels, out_channels, 1, stride=2,
                              bias=False)
        self.skip_norm = nn.GroupNorm(_GROUPS, out_channels)
        self.conv1 = SeparableConv2d(in_channels, out_channels)
        self.norm1 = nn.GroupNorm(_GROUPS, out_channels)
        self.conv2 = SeparableConv2d(out_channels, out_channels)
        self.norm2 = nn.GroupNorm(_GROUPS, out_channels)
        self.pool = nn.MaxPool2d(3, stride=2, padding=1)
        self.act = nn.ReLU()

    def forward(self, x):
        identity = self.skip_norm(self.skip(x))
        out = self.act(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return self.act(self.pool(out) + identity)


class MiddleBlock(nn.Module):
    """Three separable convs at constant width with an identity residual."""

    def __init__(self, channels: int):
        super().__init__()
        self.convs = nn.ModuleList(
            SeparableConv2d(channels, channels) for _ in range(3))
        self.norms = nn.ModuleList(
            nn.GroupNorm(_GROUPS, channels) for _ in range(3))
        self.act = nn.ReLU()

    def forward(self, x):
        out = x
        for conv, norm in zip(self.convs, self.norms):
            out = norm(conv(self.act(out)))
        return x + out


class XceptionMini(nn.Module):
    """Entry stem -> two downsampling blocks -> two middle blocks ->
    exit separable conv -> global average pool."""

    feature_channels = 384

    def __init__(self):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, 32, 3, stride=2, padding=1, bias=False),
            nn.GroupNorm(_GROUPS, 32),
            nn.ReLU(),
            nn.Conv2d(32, 64, 3, padding=1, bias=False),
            nn.GroupNorm(_GROUPS, 64),
            nn.ReLU(),
        )
        self.flow = nn.Sequential(DownBlock(64, 128), DownBlock(128, 256))
        self.middle = nn.Sequential(MiddleBlock(256), MiddleBlock(256))
        self.exit = nn.Sequential(
            SeparableConv2d(256, self.feature_channels),
            nn.GroupNorm(_GROUPS, self.feature_channels),
            nn.ReLU(),
        )
        self.pool = nn.AdaptiveAvgPool2d(1)

    def forward(self, images):
        out = self.exit(self.middle(self.flow(self.stem(images))))
        return self.pool(out).flatten(1)


class ClassifierHead(nn.Module):
    """Dense 128 (the exported feature layer) then a 2-logit output."""

    def __init__(self, in_features: int):
        super().__init__()
        self.dense = nn.Linear(in_features, FEATURE_WIDTH)
        self.act = nn.ReLU()
        self.logits = nn.Linear(FEATURE_WIDTH, N_OUTPUTS)

    def forward(self, pooled):
        features = self.act(self.dense(pooled))
        return self.logits(features), features


class FeatureExtractorModel(nn.Module):
    def __init__(self, backbone: nn.Module, head: ClassifierHead):
        super().__init__()
        self.backbone = backbone
        self.head = head

    def forward(self, images):
        """(logits, features) for a (N, 3, H, W) batch."""
        return self.head(self.backbone(images))

    def features(self, images) -> torch.Tensor:
        """128-dim penultimate activations, shape (N, 128)."""
        _, features = self.forward(images)
        return features


def build_model(name: str = "xception-mini", seed: int = 0
                ) -> FeatureExtractorModel:
    """Seeded construction: the same (name, seed) always yields
    bit-identical initial weights."""
    if name not in BACKBONE_NAMES:
        raise ValueError(
            f"unknown backbone {name!r}; available: {', '.join(BACKBONE_NAMES)}"
        )
    torch.manual_seed(seed)
    backbone = XceptionMini()
    head = ClassifierHead(backbone.feature_channels)
    return FeatureExtractorModel(backbone, head)
