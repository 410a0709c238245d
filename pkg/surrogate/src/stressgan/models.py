"""Network architectures: the conditional-GAN generator/discriminator pair
and the SE-RES convolutional baseline (SRN).

The generator is a plain encoder-decoder parameterized by the mesh size m
(a power of two): log2(m) downsampling blocks of conv(5x5, stride 2) + batch
norm + LeakyReLU, mirrored by log2(m) upsampling blocks of transposed conv +
batch norm + ReLU. The bottleneck activation is always 1x1 spatial with 512
features; the 32-mesh variant is the 128-mesh variant with the four blocks
nearest the bottleneck removed. The final upsampling block has no rectifier
(and no normalization), so outputs may be negative. There is no latent noise
input: the generator is deterministic given its conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

BOTTLENECK_FEATURES = 512
LEAKY_SLOPE = 0.2


class ConfigurationError(ValueError):
    """Unsupported mesh size or channel configuration."""


def _require_power_of_two(m: int, minimum: int):
    if m < minimum or m & (m - 1) != 0:
        raise ConfigurationError(f"mesh size must be a power of two >= {minimum}, got {m}")


def encoder_widths(m: int) -> tuple:
    """Per-block output channels: 64, 128, 256, then 512 up to the
    bottleneck, one block per halving down to 1x1 spatial."""
    _require_power_of_two(m, 16)
    n_blocks = m.bit_length() - 1
    return tuple([64, 128, 256] + [BOTTLENECK_FEATURES] * (n_blocks - 3))


@dataclass(frozen=True)
class GeneratorSpec:
    m: int
    in_channels: int = 3
    out_channels: int = 1
    kernel: int = 5
    stride: int = 2
    widths: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "widths", encoder_widths(self.m))

    @property
    def n_blocks(self) -> int:
        return len(self.widths)


@dataclass(frozen=True)
class DiscriminatorSpec:
    m: int
    in_channels: int = 4  # 3 condition channels + 1 stress channel
    widths: tuple = (64, 128, 256, 512)
    kernel: int = 5
    stride: int = 2

    @property
    def flat_features(self) -> int:
        side = self.m // self.stride ** len(self.widths)
        return self.widths[-1] * side * side


@dataclass(frozen=True)
class SRNSpec:
    m: int
    down_widths: tuple = (32, 64, 128)
    n_res_blocks: int = 5
    edge_kernel: int = 9   # first and last convolutional layers
    inner_kernel: int = 3
    se_reduction: int = 16


def _dcgan_init(module: nn.Module):
    for layer in module.modules():
        if isinstance(layer, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
            nn.init.normal_(layer.weight, 0.0, 0.02)
            if layer.bias is not None:
                nn.init.zeros_(layer.bias)
        elif isinstance(layer, nn.BatchNorm2d):
            nn.init.normal_(layer.weight, 1.0, 0.02)
            nn.init.zeros_(layer.bias)


def _down_block(c_in, c_out, kernel, stride, batch_norm=True):
    layers = [nn.Conv2d(c_in, c_out, kernel, stride=stride, padding=kernel // 2,
                        bias=not batch_norm)]
    if batch_norm:
        layers.append(nn.BatchNorm2d(c_out))
    layers.append(nn.LeakyReLU(LEAKY_SLOPE, inplace=True))
    return nn.Sequential(*layers)


def _up_block(c_in, c_out, kernel, stride, batch_norm=True, rectifier=True):
    layers = [nn.ConvTranspose2d(c_in, c_out, kernel, stride=stride,
                                 padding=kernel // 2, output_padding=stride - 1,
                                 bias=not batch_norm)]
    if batch_norm:
        layers.append(nn.BatchNorm2d(c_out))
    if rectifier:
        layers.append(nn.ReLU(inplace=True))
    return nn.Sequential(*layers)


class Generator(nn.Module):
    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        widths = spec.widths
        encoder = []
        c_in = spec.in_channels
        for k, c_out in enumerate(widths):
            encoder.append(_down_block(c_in, c_out, spec.kernel, spec.stride,
                                       batch_norm=k > 0))
            c_in = c_out
        self.encoder = nn.Sequential(*encoder)
        decoder = []
        out_widths = tuple(reversed(widths[:-1])) + (spec.out_channels,)
        c_in = widths[-1]
        for k, c_out in enumerate(out_widths):
            last = k == len(out_widths) - 1
            decoder.append(_up_block(c_in, c_out, spec.kernel, spec.stride,
                                     batch_norm=not last, rectifier=not last))
            c_in = c_out
        self.decoder = nn.Sequential(*decoder)
        _dcgan_init(self)

    def encode(self, x):
        """Bottleneck activation, shape (batch, 512, 1, 1)."""
        return self.encoder(x)

    def forward(self, x):
        return self.decoder(self.encoder(x))


class Discriminator(nn.Module):
    """Maps condition channels + a stress field to a probability in (0, 1)."""

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        blocks = []
        c_in = spec.in_channels
        for k, c_out in enumerate(spec.widths):
            blocks.append(_down_block(c_in, c_out, spec.kernel, spec.stride,
                                      batch_norm=k > 0))
            c_in = c_out
        self.blocks = nn.Sequential(*blocks)
        self.head = nn.Sequential(nn.Flatten(), nn.Linear(spec.flat_features, 1))
        _dcgan_init(self)

    def forward_logits(self, conditions, stress):
        """Pre-sigmoid score; training losses use this for numerical
        stability (float32 probabilities saturate to exactly 0 and 1)."""
        if conditions.shape[1] + stress.shape[1] != self.spec.in_channels:
            raise ConfigurationError(
                f"discriminator expects {self.spec.in_channels} channels, got "
                f"{conditions.shape[1]} + {stress.shape[1]}"
            )
        out = self.head(self.blocks(torch.cat([conditions, stress], dim=1)))
        return out.squeeze(1)

    def forward(self, conditions, stress):
        return torch.sigmoid(self.forward_logits(conditions, stress))


class SqueezeExcitation(nn.Module):
    def __init__(self, channels, reduction):
        super().__init__()
        hidden = max(channels // reduction, 4)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)

    def forward(self, x):
        weights = x.mean(dim=(2, 3))
        weights = torch.relu(self.fc1(weights))
        weights = torch.sigmoid(self.fc2(weights))
        return x * weights[:, :, None, None]


class SEResBlock(nn.Module):
    def __init__(self, channels, kernel, reduction):
        super().__init__()
        padding = kernel // 2
        self.body = nn.Sequential(
            nn.Conv2d(channels, channels, kernel, padding=padding, bias=False),
            nn.BatchNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, kernel, padding=padding, bias=False),
            nn.BatchNorm2d(channels),
        )
        self.se = SqueezeExcitation(channels, reduction)

    def forward(self, x):
        return torch.relu(x + self.se(self.body(x)))


class SRN(nn.Module):
    """Convolutional baseline: 3 downsampling layers, 5 SE-RES blocks,
    3 upsampling layers; 9x9 kernels on the first and last layers."""

    def __init__(self, spec: SRNSpec):
        super().__init__()
        if spec.m < 32 or spec.m % 8 != 0:
            raise ConfigurationError(f"SRN needs m >= 32 divisible by 8, got {spec.m}")
        self.spec = spec
        w = spec.down_widths
        self.down = nn.Sequential(
            _down_block(3, w[0], spec.edge_kernel, 2, batch_norm=False),
            _down_block(w[0], w[1], spec.inner_kernel, 2),
            _down_block(w[1], w[2], spec.inner_kernel, 2),
        )
        self.res = nn.Sequential(*[
            SEResBlock(w[2], spec.inner_kernel, spec.se_reduction)
            for _ in range(spec.n_res_blocks)
        ])
        self.up = nn.Sequential(
            _up_block(w[2], w[1], spec.inner_kernel, 2),
            _up_block(w[1], w[0], spec.inner_kernel, 2),
            _up_block(w[0], 1, spec.edge_kernel, 2, batch_norm=False, rectifier=False),
        )

    def forward(self, x):
        return self.up(self.res(self.down(x)))


def build_generator(m: int) -> Generator:
    return Generator(GeneratorSpec(m))


def build_discriminator(m: int) -> Discriminator:
    _require_power_of_two(m, 16)
    return Discriminator(DiscriminatorSpec(m))


def build_srn(m: int) -> SRN:
    return SRN(SRNSpec(m))
