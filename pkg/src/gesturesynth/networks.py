"""Generator and discriminator architectures.

The generator is a residual encoder-decoder: a wide stride-1 input
convolution, two stride-2 downsampling convolutions, a stack of residual
blocks, two fractionally strided (transposed) convolutions restoring the
input resolution, and a stride-1 output convolution bounded to [-1, 1].

The discriminator is a fully convolutional patch classifier: kernel-4
stride-2 convolutions, one stride-2 layer per halving, then a stride-1
layer and a 1-channel head. Its receptive field is a pure function of the
layer count; the default 3-layer stack scores 70x70 patches.

The discriminator uses no cross-spatial normalization so that the gradient
of a single output score w.r.t. the input is supported exactly inside its
receptive field (instance norm would leak through the spatial statistics).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from .exceptions import ConfigInvalid, InputTooSmall


@dataclass(frozen=True)
class GeneratorConfig:
    input_size: int = 256
    base_channels: int = 64
    n_res_blocks: int = 9
    n_downsamples: int = 2
    in_channels: int = 3
    out_channels: int = 3
    # "none" keeps constant conditioning planes (e.g. class one-hots) visible;
    # instance norm would subtract them away as per-map spatial means
    norm: str = "instance"

    def __post_init__(self):
        if self.input_size < 1 or self.base_channels < 1 or self.n_res_blocks < 0:
            raise ConfigInvalid("sizes and channel counts must be positive")
        if self.n_downsamples < 0:
            raise ConfigInvalid("n_downsamples must be >= 0")
        if self.input_size % (2 ** self.n_downsamples) != 0:
            raise ConfigInvalid(
                f"input_size {self.input_size} not divisible by 2^{self.n_downsamples}")
        if self.norm not in ("instance", "none"):
            raise ConfigInvalid(f"unknown norm {self.norm!r}")


def receptive_field(n_layers: int, kernel: int = 4) -> int:
    """Receptive field of the discriminator stack with n_layers stride-2 convs."""
    rf = kernel              # output head, stride 1
    rf += kernel - 1         # penultimate stride-1 layer
    for _ in range(n_layers):
        rf = rf * 2 + (kernel - 2)
    return rf


@dataclass(frozen=True)
class DiscriminatorConfig:
    patch_receptive_field: int = 70
    base_channels: int = 64
    n_layers: int = 3
    in_channels: int = 3
    kernel: int = 4

    def __post_init__(self):
        if self.base_channels < 1 or self.n_layers < 0:
            raise ConfigInvalid("base_channels must be >= 1 and n_layers >= 0")
        expected = receptive_field(self.n_layers, self.kernel)
        if self.patch_receptive_field != expected:
            raise ConfigInvalid(
                f"{self.n_layers} stride-2 layers with kernel {self.kernel} give a "
                f"{expected}x{expected} receptive field, not "
                f"{self.patch_receptive_field}")

    @classmethod
    def for_layers(cls, n_layers: int, base_channels: int = 64, in_channels: int = 3,
                   kernel: int = 4) -> "DiscriminatorConfig":
        return cls(patch_receptive_field=receptive_field(n_layers, kernel),
                   base_channels=base_channels, n_layers=n_layers,
                   in_channels=in_channels, kernel=kernel)


def _norm_layer(norm: str, channels: int) -> nn.Module:
    return nn.InstanceNorm2d(channels) if norm == "instance" else nn.Identity()


class ResidualBlock(nn.Module):
    def __init__(self, channels, norm="instance"):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm_layer(norm, channels),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm_layer(norm, channels),
        )

    def forward(self, x):
        return x + self.block(x)


class ResidualGenerator(nn.Module):
    def __init__(self, cfg: GeneratorConfig):
        super().__init__()
        self.cfg = cfg
        ch = cfg.base_channels
        layers = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(cfg.in_channels, ch, 7),
            _norm_layer(cfg.norm, ch),
            nn.ReLU(inplace=True),
        ]
        for _ in range(cfg.n_downsamples):
            layers += [
                nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1),
                _norm_layer(cfg.norm, ch * 2),
                nn.ReLU(inplace=True),
            ]
            ch *= 2
        layers += [ResidualBlock(ch, cfg.norm) for _ in range(cfg.n_res_blocks)]
        for _ in range(cfg.n_downsamples):
            layers += [
                nn.ConvTranspose2d(ch, ch // 2, 3, stride=2, padding=1, output_padding=1),
                _norm_layer(cfg.norm, ch // 2),
                nn.ReLU(inplace=True),
            ]
            ch //= 2
        layers += [
            nn.ReflectionPad2d(3),
            nn.Conv2d(ch, cfg.out_channels, 7),
            nn.Tanh(),
        ]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        stride = 2 ** self.cfg.n_downsamples
        if x.shape[-2] % stride or x.shape[-1] % stride:
            raise InputTooSmall(
                f"spatial dims {tuple(x.shape[-2:])} not divisible by {stride}")
        return self.model(x)


class PatchDiscriminator(nn.Module):
    """Fully convolutional patch scorer; works on any input not smaller than
    its receptive field and emits one score per overlapping patch."""

    def __init__(self, cfg: DiscriminatorConfig):
        super().__init__()
        self.cfg = cfg
        k, pad = cfg.kernel, cfg.kernel // 2 - 1
        ch_in = cfg.in_channels
        layers = []
        for i in range(cfg.n_layers):
            ch_out = min(cfg.base_channels * 2 ** i, cfg.base_channels * 8)
            layers += [nn.Conv2d(ch_in, ch_out, k, stride=2, padding=pad),
                       nn.LeakyReLU(0.2, inplace=True)]
            ch_in = ch_out
        ch = min(cfg.base_channels * 2 ** cfg.n_layers, cfg.base_channels * 8)
        layers += [nn.Conv2d(ch_in, ch, k, stride=1, padding=pad),
                   nn.LeakyReLU(0.2, inplace=True)]
        layers += [nn.Conv2d(ch, 1, k, stride=1, padding=pad)]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        rf = self.cfg.patch_receptive_field
        if x.shape[-2] < rf or x.shape[-1] < rf:
            raise InputTooSmall(
                f"input {tuple(x.shape[-2:])} smaller than the {rf}x{rf} patch size")
        return self.model(x)


class FullImageDiscriminator(nn.Module):
    """Dense-head baseline: the same convolutional stack followed by a fully
    connected layer over the flattened feature map. Exists as the parameter
    budget reference for the patch discriminator; fixed input size."""

    def __init__(self, cfg: DiscriminatorConfig, input_size: int):
        super().__init__()
        k, pad = cfg.kernel, cfg.kernel // 2 - 1
        ch_in = cfg.in_channels
        layers = []
        size = input_size
        for i in range(cfg.n_layers):
            ch_out = min(cfg.base_channels * 2 ** i, cfg.base_channels * 8)
            layers += [nn.Conv2d(ch_in, ch_out, k, stride=2, padding=pad),
                       nn.LeakyReLU(0.2, inplace=True)]
            ch_in = ch_out
            size = (size + 2 * pad - k) // 2 + 1
        ch = min(cfg.base_channels * 2 ** cfg.n_layers, cfg.base_channels * 8)
        layers += [nn.Conv2d(ch_in, ch, k, stride=1, padding=pad),
                   nn.LeakyReLU(0.2, inplace=True)]
        size = size + 2 * pad - k + 1
        self.features = nn.Sequential(*layers)
        self.head = nn.Linear(ch * size * size, 1)

    def forward(self, x):
        return self.head(self.features(x).flatten(1))


def build_generator(cfg: GeneratorConfig) -> ResidualGenerator:
    gen = ResidualGenerator(cfg)
    init_weights(gen)
    return gen


def build_patch_discriminator(cfg: DiscriminatorConfig) -> PatchDiscriminator:
    disc = PatchDiscriminator(cfg)
    init_weights(disc)
    return disc


def init_weights(module: nn.Module, std: float = 0.02) -> None:
    """Zero-mean Gaussian init on all convolutional and linear weights."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
            nn.init.normal_(m.weight, 0.0, std)
            if m.bias is not None:
                nn.init.zeros_(m.bias)


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
