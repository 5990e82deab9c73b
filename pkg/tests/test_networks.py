import numpy as np
import pytest
import torch

from gesturesynth.exceptions import ConfigInvalid, InputTooSmall
from gesturesynth.networks import (DiscriminatorConfig, FullImageDiscriminator,
                                   GeneratorConfig, ResidualBlock,
                                   build_generator, build_patch_discriminator,
                                   count_parameters, receptive_field)


def grad_support_extent(disc, input_size, channels=3):
    """Bounding-box extent of d(score)/d(input) for the center output score."""
    torch.manual_seed(0)
    x = torch.randn(1, channels, input_size, input_size, requires_grad=True)
    scores = disc(x)
    i, j = scores.shape[-2] // 2, scores.shape[-1] // 2
    scores[0, 0, i, j].backward()
    support = x.grad[0].abs().sum(0).numpy() > 0
    ys, xs = np.nonzero(support)
    return (int(ys.max() - ys.min() + 1), int(xs.max() - xs.min() + 1))


class TestGenerator:
    def test_shape_preserved_at_256(self):
        gen = build_generator(GeneratorConfig())
        with torch.no_grad():
            out = gen(torch.randn(1, 3, 256, 256))
        assert tuple(out.shape) == (1, 3, 256, 256)

    def test_default_has_nine_residual_blocks(self):
        gen = build_generator(GeneratorConfig())
        n = sum(1 for m in gen.modules() if isinstance(m, ResidualBlock))
        assert n == 9

    def test_innermost_feature_map_size(self):
        # 64 / 2^2 = 16 after the two stride-2 downsamplers
        cfg = GeneratorConfig(input_size=64, base_channels=8, n_res_blocks=1)
        gen = build_generator(cfg)
        sizes = {}

        def hook(module, inputs, output):
            sizes["inner"] = tuple(output.shape[-2:])

        blocks = [m for m in gen.modules() if isinstance(m, ResidualBlock)]
        blocks[0].register_forward_hook(hook)
        with torch.no_grad():
            gen(torch.randn(1, 3, 64, 64))
        assert sizes["inner"] == (16, 16)

    def test_output_bounded(self):
        gen = build_generator(GeneratorConfig(input_size=32, base_channels=8,
                                              n_res_blocks=1))
        with torch.no_grad():
            out = gen(torch.randn(2, 3, 32, 32) * 5)
        assert out.min() >= -1.0
        assert out.max() <= 1.0

    def test_indivisible_input_rejected(self):
        gen = build_generator(GeneratorConfig(input_size=32, base_channels=8,
                                              n_res_blocks=1))
        with pytest.raises(InputTooSmall):
            gen(torch.randn(1, 3, 30, 30))

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigInvalid):
            GeneratorConfig(input_size=33, n_downsamples=2)
        with pytest.raises(ConfigInvalid):
            GeneratorConfig(base_channels=0)


class TestPatchDiscriminator:
    def test_score_map_30x30_at_256(self):
        disc = build_patch_discriminator(DiscriminatorConfig())
        with torch.no_grad():
            scores = disc(torch.randn(1, 3, 256, 256))
        assert tuple(scores.shape) == (1, 1, 30, 30)

    def test_receptive_field_arithmetic(self):
        assert receptive_field(3) == 70
        assert receptive_field(2) == 34
        assert receptive_field(1) == 16
        assert receptive_field(0) == 7

    def test_config_receptive_field_consistency(self):
        with pytest.raises(ConfigInvalid):
            DiscriminatorConfig(patch_receptive_field=64, n_layers=3)
        cfg = DiscriminatorConfig.for_layers(2)
        assert cfg.patch_receptive_field == 34

    def test_gradient_support_inside_70px_window(self):
        disc = build_patch_discriminator(DiscriminatorConfig())
        extent = grad_support_extent(disc, 128)
        assert extent[0] <= 70 and extent[1] <= 70

    def test_gradient_support_exactly_70_for_interior_score(self):
        disc = build_patch_discriminator(DiscriminatorConfig())
        assert grad_support_extent(disc, 256) == (70, 70)

    def test_larger_inputs_accepted(self):
        disc = build_patch_discriminator(
            DiscriminatorConfig.for_layers(3, base_channels=8))
        with torch.no_grad():
            scores = disc(torch.randn(1, 3, 512, 512))
        assert scores.shape[-1] > 30

    def test_input_smaller_than_patch_rejected(self):
        disc = build_patch_discriminator(DiscriminatorConfig())
        with pytest.raises(InputTooSmall):
            disc(torch.randn(1, 3, 64, 64))

    def test_fewer_parameters_than_dense_baseline(self):
        cfg = DiscriminatorConfig()
        patch = build_patch_discriminator(cfg)
        full = FullImageDiscriminator(cfg, input_size=256)
        assert count_parameters(patch) < count_parameters(full)


def test_weight_init_statistics():
    torch.manual_seed(0)
    gen = build_generator(GeneratorConfig(input_size=64))
    weights = torch.cat([m.weight.detach().flatten() for m in gen.modules()
                         if isinstance(m, torch.nn.Conv2d)])
    assert abs(float(weights.mean())) < 1e-3
    assert float(weights.std()) == pytest.approx(0.02, rel=0.05)
