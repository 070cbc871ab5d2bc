"""Small convolutional generator and critic for patch enhancement.

Both networks are deliberately tiny (well under 100k parameters each) so a
full adversarial training run finishes in seconds on a CPU. The generator is
an encoder-decoder with skip connections producing a per-pixel text
probability; the critic scores a candidate mask jointly with the input patch
it supposedly explains.
"""

from __future__ import annotations

import torch
import torch.nn as nn

# Sigmoid saturates to exactly 0.0 or 1.0 in float32; clamping keeps outputs
# strictly inside (0, 1) so cross entropy on them is always finite.
_OUTPUT_MARGIN = 1e-6


def _check_spatial(x: torch.Tensor) -> None:
    if x.ndim != 4:
        raise ValueError(f"expected a (batch, channels, height, width) tensor, got shape {tuple(x.shape)}")
    h, w = x.shape[-2], x.shape[-1]
    if h % 4 != 0 or w % 4 != 0:
        raise ValueError(f"spatial dims must be divisible by 4 (two stride-2 stages), got {h}x{w}")


class ToyGenerator(nn.Module):
    """Encoder-decoder with skip connections; emits per-pixel values in (0, 1).

    Input is a (batch, in_channels, H, W) patch with intensities scaled to
    [0, 1]; output has the same H and W with a single channel. H and W must
    be divisible by 4.
    """

    def __init__(self, in_channels: int = 1, base_width: int = 16):
        super().__init__()
        if in_channels not in (1, 3):
            raise ValueError(f"in_channels must be 1 or 3, got {in_channels}")
        if base_width < 1:
            raise ValueError(f"base_width must be >= 1, got {base_width}")
        w = base_width
        self.in_channels = in_channels
        act = nn.LeakyReLU(0.2)
        self.enc1 = nn.Sequential(nn.Conv2d(in_channels, w, 3, padding=1), act)
        self.down1 = nn.Sequential(nn.Conv2d(w, w, 3, stride=2, padding=1), act)
        self.enc2 = nn.Sequential(nn.Conv2d(w, 2 * w, 3, padding=1), act)
        self.down2 = nn.Sequential(nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1), act)
        self.mid = nn.Sequential(nn.Conv2d(2 * w, 2 * w, 3, padding=1), act)
        self.up1 = nn.Sequential(nn.ConvTranspose2d(2 * w, 2 * w, 2, stride=2), act)
        self.dec1 = nn.Sequential(nn.Conv2d(4 * w, w, 3, padding=1), act)
        self.up2 = nn.Sequential(nn.ConvTranspose2d(w, w, 2, stride=2), act)
        self.dec2 = nn.Sequential(nn.Conv2d(2 * w, w, 3, padding=1), act)
        self.head = nn.Conv2d(w, 1, 3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_spatial(x)
        if x.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channel(s), got {x.shape[1]}")
        e1 = self.enc1(x)
        e2 = self.enc2(self.down1(e1))
        m = self.up1(self.mid(self.down2(e2)))
        d1 = self.dec1(torch.cat([m, e2], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d1), e1], dim=1))
        return torch.sigmoid(self.head(d2)).clamp(_OUTPUT_MARGIN, 1.0 - _OUTPUT_MARGIN)


class ToyDiscriminator(nn.Module):
    """Strided convolutional critic scoring (candidate, conditioning input) pairs.

    The candidate mask and the patch it was generated from are stacked on
    the channel axis, so the score depends on both. No normalization layers:
    the gradient penalty assumes per-sample critic gradients. Returns one
    unbounded score per batch element.
    """

    def __init__(self, condition_channels: int = 1, base_width: int = 16):
        super().__init__()
        if condition_channels not in (1, 3):
            raise ValueError(f"condition_channels must be 1 or 3, got {condition_channels}")
        w = base_width
        self.condition_channels = condition_channels
        act = nn.LeakyReLU(0.2)
        self.body = nn.Sequential(
            nn.Conv2d(1 + condition_channels, w, 4, stride=2, padding=1), act,
            nn.Conv2d(w, 2 * w, 4, stride=2, padding=1), act,
            nn.Conv2d(2 * w, 2 * w, 4, stride=2, padding=1), act,
            nn.Conv2d(2 * w, 1, 3, padding=1),
        )

    def forward(self, candidate: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        _check_spatial(candidate)
        if candidate.shape[1] != 1:
            raise ValueError(f"candidate must be single-channel, got {candidate.shape[1]}")
        if condition.shape[1] != self.condition_channels:
            raise ValueError(f"expected {self.condition_channels} condition channel(s), got {condition.shape[1]}")
        if candidate.shape[-2:] != condition.shape[-2:] or candidate.shape[0] != condition.shape[0]:
            raise ValueError(
                f"candidate {tuple(candidate.shape)} and condition {tuple(condition.shape)} do not align"
            )
        score_map = self.body(torch.cat([candidate, condition], dim=1))
        return score_map.mean(dim=(1, 2, 3))


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
