"""Building blocks shared by the denoiser, reference, and control trunks."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from .attention import (
    CrossAttention,
    MagnificationParam,
    SelfAttention,
    all_frames_attention,
    concat_reference_attention,
    face_enhance_attention,
)


def _norm_groups(channels: int) -> int:
    for g in (8, 4, 2, 1):
        if channels % g == 0:
            return g
    return 1


class TimeEmbedding(nn.Module):
    """Sinusoidal timestep features refined by a small MLP."""

    def __init__(self, channels: int):
        super().__init__()
        if channels % 2 != 0:
            raise ValueError("time embedding width must be even")
        self.channels = channels
        self.lin1 = nn.Linear(channels, channels)
        self.lin2 = nn.Linear(channels, channels)

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        # t: (b,) integer timesteps
        half = self.channels // 2
        dtype = self.lin1.weight.dtype
        freqs = torch.exp(
            -math.log(10000.0)
            * torch.arange(half, dtype=dtype, device=t.device)
            / half
        )
        angles = t.to(dtype)[:, None] * freqs[None, :]
        emb = torch.cat([torch.sin(angles), torch.cos(angles)], dim=1)
        return self.lin2(F.silu(self.lin1(emb)))


class ResidualBlock(nn.Module):
    def __init__(self, in_channels: int, out_channels: int, time_channels: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(_norm_groups(in_channels), in_channels)
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        self.time_proj = nn.Linear(time_channels, out_channels)
        self.norm2 = nn.GroupNorm(_norm_groups(out_channels), out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        if in_channels == out_channels:
            self.skip = nn.Identity()
        else:
            self.skip = nn.Conv2d(in_channels, out_channels, 1)

    def forward(self, x, t_emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time_proj(F.silu(t_emb))[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class TransformerBlock(nn.Module):
    """Self-attention + cross-attention + MLP over flattened spatial tokens.

    The self-attention sublayer is where all conditioning variants meet:
    reference tokens join as extra keys/values, temporal mode fuses the
    window frames into one sequence, and face-enhanced blocks (used by
    the reference trunk) pre-scale flagged tokens by their learnable
    gain. `collect=True` returns the token stream right after the
    self-attention residual, which is what reference feature banks store.
    """

    def __init__(self, channels, heads, context_channels, face_enhanced=False):
        super().__init__()
        self.norm_attn = nn.LayerNorm(channels)
        self.attn = SelfAttention(channels, heads)
        self.norm_cross = nn.LayerNorm(channels)
        self.cross = CrossAttention(channels, context_channels, heads)
        self.norm_ff = nn.LayerNorm(channels)
        self.ff = nn.Sequential(
            nn.Linear(channels, 4 * channels),
            nn.GELU(),
            nn.Linear(4 * channels, channels),
        )
        self.magnify = MagnificationParam() if face_enhanced else None

    def forward(
        self,
        x,
        context,
        ref_tokens=None,
        face_flags=None,
        temporal=False,
        collect=False,
    ):
        b, c, h, w = x.shape
        tokens = x.reshape(b, c, h * w).transpose(1, 2)
        pre = self.norm_attn(tokens)
        if self.magnify is not None and face_flags is not None:
            attn_out = face_enhance_attention(
                self.attn, pre, face_flags, self.magnify.gamma()
            )
        elif temporal:
            attn_out = all_frames_attention(self.attn, pre, ref_tokens)
        else:
            attn_out = concat_reference_attention(self.attn, pre, ref_tokens)
        tokens = tokens + attn_out
        recorded = tokens if collect else None
        tokens = tokens + self.cross(self.norm_cross(tokens), context)
        tokens = tokens + self.ff(self.norm_ff(tokens))
        out = tokens.transpose(1, 2).reshape(b, c, h, w)
        return out, recorded


class Downsample(nn.Module):
    def __init__(self, in_channels, out_channels):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, out_channels, 3, stride=2, padding=1)

    def forward(self, x):
        return self.conv(x)


class Upsample(nn.Module):
    def __init__(self, in_channels, out_channels):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, out_channels, 3, padding=1)

    def forward(self, x):
        return self.conv(F.interpolate(x, scale_factor=2, mode="nearest"))


def zero_conv(in_channels, out_channels):
    """1x1 convolution with weights and bias zeroed.

    Standard control-branch convention: until trained, the branch is an
    exact no-op on the network it feeds.
    """
    conv = nn.Conv2d(in_channels, out_channels, 1)
    nn.init.zeros_(conv.weight)
    nn.init.zeros_(conv.bias)
    return conv
