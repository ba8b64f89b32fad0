"""Attention primitives: plain, face-magnified, reference-augmented, windowed.

All variants share one rule: queries always come from the stream being
denoised; conditioning only ever adds keys/values, so token counts are
preserved end to end.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


class SelfAttention(nn.Module):
    """Multi-head self-attention over (batch, tokens, channels).

    `extra_kv` appends conditioning tokens to the key/value set; with
    zero extra tokens this is exactly plain self-attention.
    """

    def __init__(self, channels: int, heads: int):
        super().__init__()
        if channels % heads != 0:
            raise ValueError(f"channels {channels} not divisible by heads {heads}")
        self.channels = channels
        self.heads = heads
        self.q_proj = nn.Linear(channels, channels, bias=False)
        self.k_proj = nn.Linear(channels, channels, bias=False)
        self.v_proj = nn.Linear(channels, channels, bias=False)
        self.out_proj = nn.Linear(channels, channels)

    def forward(self, x, extra_kv=None, return_weights=False):
        if extra_kv is not None and extra_kv.shape[1] > 0:
            if extra_kv.shape[-1] != x.shape[-1]:
                raise ValueError(
                    f"channel mismatch: stream has {x.shape[-1]}, "
                    f"extra key/values have {extra_kv.shape[-1]}"
                )
            source = torch.cat([x, extra_kv], dim=1)
        else:
            source = x
        out, weights = _attend(
            self.q_proj(x), self.k_proj(source), self.v_proj(source), self.heads
        )
        out = self.out_proj(out)
        if return_weights:
            return out, weights
        return out


class CrossAttention(nn.Module):
    """Multi-head attention against an external context sequence.

    Key/value/output projections carry biases, so even an all-zero
    context contributes a fixed, input-independent token.
    """

    def __init__(self, channels: int, context_channels: int, heads: int):
        super().__init__()
        if channels % heads != 0:
            raise ValueError(f"channels {channels} not divisible by heads {heads}")
        self.channels = channels
        self.heads = heads
        self.q_proj = nn.Linear(channels, channels, bias=False)
        self.k_proj = nn.Linear(context_channels, channels)
        self.v_proj = nn.Linear(context_channels, channels)
        self.out_proj = nn.Linear(channels, channels)

    def forward(self, x, context, return_weights=False):
        if context.ndim == 2:
            context = context.unsqueeze(0)
        if context.shape[0] == 1 and x.shape[0] > 1:
            context = context.expand(x.shape[0], -1, -1)
        out, weights = _attend(
            self.q_proj(x), self.k_proj(context), self.v_proj(context), self.heads
        )
        out = self.out_proj(out)
        if return_weights:
            return out, weights
        return out


def _attend(q, k, v, heads):
    b, n, c = q.shape
    m = k.shape[1]
    d = c // heads
    q = q.view(b, n, heads, d).transpose(1, 2)
    k = k.view(b, m, heads, d).transpose(1, 2)
    v = v.view(b, m, heads, d).transpose(1, 2)
    logits = q @ k.transpose(-1, -2) / (d**0.5)
    weights = torch.softmax(logits, dim=-1)
    out = (weights @ v).transpose(1, 2).reshape(b, n, c)
    return out, weights


class MagnificationParam(nn.Module):
    """Learnable face-token gain, structurally constrained above 1.

    gamma = 1 + softplus(raw); the raw parameter starts at -4 so the
    gain begins near identity (~1.018) and training can only push it up
    from a floor of exactly 1.
    """

    def __init__(self, init: float = -4.0):
        super().__init__()
        self.raw = nn.Parameter(torch.tensor(float(init)))

    def gamma(self) -> torch.Tensor:
        return 1.0 + F.softplus(self.raw)


def face_enhance_attention(attn: SelfAttention, tokens, face_flags, gamma):
    """Self-attention with flagged (face) tokens pre-scaled by gamma.

    face_flags is boolean with one flag per token, shaped (n,) or
    (batch, n). The scaling happens before the query/key/value
    projections; unflagged tokens pass through untouched.
    """
    flags = torch.as_tensor(face_flags, dtype=torch.bool, device=tokens.device)
    if flags.shape[-1] != tokens.shape[1]:
        raise ValueError(
            f"flag arity {flags.shape[-1]} does not match token arity {tokens.shape[1]}"
        )
    if flags.ndim == 1:
        flags = flags.unsqueeze(0)
    gamma = torch.as_tensor(gamma, dtype=tokens.dtype, device=tokens.device)
    scale = torch.where(flags.unsqueeze(-1), gamma, tokens.new_ones(()))
    return attn(tokens * scale)


def concat_reference_attention(attn: SelfAttention, tokens, ref_tokens):
    """Self-attention whose key/value set is [tokens || ref_tokens].

    Queries come from `tokens` only, so the output token count stays n.
    """
    if ref_tokens is not None and ref_tokens.shape[1] > 0:
        if ref_tokens.shape[-1] != tokens.shape[-1]:
            raise ValueError(
                f"channel mismatch: stream has {tokens.shape[-1]}, "
                f"reference has {ref_tokens.shape[-1]}"
            )
        if ref_tokens.shape[0] == 1 and tokens.shape[0] > 1:
            ref_tokens = ref_tokens.expand(tokens.shape[0], -1, -1)
    return attn(tokens, extra_kv=ref_tokens)


def all_frames_attention(attn: SelfAttention, window_tokens, ref_tokens=None):
    """Joint self-attention across every frame of a temporal window.

    window_tokens is (f, n, c); the f*n tokens attend to each other (and
    to the reference tokens) as one sequence, then the result is folded
    back to per-frame shape. With f = 1 this is exactly
    concat_reference_attention.
    """
    f, n, c = window_tokens.shape
    flat = window_tokens.reshape(1, f * n, c)
    kv = None
    if ref_tokens is not None:
        kv = ref_tokens if ref_tokens.ndim == 3 else ref_tokens.unsqueeze(0)
    out = concat_reference_attention(attn, flat, kv)
    return out.reshape(f, n, c)
