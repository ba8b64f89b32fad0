"""The denoising UNet and its two sibling trunks.

BackboneDenoiser predicts the injected noise from a noisy frame; its
self-attention layers optionally take reference tokens as extra
keys/values and its decoder blocks add pose-control residuals to their
skip input. ReferenceNet is the same trunk with face-enhanced
self-attention; one pass over a reference image yields the per-layer
token bank. PoseControlNet mirrors the backbone encoder and taps each
stage through a zero-initialized projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

from .blocks import (
    Downsample,
    ResidualBlock,
    TimeEmbedding,
    TransformerBlock,
    Upsample,
    zero_conv,
)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters for all three trunks."""

    image_size: tuple[int, int] = (64, 64)
    channels: tuple[int, ...] = (32, 64, 128)
    attention_levels: tuple[int, ...] = (1, 2)
    heads: int = 4
    context_channels: int = 16
    time_channels: int = 64
    window_size: int = 4

    def __post_init__(self):
        h, w = self.image_size
        stride = 2 ** (self.num_levels - 1)
        if h % stride != 0 or w % stride != 0:
            raise ValueError(
                f"image size {self.image_size} not divisible by 2^{self.num_levels - 1}"
            )
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        for lvl in self.attention_levels:
            if not 0 <= lvl < self.num_levels:
                raise ValueError(f"attention level {lvl} outside [0, {self.num_levels})")
            if self.channels[lvl] % self.heads != 0:
                raise ValueError(
                    f"channels {self.channels[lvl]} at level {lvl} not divisible "
                    f"by {self.heads} heads"
                )
        if self.channels[-1] % self.heads != 0:
            raise ValueError("deepest channel width must be divisible by heads")

    @property
    def num_levels(self) -> int:
        return len(self.channels)

    def level_grid(self, level: int) -> tuple[int, int]:
        h, w = self.image_size
        return h // 2**level, w // 2**level

    def attention_layer_specs(self) -> list[tuple[str, int, int, int]]:
        """(name, level, tokens, channels) for every self-attention layer,
        in forward order: encoder (shallow to deep), middle, decoder
        (deep to shallow)."""
        specs = []
        for lvl in range(self.num_levels):
            if lvl in self.attention_levels:
                h, w = self.level_grid(lvl)
                specs.append((f"encoder_l{lvl}", lvl, h * w, self.channels[lvl]))
        h, w = self.level_grid(self.num_levels - 1)
        specs.append(("middle", self.num_levels - 1, h * w, self.channels[-1]))
        for lvl in reversed(range(self.num_levels)):
            if lvl in self.attention_levels:
                h, w = self.level_grid(lvl)
                specs.append((f"decoder_l{lvl}", lvl, h * w, self.channels[lvl]))
        return specs

    def decoder_injection_shapes(self, batch: int = 1) -> list[tuple[int, ...]]:
        """Shape of the skip tensor each decoder block receives, in
        decoder forward order (deepest first)."""
        shapes = []
        for lvl in reversed(range(self.num_levels)):
            h, w = self.level_grid(lvl)
            shapes.append((batch, self.channels[lvl], h, w))
        return shapes

    def to_dict(self) -> dict:
        return {
            "image_size": list(self.image_size),
            "channels": list(self.channels),
            "attention_levels": list(self.attention_levels),
            "heads": self.heads,
            "context_channels": self.context_channels,
            "time_channels": self.time_channels,
            "window_size": self.window_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            image_size=tuple(d["image_size"]),
            channels=tuple(d["channels"]),
            attention_levels=tuple(d["attention_levels"]),
            heads=d["heads"],
            context_channels=d["context_channels"],
            time_channels=d["time_channels"],
            window_size=d["window_size"],
        )


@dataclass
class FeatureBank:
    """Per-self-attention-layer reference tokens plus face-token flags.

    layers[i] is (batch, tokens_i, channels_i); face_flags[i] is a
    boolean (batch, tokens_i) marking which tokens sit on the face.
    """

    layers: list[torch.Tensor]
    face_flags: list[torch.Tensor]

    def __post_init__(self):
        if len(self.layers) != len(self.face_flags):
            raise ValueError(
                f"{len(self.layers)} token layers but {len(self.face_flags)} flag layers"
            )
        for i, (tok, flags) in enumerate(zip(self.layers, self.face_flags)):
            if flags.shape[-1] != tok.shape[1]:
                raise ValueError(
                    f"layer {i}: flag arity {flags.shape[-1]} != token arity {tok.shape[1]}"
                )

    @property
    def num_layers(self) -> int:
        return len(self.layers)


@dataclass
class ControlResiduals:
    """One residual per decoder block, deepest block first.

    Each tensor is added to the corresponding block's skip input before
    the block processes it, so shapes must match
    ModelConfig.decoder_injection_shapes exactly.
    """

    residuals: list[torch.Tensor]


class BackboneDenoiser(nn.Module):
    """UNet noise predictor with injectable conditioning."""

    def __init__(self, config: ModelConfig, face_enhanced: bool = False):
        super().__init__()
        self.config = config
        ch = config.channels
        self.time_embed = TimeEmbedding(config.time_channels)
        self.stem = nn.Conv2d(3, ch[0], 3, padding=1)

        def make_attn(level):
            return TransformerBlock(
                ch[level], config.heads, config.context_channels, face_enhanced
            )

        self.enc_levels = nn.ModuleList()
        for lvl in range(config.num_levels):
            level = nn.ModuleDict()
            if lvl > 0:
                level["down"] = Downsample(ch[lvl - 1], ch[lvl])
            level["res"] = ResidualBlock(ch[lvl], ch[lvl], config.time_channels)
            if lvl in config.attention_levels:
                level["attn"] = make_attn(lvl)
            self.enc_levels.append(level)

        self.mid_res1 = ResidualBlock(ch[-1], ch[-1], config.time_channels)
        self.mid_attn = TransformerBlock(
            ch[-1], config.heads, config.context_channels, face_enhanced
        )
        self.mid_res2 = ResidualBlock(ch[-1], ch[-1], config.time_channels)

        self.dec_levels = nn.ModuleList()
        for lvl in reversed(range(config.num_levels)):
            level = nn.ModuleDict()
            level["res"] = ResidualBlock(2 * ch[lvl], ch[lvl], config.time_channels)
            if lvl in config.attention_levels:
                level["attn"] = make_attn(lvl)
            if lvl > 0:
                level["up"] = Upsample(ch[lvl], ch[lvl - 1])
            self.dec_levels.append(level)

        self.out_norm = nn.GroupNorm(min(8, ch[0]), ch[0])
        self.out_conv = nn.Conv2d(ch[0], 3, 3, padding=1)

    def empty_bank(self, batch: int = 1) -> FeatureBank:
        """A bank with zero reference tokens per layer (neutral conditioning)."""
        p = next(self.parameters())
        layers, flags = [], []
        for _, _, _, channels in self.config.attention_layer_specs():
            layers.append(torch.zeros(batch, 0, channels, dtype=p.dtype, device=p.device))
            flags.append(torch.zeros(batch, 0, dtype=torch.bool, device=p.device))
        return FeatureBank(layers=layers, face_flags=flags)

    def _validate_bank(self, bank: FeatureBank, batch: int, temporal: bool):
        specs = self.config.attention_layer_specs()
        if bank.num_layers != len(specs):
            raise ValueError(
                f"reference bank has {bank.num_layers} layers, backbone has "
                f"{len(specs)} self-attention layers"
            )
        for tokens, (name, _, _, channels) in zip(bank.layers, specs):
            if tokens.shape[-1] != channels:
                raise ValueError(
                    f"reference bank at {name}: {tokens.shape[-1]} channels, "
                    f"expected {channels}"
                )
            if temporal:
                if tokens.shape[0] != 1:
                    raise ValueError(
                        f"reference bank at {name}: all-frames attention needs a "
                        f"single shared reference, got batch {tokens.shape[0]}"
                    )
            elif tokens.shape[0] not in (1, batch):
                raise ValueError(
                    f"reference bank at {name}: batch {tokens.shape[0]} "
                    f"incompatible with stream batch {batch}"
                )

    def _validate_control(self, control: ControlResiduals, batch: int):
        expected = self.config.decoder_injection_shapes(batch)
        if len(control.residuals) != len(expected):
            raise ValueError(
                f"{len(control.residuals)} control residuals for "
                f"{len(expected)} decoder blocks"
            )
        names = [f"decoder_l{lvl}" for lvl in reversed(range(self.config.num_levels))]
        for name, res, shape in zip(names, control.residuals, expected):
            if tuple(res.shape) != shape:
                raise ValueError(
                    f"control residual at {name}: shape {tuple(res.shape)}, "
                    f"expected {shape}"
                )

    def forward(
        self,
        x_t: torch.Tensor,
        t: torch.Tensor,
        bank: FeatureBank | None = None,
        control: ControlResiduals | None = None,
        context: torch.Tensor | None = None,
        temporal_mode: str = "per-frame",
    ) -> torch.Tensor:
        """Predict the noise component of x_t.

        With bank=None and control=None this is the bare denoiser. In
        "all-frames" temporal mode the batch dimension is treated as a
        window of frames whose tokens attend jointly.
        """
        if temporal_mode not in ("per-frame", "all-frames"):
            raise ValueError(f"unknown temporal mode {temporal_mode!r}")
        if context is None:
            raise ValueError("context is required (pass the model's null context)")
        temporal = temporal_mode == "all-frames"
        if bank is not None:
            self._validate_bank(bank, x_t.shape[0], temporal)
        if control is not None:
            self._validate_control(control, x_t.shape[0])
        t_emb = self.time_embed(t)
        out, _ = self._run_trunk(
            x_t, t_emb, context, bank=bank, control=control, temporal=temporal
        )
        return out

    def _run_trunk(
        self,
        x,
        t_emb,
        context,
        bank=None,
        control=None,
        temporal=False,
        flags=None,
        collect=False,
        run_head=True,
    ):
        attn_idx = 0
        collected: list[torch.Tensor] = []

        def block_args():
            ref = bank.layers[attn_idx] if bank is not None else None
            ff = flags[attn_idx] if flags is not None else None
            return {"ref_tokens": ref, "face_flags": ff, "temporal": temporal}

        h = self.stem(x)
        skips = []
        for level in self.enc_levels:
            if "down" in level:
                h = level["down"](h)
            h = level["res"](h, t_emb)
            if "attn" in level:
                h, rec = level["attn"](h, context, collect=collect, **block_args())
                attn_idx += 1
                if collect:
                    collected.append(rec)
            skips.append(h)

        h = self.mid_res1(h, t_emb)
        h, rec = self.mid_attn(h, context, collect=collect, **block_args())
        attn_idx += 1
        if collect:
            collected.append(rec)
        h = self.mid_res2(h, t_emb)

        for i, level in enumerate(self.dec_levels):
            skip = skips.pop()
            if control is not None:
                skip = skip + control.residuals[i]
            h = level["res"](torch.cat([h, skip], dim=1), t_emb)
            if "attn" in level:
                h, rec = level["attn"](h, context, collect=collect, **block_args())
                attn_idx += 1
                if collect:
                    collected.append(rec)
            if "up" in level:
                h = level["up"](h)

        if run_head:
            h = self.out_conv(F.silu(self.out_norm(h)))
        return h, collected


def face_flags_for_grid(face_mask: torch.Tensor, grid: tuple[int, int]) -> torch.Tensor:
    """Downsample a pixel mask to per-token booleans on a coarser grid.

    A token is flagged when the mask covers more than half of its cell.
    face_mask: (batch, H, W) with values in {0, 1}.
    """
    b, mh, mw = face_mask.shape
    gh, gw = grid
    if mh % gh != 0 or mw % gw != 0:
        raise ValueError(f"mask size ({mh}, {mw}) not divisible by grid {grid}")
    cells = face_mask.reshape(b, gh, mh // gh, gw, mw // gw).to(torch.float64)
    coverage = cells.mean(dim=(2, 4))
    return (coverage > 0.5).reshape(b, gh * gw)


class ReferenceNet(BackboneDenoiser):
    """Appearance encoder: the backbone trunk with face-enhanced attention.

    One forward pass over a reference image records, at every
    self-attention layer, the post-attention token stream together with
    the face flags for that layer's token grid.
    """

    def __init__(self, config: ModelConfig):
        super().__init__(config, face_enhanced=True)

    def forward(
        self,
        ref_image: torch.Tensor,
        face_mask: torch.Tensor,
        context: torch.Tensor,
    ) -> FeatureBank:
        if ref_image.ndim != 4 or ref_image.shape[1] != 3:
            raise ValueError(f"ref_image must be (b, 3, H, W), got {tuple(ref_image.shape)}")
        if face_mask.ndim != 3:
            raise ValueError(f"face_mask must be (b, H, W), got {tuple(face_mask.shape)}")
        if ref_image.shape[-2:] != face_mask.shape[-2:]:
            raise ValueError(
                f"size mismatch: image {tuple(ref_image.shape[-2:])} vs "
                f"mask {tuple(face_mask.shape[-2:])}"
            )
        flags = [
            face_flags_for_grid(face_mask, self.config.level_grid(level))
            for _, level, _, _ in self.config.attention_layer_specs()
        ]
        t = torch.zeros(ref_image.shape[0], dtype=torch.long, device=ref_image.device)
        t_emb = self.time_embed(t)
        _, collected = self._run_trunk(
            ref_image, t_emb, context, flags=flags, collect=True, run_head=False
        )
        return FeatureBank(layers=collected, face_flags=flags)


class PoseControlNet(nn.Module):
    """Skeleton-map encoder mirroring the backbone encoder.

    Every stage output passes through a zero-initialized 1x1 projection,
    so an untrained branch injects exactly nothing.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        ch = config.channels
        self.time_embed = TimeEmbedding(config.time_channels)
        self.stem = nn.Conv2d(3, ch[0], 3, padding=1)
        self.hint_stem = nn.Sequential(
            nn.Conv2d(3, ch[0], 3, padding=1),
            nn.SiLU(),
            zero_conv(ch[0], ch[0]),
        )
        self.enc_levels = nn.ModuleList()
        for lvl in range(config.num_levels):
            level = nn.ModuleDict()
            if lvl > 0:
                level["down"] = Downsample(ch[lvl - 1], ch[lvl])
            level["res"] = ResidualBlock(ch[lvl], ch[lvl], config.time_channels)
            if lvl in config.attention_levels:
                level["attn"] = TransformerBlock(
                    ch[lvl], config.heads, config.context_channels
                )
            self.enc_levels.append(level)
        # one tap per level, emitted deepest-first to match decoder order
        self.out_projs = nn.ModuleList(
            [zero_conv(ch[lvl], ch[lvl]) for lvl in range(config.num_levels)]
        )

    def load_trunk_from(self, backbone: BackboneDenoiser) -> None:
        """Copy the backbone's encoder and time-embedding weights."""
        self.time_embed.load_state_dict(backbone.time_embed.state_dict())
        self.stem.load_state_dict(backbone.stem.state_dict())
        self.enc_levels.load_state_dict(backbone.enc_levels.state_dict())

    def forward(
        self,
        skel: torch.Tensor,
        x_t: torch.Tensor,
        t: torch.Tensor,
        context: torch.Tensor,
    ) -> ControlResiduals:
        if skel.shape[-2:] != x_t.shape[-2:]:
            raise ValueError(
                f"size mismatch: skeleton map {tuple(skel.shape[-2:])} vs "
                f"stream {tuple(x_t.shape[-2:])}"
            )
        expected = tuple(self.config.image_size)
        if tuple(skel.shape[-2:]) != expected:
            raise ValueError(
                f"skeleton map size {tuple(skel.shape[-2:])} does not match "
                f"model input size {expected}"
            )
        t_emb = self.time_embed(t)
        h = self.stem(x_t) + self.hint_stem(skel)
        taps = []
        for lvl, level in enumerate(self.enc_levels):
            if "down" in level:
                h = level["down"](h)
            h = level["res"](h, t_emb)
            if "attn" in level:
                h, _ = level["attn"](h, context)
            taps.append(self.out_projs[lvl](h))
        return ControlResiduals(residuals=list(reversed(taps)))
