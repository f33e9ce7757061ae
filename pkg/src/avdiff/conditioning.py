"""Model-input assembly: identity frame, motion frames, and motion audio.

Frames are numpy arrays of shape (H, W, C) with float values in [-1, 1].
Frame and embedding indices are 1-based throughout, matching the step
convention of the rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# BT.601 luma weights; sum to 1, so the [-1, 1] range maps onto itself.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


@dataclass
class VideoSample:
    """One clip: ordered frames with per-frame audio embeddings and mouth boxes."""

    clip_id: str
    frames: list[np.ndarray]
    audio_embeddings: list[np.ndarray]
    mouth_boxes: list[tuple[int, int, int, int]]

    def __post_init__(self):
        n = len(self.frames)
        if n < 1:
            raise ValidationError(f"clip {self.clip_id!r}: empty clip")
        if len(self.audio_embeddings) != n or len(self.mouth_boxes) != n:
            raise ValidationError(
                f"clip {self.clip_id!r}: frames/embeddings/boxes lengths differ "
                f"({n}/{len(self.audio_embeddings)}/{len(self.mouth_boxes)})"
            )
        shape = self.frames[0].shape
        if len(shape) != 3:
            raise ValidationError(f"clip {self.clip_id!r}: frames must be (H, W, C)")
        for i, frame in enumerate(self.frames):
            if frame.shape != shape:
                raise ValidationError(f"clip {self.clip_id!r}: frame {i + 1} shape differs")
        dims = [e.shape for e in self.audio_embeddings]
        if any(len(d) != 1 or d != dims[0] for d in dims):
            raise ValidationError(f"clip {self.clip_id!r}: ragged audio embeddings")
        h, w = shape[:2]
        for i, (x, y, bw, bh) in enumerate(self.mouth_boxes):
            if bw <= 0 or bh <= 0 or x < 0 or y < 0 or x + bw > w or y + bh > h:
                raise ValidationError(
                    f"clip {self.clip_id!r}: box {i + 1} {(x, y, bw, bh)} outside {w}x{h} frame"
                )

    @property
    def n(self) -> int:
        return len(self.frames)

    @property
    def embed_dim(self) -> int:
        return len(self.audio_embeddings[0])


@dataclass(frozen=True)
class ConditioningConfig:
    """Motion-frame count, one-sided motion-audio radius, and grayscale toggle."""

    m_x: int = 2
    m_y: int = 2
    grayscale_motion: bool = True

    def __post_init__(self):
        if self.m_x < 0 or self.m_y < 0:
            raise ValidationError("m_x and m_y must be nonnegative")


@dataclass(frozen=True)
class ModelInput:
    """The channel-stacked image, motion-audio vector, and timestep fed to the denoiser."""

    x_in: np.ndarray
    y_motion: np.ndarray
    t: int


def input_channels(frame_channels: int, cfg: ConditioningConfig) -> int:
    """Stacked channel count: noisy target + identity + motion frames."""
    motion_channels = 1 if cfg.grayscale_motion else frame_channels
    return 2 * frame_channels + cfg.m_x * motion_channels


def select_identity_frame(video: VideoSample, rng: np.random.Generator):
    """Pick a uniformly random frame of the clip; returns (frame, 1-based index)."""
    k = int(rng.integers(1, video.n + 1))
    return video.frames[k - 1], k


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (H, W, 3) frame, returned as (H, W, 1)."""
    if frame.ndim != 3 or frame.shape[-1] != 3:
        raise ValidationError(f"to_grayscale expects (H, W, 3), got {frame.shape}")
    luma = frame.astype(np.float64) @ LUMA_WEIGHTS
    return luma[..., None].astype(frame.dtype)


def build_motion_frames(
    video: VideoSample, k: int, identity: np.ndarray, cfg: ConditioningConfig
) -> list[np.ndarray]:
    """The cfg.m_x frames preceding frame k, oldest first.

    Slots before the start of the clip are filled with the identity frame.
    Grayscale conversion is applied per cfg.
    """
    if not 1 <= k <= video.n:
        raise ValidationError(f"target index {k} outside [1, {video.n}]")
    out = []
    for j in range(k - cfg.m_x, k):
        frame = video.frames[j - 1] if j >= 1 else identity
        out.append(to_grayscale(frame) if cfg.grayscale_motion else frame)
    return out


def assemble_input(
    noisy_target: np.ndarray, identity: np.ndarray, motion_frames: list[np.ndarray]
) -> np.ndarray:
    """Channel-concatenate noisy target, identity, then motion frames oldest to newest."""
    parts = [noisy_target, identity, *motion_frames]
    spatial = noisy_target.shape[:2]
    for p in parts:
        if p.shape[:2] != spatial:
            raise ValidationError(f"spatial mismatch: {p.shape[:2]} vs {spatial}")
    return np.concatenate(parts, axis=-1)


def build_motion_audio(embeddings: list[np.ndarray], k: int, m_y: int) -> np.ndarray:
    """Flat window of embeddings k-m_y .. k+m_y, edge-padded with the first/last entry."""
    n = len(embeddings)
    if not 1 <= k <= n:
        raise ValidationError(f"frame index {k} outside [1, {n}]")
    dim = embeddings[0].shape
    if any(e.shape != dim for e in embeddings):
        raise ValidationError("ragged embedding dimensions")
    window = [embeddings[min(max(j, 1), n) - 1] for j in range(k - m_y, k + m_y + 1)]
    return np.concatenate(window)
