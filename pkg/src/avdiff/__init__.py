"""Audio-driven talking-face video generation with frame-autoregressive diffusion."""

__version__ = "0.1.0"

from .schedule import NoiseSchedule, RespacedSchedule, make_schedule, respace
from .conditioning import ConditioningConfig, ModelInput, VideoSample
from .denoiser import Denoiser, DenoiserConfig, DenoiserOutput
from .losses import LossWeights
from .sampler import SamplerConfig, sample_video
from .trainer import TrainConfig, Trainer, load_checkpoint, save_checkpoint

__all__ = [
    "NoiseSchedule",
    "RespacedSchedule",
    "make_schedule",
    "respace",
    "ConditioningConfig",
    "ModelInput",
    "VideoSample",
    "Denoiser",
    "DenoiserConfig",
    "DenoiserOutput",
    "LossWeights",
    "SamplerConfig",
    "sample_video",
    "TrainConfig",
    "Trainer",
    "load_checkpoint",
    "save_checkpoint",
]
