"""Live state of one training run."""
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import torch

from resgan.models.dataset import SamplerState
from resgan.models.experiment import ExperimentConfig
from resgan.models.losses import LossBreakdown


@dataclass
class TrainingState:
    """
    Everything a resumed run needs to continue bit-identically.

    ``mu_x`` / ``mu_y`` are the frozen-encoder domain means (None in cogan
    mode); ``diag_z`` is the fixed latent batch used for diagnostics and
    sample grids.
    """
    config: ExperimentConfig
    bundle: Any
    opt_d: torch.optim.Optimizer
    opt_g: torch.optim.Optimizer
    sampler_x: SamplerState
    sampler_y: SamplerState
    latent_rng: torch.Generator
    diag_z: torch.Tensor
    mu_x: Optional[np.ndarray] = None
    mu_y: Optional[np.ndarray] = None
    ae_hash: Optional[str] = None
    iteration: int = 0
    last_breakdown: Optional[LossBreakdown] = None
    checkpoint_hash: Optional[str] = None

    def advance(self):
        self.iteration += 1
        self.bundle.iteration = self.iteration
        return self.iteration
