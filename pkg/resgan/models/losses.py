"""Loss breakdown record written to the metrics stream."""
import math
from dataclasses import dataclass, fields
from typing import Any

LOSS_FIELDS = (
    'd_x', 'd_y', 'd_xf', 'd_yf',
    'g_x_adv', 'g_y_adv', 'g_xf_adv', 'g_yf_adv',
    'fc', 'omega', 'total_d', 'total_g',
)


def _scalar(value):
    if hasattr(value, 'detach'):
        return float(value.detach().cpu().item())
    return float(value)


@dataclass
class LossBreakdown:
    """
    Every term of one training iteration.

    Fields hold either torch scalars (inside a step, so ``total_g`` can be
    backpropagated) or plain floats (after ``detached()``).

    Invariants:
        total_g = g_x_adv + g_y_adv + g_xf_adv + g_yf_adv + omega * fc
        total_d = d_x + d_y + d_xf + d_yf
    """
    d_x: Any = 0.0
    d_y: Any = 0.0
    d_xf: Any = 0.0
    d_yf: Any = 0.0
    g_x_adv: Any = 0.0
    g_y_adv: Any = 0.0
    g_xf_adv: Any = 0.0
    g_yf_adv: Any = 0.0
    fc: Any = 0.0
    omega: float = 1.0
    total_d: Any = 0.0
    total_g: Any = 0.0

    def detached(self):
        """Copy with every field converted to a Python float."""
        return LossBreakdown(**{f.name: _scalar(getattr(self, f.name)) for f in fields(self)})

    def is_finite(self):
        values = self.detached().to_dict().values()
        return all(math.isfinite(v) for v in values)

    def merge_discriminator(self, other):
        """Take the four discriminator losses (and total_d) from ``other``."""
        self.d_x, self.d_y, self.d_xf, self.d_yf = other.d_x, other.d_y, other.d_xf, other.d_yf
        self.total_d = other.total_d
        return self

    def to_dict(self):
        return {name: _scalar(getattr(self, name)) for name in LOSS_FIELDS}
