"""Numerical tolerances used across the analysis pipeline.

All thresholds are relative to the scale of the quantity they guard, so the
pipeline is insensitive to global rescaling of the scene.  A single frozen
`Tolerances` value is threaded through the public entry points; tests and the
command line may override individual fields.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # relative band around <X,X> = 0 used when classifying lifted vectors
    isotropy: float = 1.0e-9
    # relative band around <v,v> = 0 for causal classification of directions
    lightcone: float = 1.0e-9
    # band around |inversive product| = 1 separating pencil types
    pencil: float = 1.0e-9
    # eigenvalue clustering width, relative to ||a||
    clustering: float = 1.0e-6
    # normalized |a_iii| threshold for the one-parameter canal criterion
    canal: float = 1.0e-3
    # normalized ||a_ijk|| threshold for the cyclide criterion (n = 3)
    dupin: float = 1.0e-6
    # relative ||a|| / ||h|| threshold below which a sample counts as umbilic
    umbilic: float = 1.0e-8
    # maximum scalar-product residual accepted for a constructed frame
    frame_residual: float = 1.0e-8
    # relative width of the degenerate band for the focal discriminant
    discriminant: float = 1.0e-8

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()
