"""Numerical laboratory for node-opened maxfaces in Lorentz-Minkowski 3-space.

Pipeline: configurations and their balance equations (`configuration`,
`balance`), singularity prediction and classification on neck waists
(`singularities`), finite-t Weierstrass data with defect measurement
(`weierstrass`), mesh generation (`meshing`), and a command-line front end
(`cli`).
"""

from .configuration import (
    Configuration,
    LevelForm,
    NeckId,
    NeckSizes,
    TrigPolynomial,
    R_function,
    force,
    force_via_residue,
    level_form,
    neck_sizes,
    residue_power,
    scalar_W,
)

__all__ = [
    "Configuration",
    "LevelForm",
    "NeckId",
    "NeckSizes",
    "TrigPolynomial",
    "R_function",
    "force",
    "force_via_residue",
    "level_form",
    "neck_sizes",
    "residue_power",
    "scalar_W",
]

__version__ = "0.1.0"
