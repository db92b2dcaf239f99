"""Published results of the 2023 MPI paired-comparison survey (271 respondents).

These values are the reference layouts and arithmetic anchors for the
reporting code, and the default planted coefficients for simulations.
"""

from __future__ import annotations

import numpy as np

from .core import MPI_CATALOG, ModelSpec

# linear model on all 11 attributes: term -> (estimate, z)
LINEAR_ALL = {
    "N": (0.5691, 4.468),
    "YS": (-0.3512, -2.585),
    "CF": (-0.8183, -5.096),
    "H": (0.5428, 3.386),
    "S": (0.7952, 5.165),
    "MH": (1.1241, 7.189),
    "SA": (0.1012, 0.655),
    "A": (0.4337, 3.005),
    "DW": (-0.1055, -0.722),
    "E": (-0.3302, -2.797),
    "CAM": (-20.6751, -0.081),
}

# linear model on the eight significant attributes
LINEAR_REDUCED = {
    "N": (1.38508, 16.47),
    "YS": (2.04255, 28.52),
    "CF": (1.40426, 16.3),
    "H": (1.54665, 21.84),
    "S": (1.45376, 20.23),
    "MH": (1.33782, 19.4),
    "A": (0.64526, 11.01),
    "E": (0.81889, 10.48),
}

# eight mains plus their 28 interactions, whole sample: term -> (estimate, z, starred)
INTERACTIONS = {
    "N": (1.24043, 5.339, True),
    "YS": (3.53095, 18.95, True),
    "CF": (1.01376, 6.214, True),
    "H": (1.73409, 9.76, True),
    "S": (1.9438, 12.926, True),
    "MH": (1.74674, 14.094, True),
    "A": (2.12305, 16.83, True),
    "E": (1.36538, 8.189, True),
    "N*YS": (-0.46711, -1.631, False),
    "N*CF": (2.14002, 6.107, True),
    "N*H": (1.63791, 4.625, True),
    "N*S": (-0.81814, -3.274, True),
    "N*MH": (2.28394, 6.568, True),
    "N*A": (-0.97049, -4.153, True),
    "N*E": (-1.93248, -7.354, True),
    "YS*CF": (0.34302, 0.882, False),
    "YS*H": (0.11854, 0.209, False),
    "YS*S": (13.65828, 0.024, False),
    "YS*MH": (-0.19958, -0.714, False),
    "YS*A": (-2.9624, -9.668, True),
    "YS*E": (16.69124, 0.065, False),
    "CF*H": (-0.0963, -0.394, False),
    "CF*S": (0.12305, 0.447, False),
    "CF*MH": (0.86946, 3.39, True),
    "CF*A": (-1.76139, -6.18, True),
    "CF*E": (18.60707, 0.072, False),
    "H*S": (1.74064, 6.214, True),
    "H*MH": (-0.52949, -2.148, True),
    "H*A": (-2.33545, -11.276, True),
    "H*E": (-0.2566, -0.664, False),
    "S*MH": (-0.464, -1.743, False),
    "S*A": (-0.61316, -2.718, True),
    "S*E": (-0.97918, -3.117, True),
    "MH*A": (-0.04204, -0.203, False),
    "MH*E": (-1.3609, -5.794, True),
    "A*E": (-2.62369, -10.684, True),
}

# stratified bootstrap of the interaction model:
# term -> (observed, boot mean, boot SE, z, p, ci low, ci high)
BOOTSTRAP = {
    "N": (1.24, 1.41, 0.41, 3.06, 0.0022, 0.22, 1.71),
    "YS": (3.53, 2.60, 1.34, 2.64, 0.0084, 3.23, 7.06),
    "CF": (1.01, 1.03, 0.46, 2.22, 0.0267, -0.11, 1.87),
    "H": (1.73, 1.61, 0.41, 4.22, 0.0000, 1.34, 3.46),
    "S": (1.94, 1.77, 0.45, 4.35, 0.0000, 1.3, 3.13),
    "MH": (1.75, 1.65, 0.42, 4.12, 0.0000, 0.66, 2.52),
    "A": (2.12, 1.77, 0.66, 3.22, 0.0013, 1.56, 4.24),
    "E": (1.37, 1.03, 0.64, 2.14, 0.0321, 0.5, 2.74),
    "N*YS": (-0.47, -0.23, 0.48, -0.98, 0.3262, -1.88, 0.08),
    "N*CF": (2.14, 1.54, 0.94, 2.28, 0.0224, 1.52, 4.62),
    "N*H": (1.64, 1.14, 0.97, 1.68, 0.0925, 1.09, 4.32),
    "N*S": (-0.82, -0.66, 0.37, -2.20, 0.0279, -1.73, -0.36),
    "N*MH": (2.28, 2.05, 0.71, 3.21, 0.0013, 1.69, 4.78),
    "N*A": (-0.97, -1.00, 0.48, -2.03, 0.0427, -1.94, 0.06),
    "N*E": (-1.93, -1.40, 0.90, -2.14, 0.0323, -3.86, -1.05),
    "YS*CF": (0.34, 0.34, 0.49, 0.70, 0.4812, -0.76, 1.27),
    "YS*H": (0.12, 0.07, 0.55, 0.22, 0.8290, -1.05, 1.18),
    "YS*S": (13.66, 11.36, 5.11, 2.67, 0.0075, 11.6, 27.32),
    "YS*MH": (-0.20, 0.02, 0.46, -0.44, 0.6627, -1.55, 0.33),
    "YS*A": (-2.96, -2.11, 1.29, -2.30, 0.0215, -5.92, -2.44),
    "YS*E": (16.69, 12.20, 7.50, 2.23, 0.0260, 15.4, 33.38),
    "CF*H": (-0.10, -0.12, 0.45, -0.22, 0.8297, -1.02, 0.98),
    "CF*S": (0.12, 0.10, 0.30, 0.40, 0.6857, -0.4, 0.87),
    "CF*MH": (0.87, 0.70, 0.47, 1.84, 0.0656, 0.26, 2.03),
    "CF*A": (-1.76, -1.53, 0.76, -2.30, 0.0212, -3.52, -0.79),
    "CF*E": (18.61, 13.51, 8.09, 2.30, 0.0215, 17.93, 37.22),
    "H*S": (1.74, 1.61, 0.52, 3.35, 0.0008, 1.13, 3.48),
    "H*MH": (-0.53, -0.15, 0.76, -0.69, 0.4876, -3.07, 0.05),
    "H*A": (-2.34, -1.89, 0.87, -2.67, 0.0075, -4.68, -1.92),
    "H*E": (-0.26, 0.01, 0.74, -0.35, 0.7291, -2.83, 0.51),
    "S*MH": (-0.46, -0.61, 0.60, -0.77, 0.4425, -1.18, 1.15),
    "S*A": (-0.61, -0.39, 0.36, -1.69, 0.0908, -1.71, -0.27),
    "S*E": (-0.98, -0.67, 0.74, -1.33, 0.1837, -3.1, -0.02),
    "MH*A": (-0.04, -0.15, 0.47, -0.09, 0.9284, -0.53, 1.11),
    "MH*E": (-1.36, -0.11, 0.62, -2.18, 0.0291, -2.72, -0.83),
    "A*E": (-2.62, -0.98, 1.18, -2.22, 0.0267, -5.24, -2.03),
}

RETAINED = ("N", "YS", "CF", "H", "S", "MH", "A", "E")
DROPPED = ("CAM", "SA", "DW")


def interaction_spec() -> ModelSpec:
    return ModelSpec.with_all_interactions(MPI_CATALOG.index(c) for c in RETAINED)


def planted_theta() -> tuple[ModelSpec, np.ndarray]:
    """Interaction-model coefficients with every unstarred term set to zero."""
    spec = interaction_spec()
    names = spec.term_names(MPI_CATALOG)
    theta = np.array([INTERACTIONS[n][0] if INTERACTIONS[n][2] else 0.0 for n in names])
    return spec, theta


def planted_linear_theta() -> tuple[ModelSpec, np.ndarray]:
    """All-attribute linear coefficients with the three insignificant ones at zero."""
    spec = ModelSpec.linear(range(MPI_CATALOG.p))
    names = spec.term_names(MPI_CATALOG)
    theta = np.array([0.0 if n in DROPPED else LINEAR_ALL[n][0] for n in names])
    return spec, theta
