"""Fully probabilistic description of quantum states.

Projector sets and their inverses live in :mod:`probframe.frame`, the qubit
tensors in :mod:`probframe.qubitframe`, gate and channel transfer matrices in
:mod:`probframe.transfer`, and the dense reference simulator in
:mod:`probframe.oracle`.
"""

from probframe.errors import ProbFrameError
from probframe.frame import (
    Classification,
    ProjectorSet,
    RightInverse,
    build_right_inverse,
    build_standard_set,
    classify,
    forward_map,
)
from probframe.qubitframe import (
    PauliParameterTensor,
    ProbabilityTensor,
    p_from_tilde,
    rho_from_tilde,
    six_state_set,
    tilde_from_p,
    tilde_from_rho,
)
from probframe.settings import LAYOUT_VERSION, Tolerances
from probframe.transfer import PauliTransferMatrix, apply_local, ptm_of_channel, ptm_of_unitary

__all__ = [
    "LAYOUT_VERSION",
    "Classification",
    "PauliParameterTensor",
    "PauliTransferMatrix",
    "ProbFrameError",
    "ProbabilityTensor",
    "ProjectorSet",
    "RightInverse",
    "Tolerances",
    "apply_local",
    "build_right_inverse",
    "build_standard_set",
    "classify",
    "forward_map",
    "p_from_tilde",
    "ptm_of_channel",
    "ptm_of_unitary",
    "rho_from_tilde",
    "six_state_set",
    "tilde_from_p",
    "tilde_from_rho",
]
