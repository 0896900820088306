"""Monte Carlo toolkit for MIMO Rayleigh fading with Gauss-Markov gain memory."""
from .capacity import InputCovariance, McEstimate, optimize_capacity, phi_mc, siso_capacity_closed_form
from .channel import ChannelParams, GainSequence, sample_gain_sequence, transmit
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelParams",
    "GainSequence",
    "InputCovariance",
    "McEstimate",
    "optimize_capacity",
    "phi_mc",
    "sample_gain_sequence",
    "siso_capacity_closed_form",
    "transmit",
]
