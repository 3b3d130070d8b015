"""Interference-based neuron models: multi-slit barriers, waveguide sums and
two-photon pulse shaping, with a constructive approximation builder and a
simulated-annealing trainer."""

from .anneal import AnnealConfig, TrainReport, TrainingSet, error_functional, train
from .approximation import ExpSum, RectDomain, build
from .slits import BarrierStack, SlitNeuron, detection_probability, xor_stack
from .slm import SlmNeuron, SlmSpectra, from_spectra
from .waveguide import Universe, WgmNeuron

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig", "TrainReport", "TrainingSet", "error_functional", "train",
    "ExpSum", "RectDomain", "build",
    "BarrierStack", "SlitNeuron", "detection_probability", "xor_stack",
    "SlmNeuron", "SlmSpectra", "from_spectra",
    "Universe", "WgmNeuron",
]
