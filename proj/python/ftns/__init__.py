"""Fourier transform noise spectroscopy."""

import json

from . import _core
from ._core import DomainError, InputError, NumericError, __version__, filter_value

__all__ = [
    "DomainError",
    "InputError",
    "NumericError",
    "__version__",
    "attenuation",
    "config_hash",
    "filter_value",
    "reconstruct",
    "simulate",
    "spectrum_value",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def attenuation(spectrum, sequence, times, n_pulses=0):
    """chi(t) for a spectrum document on the given sequence."""
    return _core.attenuation(_text(spectrum), sequence, list(times), n_pulses)


def spectrum_value(spectrum, omega):
    return _core.spectrum_value(_text(spectrum), list(omega))


def config_hash(config):
    return _core.config_hash(_text(config))


def simulate(config):
    """Coherence trace for a run configuration: dict with t, C, mask, config_hash."""
    return _core.simulate(_text(config))


def reconstruct(config):
    """Spectrum reconstructed by the configured method from a simulated trace."""
    return _core.reconstruct(_text(config))
