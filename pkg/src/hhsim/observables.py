"""Physical observables and time-series analysis."""

from __future__ import annotations

import numpy as np

from .evolve import Trajectory
from .model import (
    HHParams,
    site_double_occupation_operator,
    total_fermion_number_operator,
    total_phonon_number_operator,
)
from .spaces import DimensionMismatchError

__all__ = [
    "fidelity",
    "expectation",
    "double_occupation",
    "phonon_number",
    "total_fermion_number",
    "dominant_frequency",
    "fidelity_series",
]


def fidelity(psi_ref: np.ndarray, state) -> float:
    """|<psi_ref|psi>|^2 for pure states, <psi_ref|rho|psi_ref> for density matrices."""
    psi_ref = np.asarray(psi_ref)
    state = np.asarray(state)
    if state.ndim == 1:
        if state.shape[0] != psi_ref.shape[0]:
            raise DimensionMismatchError("state dimensions do not match")
        return float(abs(np.vdot(psi_ref, state)) ** 2)
    if state.ndim == 2:
        if state.shape[0] != psi_ref.shape[0]:
            raise DimensionMismatchError("state dimensions do not match")
        return float(np.real(np.vdot(psi_ref, state @ psi_ref)))
    raise ValueError("state must be a vector or a square matrix")


def fidelity_series(reference: Trajectory, simulated: Trajectory) -> np.ndarray:
    if len(reference) != len(simulated):
        raise ValueError("trajectories have different lengths")
    if not np.allclose(reference.times, simulated.times):
        raise ValueError("trajectories are sampled on different time grids")
    return np.array([fidelity(r, s) for r, s in zip(reference.states, simulated.states)])


def expectation(op, state) -> float:
    state = np.asarray(state)
    if state.ndim == 1:
        return float(np.vdot(state, op @ state).real)
    return float(np.trace(op @ state).real)


def double_occupation(state, site: int, params: HHParams) -> float:
    """<n_up n_down> on one site."""
    return expectation(site_double_occupation_operator(params, site), state)


def phonon_number(state, params: HHParams) -> float:
    """Total phonon number summed over every mode."""
    return expectation(total_phonon_number_operator(params), state)


def total_fermion_number(state, params: HHParams) -> float:
    return expectation(total_fermion_number_operator(params), state)


def dominant_frequency(times: np.ndarray, values: np.ndarray) -> float:
    """Angular frequency of the strongest nonzero peak of a uniformly sampled series.

    Plain periodogram with mean removal; no windowing.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) != len(values):
        raise ValueError("times and values must have equal length")
    if len(times) < 64:
        raise ValueError("need at least 64 samples for spectral estimation")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("time grid must be uniform")
    centered = values - values.mean()
    if np.max(np.abs(centered)) < 1e-14:
        raise ValueError("series is constant; no nonzero spectral peak")
    spectrum = np.abs(np.fft.rfft(centered))
    freqs = np.fft.rfftfreq(len(values), d=steps[0])
    peak = 1 + int(np.argmax(spectrum[1:]))  # skip the zero-frequency bin
    return float(2.0 * np.pi * freqs[peak])
