"""Exact reference propagation for fidelity baselines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .spaces import DENSE_EXPM_MAX_DIM, EigenPropagator

__all__ = ["Trajectory", "exact_trajectory"]


@dataclass
class Trajectory:
    """States sampled along an evolution, pure (vectors) or noisy (density matrices)."""

    times: np.ndarray
    states: list
    is_density: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have matching lengths")

    def __len__(self) -> int:
        return len(self.states)

    def expectation_series(self, op: sp.spmatrix) -> np.ndarray:
        """Real expectation value of ``op`` at every sample."""
        out = np.empty(len(self.states))
        for i, state in enumerate(self.states):
            if self.is_density:
                out[i] = np.trace(op @ state).real
            else:
                out[i] = np.vdot(state, op @ state).real
        return out


def _check_times(times: Sequence[float]) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times[0] < 0:
        raise ValueError("times must start at t >= 0")
    if np.any(np.diff(times) <= 0) and len(times) > 1:
        raise ValueError("times must be strictly increasing")
    return times


def exact_trajectory(h, psi0: np.ndarray, times: Sequence[float]) -> Trajectory:
    """|psi(t)> = exp(-iHt)|psi0> at each requested time.

    One dense eigendecomposition is reused for every sample when the
    dimension allows it; larger problems step with Krylov polynomial action.
    """
    times = _check_times(times)
    psi0 = np.asarray(psi0, dtype=complex)
    if h.shape[0] <= DENSE_EXPM_MAX_DIM:
        prop = EigenPropagator(h)
        states = [prop.apply(psi0, t) for t in times]
    else:
        states = []
        current, t_prev = psi0, 0.0
        for t in times:
            if t != t_prev:
                current = expm_multiply(-1j * (t - t_prev) * sp.csr_matrix(h), current)
                t_prev = t
            states.append(current.copy())
    return Trajectory(times=times, states=states)
