"""Tensor-product Hilbert spaces and sparse operator algebra for qubit-boson registers.

The register layout is fixed: all qubits first, then the bosonic modes, so a
two-site model reads |Q1, Q2, Q3, Q4, res1, res2>.  Subsystem 0 is the most
significant factor of the composite index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

__all__ = [
    "DimensionMismatchError",
    "HermiticityError",
    "HilbertSpace",
    "pauli",
    "ladder",
    "hadamard",
    "is_hermitian",
    "require_hermitian",
    "drop_explicit_zeros",
    "expm_apply",
    "EigenPropagator",
    "check_state_vector",
    "check_density_matrix",
    "DENSE_EXPM_MAX_DIM",
]

# Above this dimension expm_apply switches from a dense eigendecomposition to
# Krylov polynomial action (scipy expm_multiply).
DENSE_EXPM_MAX_DIM = 4096

_HERMITIAN_ATOL = 1e-12


class DimensionMismatchError(ValueError):
    """Operator/state dimensions are incompatible."""


class HermiticityError(ValueError):
    """An operator required to be Hermitian is not."""


def _as_csr(op) -> sp.csr_matrix:
    if sp.issparse(op):
        return op.tocsr()
    return sp.csr_matrix(np.asarray(op, dtype=complex))


def pauli(which: str) -> sp.csr_matrix:
    """Single-qubit operator in the |0> = sigma_z eigenvalue +1 convention.

    ``which`` is one of ``x``, ``y``, ``z``, ``plus``, ``minus``, ``i``.
    ``plus`` raises toward |0> (sigma^+ = |0><1|), ``minus`` lowers.
    """
    mats = {
        "i": np.eye(2, dtype=complex),
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
        "plus": np.array([[0, 1], [0, 0]], dtype=complex),
        "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    }
    try:
        return sp.csr_matrix(mats[which])
    except KeyError:
        raise ValueError(f"unknown pauli label {which!r}") from None


def hadamard() -> sp.csr_matrix:
    return sp.csr_matrix(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))


def ladder(n: int, which: str) -> sp.csr_matrix:
    """Truncated bosonic ladder operator on ``n`` levels.

    a|m> = sqrt(m)|m-1>, truncated so a^dagger|n-1> = 0.
    """
    if n < 2:
        raise ValueError(f"bosonic truncation must keep at least 2 levels, got {n}")
    root = np.sqrt(np.arange(1, n))
    if which == "a":
        return sp.csr_matrix((root, (np.arange(n - 1), np.arange(1, n))), shape=(n, n))
    if which == "a_dagger":
        return sp.csr_matrix((root, (np.arange(1, n), np.arange(n - 1))), shape=(n, n))
    if which == "number":
        return sp.csr_matrix((np.arange(n, dtype=float), (np.arange(n), np.arange(n))), shape=(n, n))
    raise ValueError(f"unknown ladder label {which!r}")


def is_hermitian(op, atol: float = _HERMITIAN_ATOL) -> bool:
    op = _as_csr(op)
    diff = op - op.conjugate().transpose()
    if diff.nnz == 0:
        return True
    return abs(diff).max() <= atol


def require_hermitian(op, atol: float = _HERMITIAN_ATOL) -> None:
    if not is_hermitian(op, atol):
        raise HermiticityError("operator is not Hermitian to within tolerance")


def drop_explicit_zeros(op, tol: float = 0.0) -> sp.csr_matrix:
    """Remove stored entries with magnitude <= ``tol`` (exact zeros by default)."""
    op = _as_csr(op).copy()
    if tol > 0.0:
        op.data[np.abs(op.data) <= tol] = 0.0
    op.eliminate_zeros()
    return op


@dataclass(frozen=True)
class HilbertSpace:
    """Fixed-ordering composite space of ``n_qubits`` qubits and bosonic modes."""

    n_qubits: int
    boson_truncations: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        truncs = tuple(int(n) for n in self.boson_truncations)
        object.__setattr__(self, "boson_truncations", truncs)
        for n in truncs:
            if n < 2:
                raise ValueError(f"bosonic truncation must keep at least 2 levels, got {n}")

    @property
    def n_modes(self) -> int:
        return len(self.boson_truncations)

    @property
    def n_subsystems(self) -> int:
        return self.n_qubits + self.n_modes

    @property
    def subsystem_dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits + self.boson_truncations

    @property
    def dim(self) -> int:
        return int(reduce(lambda a, b: a * b, self.subsystem_dims, 1))

    def subsystem_dim(self, subsystem: int) -> int:
        return self.subsystem_dims[self._check_subsystem(subsystem)]

    def _check_subsystem(self, subsystem: int) -> int:
        if not 0 <= subsystem < self.n_subsystems:
            raise IndexError(f"subsystem index {subsystem} out of range for {self.n_subsystems} subsystems")
        return subsystem

    def mode_subsystem(self, mode: int) -> int:
        """Global subsystem index of bosonic mode ``mode``."""
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode index {mode} out of range")
        return self.n_qubits + mode

    def index_of(self, occupations: Sequence[int]) -> int:
        """Composite basis index of per-subsystem levels (subsystem 0 most significant)."""
        dims = self.subsystem_dims
        if len(occupations) != len(dims):
            raise DimensionMismatchError(
                f"expected {len(dims)} occupation entries, got {len(occupations)}"
            )
        idx = 0
        for occ, d in zip(occupations, dims):
            occ = int(occ)
            if not 0 <= occ < d:
                raise ValueError(f"occupation {occ} out of range for subsystem of dimension {d}")
            idx = idx * d + occ
        return idx

    def occupations_of(self, index: int) -> tuple[int, ...]:
        dims = self.subsystem_dims
        if not 0 <= index < self.dim:
            raise ValueError(f"basis index {index} out of range")
        out = []
        for d in reversed(dims):
            out.append(index % d)
            index //= d
        return tuple(reversed(out))

    def basis_state(self, occupations: Sequence[int]) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index_of(occupations)] = 1.0
        return psi

    def embed(self, subsystems: int | Sequence[int], local_op) -> sp.csr_matrix:
        """Embed ``local_op`` acting on the given subsystems (identity elsewhere).

        ``subsystems`` may be a single index or an ordered sequence; the local
        operator must act on the tensor product of those subsystems in the
        order given.
        """
        if isinstance(subsystems, (int, np.integer)):
            subsystems = (int(subsystems),)
        subsystems = tuple(self._check_subsystem(int(s)) for s in subsystems)
        if len(set(subsystems)) != len(subsystems):
            raise ValueError("subsystems must be distinct")
        dims = self.subsystem_dims
        local_dim = int(np.prod([dims[s] for s in subsystems])) if subsystems else 1
        local = _as_csr(local_op).tocoo()
        if local.shape != (local_dim, local_dim):
            raise DimensionMismatchError(
                f"local operator shape {local.shape} does not match subsystem dimension {local_dim}"
            )

        strides = np.ones(len(dims), dtype=np.int64)
        for i in range(len(dims) - 2, -1, -1):
            strides[i] = strides[i + 1] * dims[i + 1]

        # Decode local row/col indices into per-subsystem digits.
        def global_offsets(local_idx: np.ndarray) -> np.ndarray:
            off = np.zeros_like(local_idx, dtype=np.int64)
            rem = local_idx.astype(np.int64)
            for s in reversed(subsystems):
                off += (rem % dims[s]) * strides[s]
                rem //= dims[s]
            return off

        row_off = global_offsets(local.row)
        col_off = global_offsets(local.col)

        # Enumerate complement configurations once.
        comp = [s for s in range(len(dims)) if s not in subsystems]
        n_comp = int(np.prod([dims[s] for s in comp])) if comp else 1
        comp_off = np.zeros(n_comp, dtype=np.int64)
        if comp:
            reps = n_comp
            for s in comp:
                reps //= dims[s]
                tile = n_comp // (reps * dims[s])
                pattern = np.repeat(np.arange(dims[s], dtype=np.int64), reps)
                comp_off += np.tile(pattern, tile) * strides[s]

        rows = (comp_off[:, None] + row_off[None, :]).ravel()
        cols = (comp_off[:, None] + col_off[None, :]).ravel()
        data = np.tile(local.data, n_comp)
        return sp.coo_matrix((data, (rows, cols)), shape=(self.dim, self.dim)).tocsr()

    def qubit_operator(self, qubit: int, which: str) -> sp.csr_matrix:
        return self.embed(qubit, pauli(which))

    def mode_operator(self, mode: int, which: str) -> sp.csr_matrix:
        return self.embed(self.mode_subsystem(mode), ladder(self.boson_truncations[mode], which))

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")


class EigenPropagator:
    """exp(-iHt) action through one reused dense eigendecomposition of H."""

    def __init__(self, h, check_hermitian: bool = True):
        h = _as_csr(h)
        if check_hermitian:
            require_hermitian(h)
        dense = h.toarray()
        self.dim = dense.shape[0]
        self.evals, self.evecs = np.linalg.eigh(dense)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        if psi.shape[0] != self.dim:
            raise DimensionMismatchError("state dimension does not match Hamiltonian")
        coeff = self.evecs.conj().T @ psi
        return self.evecs @ (np.exp(-1j * self.evals * t) * coeff)


def expm_apply(h, psi: np.ndarray, t: float, *, hermitian: bool = True) -> np.ndarray:
    """Return exp(-iHt) psi.

    Dense eigendecomposition below DENSE_EXPM_MAX_DIM, Krylov polynomial
    action above.  ``hermitian=True`` (the default) validates the input.
    """
    h = _as_csr(h)
    psi = np.asarray(psi, dtype=complex)
    if h.shape[0] != psi.shape[0]:
        raise DimensionMismatchError("state dimension does not match Hamiltonian")
    if hermitian:
        require_hermitian(h)
    if t == 0.0:
        return psi.copy()
    if h.shape[0] <= DENSE_EXPM_MAX_DIM:
        return EigenPropagator(h, check_hermitian=False).apply(psi, t)
    return expm_multiply(-1j * t * h, psi)


def check_state_vector(psi: np.ndarray, atol: float = 1e-10) -> None:
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"state vector norm {nrm} deviates from 1 beyond {atol}")


def check_density_matrix(rho: np.ndarray, trace_atol: float = 1e-10, eig_atol: float = 1e-9) -> None:
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_atol:
        raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {trace_atol}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > 1e-10:
        raise ValueError(f"density matrix is not Hermitian (max deviation {herm_dev})")
    smallest = np.linalg.eigvalsh(rho)[0]
    if smallest < -eig_atol:
        raise ValueError(f"density matrix has negative eigenvalue {smallest}")
