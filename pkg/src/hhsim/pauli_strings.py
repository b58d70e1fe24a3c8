"""Symbolic Pauli-string algebra on the qubit register.

Strings are kept sparse (position -> letter) with an exact phase in
{1, -1, i, -i}, which makes pi/4 Clifford conjugation identities checkable
without floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .spaces import HilbertSpace, pauli

__all__ = ["PauliString", "Rotation", "conjugate_through"]

# single-qubit products: (left, right) -> (phase, letter)
_PRODUCT = {
    ("x", "x"): (1, "i"),
    ("y", "y"): (1, "i"),
    ("z", "z"): (1, "i"),
    ("x", "y"): (1j, "z"),
    ("y", "x"): (-1j, "z"),
    ("y", "z"): (1j, "x"),
    ("z", "y"): (-1j, "x"),
    ("z", "x"): (1j, "y"),
    ("x", "z"): (-1j, "y"),
}

_PHASES = (1, -1, 1j, -1j)


@dataclass(frozen=True)
class PauliString:
    """phase * tensor product of single-qubit Paulis at the given positions."""

    letters: tuple[tuple[int, str], ...]
    phase: complex = 1

    def __post_init__(self):
        if self.phase not in _PHASES:
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase}")
        seen = set()
        for pos, letter in self.letters:
            if letter not in ("x", "y", "z"):
                raise ValueError(f"invalid letter {letter!r}")
            if pos in seen:
                raise ValueError(f"duplicate position {pos}")
            seen.add(pos)
        object.__setattr__(self, "letters", tuple(sorted(self.letters)))

    @classmethod
    def from_map(cls, mapping: Mapping[int, str], phase: complex = 1) -> "PauliString":
        return cls(tuple(mapping.items()), phase)

    @property
    def as_map(self) -> dict[int, str]:
        return dict(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(pos for pos, _ in self.letters)

    @property
    def weight(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        a, b = self.as_map, other.as_map
        phase = self.phase * other.phase
        out = {}
        for pos in sorted(set(a) | set(b)):
            la, lb = a.get(pos), b.get(pos)
            if la is None:
                out[pos] = lb
            elif lb is None:
                out[pos] = la
            else:
                ph, letter = _PRODUCT[(la, lb)]
                phase *= ph
                if letter != "i":
                    out[pos] = letter
        return PauliString.from_map(out, phase)

    def commutes(self, other: "PauliString") -> bool:
        a, b = self.as_map, other.as_map
        clashes = sum(1 for pos in set(a) & set(b) if a[pos] != b[pos])
        return clashes % 2 == 0

    def scaled(self, phase: complex) -> "PauliString":
        return PauliString(self.letters, self.phase * phase)

    def to_sparse(self, space: HilbertSpace) -> sp.csr_matrix:
        op = space.identity() * self.phase
        for pos, letter in self.letters:
            op = op @ space.qubit_operator(pos, letter)
        return op.tocsr()

    def to_dense_qubit(self, n_qubits: int) -> np.ndarray:
        """Dense matrix on a bare ``n_qubits`` register (no bosonic factors)."""
        mats = {pos: pauli(letter).toarray() for pos, letter in self.letters}
        out = np.array([[self.phase]], dtype=complex)
        eye = np.eye(2, dtype=complex)
        for q in range(n_qubits):
            out = np.kron(out, mats.get(q, eye))
        return out


@dataclass(frozen=True)
class Rotation:
    """The Clifford exp(-i * sign * pi/4 * P) for a phase-free Pauli P."""

    generator: PauliString
    sign: int = 1

    def __post_init__(self):
        if self.generator.phase != 1:
            raise ValueError("rotation generator must have phase +1")
        if self.sign not in (1, -1):
            raise ValueError("rotation sign must be +1 or -1")

    def conjugate(self, s: PauliString) -> PauliString:
        """Image U s U^dagger with U = exp(-i*sign*pi/4*generator)."""
        if self.generator.commutes(s):
            return s
        return (self.generator * s).scaled(-1j * self.sign)

    def inverse(self) -> "Rotation":
        return Rotation(self.generator, -self.sign)

    def to_sparse(self, space: HilbertSpace) -> sp.csr_matrix:
        p = self.generator.to_sparse(space)
        eye = space.identity()
        c = np.cos(np.pi / 4)
        return (c * eye - 1j * self.sign * np.sin(np.pi / 4) * p).tocsr()


def conjugate_through(s: PauliString, rotations: Iterable[Rotation]) -> PauliString:
    """Image of ``s`` under conjugation by the rotations, first rotation innermost."""
    out = s
    for rot in rotations:
        out = rot.conjugate(out)
    return out
