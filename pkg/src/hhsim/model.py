"""Hubbard-Holstein Hamiltonians in the fermion-boson and mapped spin-boson pictures.

Conventions (fixed once, validated by the cross-representation tests):

* Qubit basis: |0> is the sigma_z = +1 eigenstate.
* Occupation: |1> carries one fermion, so n = (1 - sigma_z)/2.  Amplitude
  damping |1> -> |0> then destroys fermions, as it must on hardware.
* Spinless mode ordering 1L, 1R, 2L, 2R, ...: site j (0-based) owns modes
  2j (spin up / left qubit) and 2j+1 (spin down / right qubit).
* Lattice (l, h) with l <= h: sites are indexed j = r*l + c along the JW
  chain (r = 0..h-1, c = 0..l-1).  Nearest-neighbour bonds come in two
  classes: chain-adjacent pairs (j, j+1) inside a run of l, and strided
  pairs (j, j+l) whose mapped hopping carries a string of 2l-1 Z's.

With these choices the mapped Hamiltonian is the standard JW image of the
fermion-boson Hamiltonian; relative to a convention in which |0> is the
occupied state, all terms linear in sigma_z flip sign (a global X
conjugation), which leaves every spectrum and every occupation observable
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .pauli_strings import PauliString
from .spaces import HilbertSpace, drop_explicit_zeros, ladder, pauli

__all__ = [
    "HHParams",
    "TermDecomposition",
    "build_fermion_boson",
    "build_spin_boson",
    "jw_string_term",
    "hopping_pauli_terms",
    "fermion_annihilation",
    "displacement_constant",
    "parse_occupations",
    "initial_state",
    "site_double_occupation_operator",
    "total_fermion_number_operator",
    "total_phonon_number_operator",
    "SPIN_UP",
    "SPIN_DOWN",
]

SPIN_UP = "up"
SPIN_DOWN = "down"

_ANNIHILATE = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))  # |0><1|
_CREATE = sp.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))  # |1><0|


@dataclass(frozen=True)
class HHParams:
    """Physical parameters of an l x h Hubbard-Holstein lattice.

    All couplings are plain energies in whatever unit the caller works in;
    the CLI normalises to hopping units (H/k, time in 1/k) at ingestion.
    """

    omega0: float
    u: float
    k: float
    g: float
    lattice: tuple[int, int] = (1, 2)
    boson_levels: int = 8

    def __post_init__(self):
        l, h = self.lattice
        if l < 1 or h < 1:
            raise ValueError(f"lattice dimensions must be positive, got {self.lattice}")
        if l > h:
            raise ValueError(f"lattice must satisfy l <= h, got {self.lattice}")
        if self.boson_levels < 2:
            raise ValueError("boson_levels must be at least 2")
        if self.g != 0.0 and self.omega0 <= 0.0:
            raise ValueError("omega0 must be positive whenever g is nonzero")

    @property
    def n_sites(self) -> int:
        l, h = self.lattice
        return l * h

    @property
    def n_modes(self) -> int:
        return self.n_sites

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_sites

    @property
    def ubar(self) -> float:
        """Phonon-renormalised on-site interaction U - 4g^2/omega0."""
        if self.g == 0.0:
            return self.u
        return self.u - 4.0 * self.g**2 / self.omega0

    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_qubits, (self.boson_levels,) * self.n_modes)

    def normalized(self) -> "HHParams":
        """Parameters in hopping units (k = 1); requires k != 0."""
        if self.k == 0.0:
            raise ValueError("cannot normalise to hopping units with k = 0")
        return HHParams(
            omega0=self.omega0 / self.k,
            u=self.u / self.k,
            k=1.0,
            g=self.g / self.k,
            lattice=self.lattice,
            boson_levels=self.boson_levels,
        )

    def mode_index(self, site: int, spin: str) -> int:
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} out of range")
        if spin == SPIN_UP:
            return 2 * site
        if spin == SPIN_DOWN:
            return 2 * site + 1
        raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")

    def neighbor_bonds(self) -> list[tuple[int, int]]:
        """All nearest-neighbour site pairs (a < b), open boundaries."""
        l, h = self.lattice
        bonds = []
        for r in range(h):
            for c in range(l):
                j = r * l + c
                if c < l - 1:
                    bonds.append((j, j + 1))
                if r < h - 1:
                    bonds.append((j, j + l))
        return sorted(set(bonds))

    def chain_bonds(self) -> list[tuple[int, int]]:
        """Bonds adjacent along the JW chain (site-index distance 1)."""
        return [b for b in self.neighbor_bonds() if b[1] - b[0] == 1]

    def string_bonds(self) -> list[tuple[int, int]]:
        """Bonds at site-index distance l > 1 (mapped hopping carries a Z string)."""
        return [b for b in self.neighbor_bonds() if b[1] - b[0] > 1]


def fermion_annihilation(params: HHParams, mode: int, space: HilbertSpace | None = None) -> sp.csr_matrix:
    """JW matrix of the spinless annihilation operator b_mode (Z-string times |0><1|)."""
    space = space or params.space()
    if not 0 <= mode < params.n_qubits:
        raise IndexError(f"mode {mode} out of range")
    op = space.embed(mode, _ANNIHILATE)
    for i in range(mode):
        op = space.qubit_operator(i, "z") @ op
    return op.tocsr()


def _boson_pair_ops(params: HHParams, space: HilbertSpace, shift: float):
    """Per-mode (a, a_dagger) with an optional analytic displacement a -> a + shift."""
    n = params.boson_levels
    a_local = ladder(n, "a")
    if shift:
        a_local = a_local + shift * sp.identity(n, dtype=complex, format="csr")
    ops = []
    for j in range(params.n_modes):
        a = space.embed(space.mode_subsystem(j), a_local)
        ops.append((a, a.conjugate().transpose().tocsr()))
    return ops


def build_fermion_boson(params: HHParams, boson_shift: float = 0.0) -> sp.csr_matrix:
    """Hamiltonian in the spinless-fermion occupation basis tensor truncated Fock modes.

    ``boson_shift`` applies the change of variables a -> a + shift analytically
    before assembling the terms (used by the displacement cross-checks).
    """
    space = params.space()
    dim = space.dim
    h = sp.csr_matrix((dim, dim), dtype=complex)

    c_ops = [fermion_annihilation(params, m, space) for m in range(params.n_qubits)]
    n_ops = [(c.conjugate().transpose() @ c).tocsr() for c in c_ops]
    boson = _boson_pair_ops(params, space, boson_shift)

    for j in range(params.n_sites):
        a, adag = boson[j]
        h = h + params.omega0 * (adag @ a)
        n_up = n_ops[params.mode_index(j, SPIN_UP)]
        n_dn = n_ops[params.mode_index(j, SPIN_DOWN)]
        h = h + params.u * (n_up @ n_dn)
        if params.g != 0.0:
            h = h + params.g * ((n_up + n_dn) @ (a + adag))

    for (sa, sb) in params.neighbor_bonds():
        for spin in (SPIN_UP, SPIN_DOWN):
            ma, mb = params.mode_index(sa, spin), params.mode_index(sb, spin)
            hop = c_ops[ma].conjugate().transpose() @ c_ops[mb]
            h = h - params.k * (hop + hop.conjugate().transpose())

    return drop_explicit_zeros(h, 1e-14)


def displacement_constant(params: HHParams) -> float:
    """Scalar offset between the shifted fermion-boson build and the spin-boson build.

    build_fermion_boson(params, -g/omega0) == build_spin_boson(params).total()
    plus this constant times the identity, exactly, at any truncation.
    """
    if params.g == 0.0:
        return params.n_sites * params.u / 4.0
    return params.n_sites * (params.u / 4.0 - params.g**2 / params.omega0)


def hopping_pauli_terms(params: HHParams, bond: tuple[int, int], spin: str) -> list[PauliString]:
    """The two Pauli strings (x and y quadrature) of one mapped hopping bond.

    Each carries an implicit -k/2 coefficient in the Hamiltonian.
    """
    sa, sb = bond
    ma, mb = params.mode_index(sa, spin), params.mode_index(sb, spin)
    if ma > mb:
        ma, mb = mb, ma
    interior = {m: "z" for m in range(ma + 1, mb)}
    out = []
    for quad in ("x", "y"):
        letters = dict(interior)
        letters[ma] = quad
        letters[mb] = quad
        out.append(PauliString.from_map(letters))
    return out


def jw_string_term(params: HHParams, bond: tuple[int, int], spin: str, space: HilbertSpace | None = None) -> sp.csr_matrix:
    """Mapped hopping operator c_a^dag c_b + h.c. for one bond and spin.

    Equals (X Z..Z X + Y Z..Z Y)/2 on the modes of the bond; built here from
    the Pauli picture (the fermionic route is the cross-check in the tests).
    """
    if bond not in params.neighbor_bonds():
        raise ValueError(f"sites {bond} are not nearest neighbours on the {params.lattice} lattice")
    space = space or params.space()
    terms = hopping_pauli_terms(params, bond, spin)
    return (0.5 * (terms[0].to_sparse(space) + terms[1].to_sparse(space))).tocsr()


@dataclass(frozen=True)
class TermDecomposition:
    """Five-way split of the mapped spin-boson Hamiltonian."""

    h_free: sp.csr_matrix
    h_onsite: sp.csr_matrix
    h_eph: sp.csr_matrix
    h_horizontal: sp.csr_matrix
    h_vertical: sp.csr_matrix

    def parts(self) -> Iterator[tuple[str, sp.csr_matrix]]:
        yield "h_free", self.h_free
        yield "h_onsite", self.h_onsite
        yield "h_eph", self.h_eph
        yield "h_horizontal", self.h_horizontal
        yield "h_vertical", self.h_vertical

    def total(self) -> sp.csr_matrix:
        out = None
        for _, part in self.parts():
            out = part if out is None else out + part
        return out.tocsr()


def build_spin_boson(params: HHParams) -> TermDecomposition:
    """Mapped spin-boson Hamiltonian, with the displacement applied analytically.

    The boson drive linear in (a + a^dag) is already absorbed, so the on-site
    single-qubit weight is ubar = u - 4g^2/omega0 and no term mixes modes.
    """
    space = params.space()
    dim = space.dim
    zero = sp.csr_matrix((dim, dim), dtype=complex)

    h_free = zero.copy()
    h_onsite = zero.copy()
    h_eph = zero.copy()
    ubar = params.ubar
    for j in range(params.n_sites):
        number = space.mode_operator(j, "number")
        h_free = h_free + params.omega0 * number
        za = space.qubit_operator(params.mode_index(j, SPIN_UP), "z")
        zb = space.qubit_operator(params.mode_index(j, SPIN_DOWN), "z")
        h_free = h_free - (ubar / 4.0) * (za + zb)
        h_onsite = h_onsite + (params.u / 4.0) * (za @ zb)
        if params.g != 0.0:
            x_b = space.mode_operator(j, "a") + space.mode_operator(j, "a_dagger")
            h_eph = h_eph - (params.g / 2.0) * ((za + zb) @ x_b)

    def bond_sum(bonds):
        out = zero.copy()
        for bond in bonds:
            for spin in (SPIN_UP, SPIN_DOWN):
                out = out - params.k * jw_string_term(params, bond, spin, space)
        return out

    h_horizontal = bond_sum(params.chain_bonds())
    h_vertical = bond_sum(params.string_bonds())

    clean = lambda m: drop_explicit_zeros(m, 1e-14)
    return TermDecomposition(
        h_free=clean(h_free),
        h_onsite=clean(h_onsite),
        h_eph=clean(h_eph),
        h_horizontal=clean(h_horizontal),
        h_vertical=clean(h_vertical),
    )


def parse_occupations(text: str, params: HHParams) -> tuple[int, ...]:
    """Occupation string "0,1,1,0,0,0" -> per-subsystem levels (qubits then modes)."""
    fields = [f.strip() for f in text.split(",")]
    expected = params.n_qubits + params.n_modes
    if len(fields) != expected:
        raise ValueError(
            f"initial state needs {expected} entries ({params.n_qubits} qubits + "
            f"{params.n_modes} modes), got {len(fields)}"
        )
    try:
        occs = tuple(int(f) for f in fields)
    except ValueError as exc:
        raise ValueError(f"occupation entries must be integers: {exc}") from None
    for i, occ in enumerate(occs):
        limit = 2 if i < params.n_qubits else params.boson_levels
        if not 0 <= occ < limit:
            raise ValueError(f"occupation {occ} at position {i} out of range (< {limit})")
    return occs


def initial_state(text: str, params: HHParams) -> np.ndarray:
    return params.space().basis_state(parse_occupations(text, params))


def _occupation_projector(space: HilbertSpace, qubit: int) -> sp.csr_matrix:
    return space.embed(qubit, sp.csr_matrix(np.diag([0.0, 1.0]).astype(complex)))


def site_double_occupation_operator(params: HHParams, site: int, space: HilbertSpace | None = None) -> sp.csr_matrix:
    """Projector n_up n_down on one site (both qubits occupied)."""
    space = space or params.space()
    up = _occupation_projector(space, params.mode_index(site, SPIN_UP))
    dn = _occupation_projector(space, params.mode_index(site, SPIN_DOWN))
    return (up @ dn).tocsr()


def total_fermion_number_operator(params: HHParams, space: HilbertSpace | None = None) -> sp.csr_matrix:
    space = space or params.space()
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for m in range(params.n_qubits):
        out = out + _occupation_projector(space, m)
    return out.tocsr()


def total_phonon_number_operator(params: HHParams, space: HilbertSpace | None = None) -> sp.csr_matrix:
    space = space or params.space()
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for j in range(params.n_modes):
        out = out + space.mode_operator(j, "number")
    return out.tocsr()
