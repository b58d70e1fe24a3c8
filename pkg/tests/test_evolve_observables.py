import numpy as np
import pytest
import scipy.sparse as sp

from hhsim.evolve import Trajectory, exact_trajectory
from hhsim.model import HHParams, build_spin_boson, initial_state, total_fermion_number_operator
from hhsim.observables import (
    dominant_frequency,
    double_occupation,
    fidelity,
    phonon_number,
    total_fermion_number,
)
from hhsim.spaces import HilbertSpace, ladder

from oracles import random_state


class TestExactTrajectory:
    def test_single_time_zero(self, rng):
        h = sp.identity(4, dtype=complex, format="csr")
        psi = random_state(4, rng)
        traj = exact_trajectory(h, psi, [0.0])
        assert len(traj) == 1
        assert np.allclose(traj.states[0], psi)

    def test_number_state_phase(self):
        omega0 = 1.3
        space = HilbertSpace(0, (8,))
        h = omega0 * space.mode_operator(0, "number")
        psi = space.basis_state((1,))
        traj = exact_trajectory(h, psi, [2 * np.pi / omega0])
        overlap = np.vdot(psi, traj.states[-1])
        assert abs(abs(overlap) - 1.0) < 1e-12

    def test_rejects_unsorted_times(self, rng):
        h = sp.identity(4, dtype=complex, format="csr")
        with pytest.raises(ValueError):
            exact_trajectory(h, random_state(4, rng), [0.0, 0.2, 0.1])

    def test_energy_and_norm_conserved(self, small_two_site_params):
        params = small_two_site_params
        h = build_spin_boson(params).total()
        psi = initial_state("0,1,1,0,0,0", params)
        traj = exact_trajectory(h, psi, np.linspace(0, 3.0, 20))
        energies = traj.expectation_series(h)
        assert np.max(np.abs(energies - energies[0])) < 1e-8
        for state in traj.states:
            assert abs(np.linalg.norm(state) - 1.0) < 1e-10

    def test_fermion_number_conserved(self, small_two_site_params):
        params = small_two_site_params
        h = build_spin_boson(params).total()
        psi = initial_state("0,1,1,0,0,0", params)
        traj = exact_trajectory(h, psi, np.linspace(0, 2.0, 10))
        nums = traj.expectation_series(total_fermion_number_operator(params))
        assert np.max(np.abs(nums - 2.0)) < 1e-8


class TestFidelity:
    def test_self_fidelity(self, rng):
        psi = random_state(16, rng)
        assert fidelity(psi, psi) == pytest.approx(1.0)

    def test_orthogonal(self):
        a = np.array([1, 0, 0, 0], dtype=complex)
        b = np.array([0, 1, 0, 0], dtype=complex)
        assert fidelity(a, b) == 0.0

    def test_maximally_mixed(self, rng):
        d = 8
        psi = random_state(d, rng)
        rho = np.eye(d, dtype=complex) / d
        assert fidelity(psi, rho) == pytest.approx(1.0 / d)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(Exception):
            fidelity(random_state(4, rng), random_state(8, rng))


class TestSiteObservables:
    def test_pair_on_site_one(self, two_site_params):
        psi = initial_state("1,1,0,0,0,0", two_site_params)
        assert double_occupation(psi, 0, two_site_params) == pytest.approx(1.0)
        assert double_occupation(psi, 1, two_site_params) == pytest.approx(0.0)

    def test_vacuum(self, two_site_params):
        psi = initial_state("0,0,0,0,0,0", two_site_params)
        assert double_occupation(psi, 0, two_site_params) == 0.0
        assert phonon_number(psi, two_site_params) == 0.0

    def test_fock_state_phonons(self, two_site_params):
        psi = initial_state("0,1,1,0,3,2", two_site_params)
        assert phonon_number(psi, two_site_params) == pytest.approx(5.0)
        assert total_fermion_number(psi, two_site_params) == pytest.approx(2.0)

    def test_double_occupation_bounds(self, two_site_params, rng):
        psi = random_state(two_site_params.space().dim, rng)
        for site in (0, 1):
            val = double_occupation(psi, site, two_site_params)
            assert -1e-12 <= val <= 1.0 + 1e-12


class TestDominantFrequency:
    def test_pure_cosine(self):
        omega = 3.7
        times = np.linspace(0.0, 20.0, 256)
        values = np.cos(omega * times)
        got = dominant_frequency(times, values)
        bin_width = 2 * np.pi / (times[-1] - times[0] + times[1])
        assert abs(got - omega) < bin_width

    def test_constant_series_raises(self):
        times = np.linspace(0, 1, 128)
        with pytest.raises(ValueError):
            dominant_frequency(times, np.ones(128))

    def test_non_uniform_grid_raises(self):
        times = np.concatenate([np.linspace(0, 1, 64), np.linspace(1.1, 4, 64)])
        with pytest.raises(ValueError):
            dominant_frequency(times, np.cos(times))

    def test_needs_enough_samples(self):
        times = np.linspace(0, 1, 32)
        with pytest.raises(ValueError):
            dominant_frequency(times, np.cos(7 * times))


def test_trajectory_length_mismatch():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), states=[np.zeros(2)])
