"""Statevector QAOA layers, expectation, optimization, landscape scan."""

import json

import numpy as np
import pytest

from gibbsqaoa.analytics import DenseState, exact_gibbs, random_state
from gibbsqaoa.problems import IsingHamiltonian, brute_spectrum, maxcut_to_ising, random_maxcut
from gibbsqaoa.qaoa import (
    OptimizationRun,
    QaoaError,
    QaoaParams,
    apply_cost_layer,
    apply_mixer_layer,
    expectation,
    landscape_scan,
    optimize,
    run,
    write_landscape_csv,
)


def test_params_validation():
    with pytest.raises(QaoaError):
        QaoaParams(gamma=[0.1, 0.2], xi=[0.1])
    with pytest.raises(QaoaError):
        QaoaParams(gamma=[np.nan], xi=[0.0])
    p = QaoaParams(gamma=[0.1, 0.2], xi=[0.3, 0.4])
    assert p.p == 2
    assert np.allclose(QaoaParams.from_flat(p.to_flat()).gamma, p.gamma)


# -- cost layer --------------------------------------------------------------

def test_cost_layer_gamma_zero_identity(maxcut6, rng):
    psi = random_state(6, rng)
    out = apply_cost_layer(psi, maxcut6, 0.0)
    assert np.allclose(out.amplitudes, psi.amplitudes)


def test_cost_layer_preserves_probabilities(maxcut6, rng):
    psi = random_state(6, rng)
    out = apply_cost_layer(psi, maxcut6, 1.234)
    assert np.allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes))


def test_cost_layer_phases_two_qubit_hand_check():
    h = IsingHamiltonian(n=2, h=np.zeros(2), J={(0, 1): 1.0})
    psi = DenseState.plus(2)
    out = apply_cost_layer(psi, h, np.pi / 4)
    # energies (offset-free): z0*z1 = +1,-1,-1,+1 for 00,01,10,11
    expected = 0.5 * np.exp(-1j * np.pi / 4 * np.array([1.0, -1.0, -1.0, 1.0]))
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


def test_cost_layer_excludes_offset_from_phase():
    h0 = IsingHamiltonian(n=2, h=np.zeros(2), J={(0, 1): 1.0}, offset=0.0)
    h5 = IsingHamiltonian(n=2, h=np.zeros(2), J={(0, 1): 1.0}, offset=5.0)
    psi = DenseState.plus(2)
    assert np.allclose(
        apply_cost_layer(psi, h0, 0.7).amplitudes,
        apply_cost_layer(psi, h5, 0.7).amplitudes,
    )


def test_cost_layer_period_on_integer_spectrum(maxcut6, rng):
    # unweighted Max Cut energies are integers apart from a global half-integer
    # shift, so a 2*pi shift in gamma is at most a global phase
    psi = random_state(6, rng)
    a = apply_cost_layer(psi, maxcut6, 0.4).amplitudes
    b = apply_cost_layer(psi, maxcut6, 0.4 + 2 * np.pi).amplitudes
    assert abs(np.vdot(a, b)) == pytest.approx(1.0, abs=1e-10)


# -- mixer layer -------------------------------------------------------------

def test_mixer_xi_zero_identity(rng):
    psi = random_state(4, rng)
    assert np.allclose(apply_mixer_layer(psi, 0.0).amplitudes, psi.amplitudes)


def test_mixer_half_pi_flips_basis():
    out = apply_mixer_layer(DenseState.basis(1, 0), np.pi / 2)
    assert np.allclose(out.amplitudes, [0.0, 1j], atol=1e-12)


def test_mixer_matches_two_by_two_exponential(rng):
    from scipy.linalg import expm

    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    xi = 0.37
    rot = expm(1j * xi * sx)
    psi = random_state(1, rng)
    assert np.allclose(
        apply_mixer_layer(psi, xi).amplitudes, rot @ psi.amplitudes, atol=1e-12
    )


def test_plus_state_is_mixer_eigenstate():
    psi = DenseState.plus(5)
    for xi in (0.3, 1.1, 2.9):
        out = apply_mixer_layer(psi, xi)
        assert abs(np.vdot(psi.amplitudes, out.amplitudes)) == pytest.approx(1.0)


def test_layers_preserve_norm(maxcut6, rng):
    psi = random_state(6, rng)
    out = apply_mixer_layer(apply_cost_layer(psi, maxcut6, 0.9), 1.7)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-12)


# -- full circuit ------------------------------------------------------------

def test_run_p0_and_zero_angles(maxcut6, rng):
    psi = random_state(6, rng)
    assert np.allclose(
        run(psi, maxcut6, QaoaParams(gamma=[], xi=[])).amplitudes, psi.amplitudes
    )
    assert np.allclose(
        run(psi, maxcut6, QaoaParams(gamma=[0.0, 0.0], xi=[0.0, 0.0])).amplitudes,
        psi.amplitudes,
    )


def test_run_single_qubit_closed_form():
    h = IsingHamiltonian(n=1, h=np.array([1.0]), J={})
    gamma, xi = 0.3, 0.2
    out = run(DenseState.plus(1), h, QaoaParams(gamma=[gamma], xi=[xi]))
    # closed form: phases e^{-i*gamma*(+1)}, e^{-i*gamma*(-1)} then x-rotation
    a = np.array([np.exp(-1j * gamma), np.exp(1j * gamma)]) / np.sqrt(2)
    rot = np.array([[np.cos(xi), 1j * np.sin(xi)], [1j * np.sin(xi), np.cos(xi)]])
    ref = rot @ a
    assert np.allclose(out.amplitudes, ref, atol=1e-12)
    e_ref = abs(ref[0]) ** 2 - abs(ref[1]) ** 2
    assert expectation(out, h) == pytest.approx(e_ref)


def test_run_dimension_mismatch(maxcut6):
    with pytest.raises(QaoaError):
        run(DenseState.plus(5), maxcut6, QaoaParams(gamma=[0.1], xi=[0.1]))


# -- expectation -------------------------------------------------------------

def test_expectation_values(triangle_h):
    sp = brute_spectrum(triangle_h)
    idx = int(np.argmin(sp.energies))
    assert expectation(DenseState.basis(3, idx), triangle_h) == pytest.approx(-2.0)
    assert expectation(DenseState.plus(3), triangle_h) == pytest.approx(-1.5)
    assert expectation(exact_gibbs(triangle_h, 500.0), triangle_h) == pytest.approx(-2.0)


def test_expectation_matches_dense_matrix_form(maxcut6, rng):
    psi = random_state(6, rng)
    Hd = np.diag(maxcut6.energies())
    ref = np.vdot(psi.amplitudes, Hd @ psi.amplitudes).real
    assert expectation(psi, maxcut6) == pytest.approx(ref, abs=1e-10)


# -- optimization ------------------------------------------------------------

def test_optimize_ground_state_stays_optimal(maxcut6):
    sp = brute_spectrum(maxcut6)
    idx = int(np.argmin(sp.energies))
    res = optimize(DenseState.basis(6, idx), maxcut6, p=1, optimizer="cobyla", seed=0, budget=60)
    assert res.best_energy == pytest.approx(sp.e_min, abs=1e-6)


@pytest.mark.parametrize("name", ["cobyla", "cmaes"])
def test_optimize_improves_on_initial(maxcut6, name):
    psi0 = DenseState.plus(6)
    res = optimize(psi0, maxcut6, p=1, optimizer=name, seed=1, budget=120)
    assert res.best_energy <= expectation(psi0, maxcut6) + 1e-9
    assert res.evaluations <= 120


def test_optimize_deterministic(maxcut6):
    a = optimize(DenseState.plus(6), maxcut6, p=2, optimizer="cmaes", seed=4, budget=80)
    b = optimize(DenseState.plus(6), maxcut6, p=2, optimizer="cmaes", seed=4, budget=80)
    assert a.best_energy == b.best_energy
    assert np.array_equal(a.best_params.to_flat(), b.best_params.to_flat())


def test_optimize_validates_inputs(maxcut6):
    with pytest.raises(QaoaError):
        optimize(DenseState.plus(6), maxcut6, p=1, budget=0)
    with pytest.raises(QaoaError):
        optimize(DenseState.plus(6), maxcut6, p=1, optimizer="nelder-mead")


def test_optimization_run_json(maxcut6):
    res = optimize(DenseState.plus(6), maxcut6, p=1, seed=0, budget=40,
                   initial_state_label="hadamard")
    data = json.loads(res.to_json())
    assert data["initial_state"] == "hadamard"
    assert data["p"] == 1
    assert len(data["trace"]) == data["evaluations"]
    bests = [f for _, f in res.best_so_far]
    assert all(x >= y for x, y in zip(bests, bests[1:]))


# -- landscape ---------------------------------------------------------------

def test_landscape_origin_is_initial_energy(maxcut6):
    psi0 = exact_gibbs(maxcut6, 1.0)
    grid = landscape_scan(psi0, maxcut6, resolution=8)
    assert grid[0, 0] == pytest.approx(expectation(psi0, maxcut6))


def test_landscape_xi_periodicity(maxcut6):
    psi0 = exact_gibbs(maxcut6, 1.0)
    g1 = landscape_scan(psi0, maxcut6, resolution=8, xi_max=np.pi)
    g2 = landscape_scan(psi0, maxcut6, resolution=8, xi_max=np.pi)
    # explicit check: energy at xi and xi + pi coincide
    gammas = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    from gibbsqaoa.qaoa import apply_cost_layer, apply_mixer_layer

    psi_g = apply_cost_layer(psi0, maxcut6, gammas[3])
    e1 = expectation(apply_mixer_layer(psi_g, 0.4), maxcut6)
    e2 = expectation(apply_mixer_layer(psi_g, 0.4 + np.pi), maxcut6)
    assert e1 == pytest.approx(e2, abs=1e-10)
    assert np.array_equal(g1, g2)


def test_landscape_gibbs_vs_gaussian_ranges_differ(maxcut6):
    from gibbsqaoa.analytics import expected_energy, fixed_energy_gaussian

    gibbs = exact_gibbs(maxcut6, 2.0 / 3.0)
    gauss = fixed_energy_gaussian(maxcut6, expected_energy(gibbs, maxcut6), 1.0)
    g1 = landscape_scan(gibbs, maxcut6, resolution=16)
    g2 = landscape_scan(gauss, maxcut6, resolution=16)
    assert (g1.min(), g1.max()) != (g2.min(), g2.max())


def test_landscape_csv(tmp_path, maxcut6):
    grid = landscape_scan(DenseState.plus(6), maxcut6, resolution=8)
    p = tmp_path / "l.csv"
    write_landscape_csv(p, grid)
    import csv as csvmod

    rows = list(csvmod.reader(open(p)))
    assert len(rows) == 8 and len(rows[0]) == 8
    assert float(rows[0][0]) == pytest.approx(grid[0, 0])
