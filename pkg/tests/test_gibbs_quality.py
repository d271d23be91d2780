"""Temperature calibration by regressing log-amplitudes against energies."""

import csv
import json

import numpy as np
import pytest

from gibbsqaoa.analytics import exact_gibbs
from gibbsqaoa.gibbs_quality import (
    amplitude_of,
    quality_from_samples,
    quality_with_scatter,
    write_scatter_csv,
)
from gibbsqaoa.mps import MPS
from gibbsqaoa.problems import maxcut_to_ising, random_maxcut


def gibbs_mps(h, t):
    return MPS.from_dense(exact_gibbs(h, t))


def test_amplitude_of_basis_state():
    assert amplitude_of(MPS.basis_state([1, 0]), "10") == pytest.approx(1.0)


def test_amplitude_of_plus_state():
    assert amplitude_of(MPS.plus_state(4), "0110") == pytest.approx(2**-2)


def test_amplitude_of_matches_dense(rng):
    from gibbsqaoa.analytics import random_state

    psi = random_state(5, rng)
    m = MPS.from_dense(psi)
    assert amplitude_of(m, "01011") == pytest.approx(psi.amplitudes[0b01011], abs=1e-10)


def test_exact_gibbs_recovers_temperature():
    h = maxcut_to_ising(random_maxcut(6, 2))
    # amplitude convention: |c_s| ~ e^{-E_s/(2T_amp)} with T_amp from the
    # inverse-temperature argument; ln-slope = -t/2
    for t in (0.5, 1.0, 2.0):
        rep = quality_from_samples(gibbs_mps(h, 2 * t), h, 5000, seed=1)
        assert rep.slope == pytest.approx(-t, rel=1e-3)
        assert rep.pearson_r == pytest.approx(-1.0, abs=1e-10)
        assert rep.implied_temperature == pytest.approx(1 / t, rel=1e-3)
        assert not rep.degenerate


def test_temperature_recovery_precision():
    h = maxcut_to_ising(random_maxcut(7, 5))
    rep = quality_from_samples(gibbs_mps(h, 2 * 0.8), h, 4000, seed=3)
    assert rep.implied_temperature == pytest.approx(1.25, rel=1e-3)


def test_plus_state_flagged_degenerate():
    h = maxcut_to_ising(random_maxcut(5, 1))
    rep = quality_from_samples(MPS.plus_state(5), h, 500, seed=0)
    assert rep.degenerate
    assert rep.implied_temperature is None
    assert rep.slope == 0.0


def test_degenerate_energies_have_equal_amplitudes():
    h = maxcut_to_ising(random_maxcut(6, 7))
    m = gibbs_mps(h, 1.0)
    e = h.energies()
    groups = {}
    for idx in range(64):
        groups.setdefault(round(e[idx], 9), []).append(idx)
    for idxs in groups.values():
        amps = [abs(amplitude_of(m, format(i, "06b"))) for i in idxs]
        assert max(amps) - min(amps) < 1e-10


def test_rejects_too_few_samples():
    h = maxcut_to_ising(random_maxcut(4, 0))
    with pytest.raises(ValueError):
        quality_from_samples(MPS.plus_state(4), h, 50, seed=0)


def test_fewer_than_three_distinct_is_degenerate():
    h = maxcut_to_ising(random_maxcut(4, 0))
    rep = quality_from_samples(MPS.basis_state([0, 1, 0, 1]), h, 200, seed=0)
    assert rep.degenerate
    assert rep.distinct_count == 1


def test_report_json_and_scatter_csv(tmp_path):
    h = maxcut_to_ising(random_maxcut(5, 3))
    rep, pts = quality_with_scatter(gibbs_mps(h, 1.0), h, 1000, seed=4)
    data = json.loads(rep.to_json())
    assert set(data) >= {"slope", "intercept", "pearson_r", "implied_temperature"}
    p = tmp_path / "scatter.csv"
    write_scatter_csv(p, pts)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["energy", "log_amplitude", "bitstring"]
    assert len(rows) == len(pts) + 1


def test_degenerate_temperature_serializes_as_undefined():
    h = maxcut_to_ising(random_maxcut(4, 0))
    rep = quality_from_samples(MPS.plus_state(4), h, 200, seed=0)
    assert json.loads(rep.to_json())["implied_temperature"] == "undefined"
