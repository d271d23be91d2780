"""Gibbs-state quality assessment from samples.

For an ideal pure Gibbs state the log-amplitudes are linear in energy,
ln|c_s| = -E_s/T - ln(sqrt(Z)), so a regression of sampled log-amplitudes
against energies recovers the temperature as T = -1/slope and a Pearson
correlation of -1.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict

import numpy as np

from .mps import MPS
from .problems import IsingHamiltonian, energy_of

AMPLITUDE_FLOOR = 1e-14  # amplitudes below this are excluded from the log fit


@dataclass
class GibbsQualityReport:
    slope: float
    intercept: float
    pearson_r: float
    sample_count: int
    distinct_count: int
    implied_temperature: float  # None/NaN-free: math.inf-style flags avoided
    degenerate: bool

    def to_json(self) -> str:
        d = asdict(self)
        if d["implied_temperature"] is None:
            d["implied_temperature"] = "undefined"
        return json.dumps(d, indent=2)


def amplitude_of(mps: MPS, s) -> complex:
    """<s|MPS> (wrapper around the single-pass MPS contraction)."""
    return mps.amplitude(s)


def quality_from_samples(
    mps: MPS, h: IsingHamiltonian, k: int, seed: int
) -> GibbsQualityReport:
    """Sample k bitstrings, regress ln|amplitude| of the distinct ones on energy."""
    if k < 100:
        raise ValueError(f"need k >= 100 samples, got {k}")
    report, _ = quality_with_scatter(mps, h, k, seed)
    return report


def quality_with_scatter(mps: MPS, h: IsingHamiltonian, k: int, seed: int):
    """Like quality_from_samples but also returns the (E_s, ln|c_s|) points."""
    samples = mps.sample(k, seed)
    distinct = sorted(set(samples))
    points = []
    for s in distinct:
        amp = abs(mps.amplitude(s))
        if amp < AMPLITUDE_FLOOR:
            continue
        points.append((energy_of(h, s), float(np.log(amp)), s))

    if len(points) < 3:
        return (
            GibbsQualityReport(
                slope=0.0,
                intercept=0.0,
                pearson_r=0.0,
                sample_count=k,
                distinct_count=len(distinct),
                implied_temperature=None,
                degenerate=True,
            ),
            points,
        )

    e = np.array([p[0] for p in points])
    lc = np.array([p[1] for p in points])
    ve = e - e.mean()
    vl = lc - lc.mean()
    see, sll = float(ve @ ve), float(vl @ vl)
    if see < 1e-24 or sll < 1e-24:
        # all sampled energies equal, or amplitudes flat (e.g. the plus state)
        slope = 0.0
        r = 0.0
        degenerate = True
    else:
        slope = float((ve @ vl) / see)
        r = float((ve @ vl) / np.sqrt(see * sll))
        degenerate = False
    intercept = float(lc.mean() - slope * e.mean())
    implied_t = (-1.0 / slope) if slope < 0 else None
    return (
        GibbsQualityReport(
            slope=slope,
            intercept=intercept,
            pearson_r=r,
            sample_count=k,
            distinct_count=len(distinct),
            implied_temperature=implied_t,
            degenerate=degenerate,
        ),
        points,
    )


def write_scatter_csv(path, points):
    """Rows (energy, log_amplitude, bitstring) for quality scatter plots."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["energy", "log_amplitude", "bitstring"])
        for e, lc, s in points:
            w.writerow([repr(e), repr(lc), s])
