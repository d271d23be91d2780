"""Derivative-free minimizers with a common interface.

Two algorithms, both budget-limited and deterministic under a fixed seed:

* a linear-approximation trust-region method in the COBYLA family
  (linear surrogate over a simplex, shrinking trust radius), and
* a covariance-matrix-adaptation evolution strategy (CMA-ES) with the
  standard rank-one / rank-mu update and cumulative step-size adaptation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    evaluations: int
    trace: list = field(default_factory=list)  # (eval index, f value), raw order

    @property
    def best_so_far(self):
        best = np.inf
        out = []
        for i, f in self.trace:
            best = min(best, f)
            out.append((i, best))
        return out


class _Budget:
    def __init__(self, fn, budget):
        self.fn = fn
        self.budget = int(budget)
        self.count = 0
        self.trace = []
        self.best_x = None
        self.best_f = np.inf

    @property
    def exhausted(self):
        return self.count >= self.budget

    def __call__(self, x):
        if self.exhausted:
            raise _BudgetExhausted
        f = float(self.fn(np.asarray(x, dtype=float)))
        self.trace.append((self.count, f))
        self.count += 1
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float)
        return f


class _BudgetExhausted(Exception):
    pass


def minimize_cobyla(fn, x0, budget, seed=0, rho0=0.1, rho_min=1e-8) -> MinimizeResult:
    """Linear-model trust-region descent.

    Keeps a simplex of d+1 points, fits a linear surrogate by least squares,
    and steps the incumbent against the model gradient within the trust
    radius; the radius halves when a step fails to improve.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    rng = np.random.default_rng(seed)
    tracker = _Budget(fn, budget)
    rho = float(rho0)
    try:
        pts = [x0.copy()]
        vals = [tracker(x0)]
        for i in range(d):
            p = x0.copy()
            p[i] += rho
            pts.append(p)
            vals.append(tracker(p))
        while rho > rho_min:
            pts_a = np.array(pts)
            vals_a = np.array(vals)
            best_i = int(np.argmin(vals_a))
            xb, fb = pts_a[best_i], vals_a[best_i]
            # linear fit f ~ c + g.(x - xb)
            A = np.hstack([np.ones((len(pts), 1)), pts_a - xb])
            coef, *_ = np.linalg.lstsq(A, vals_a, rcond=None)
            g = coef[1:]
            gn = np.linalg.norm(g)
            if gn < 1e-14:
                direction = rng.standard_normal(d)
                direction /= np.linalg.norm(direction)
            else:
                direction = -g / gn
            cand = xb + rho * direction
            fc = tracker(cand)
            if fc < fb:
                worst = int(np.argmax(vals_a))
                pts[worst] = cand
                vals[worst] = fc
            else:
                rho *= 0.5
                # refresh the simplex around the incumbent at the new scale
                order = np.argsort(vals_a)
                pts = [pts_a[order[0]].copy()]
                vals = [float(vals_a[order[0]])]
                for i in range(d):
                    p = pts[0].copy()
                    p[i] += rho * (1 if rng.random() < 0.5 else -1)
                    pts.append(p)
                    vals.append(tracker(p))
    except _BudgetExhausted:
        pass
    return MinimizeResult(
        x=tracker.best_x, fun=tracker.best_f, evaluations=tracker.count,
        trace=tracker.trace,
    )


def minimize_cmaes(fn, x0, budget, seed=0, sigma0=0.3) -> MinimizeResult:
    """(mu/mu_w, lambda) CMA-ES with default population 4 + floor(3 ln d)."""
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    rng = np.random.default_rng(seed)
    tracker = _Budget(fn, budget)

    lam = 4 + int(3 * np.log(d))
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mu_eff = 1.0 / (w**2).sum()

    cc = (4 + mu_eff / d) / (d + 4 + 2 * mu_eff / d)
    cs = (mu_eff + 2) / (d + mu_eff + 5)
    c1 = 2 / ((d + 1.3) ** 2 + mu_eff)
    cmu = min(1 - c1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((d + 2) ** 2 + mu_eff))
    damps = 1 + 2 * max(0.0, np.sqrt((mu_eff - 1) / (d + 1)) - 1) + cs
    chi_n = np.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d**2))

    mean = x0.copy()
    sigma = float(sigma0)
    C = np.eye(d)
    pc = np.zeros(d)
    ps = np.zeros(d)

    try:
        # anchor evaluation so the initial point is always in the trace
        tracker(mean)
        while not tracker.exhausted:
            try:
                evals, sq = np.linalg.eigh(C)
            except np.linalg.LinAlgError:
                C = np.eye(d)
                evals, sq = np.linalg.eigh(C)
            evals = np.maximum(evals, 1e-20)
            B = sq
            D = np.sqrt(evals)
            zs = rng.standard_normal((lam, d))
            ys = zs * D @ B.T  # y_k = B D z_k
            xs = mean + sigma * ys
            fs = []
            for x in xs:
                fs.append(tracker(x))  # raises when the budget runs out
            idx = np.argsort(fs)[:mu]
            y_w = w @ ys[idx]
            mean = mean + sigma * y_w

            inv_sqrt_y = (zs[idx].T @ w)  # B D^-1 B^T y_w == B z_w
            ps = (1 - cs) * ps + np.sqrt(cs * (2 - cs) * mu_eff) * (B @ inv_sqrt_y)
            hsig = float(
                np.linalg.norm(ps)
                / np.sqrt(1 - (1 - cs) ** (2 * (tracker.count // lam + 1)))
                < (1.4 + 2 / (d + 1)) * chi_n
            )
            pc = (1 - cc) * pc + hsig * np.sqrt(cc * (2 - cc) * mu_eff) * y_w
            rank_mu = sum(wk * np.outer(yk, yk) for wk, yk in zip(w, ys[idx]))
            C = (
                (1 - c1 - cmu) * C
                + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
                + cmu * rank_mu
            )
            C = 0.5 * (C + C.T)
            sigma *= np.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))
            sigma = float(np.clip(sigma, 1e-12, 1e6))
    except _BudgetExhausted:
        pass
    return MinimizeResult(
        x=tracker.best_x, fun=tracker.best_f, evaluations=tracker.count,
        trace=tracker.trace,
    )


OPTIMIZERS = {"cobyla": minimize_cobyla, "cmaes": minimize_cmaes}
