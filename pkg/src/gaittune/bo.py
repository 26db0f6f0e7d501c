"""Bayesian optimization loop with an acquisition portfolio (hedge).

Minimizes a black-box objective over a box. Each iteration fits a GP to
the standardized data, maximizes each acquisition (confidence bound,
expected improvement, probability of improvement) by multi-start search,
lets a softmax bandit pick among the per-acquisition candidates, then
evaluates the objective and updates the bandit gains with the posterior
mean at each candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm, qmc

from gaittune.gp import Dataset, GaussianProcess

__all__ = ["AcquisitionKind", "HedgeState", "BoConfig", "BoRun",
           "BayesOpt", "acquisition_value", "hedge_probabilities",
           "hedge_select"]


@dataclass(frozen=True)
class AcquisitionKind:
    """Tagged acquisition: lcb(kappa), expected_improvement(xi),
    probability_of_improvement(xi)."""

    tag: str
    kappa: float = 2.0
    xi: float = 0.01

    def __post_init__(self):
        if self.tag not in ("lcb", "expected_improvement",
                            "probability_of_improvement"):
            raise ValueError(f"unknown acquisition tag {self.tag!r}")
        if self.tag == "lcb" and self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")


def acquisition_value(kind: AcquisitionKind, mean, std, y_best: float):
    """Score (larger = more desirable query) for a minimization problem.

    At std = 0 the improvement-based scores take their limit values.
    """
    mean = np.asarray(mean, float)
    std = np.asarray(std, float)
    if np.any(std < 0):
        raise ValueError("std must be >= 0")
    if kind.tag == "lcb":
        return -mean + kind.kappa * std
    improve = y_best - mean - kind.xi
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std > 0, improve / np.where(std > 0, std, 1.0), 0.0)
    if kind.tag == "expected_improvement":
        ei = np.where(std > 0,
                      improve * norm.cdf(z) + std * norm.pdf(z),
                      np.maximum(improve, 0.0))
        return ei
    # probability of improvement
    return np.where(std > 0, norm.cdf(z), (improve > 0).astype(float))


@dataclass
class HedgeState:
    """Cumulative softmax-bandit gains, one per acquisition."""

    gains: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        self.gains = np.asarray(self.gains, float)
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("gains must be finite")


def hedge_probabilities(state: HedgeState) -> np.ndarray:
    logits = state.eta * state.gains
    logits = logits - np.max(logits)
    p = np.exp(logits)
    return p / np.sum(p)


def hedge_select(state: HedgeState, candidates, rng: np.random.Generator):
    """Pick one candidate with probability proportional to exp(eta * gain).

    Returns (index, candidate). Gains are updated afterwards by the
    caller via ``update_gains`` once the GP has absorbed the new point.
    """
    if len(candidates) != len(state.gains) or len(candidates) == 0:
        raise ValueError("need one candidate per acquisition")
    p = hedge_probabilities(state)
    idx = int(rng.choice(len(candidates), p=p))
    return idx, candidates[idx]


@dataclass(frozen=True)
class BoConfig:
    bounds: np.ndarray                  # (d, 2)
    budget: int = 40
    seed: int = 0
    kappa: float = 2.0
    xi: float = 0.01
    eta: float = 1.0
    amplitude: float = 1.0
    lengthscale_sq: float = 0.04
    noise: float = 1e-6
    initial_point: np.ndarray | None = None
    n_space_filling: int = 4
    n_raw_candidates: int = 512
    n_refine: int = 8
    refine_evals: int = 60
    refine_shrink: float = 0.5
    failure_penalty_factor: float = 10.0
    fit_hyperparameters: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bounds",
                           np.atleast_2d(np.asarray(self.bounds, float)))
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if np.any(self.bounds[:, 1] < self.bounds[:, 0]):
            raise ValueError("invalid bounds")


@dataclass
class BoRun:
    """State and trace of one optimization run."""

    dataset: Dataset
    config: BoConfig
    x_best: np.ndarray | None = None
    y_best: float = math.inf
    iteration: int = 0
    trace: list = field(default_factory=list)  # dicts, one per iteration

    def record(self, x, y, acquisition: str):
        if y < self.y_best:
            self.y_best = float(y)
            self.x_best = np.asarray(x, float).copy()
        self.iteration += 1
        row = {"iteration": self.iteration, "y": float(y),
               "y_best": self.y_best, "acquisition": acquisition}
        row.update({f"x{j}": float(v) for j, v in enumerate(np.atleast_1d(x))})
        self.trace.append(row)


class BayesOpt:
    """Sequential minimizer over a box with a GP surrogate.

    ``get_params``-style configuration lives in :class:`BoConfig`; the
    loop itself is an ask/tell pair plus a driver (:meth:`run`).
    """

    def __init__(self, config: BoConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.dataset = Dataset(bounds=config.bounds)
        self.hedge = HedgeState(gains=np.zeros(3), eta=config.eta)
        self.acquisitions = [
            AcquisitionKind("lcb", kappa=config.kappa, xi=config.xi),
            AcquisitionKind("expected_improvement", xi=config.xi),
            AcquisitionKind("probability_of_improvement", xi=config.xi),
        ]
        self.run_state = BoRun(dataset=self.dataset, config=config)
        self._pending_candidates = None
        self._chosen_acq = "initial"
        self._init_queue = self._build_init_queue()

    # ------------------------------------------------------------------
    def _build_init_queue(self):
        cfg = self.config
        d = len(cfg.bounds)
        queue = []
        if cfg.initial_point is not None:
            queue.append(np.asarray(cfg.initial_point, float))
        if cfg.n_space_filling > 0:
            sampler = qmc.Sobol(d, scramble=True, seed=cfg.seed)
            pts = sampler.random(cfg.n_space_filling)
            for p in pts:
                queue.append(self.dataset.denormalize(p))
        if not queue:
            queue.append(self.dataset.denormalize(np.full(d, 0.5)))
        return queue

    def _fit_gp(self):
        cfg = self.config
        x, y, mean, scale = self.dataset.standardized()
        gp = GaussianProcess(cfg.amplitude, cfg.lengthscale_sq, cfg.noise)
        if cfg.fit_hyperparameters and len(y) >= 4:
            gp.fit_hyperparameters(x, y, seed=cfg.seed)
        else:
            gp.fit(x, y)
        return gp, float(np.min(y)) if len(y) else 0.0

    def _maximize_acquisition(self, gp, kind: AcquisitionKind, y_best_std):
        """Multi-start: quasi-random scoring + coordinate pattern search."""
        cfg = self.config
        d = self.dataset.dim
        sampler = qmc.Sobol(d, scramble=True,
                            seed=self.rng.integers(2**31 - 1))
        cand = sampler.random(cfg.n_raw_candidates)

        def score(pts):
            mu, sd = gp.predict(np.atleast_2d(pts), return_std=True)
            return acquisition_value(kind, mu, sd, y_best_std)

        vals = score(cand)
        order = np.argsort(vals)[::-1][:cfg.n_refine]
        best_x, best_v = cand[order[0]], vals[order[0]]
        for i in order:
            x, v = self._pattern_search(score, cand[i], vals[i])
            if v > best_v:
                best_x, best_v = x, v
        return np.clip(best_x, 0.0, 1.0), float(best_v)

    def _pattern_search(self, score, x0, v0):
        cfg = self.config
        d = len(x0)
        x, v = x0.copy(), v0
        step = 0.1
        evals = 0
        while evals < cfg.refine_evals and step > 1e-6:
            pts = []
            for j in range(d):
                for s in (step, -step):
                    p = x.copy()
                    p[j] = np.clip(p[j] + s, 0.0, 1.0)
                    pts.append(p)
            vals = score(np.array(pts))
            evals += len(pts)
            k = int(np.argmax(vals))
            if vals[k] > v:
                x, v = pts[k], float(vals[k])
            else:
                step *= cfg.refine_shrink
        return x, v

    # ------------------------------------------------------------------
    def suggest(self) -> np.ndarray:
        """Next raw-space query point (Algorithm: acquisition maximization)."""
        if self._init_queue:
            self._chosen_acq = "initial"
            self._pending_candidates = None
            x = self._init_queue[0]
            return np.clip(x, self.config.bounds[:, 0], self.config.bounds[:, 1])
        gp, y_best_std = self._fit_gp()
        self._gp = gp
        candidates = []
        for kind in self.acquisitions:
            x_unit, _ = self._maximize_acquisition(gp, kind, y_best_std)
            candidates.append(x_unit)
        idx, chosen = hedge_select(self.hedge, candidates, self.rng)
        self._pending_candidates = candidates
        self._chosen_acq = self.acquisitions[idx].tag
        return self.dataset.denormalize(chosen)

    def tell(self, x_raw, y: float):
        """Absorb an evaluation; updates incumbent, dataset and hedge gains."""
        if self._init_queue:
            self._init_queue.pop(0)
        self.dataset.add(x_raw, y)
        self.run_state.record(np.asarray(x_raw, float), y, self._chosen_acq)
        if self._pending_candidates is not None:
            gp, _ = self._fit_gp()
            for i, cand in enumerate(self._pending_candidates):
                mu = gp.predict(np.atleast_2d(cand))[0]
                self.hedge.gains[i] += -float(mu)
            self.hedge.gains -= np.max(self.hedge.gains)
            self._pending_candidates = None

    def run(self, objective) -> BoRun:
        """Drive suggest -> evaluate -> tell for the configured budget.

        A crashing objective is recorded as a penalized observation, not
        re-raised; the penalty is a multiple of the worst finite value.
        """
        for _ in range(self.config.budget):
            x = self.suggest()
            try:
                y = float(objective(x))
                if not math.isfinite(y):
                    raise ValueError("non-finite objective value")
            except Exception:
                finite = [v for v in self.dataset.y_raw if math.isfinite(v)]
                worst = max(finite) if finite else 1.0
                y = self.config.failure_penalty_factor * max(abs(worst), 1.0)
            self.tell(x, y)
        return self.run_state
