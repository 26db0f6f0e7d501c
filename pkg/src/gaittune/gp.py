"""Gaussian-process regression with a squared-exponential kernel.

Follows the scikit-learn estimator convention (``fit`` / ``predict`` /
``get_params``) so the regressor composes with the wider ecosystem. The
posterior is computed from a Cholesky factorization with an escalating
jitter ladder; a dense explicit-inverse path exists only in the tests as
an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_X_y

__all__ = ["SquaredExponentialKernel", "GaussianProcess", "Dataset",
           "GpFitError"]


class GpFitError(RuntimeError):
    """Factorization failed even at the maximum jitter."""


@dataclass(frozen=True)
class SquaredExponentialKernel:
    """k(x, x') = amplitude * exp(-||x - x'||^2 / (2 * lengthscale_sq))."""

    amplitude: float = 1.0
    lengthscale_sq: float = 0.04

    def __post_init__(self):
        if self.amplitude <= 0 or self.lengthscale_sq <= 0:
            raise ValueError("amplitude and lengthscale_sq must be > 0")

    def __call__(self, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
        xa = np.atleast_2d(np.asarray(xa, float))
        xb = np.atleast_2d(np.asarray(xb, float))
        d2 = np.sum((xa[:, None, :] - xb[None, :, :])**2, axis=-1)
        return self.amplitude * np.exp(-d2 / (2.0 * self.lengthscale_sq))

    def diag(self, xa: np.ndarray) -> np.ndarray:
        xa = np.atleast_2d(xa)
        return np.full(len(xa), self.amplitude)


def kernel_eval(x, x_other, kernel: SquaredExponentialKernel) -> float:
    """Scalar kernel value between two points."""
    return float(kernel(np.atleast_2d(x), np.atleast_2d(x_other))[0, 0])


class GaussianProcess(BaseEstimator, RegressorMixin):
    """GP regressor: posterior mean/variance from a dense Cholesky solve.

    Parameters
    ----------
    amplitude, lengthscale_sq : kernel hyperparameters (shared over dims).
    noise : observation noise variance added to the kernel diagonal.
    jitter0 : initial diagonal jitter, as a fraction of the amplitude;
        escalates by 10x per failed factorization up to ``jitter_max``.
    """

    def __init__(self, amplitude: float = 1.0, lengthscale_sq: float = 0.04,
                 noise: float = 0.0, jitter0: float = 1e-10,
                 jitter_max: float = 1e-4):
        self.amplitude = amplitude
        self.lengthscale_sq = lengthscale_sq
        self.noise = noise
        self.jitter0 = jitter0
        self.jitter_max = jitter_max

    @property
    def kernel_(self) -> SquaredExponentialKernel:
        return SquaredExponentialKernel(self.amplitude, self.lengthscale_sq)

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=1)
        self.X_train_ = np.asarray(X, float)
        self.y_train_ = np.asarray(y, float)
        k_mat = self.kernel_(self.X_train_, self.X_train_)
        k_mat[np.diag_indices_from(k_mat)] += self.noise
        self.jitter_, self.cho_ = self._factorize(k_mat)
        self.alpha_ = cho_solve(self.cho_, self.y_train_)
        return self

    def _factorize(self, k_mat):
        jitter = self.jitter0 * self.amplitude
        cap = self.jitter_max * self.amplitude
        last_err = None
        while jitter <= cap:
            try:
                mat = k_mat.copy()
                mat[np.diag_indices_from(mat)] += jitter
                return jitter, cho_factor(mat, lower=True)
            except np.linalg.LinAlgError as err:
                last_err = err
                jitter *= 10.0
        raise GpFitError(f"Cholesky failed up to jitter {cap}: {last_err}")

    def predict(self, X, return_std: bool = False, return_var: bool = False):
        X = check_array(np.atleast_2d(X))
        kern = self.kernel_
        if not hasattr(self, "X_train_") or len(self.X_train_) == 0:
            mean = np.zeros(len(X))
            var = kern.diag(X)
        else:
            k_star = kern(self.X_train_, X)  # (n, m)
            mean = k_star.T @ self.alpha_
            v = cho_solve(self.cho_, k_star)
            var = kern.diag(X) - np.sum(k_star * v, axis=0)
            var = np.maximum(var, 0.0)
        if return_std:
            return mean, np.sqrt(var)
        if return_var:
            return mean, var
        return mean

    def log_marginal_likelihood(self, return_grad: bool = False):
        """Evidence of the fitted data; gradient w.r.t. log(a, b, noise)."""
        if not hasattr(self, "X_train_"):
            raise GpFitError("fit before calling log_marginal_likelihood")
        y = self.y_train_
        n = len(y)
        chol = self.cho_[0]
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        lml = -0.5 * float(y @ self.alpha_) - 0.5 * logdet \
            - 0.5 * n * np.log(2.0 * np.pi)
        if not return_grad:
            return lml
        k_inv = cho_solve(self.cho_, np.eye(n))
        outer = np.outer(self.alpha_, self.alpha_) - k_inv
        x = self.X_train_
        d2 = np.sum((x[:, None, :] - x[None, :, :])**2, axis=-1)
        k_noiseless = self.amplitude * np.exp(-d2 / (2.0 * self.lengthscale_sq))
        # derivatives w.r.t. log amplitude, log lengthscale_sq, log noise
        dk_da = k_noiseless + self.jitter_ * np.eye(n)  # jitter scales with a
        dk_db = k_noiseless * d2 / (2.0 * self.lengthscale_sq)
        dk_dn = self.noise * np.eye(n)
        grad = np.array([0.5 * np.sum(outer * dk) for dk in
                         (dk_da, dk_db, dk_dn)])
        return lml, grad

    def fit_hyperparameters(self, X, y, n_restarts: int = 4, seed: int = 0):
        """Optional evidence maximization by multi-start local ascent."""
        from scipy.optimize import minimize

        X = np.asarray(X, float)
        y = np.asarray(y, float)
        rng = np.random.default_rng(seed)

        def neg_lml(log_theta):
            a, b, s = np.exp(log_theta)
            try:
                gp = GaussianProcess(a, b, s, self.jitter0, self.jitter_max)
                gp.fit(X, y)
                lml, grad = gp.log_marginal_likelihood(return_grad=True)
            except (GpFitError, np.linalg.LinAlgError):
                return 1e10, np.zeros(3)
            return -lml, -grad

        theta0 = np.log([max(self.amplitude, 1e-6),
                         max(self.lengthscale_sq, 1e-6),
                         max(self.noise, 1e-8)])
        starts = [theta0] + [theta0 + rng.normal(0, 1.0, 3)
                             for _ in range(n_restarts)]
        best = None
        for s in starts:
            res = minimize(neg_lml, s, jac=True, method="L-BFGS-B",
                           bounds=[(-8, 8), (-10, 4), (-18, 2)])
            if best is None or res.fun < best.fun:
                best = res
        a, b, s = np.exp(best.x)
        self.amplitude, self.lengthscale_sq, self.noise = float(a), float(b), float(s)
        return self.fit(X, y)


@dataclass
class Dataset:
    """Evaluated (parameters, objective) pairs with raw-space transforms.

    Inputs are normalized to the unit box from ``bounds``; observations
    are standardized to zero mean / unit variance on each refresh so a
    fixed-lengthscale kernel behaves across scenarios.
    """

    bounds: np.ndarray                      # (d, 2) raw lower/upper
    X_raw: list = field(default_factory=list)
    y_raw: list = field(default_factory=list)

    def __post_init__(self):
        self.bounds = np.atleast_2d(np.asarray(self.bounds, float))
        if np.any(self.bounds[:, 1] < self.bounds[:, 0]):
            raise ValueError("bounds upper must be >= lower")

    def __len__(self) -> int:
        return len(self.y_raw)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def add(self, x_raw, y: float):
        x_raw = np.asarray(x_raw, float)
        if x_raw.shape != (self.dim,):
            raise ValueError(f"point has dim {x_raw.shape}, expected {self.dim}")
        self.X_raw.append(x_raw)
        self.y_raw.append(float(y))

    def normalize(self, x_raw) -> np.ndarray:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        span = np.where(hi > lo, hi - lo, 1.0)
        return (np.asarray(x_raw, float) - lo) / span

    def denormalize(self, x_unit) -> np.ndarray:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return lo + np.asarray(x_unit, float) * (hi - lo)

    def standardized(self):
        """(X_unit, y_std, mean, scale); scale falls back to 1 for tiny spread."""
        x = np.array([self.normalize(p) for p in self.X_raw])
        y = np.array(self.y_raw)
        mean = float(np.mean(y)) if len(y) else 0.0
        scale = float(np.std(y)) if len(y) else 1.0
        if scale < 1e-12:
            scale = 1.0
        return x, (y - mean) / scale, mean, scale

    def to_rows(self) -> list[dict]:
        rows = []
        for i, (x, y) in enumerate(zip(self.X_raw, self.y_raw)):
            row = {"index": i, "y": y}
            row.update({f"x{j}": float(v) for j, v in enumerate(x)})
            rows.append(row)
        return rows

    @staticmethod
    def from_rows(rows, bounds) -> "Dataset":
        ds = Dataset(bounds=np.asarray(bounds, float))
        for row in rows:
            d = ds.dim
            ds.add([float(row[f"x{j}"]) for j in range(d)], float(row["y"]))
        return ds
