"""Exact Gaussian process regression on unit-cube inputs.

Squared-exponential kernel with per-dimension lengthscales, constant
mean (the training mean after standardization), and a learned noise
term.  Hyperparameters are fit by maximizing the log marginal
likelihood with L-BFGS-B from a default start plus random restarts.
Cholesky factorizations escalate jitter from 1e-10 to 1e-4 before
giving up with :class:`SurrogateFitError`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.special import erf

from .errors import SurrogateFitError

_JITTER_START = 1e-10
_JITTER_CAP = 1e-4


def _chol_with_jitter(K: np.ndarray):
    scale = max(float(np.mean(np.diag(K))), 1e-12)
    jitter = _JITTER_START
    while jitter <= _JITTER_CAP:
        try:
            return cho_factor(K + jitter * scale * np.eye(len(K)), lower=True), jitter * scale
        except np.linalg.LinAlgError:
            jitter *= 100.0
    raise SurrogateFitError("kernel matrix is singular even at maximum jitter")


def normal_cdf(z):
    return 0.5 * (1.0 + erf(np.asarray(z) / math.sqrt(2.0)))


def normal_pdf(z):
    z = np.asarray(z)
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_improvement(mu, sigma, best):
    """EI for minimization below ``best``; zero where sigma vanishes."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.maximum(np.asarray(sigma, dtype=float), 1e-12)
    gap = best - mu
    z = gap / sigma
    ei = gap * normal_cdf(z) + sigma * normal_pdf(z)
    return np.maximum(ei, 0.0)


def _scaled_sqdist(A: np.ndarray, B: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Pairwise sum_d ((a_d - b_d) / ls_d)^2 via one matmul."""
    As = A / lengthscales
    Bs = B / lengthscales
    sq = (
        np.sum(As * As, axis=1)[:, None]
        + np.sum(Bs * Bs, axis=1)[None, :]
        - 2.0 * As @ Bs.T
    )
    return np.maximum(sq, 0.0)


class GaussianProcess:
    """GP regressor; ``fit`` learns kernel hyperparameters from data."""

    def __init__(self):
        self.X = None
        self._y_mean = 0.0
        self._y_std = 1.0
        self._theta = None  # log lengthscales (d), log signal sd, log noise sd
        self._chol = None
        self._alpha = None
        self._resid = None

    # -- fitting ----------------------------------------------------------

    def _nll_and_grad(self, theta, D2, resid):
        """Negative log marginal likelihood and gradient in log-params.

        ``D2`` holds the per-dimension squared differences (d, n, n),
        precomputed once per fit.
        """
        d = D2.shape[0]
        n = D2.shape[1]
        inv_ls2 = np.exp(-2.0 * theta[:d])
        sf2 = math.exp(2.0 * theta[d])
        sn2 = math.exp(2.0 * theta[d + 1])
        sq = np.einsum("j,jnm->nm", inv_ls2, D2)
        K = sf2 * np.exp(-0.5 * sq)
        Ky = K + sn2 * np.eye(n)
        try:
            cf, _ = _chol_with_jitter(Ky)
        except SurrogateFitError:
            return 1e25, np.zeros_like(theta)
        alpha = cho_solve(cf, resid)
        nll = (
            0.5 * resid @ alpha
            + np.sum(np.log(np.diag(cf[0])))
            + 0.5 * n * math.log(2.0 * math.pi)
        )
        Kinv = cho_solve(cf, np.eye(n))
        W = np.outer(alpha, alpha) - Kinv  # dNLL/dtheta_j = -0.5 tr(W dK/dtheta_j)
        WK = W * K
        grad = np.empty_like(theta)
        grad[:d] = -0.5 * np.einsum("nm,jnm->j", WK, D2) * inv_ls2
        grad[d] = -np.sum(WK)
        grad[d + 1] = -sn2 * np.trace(W)
        return float(nll), grad

    def fit(self, X, y, rng: np.random.Generator, n_restarts: int = 3, max_iter: int = 50):
        """Fit hyperparameters by marginal-likelihood ascent with restarts."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        self._y_mean = float(np.mean(y))
        self._y_std = float(np.std(y))
        if self._y_std < 1e-12:
            self._y_std = 1.0
        resid = (y - self._y_mean) / self._y_std
        D2 = (X.T[:, :, None] - X.T[:, None, :]) ** 2  # (d, n, n)

        bounds = [(math.log(5e-3), math.log(10.0))] * d
        bounds += [(math.log(0.05), math.log(20.0)), (math.log(1e-4), math.log(1.0))]
        starts = [np.concatenate([np.full(d, math.log(0.3)), [0.0, math.log(1e-2)]])]
        for _ in range(max(0, n_restarts - 1)):
            starts.append(
                np.concatenate(
                    [
                        rng.uniform(math.log(0.05), math.log(2.0), size=d),
                        [rng.uniform(math.log(0.2), math.log(5.0))],
                        [rng.uniform(math.log(1e-3), math.log(0.5))],
                    ]
                )
            )
        best_theta, best_nll = starts[0], math.inf
        for theta0 in starts:
            res = minimize(
                self._nll_and_grad,
                theta0,
                args=(D2, resid),
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": max_iter, "ftol": 1e-9, "gtol": 1e-4},
            )
            if res.fun < best_nll:
                best_nll, best_theta = float(res.fun), res.x
        if not math.isfinite(best_nll) or best_nll >= 1e25:
            raise SurrogateFitError("marginal likelihood could not be evaluated")
        self._theta = best_theta
        self._refresh(X, resid)
        return self

    def _kernel(self, A, B):
        d = A.shape[1]
        ls = np.exp(self._theta[:d])
        sf2 = math.exp(2.0 * self._theta[d])
        return sf2 * np.exp(-0.5 * _scaled_sqdist(A, B, ls))

    def _refresh(self, X, resid):
        d = X.shape[1]
        K = self._kernel(X, X)
        sn2 = math.exp(2.0 * self._theta[d + 1])
        cf, _ = _chol_with_jitter(K + sn2 * np.eye(len(X)))
        self.X = X
        self._resid = resid
        self._chol = cf
        self._alpha = cho_solve(cf, resid)

    def with_fantasies(self, X_new, y_new) -> "GaussianProcess":
        """Posterior including extra points, keeping hyperparameters fixed."""
        other = GaussianProcess()
        other._y_mean, other._y_std, other._theta = self._y_mean, self._y_std, self._theta
        X = np.vstack([self.X, np.atleast_2d(X_new)])
        resid_new = (np.asarray(y_new, dtype=float) - self._y_mean) / self._y_std
        other._refresh(X, np.concatenate([self._resid, np.atleast_1d(resid_new)]))
        return other

    # -- inference --------------------------------------------------------

    @property
    def lengthscales(self) -> np.ndarray:
        d = self.X.shape[1]
        return np.exp(self._theta[:d])

    def predict(self, Xs):
        """Posterior mean and standard deviation at the query points."""
        Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
        Ks = self._kernel(Xs, self.X)
        mu = Ks @ self._alpha
        v = solve_triangular(self._chol[0], Ks.T, lower=True)
        d = self.X.shape[1]
        sf2 = math.exp(2.0 * self._theta[d])
        var = np.maximum(sf2 - np.sum(v * v, axis=0), 1e-16)
        return mu * self._y_std + self._y_mean, np.sqrt(var) * self._y_std

    def sample_joint(self, Xs, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        """Draw joint posterior function samples, shape (n_samples, m)."""
        Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
        Ks = self._kernel(Xs, self.X)
        Kss = self._kernel(Xs, Xs)
        mu = Ks @ self._alpha
        v = solve_triangular(self._chol[0], Ks.T, lower=True)
        cov = Kss - v.T @ v
        cf, _ = _chol_with_jitter(cov)
        L = np.tril(cf[0])
        z = rng.standard_normal((n_samples, len(Xs)))
        draws = mu[None, :] + z @ L.T
        return draws * self._y_std + self._y_mean


class ConstantLiarPosterior:
    """Posterior over a fixed candidate pool with cheap fantasy updates.

    Batch selection needs the pool posterior after each imputed pending
    point; growing the Cholesky factor by one row makes every update
    O(n * pool) instead of refitting from scratch.
    """

    def __init__(self, gp: GaussianProcess, pool: np.ndarray):
        self.gp = gp
        self.pool = np.atleast_2d(np.asarray(pool, dtype=float))
        n, q = len(gp.X), len(self.pool)
        d = gp.X.shape[1]
        self._sf2 = math.exp(2.0 * gp._theta[d])
        self._sn2 = math.exp(2.0 * gp._theta[d + 1])
        cap = n + 64
        self._L = np.zeros((cap, cap))
        self._L[:n, :n] = np.tril(gp._chol[0])
        self._X = np.zeros((cap, d))
        self._X[:n] = gp.X
        self._n = n
        self._c = np.zeros(cap)
        self._c[:n] = solve_triangular(self._L[:n, :n], gp._resid, lower=True)
        self._V = np.zeros((cap, q))
        self._V[:n] = solve_triangular(
            self._L[:n, :n], gp._kernel(gp.X, self.pool), lower=True
        )
        self._mu = self._V[:n].T @ self._c[:n]
        self._var = np.maximum(self._sf2 - np.sum(self._V[:n] ** 2, axis=0), 1e-16)

    def mean_sd(self):
        mu = self._mu * self.gp._y_std + self.gp._y_mean
        return mu, np.sqrt(self._var) * self.gp._y_std

    def add_fantasy(self, x: np.ndarray, y: float) -> None:
        n = self._n
        if n >= len(self._L):
            raise SurrogateFitError("fantasy capacity exhausted")
        x = np.asarray(x, dtype=float).reshape(1, -1)
        resid_x = (float(y) - self.gp._y_mean) / self.gp._y_std
        k_train = self.gp._kernel(x, self._X[:n])[0]
        l21 = solve_triangular(self._L[:n, :n], k_train, lower=True)
        l22_sq = self._sf2 + self._sn2 - float(l21 @ l21)
        l22 = math.sqrt(max(l22_sq, 1e-10 * (self._sf2 + self._sn2)))
        k_pool = self.gp._kernel(x, self.pool)[0]
        v_new = (k_pool - l21 @ self._V[:n]) / l22
        c_new = (resid_x - float(l21 @ self._c[:n])) / l22
        self._L[n, :n] = l21
        self._L[n, n] = l22
        self._X[n] = x[0]
        self._c[n] = c_new
        self._V[n] = v_new
        self._mu = self._mu + c_new * v_new
        self._var = np.maximum(self._var - v_new**2, 1e-16)
        self._n = n + 1
