"""OLS, ridge, lasso, and logistic regression fits with prediction helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data_pipeline import ClassLabel, DesignMatrix, bin_metascore
from .numerics import cholesky_solve, least_squares

LASSO_TOL = 1e-7
LASSO_MAX_SWEEPS = 10_000
LOGISTIC_TOL = 1e-9
LOGISTIC_MAX_ITER = 100
SEPARATION_NORM = 1e4


@dataclass
class LinearFit:
    intercept: float
    feature_names: list[str]
    coefficients: np.ndarray
    lam: float = 0.0
    penalty: str = "none"  # none | L2 | L1
    n_train: int = 0
    converged: bool = True

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if len(self.feature_names) != self.coefficients.shape[0]:
            raise ValueError("coefficient names must match coefficient count")
        if (self.lam == 0.0) != (self.penalty == "none"):
            raise ValueError("lambda = 0 iff penalty = none")

    @property
    def named(self) -> dict[str, float]:
        return dict(zip(self.feature_names, self.coefficients.tolist()))


@dataclass
class LogisticFit:
    intercept: float
    feature_names: list[str]
    coefficients: np.ndarray
    standard_errors: np.ndarray  # intercept first, then features
    converged: bool
    iterations: int
    log_likelihood: float = float("nan")

    @property
    def named(self) -> dict[str, float]:
        return dict(zip(self.feature_names, self.coefficients.tolist()))


@dataclass
class BinnedEvaluation:
    accuracy: float
    confusion: np.ndarray  # 3x3, rows = truth, cols = predicted


def _check_columns(fit, X: DesignMatrix | np.ndarray) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        if X.column_names != list(fit.feature_names):
            raise ValueError(
                f"column mismatch: fit has {fit.feature_names}, matrix has {X.column_names}"
            )
        return X.values
    X = np.asarray(X, dtype=float)
    if X.shape[1] != len(fit.feature_names):
        raise ValueError("column mismatch")
    return X


def fit_ols(X: DesignMatrix) -> LinearFit:
    """Least-squares fit with intercept; simple regression is just p = 1."""
    n, p = X.n, X.p
    if n <= p + 1:
        raise ValueError(f"need n > p+1, got n={n}, p={p}")
    Z = np.column_stack([np.ones(n), X.values])
    beta = least_squares(Z, X.target)
    return LinearFit(float(beta[0]), X.column_names, beta[1:], n_train=n)


def fit_ridge(X: DesignMatrix, lam: float) -> LinearFit:
    """L2-penalized fit; features centered so the intercept stays unpenalized."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x_mean = X.values.mean(axis=0)
    y_mean = X.target.mean()
    Xc = X.values - x_mean
    yc = X.target - y_mean
    A = Xc.T @ Xc + lam * np.eye(X.p)
    beta = cholesky_solve(A, Xc.T @ yc)
    intercept = y_mean - float(x_mean @ beta)
    return LinearFit(intercept, X.column_names, beta, lam=lam, penalty="L2", n_train=X.n)


def _lasso_objective(Xs, yc, beta, lam, n):
    resid = yc - Xs @ beta
    return 0.5 / n * float(resid @ resid) + lam * float(np.abs(beta).sum())


def fit_lasso(X: DesignMatrix, lam: float) -> LinearFit:
    """Cyclic coordinate descent on (1/2n)||y - b0 - Xb||^2 + lam*||b||_1.

    Features are standardized internally; coefficients are reported on the
    original scale.  Constant columns get a zero coefficient.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    n, p = X.n, X.p
    x_mean = X.values.mean(axis=0)
    x_std = X.values.std(axis=0)
    active = x_std > 0
    scale = np.where(active, x_std, 1.0)
    Xs = (X.values - x_mean) / scale
    y_mean = X.target.mean()
    yc = X.target - y_mean

    beta = np.zeros(p)
    resid = yc.copy()
    converged = False
    prev_obj = _lasso_objective(Xs, yc, beta, lam, n)
    for _ in range(LASSO_MAX_SWEEPS):
        max_delta = 0.0
        for j in range(p):
            if not active[j]:
                continue
            xj = Xs[:, j]
            rho = (resid @ xj) / n + beta[j]  # columns have unit variance
            new = np.sign(rho) * max(abs(rho) - lam, 0.0)
            if new != beta[j]:
                resid -= (new - beta[j]) * xj
                max_delta = max(max_delta, abs(new - beta[j]))
                beta[j] = new
        obj = _lasso_objective(Xs, yc, beta, lam, n)
        assert obj <= prev_obj + 1e-12 * (1.0 + abs(prev_obj)), "lasso objective increased"
        prev_obj = obj
        if max_delta < LASSO_TOL:
            converged = True
            break

    beta_orig = beta / scale
    beta_orig[~active] = 0.0
    intercept = y_mean - float(x_mean @ beta_orig)
    return LinearFit(
        intercept, X.column_names, beta_orig, lam=lam, penalty="L1", n_train=n,
        converged=converged,
    )


def _log_likelihood(eta: np.ndarray, y: np.ndarray) -> float:
    # log p = y*eta - log(1 + exp(eta)), computed stably
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def fit_logistic(X: DesignMatrix) -> LogisticFit:
    """Maximum-likelihood logistic fit by IRLS with step halving.

    The target must be 0/1 with both classes present.  Standard errors come
    from the inverse observed information at the final iterate.  Complete
    separation (coefficient norm blowing up) is flagged via converged=False.
    """
    y = X.target
    if not set(np.unique(y)) == {0.0, 1.0}:
        raise ValueError("target must contain both 0 and 1")
    n = X.n
    Z = np.column_stack([np.ones(n), X.values])
    beta = np.zeros(Z.shape[1])
    ll = _log_likelihood(Z @ beta, y)
    converged = False
    iterations = 0
    for iterations in range(1, LOGISTIC_MAX_ITER + 1):
        eta = Z @ beta
        p = 1.0 / (1.0 + np.exp(-eta))
        w = np.clip(p * (1.0 - p), 1e-10, None)
        info = Z.T @ (Z * w[:, None])
        step = cholesky_solve(info, Z.T @ (y - p))
        # halve until the likelihood improves
        factor = 1.0
        for _ in range(30):
            cand = beta + factor * step
            cand_ll = _log_likelihood(Z @ cand, y)
            if cand_ll >= ll:
                break
            factor *= 0.5
        beta = beta + factor * step
        new_ll = _log_likelihood(Z @ beta, y)
        if np.linalg.norm(beta) > SEPARATION_NORM:
            break
        if abs(new_ll - ll) < LOGISTIC_TOL:
            ll = new_ll
            converged = True
            break
        ll = new_ll

    eta = Z @ beta
    p = 1.0 / (1.0 + np.exp(-eta))
    w = np.clip(p * (1.0 - p), 1e-10, None)
    info = Z.T @ (Z * w[:, None])
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    return LogisticFit(
        intercept=float(beta[0]),
        feature_names=X.column_names,
        coefficients=beta[1:],
        standard_errors=se,
        converged=converged,
        iterations=iterations,
        log_likelihood=_log_likelihood(eta, y),
    )


def predict(fit: LinearFit, X) -> np.ndarray:
    values = _check_columns(fit, X)
    return fit.intercept + values @ fit.coefficients


def predict_proba(fit: LogisticFit, X) -> np.ndarray:
    values = _check_columns(fit, X)
    eta = fit.intercept + values @ fit.coefficients
    return 1.0 / (1.0 + np.exp(-eta))


def evaluate_binned(fit: LinearFit, X: DesignMatrix, binner=bin_metascore) -> BinnedEvaluation:
    """Accuracy of a continuous metascore fit judged through ternary bins."""
    if X.n == 0:
        raise ValueError("empty evaluation set")
    raw = predict(fit, X)
    predicted = [binner(int(round(v))) for v in np.clip(raw, 0.0, 100.0)]
    truths = [binner(int(round(t))) for t in np.clip(X.target, 0.0, 100.0)]
    confusion = np.zeros((3, 3), dtype=int)
    for t, p in zip(truths, predicted):
        confusion[int(t), int(p)] += 1
    accuracy = float(np.trace(confusion)) / X.n
    return BinnedEvaluation(accuracy, confusion)
