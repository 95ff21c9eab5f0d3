"""Seasonal ARIMA with exogenous regressors, estimated by exact Gaussian
maximum likelihood through the Kalman filter.

The (multiplicatively expanded) ARMA part of the differenced series is cast
into the companion state-space form.  The innovation variance is
concentrated out of the likelihood; AR/MA coefficients are kept stationary
and invertible by optimizing through partial-autocorrelation space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

DIFFUSE_VARIANCE = 1e7
MAX_EVALUATIONS = 2000


@dataclass(frozen=True)
class SarimaxSpec:
    order: tuple[int, int, int]
    seasonal_order: tuple[int, int, int, int] = (0, 0, 0, 12)
    exog_names: tuple[str, ...] = ()

    def __post_init__(self):
        p, d, q = self.order
        P, D, Q, s = self.seasonal_order
        if min(p, d, q, P, D, Q) < 0 or s < 1:
            raise ValueError("orders must be non-negative, s positive")
        if d + D > 2:
            raise ValueError("d + D must not exceed 2")

    @property
    def includes_mean(self) -> bool:
        return self.order[1] + self.seasonal_order[1] == 0

    @property
    def n_params(self) -> int:
        """Estimated parameter count, innovation variance included."""
        p, _, q = self.order
        P, _, Q, _ = self.seasonal_order
        return (1 if self.includes_mean else 0) + len(self.exog_names) + p + q + P + Q + 1

    def key(self) -> tuple:
        return (*self.order, *self.seasonal_order[:3])


@dataclass
class SarimaxFit:
    spec: SarimaxSpec
    mean: float
    exog_coef: np.ndarray
    ar: np.ndarray  # non-seasonal phi
    ma: np.ndarray  # non-seasonal theta
    seasonal_ar: np.ndarray
    seasonal_ma: np.ndarray
    sigma2: float
    log_likelihood: float
    aic: float
    bic: float
    hqic: float
    residuals: np.ndarray  # standardized one-step innovations
    converged: bool
    nobs: int
    one_step_rmse: float = float("nan")
    # internals carried for forecasting
    _final_state: np.ndarray = field(default=None, repr=False)
    _final_cov: np.ndarray = field(default=None, repr=False)
    _T: np.ndarray = field(default=None, repr=False)
    _R: np.ndarray = field(default=None, repr=False)
    _diff_tail: tuple = field(default=None, repr=False)

    def parameter_dict(self) -> dict[str, float]:
        out = {}
        if self.spec.includes_mean:
            out["mean"] = self.mean
        for name, b in zip(self.spec.exog_names, self.exog_coef):
            out[f"beta[{name}]"] = float(b)
        for i, v in enumerate(self.ar, 1):
            out[f"ar{i}"] = float(v)
        for i, v in enumerate(self.ma, 1):
            out[f"ma{i}"] = float(v)
        for i, v in enumerate(self.seasonal_ar, 1):
            out[f"sar{i}"] = float(v)
        for i, v in enumerate(self.seasonal_ma, 1):
            out[f"sma{i}"] = float(v)
        out["sigma2"] = self.sigma2
        return out


class FitError(RuntimeError):
    pass


def _pacf_to_coeffs(r: np.ndarray) -> np.ndarray:
    """Levinson recursion mapping partial autocorrelations in (-1, 1) to the
    coefficients of a stationary AR polynomial."""
    a = np.zeros(0)
    for k, rk in enumerate(r, start=1):
        new = np.empty(k)
        new[k - 1] = rk
        if k > 1:
            new[: k - 1] = a - rk * a[::-1]
        a = new
    return a


def _unconstrained_to_coeffs(z: np.ndarray) -> np.ndarray:
    return _pacf_to_coeffs(z / np.sqrt(1.0 + z**2))


def expand_polynomials(ar, seasonal_ar, ma, seasonal_ma, s: int):
    """Multiply the seasonal and non-seasonal lag polynomials.

    Returns (a, m) with the reduced form y_t = sum a_i y_{t-i} + e_t +
    sum m_i e_{t-i}; a and m are coefficient arrays starting at lag 1.
    """
    ar_poly = np.zeros(len(ar) + 1)
    ar_poly[0] = 1.0
    ar_poly[1:] = -np.asarray(ar, dtype=float)
    sar_poly = np.zeros(s * len(seasonal_ar) + 1)
    sar_poly[0] = 1.0
    for i, v in enumerate(seasonal_ar, 1):
        sar_poly[s * i] = -v
    full_ar = np.convolve(ar_poly, sar_poly)

    ma_poly = np.zeros(len(ma) + 1)
    ma_poly[0] = 1.0
    ma_poly[1:] = np.asarray(ma, dtype=float)
    sma_poly = np.zeros(s * len(seasonal_ma) + 1)
    sma_poly[0] = 1.0
    for i, v in enumerate(seasonal_ma, 1):
        sma_poly[s * i] = v
    full_ma = np.convolve(ma_poly, sma_poly)

    return -full_ar[1:], full_ma[1:]


def build_state_space(a: np.ndarray, m: np.ndarray):
    """Companion (Harvey) form: T transition, R innovation loading, Z = e1."""
    r = max(len(a), len(m) + 1, 1)
    T = np.zeros((r, r))
    T[: len(a), 0] = a
    if r > 1:
        T[:-1, 1:] = np.eye(r - 1)
    R = np.zeros(r)
    R[0] = 1.0
    R[1 : 1 + len(m)] = m
    return T, R


def stationary_covariance(T: np.ndarray, R: np.ndarray) -> np.ndarray | None:
    """Solve P = T P T' + R R' by the doubling iteration; None when the
    transition is not stable."""
    A = T.copy()
    P = np.outer(R, R)
    for _ in range(60):
        with np.errstate(over="ignore", invalid="ignore"):
            AP = A @ P
            P_next = P + AP @ A.T
            A = A @ A
        if not np.all(np.isfinite(P_next)):
            return None
        if np.max(np.abs(P_next - P)) < 1e-14 * (1.0 + np.max(np.abs(P_next))):
            # the propagated term must actually have died out
            if np.max(np.abs(A)) > 1e-6:
                return None
            return P_next
        P = P_next
    return None


def initial_covariance(T: np.ndarray, R: np.ndarray) -> np.ndarray:
    P0 = stationary_covariance(T, R)
    if P0 is None:
        P0 = DIFFUSE_VARIANCE * np.eye(T.shape[0])
    return P0


def kalman_filter(z: np.ndarray, T: np.ndarray, R: np.ndarray, P0: np.ndarray | None = None):
    """Filter a zero-mean series in unit-innovation-variance units.

    Returns (innovations v, innovation variances F, predicted state a_{n+1|n},
    predicted covariance P_{n+1|n}).
    """
    r = T.shape[0]
    a = np.zeros(r)
    P = initial_covariance(T, R) if P0 is None else P0.copy()
    RR = np.outer(R, R)
    n = z.shape[0]
    v = np.empty(n)
    F = np.empty(n)
    steady = False
    K = None
    TK = None
    for t in range(n):
        vt = z[t] - a[0]
        v[t] = vt
        F[t] = P[0, 0]
        if steady:
            a = T @ a + TK * vt
            continue
        K = P[:, 0] / P[0, 0]
        a = T @ (a + K * vt)
        P_next = T @ (P - np.outer(K, P[0, :])) @ T.T + RR
        # once the covariance recursion fixes, freeze the gain
        if np.max(np.abs(P_next - P)) < 1e-12 * (1.0 + np.max(np.abs(P_next))):
            steady = True
            TK = T @ K
        P = P_next
    return v, F, a, P


def concentrated_loglik(z: np.ndarray, T: np.ndarray, R: np.ndarray):
    """Profile log-likelihood with the innovation variance concentrated out."""
    v, F, a, P = kalman_filter(z, T, R)
    n = z.shape[0]
    ssq = float(np.sum(v * v / F))
    sigma2 = ssq / n
    if sigma2 <= 0 or not np.isfinite(sigma2):
        return -np.inf, 0.0, v, F, a, P
    ll = -0.5 * n * (math.log(2.0 * math.pi) + 1.0) - 0.5 * n * math.log(sigma2) - 0.5 * float(
        np.sum(np.log(F))
    )
    return ll, sigma2, v, F, a, P


def difference(y: np.ndarray, d: int, D: int, s: int):
    """Apply d regular and D seasonal differences, keeping the tails needed
    to invert the transform."""
    tails = []
    w = np.asarray(y, dtype=float)
    for _ in range(d):
        tails.append(("regular", w.copy()))
        w = np.diff(w)
    for _ in range(D):
        tails.append(("seasonal", w.copy()))
        w = w[s:] - w[:-s]
    return w, tails


def undifference(forecasts: np.ndarray, tails, s: int) -> np.ndarray:
    """Integrate differenced-scale forecasts back to the original scale."""
    out = np.asarray(forecasts, dtype=float)
    for kind, prior in reversed(tails):
        if kind == "regular":
            out = prior[-1] + np.cumsum(out)
        else:
            history = list(prior[-s:])
            integrated = []
            for val in out:
                integrated.append(history[-s] + val)
                history.append(integrated[-1])
            out = np.asarray(integrated)
    return out


def _decode(zvec: np.ndarray, spec: SarimaxSpec):
    p, _, q = spec.order
    P, _, Q, _ = spec.seasonal_order
    k = 0
    mean = 0.0
    if spec.includes_mean:
        mean = float(zvec[k])
        k += 1
    nx = len(spec.exog_names)
    beta = np.asarray(zvec[k : k + nx], dtype=float)
    k += nx
    ar = _unconstrained_to_coeffs(zvec[k : k + p]); k += p
    ma = -_unconstrained_to_coeffs(zvec[k : k + q]); k += q
    sar = _unconstrained_to_coeffs(zvec[k : k + P]); k += P
    sma = -_unconstrained_to_coeffs(zvec[k : k + Q]); k += Q
    return mean, beta, ar, ma, sar, sma


def sarimax_fit(
    y: np.ndarray,
    spec: SarimaxSpec,
    exog: np.ndarray | None = None,
    max_evaluations: int = MAX_EVALUATIONS,
) -> SarimaxFit:
    """Estimate a SARIMAX model on a plain series (exog as an n x k array
    aligned with y, column order following spec.exog_names)."""
    y = np.asarray(y, dtype=float)
    p, d, q = spec.order
    P, D, Q, s = spec.seasonal_order
    nx = len(spec.exog_names)
    if nx:
        if exog is None:
            raise ValueError("spec names exogenous series but none were supplied")
        exog = np.asarray(exog, dtype=float).reshape(len(y), nx)

    w, tails = difference(y, d, D, s)
    wx = None
    if nx:
        wx = exog
        for _ in range(d):
            wx = np.diff(wx, axis=0)
        for _ in range(D):
            wx = wx[s:] - wx[:-s]
    n = w.shape[0]
    state_dim = max(p + s * P, q + s * Q + 1, 1)
    if n <= spec.n_params + 1 or n <= state_dim:
        raise FitError(f"series too short ({n} points) for spec {spec.key()}")

    def build(zvec):
        mean, beta, ar, ma, sar, sma = _decode(zvec, spec)
        z = w - mean
        if nx:
            z = z - wx @ beta
        a, m = expand_polynomials(ar, ma, sar, sma, s)
        T, R = build_state_space(a, m)
        return mean, beta, ar, ma, sar, sma, z, T, R

    def negloglik(zvec):
        *_, z, T, R = build(zvec)
        ll, *_rest = concentrated_loglik(z, T, R)
        return -ll if np.isfinite(ll) else 1e12

    n_free = spec.n_params - 1
    x0 = np.zeros(n_free)
    if spec.includes_mean:
        x0[0] = float(w.mean())
    if n_free:
        result = minimize(
            negloglik,
            x0,
            method="Nelder-Mead",
            options={"maxfev": max_evaluations, "xatol": 1e-6, "fatol": 1e-8},
        )
        zvec = result.x
        converged = bool(result.success)
    else:
        zvec = x0
        converged = True

    mean, beta, ar, ma, sar, sma, z, T, R = build(zvec)
    ll, sigma2, v, F, a_next, P_next = concentrated_loglik(z, T, R)
    if not np.isfinite(ll):
        raise FitError("likelihood is not finite at the optimum")

    k = spec.n_params
    aic = 2.0 * k - 2.0 * ll
    bic = k * math.log(n) - 2.0 * ll
    hqic = 2.0 * k * math.log(math.log(n)) - 2.0 * ll
    residuals = v / np.sqrt(F * sigma2)
    return SarimaxFit(
        spec=spec,
        mean=mean,
        exog_coef=beta,
        ar=ar,
        ma=ma,
        seasonal_ar=sar,
        seasonal_ma=sma,
        sigma2=sigma2,
        log_likelihood=ll,
        aic=aic,
        bic=bic,
        hqic=hqic,
        residuals=residuals,
        converged=converged,
        nobs=n,
        one_step_rmse=float(np.sqrt(np.mean(v**2))),
        _final_state=a_next,
        _final_cov=P_next,
        _T=T,
        _R=R,
        _diff_tail=tuple(tails),
    )


def psi_weights(a: np.ndarray, m: np.ndarray, horizon: int) -> np.ndarray:
    """MA-representation weights psi_0..psi_{horizon-1} of the ARMA(a, m)."""
    psi = np.zeros(horizon)
    if horizon == 0:
        return psi
    psi[0] = 1.0
    for j in range(1, horizon):
        acc = m[j - 1] if j - 1 < len(m) else 0.0
        for i in range(1, min(j, len(a)) + 1):
            acc += a[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def sarimax_forecast(
    fit: SarimaxFit,
    horizon: int,
    future_exog: np.ndarray | None = None,
    z_crit: float = 1.96,
):
    """Point forecasts with symmetric normal intervals on the original scale.

    For undifferenced specs the variance comes straight from the Kalman
    prediction recursion (state uncertainty included); for integrated specs
    it accumulates the psi weights of the full integrated lag polynomial.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    spec = fit.spec
    nx = len(spec.exog_names)
    if nx:
        if future_exog is None:
            raise ValueError("fit used exogenous inputs; future values required")
        future_exog = np.asarray(future_exog, dtype=float).reshape(horizon, nx)
    elif future_exog is not None:
        raise ValueError("fit has no exogenous inputs")
    if horizon == 0:
        return np.zeros(0), np.zeros((0, 2))

    a = fit._final_state.copy()
    P = fit._final_cov.copy()
    T, R = fit._T, fit._R
    RR = np.outer(R, R)
    point_w = np.empty(horizon)
    var_w = np.empty(horizon)
    for h in range(horizon):
        point_w[h] = a[0]
        var_w[h] = P[0, 0] * fit.sigma2
        a = T @ a
        P = T @ P @ T.T + RR

    point_w = point_w + fit.mean
    if nx:
        # exogenous effect enters on the differenced scale used in fitting
        wx_future = future_exog
        point_w = point_w + wx_future @ fit.exog_coef

    p, d, q = spec.order
    P_, D, Q, s = spec.seasonal_order
    if d + D == 0:
        point = point_w
        var = var_w
    else:
        point = undifference(point_w, fit._diff_tail, s)
        ar_red, ma_red = expand_polynomials(
            fit.ar, fit.ma, fit.seasonal_ar, fit.seasonal_ma, s
        )
        # fold the differencing operators into the AR polynomial
        poly = np.zeros(len(ar_red) + 1)
        poly[0] = 1.0
        poly[1:] = -ar_red
        for _ in range(d):
            poly = np.convolve(poly, [1.0, -1.0])
        seas = np.zeros(s + 1)
        seas[0] = 1.0
        seas[s] = -1.0
        for _ in range(D):
            poly = np.convolve(poly, seas)
        full_a = -poly[1:]
        psi = psi_weights(full_a, ma_red, horizon)
        var = fit.sigma2 * np.cumsum(psi**2)

    half = z_crit * np.sqrt(np.maximum(var, 0.0))
    intervals = np.column_stack([point - half, point + half])
    return point, intervals
