"""Monthly metascore series, stationarity/autocorrelation diagnostics,
classical decomposition, and AIC-driven SARIMAX order selection."""

from __future__ import annotations

import datetime
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .inference import StatTestResult
from .special import chi2_sf
from .statespace import FitError, SarimaxFit, SarimaxSpec, sarimax_fit, sarimax_forecast

ADF_CRITICAL = ((0.01, -3.43), (0.05, -2.86), (0.10, -2.57))


@dataclass
class TimeSeries:
    months: list[datetime.date]  # first-of-month, strictly increasing, no gaps
    values: np.ndarray
    exog: dict[str, np.ndarray] = field(default_factory=dict)
    interpolated: np.ndarray = None  # bool mask of gap-filled months

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.months) != self.values.shape[0]:
            raise ValueError("timestamps and values must align")
        for i in range(1, len(self.months)):
            if _month_index(self.months[i]) != _month_index(self.months[i - 1]) + 1:
                raise ValueError("months must be consecutive")
        if self.interpolated is None:
            self.interpolated = np.zeros(len(self.months), dtype=bool)
        for name, series in self.exog.items():
            self.exog[name] = np.asarray(series, dtype=float)
            if self.exog[name].shape[0] != self.values.shape[0]:
                raise ValueError(f"exogenous series {name!r} misaligned")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def exog_matrix(self, names) -> np.ndarray:
        return np.column_stack([self.exog[name] for name in names]) if names else None


def _month_index(day: datetime.date) -> int:
    return day.year * 12 + day.month - 1


def _month_from_index(idx: int) -> datetime.date:
    return datetime.date(idx // 12, idx % 12 + 1, 1)


def future_months(series: TimeSeries, horizon: int) -> list[datetime.date]:
    last = _month_index(series.months[-1])
    return [_month_from_index(last + h) for h in range(1, horizon + 1)]


def _interpolate_gaps(idx_to_val: dict[int, float], full_range: list[int]) -> tuple[np.ndarray, np.ndarray]:
    known = sorted(idx_to_val)
    values = np.empty(len(full_range))
    flags = np.zeros(len(full_range), dtype=bool)
    for pos, i in enumerate(full_range):
        if i in idx_to_val:
            values[pos] = idx_to_val[i]
        else:
            flags[pos] = True
            values[pos] = np.interp(i, known, [idx_to_val[k] for k in known])
    return values, flags


def aggregate_monthly(records, exog_fields: tuple[str, ...] = ()) -> TimeSeries:
    """Mean metascore per publication month; empty months are linearly
    interpolated and flagged.  ``exog_fields`` may name numeric record fields
    to aggregate as monthly means, plus the pseudo-field ``movie_count``."""
    buckets: dict[int, list] = {}
    for rec in records:
        if rec.metascore is None or rec.date_published is None:
            continue
        buckets.setdefault(_month_index(rec.date_published), []).append(rec)
    if not buckets:
        raise ValueError("no records with both date_published and metascore")

    full_range = list(range(min(buckets), max(buckets) + 1))
    score_by_month = {
        i: float(np.mean([r.metascore for r in recs])) for i, recs in buckets.items()
    }
    values, flags = _interpolate_gaps(score_by_month, full_range)

    exog = {}
    for fld in exog_fields:
        if fld == "movie_count":
            by_month = {i: float(len(recs)) for i, recs in buckets.items()}
            series = np.array([by_month.get(i, 0.0) for i in full_range])
            exog[fld] = series
            continue
        by_month = {}
        for i, recs in buckets.items():
            vals = [getattr(r, fld) for r in recs if getattr(r, fld) is not None]
            if vals:
                by_month[i] = float(np.mean(vals))
        exog[fld], _ = _interpolate_gaps(by_month, full_range)

    months = [_month_from_index(i) for i in full_range]
    return TimeSeries(months, values, exog=exog, interpolated=flags)


def acf(series, nlags: int) -> np.ndarray:
    """Biased autocorrelation estimator (denominator n); acf[0] = 1."""
    y = np.asarray(series, dtype=float)
    n = y.shape[0]
    if nlags >= n:
        raise ValueError("nlags must be smaller than the series length")
    yc = y - y.mean()
    denom = float(yc @ yc)
    if denom == 0.0:
        raise ValueError("constant series")
    out = np.empty(nlags + 1)
    out[0] = 1.0
    for k in range(1, nlags + 1):
        out[k] = float(yc[k:] @ yc[:-k]) / denom
    return out


def pacf(series, nlags: int) -> np.ndarray:
    """Partial autocorrelations via the Durbin-Levinson recursion."""
    rho = acf(series, nlags)
    out = np.empty(nlags + 1)
    out[0] = 1.0
    phi_prev = np.zeros(0)
    for k in range(1, nlags + 1):
        if k == 1:
            rk = rho[1]
        else:
            num = rho[k] - float(phi_prev @ rho[k - 1 : 0 : -1])
            den = 1.0 - float(phi_prev @ rho[1:k])
            rk = num / den
        phi = np.empty(k)
        phi[k - 1] = rk
        if k > 1:
            phi[: k - 1] = phi_prev - rk * phi_prev[::-1]
        out[k] = rk
        phi_prev = phi
    return out


def _adf_p_value(stat: float) -> float:
    """Interpolate log10 p across the tabulated critical values, with linear
    extrapolation beyond the table, clamped to [1e-6, 0.999]."""
    xs = [cv for _, cv in ADF_CRITICAL]
    ys = [math.log10(p) for p, _ in ADF_CRITICAL]
    if stat <= xs[0]:
        slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        logp = ys[0] + slope * (stat - xs[0])
    elif stat >= xs[-1]:
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        logp = ys[-1] + slope * (stat - xs[-1])
    else:
        logp = float(np.interp(stat, xs, ys))
    return float(min(max(10.0**logp, 1e-6), 0.999))


def adf_test(series, max_lag: int | None = None) -> StatTestResult:
    """Augmented Dickey-Fuller regression with constant; the statistic is the
    t-ratio of the lagged level, judged against the 5% critical value -2.86."""
    from .numerics import least_squares

    y = np.asarray(series, dtype=float)
    n = y.shape[0]
    if n < 20:
        raise ValueError("need at least 20 observations")
    lag = max_lag if max_lag is not None else int(12 * (n / 100.0) ** 0.25)
    dy = np.diff(y)
    rows = n - 1 - lag
    if rows <= lag + 3:
        raise ValueError("series too short after lagging")
    target = dy[lag:]
    cols = [np.ones(rows), y[lag : n - 1]]
    for k in range(1, lag + 1):
        cols.append(dy[lag - k : n - 1 - k])
    Z = np.column_stack(cols)
    beta = least_squares(Z, target)
    resid = target - Z @ beta
    dof = rows - Z.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(Z.T @ Z)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    result = StatTestResult("adf", stat, df=float(lag))
    result.p_value = _adf_p_value(stat)
    result.reject_at_5pct = stat < -2.86
    return result


def decompose(series, period: int = 12):
    """Additive classical decomposition into (trend, seasonal, residual).

    Trend is a centered moving average (edges NaN); the seasonal component
    is the re-centered period-position mean of the detrended values.
    """
    y = np.asarray(series, dtype=float)
    n = y.shape[0]
    if n < 2 * period:
        raise ValueError("need at least two full periods")
    half = period // 2
    trend = np.full(n, np.nan)
    if period % 2 == 0:
        weights = np.ones(period + 1)
        weights[0] = weights[-1] = 0.5
        weights /= period
        for t in range(half, n - half):
            trend[t] = float(weights @ y[t - half : t + half + 1])
    else:
        for t in range(half, n - half):
            trend[t] = float(np.mean(y[t - half : t + half + 1]))

    detrended = y - trend
    seasonal_means = np.empty(period)
    for j in range(period):
        vals = detrended[j::period]
        seasonal_means[j] = float(np.nanmean(vals))
    seasonal_means -= seasonal_means.mean()
    seasonal = np.array([seasonal_means[t % period] for t in range(n)])
    residual = y - trend - seasonal
    return trend, seasonal, residual


def ljung_box(residuals, lags: int = 10) -> StatTestResult:
    e = np.asarray(residuals, dtype=float)
    n = e.shape[0]
    if n <= lags:
        raise ValueError("need more observations than lags")
    rho = acf(e, lags)
    q = n * (n + 2.0) * float(sum(rho[k] ** 2 / (n - k) for k in range(1, lags + 1)))
    return StatTestResult("ljung_box", q, p_value=chi2_sf(q, lags), df=lags)


def fit_series(series: TimeSeries, spec: SarimaxSpec, max_evaluations: int = 2000) -> SarimaxFit:
    return sarimax_fit(
        series.values, spec, exog=series.exog_matrix(spec.exog_names),
        max_evaluations=max_evaluations,
    )


def sarimax_grid_search(
    series: TimeSeries,
    grid: dict[str, tuple[int, ...]] | None = None,
    exog_names: tuple[str, ...] = (),
    seasonal_period: int = 12,
    max_evaluations: int = 2000,
) -> SarimaxFit:
    """Fit every (p,d,q)(P,D,Q) combination in the grid and keep the minimum
    AIC; ties break toward the lexicographically smallest order tuple."""
    grid = grid or {k: (0, 1) for k in "pdqPDQ"}
    best: SarimaxFit | None = None
    failures = []
    combos = sorted(
        itertools.product(grid["p"], grid["d"], grid["q"], grid["P"], grid["D"], grid["Q"])
    )
    for p, d, q, P, D, Q in combos:
        try:
            spec = SarimaxSpec((p, d, q), (P, D, Q, seasonal_period), tuple(exog_names))
            fit = fit_series(series, spec, max_evaluations=max_evaluations)
        except (FitError, ValueError) as exc:
            failures.append(((p, d, q, P, D, Q), str(exc)))
            continue
        if best is None or fit.aic < best.aic or (
            fit.aic == best.aic and spec.key() < best.spec.key()
        ):
            best = fit
    if best is None:
        raise FitError(f"all grid fits failed: {failures}")
    return best


def forecast(fit: SarimaxFit, horizon: int, future_exogenous=None):
    """Point forecasts with 95% intervals; thin wrapper over the state-space
    prediction recursion."""
    return sarimax_forecast(fit, horizon, future_exog=future_exogenous)
