"""End-to-end benchmark pipeline: ingest, preprocess, fit every model, run
every applicable test, and assemble the comparison report."""

from __future__ import annotations

import datetime
import math

import numpy as np

from . import classifiers, inference, linear_models, neural, timeseries
from .config import RunConfig
from .data_pipeline import (
    ClassLabel,
    DesignMatrix,
    MovieRecord,
    NUMERIC_FIELDS,
    build_design_matrix,
    load_movies,
    make_binner,
    split_by_year,
)
from .statespace import FitError


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


def _py(value):
    """Recursively convert numpy scalars/arrays for JSON round-tripping."""
    if isinstance(value, dict):
        return {k: _py(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_py(v) for v in value]
    if isinstance(value, np.ndarray):
        return _py(value.tolist())
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _standardize(train: np.ndarray):
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def _complete_records(records, feature_names):
    """Records with every named feature present (genres always count)."""
    out = []
    for rec in records:
        ok = True
        for name in feature_names:
            if name in NUMERIC_FIELDS and getattr(rec, name) is None:
                ok = False
                break
        if ok:
            out.append(rec)
    return out


def _record_features(rec: MovieRecord, feature_names):
    vals = []
    for name in feature_names:
        if name in NUMERIC_FIELDS:
            v = getattr(rec, name)
            if v is None:
                return None
            vals.append(float(v))
        else:
            vals.append(1.0 if name in rec.genres else 0.0)
    return np.array(vals)


def _stat_row(result: inference.StatTestResult) -> dict:
    return _py(result.to_dict())


class _FittedModels:
    """Trained models plus per-record ternary predictors for the per-movie table."""

    def __init__(self):
        self.predictors = {}  # name -> callable(record) -> ClassLabel | None

    def add(self, name, predictor):
        self.predictors[name] = predictor


def run_pipeline(config: RunConfig) -> dict:
    """Execute the full pipeline; returns the report as a plain dict.

    Any stage failure aborts with StageError naming the stage; a partial
    report is never returned.
    """
    report: dict = {
        "config": {
            "dataset": config.dataset,
            "seed": config.seed,
            "bin_thresholds": list(config.bin_thresholds),
            "ridge_lambda": config.ridge_lambda,
            "lasso_lambda": config.lasso_lambda,
            "models": list(config.models),
        },
        "models": {},
    }
    binner = make_binner(*config.bin_thresholds)
    fitted = _FittedModels()

    # --- ingest / split -------------------------------------------------
    try:
        loaded = load_movies(config.dataset, config.column_map)
        split = split_by_year(loaded.records)
        train = [r for r in split.train if r.metascore is not None]
        val = [r for r in split.validation if r.metascore is not None]
        if not train or not val:
            raise ValueError("empty train or validation partition after filtering")
    except Exception as exc:
        raise StageError("ingest", exc) from exc
    report["config"]["n_rows"] = len(loaded.records)
    report["config"]["n_dropped"] = loaded.dropped
    report["config"]["n_train"] = len(train)
    report["config"]["n_validation"] = len(val)

    # --- regression family ---------------------------------------------
    slr_feature = None
    if "slr" in config.models:
        try:
            slr_feature, row, predictor = _fit_slr(config, train, val, binner)
            report["models"]["slr"] = row
            fitted.add("slr", predictor)
        except Exception as exc:
            raise StageError("slr", exc) from exc
    for name in ("mlr", "ridge", "lasso"):
        if name not in config.models:
            continue
        try:
            row, predictor = _fit_linear(name, config, train, val, binner)
            report["models"][name] = row
            fitted.add(name, predictor)
        except Exception as exc:
            raise StageError(name, exc) from exc

    if "logistic" in config.models:
        try:
            row, wald_table, predictor = _fit_logistic_model(config, train, val)
            report["models"]["logistic"] = row
            report["wald_table"] = wald_table
            fitted.add("logistic", predictor)
        except Exception as exc:
            raise StageError("logistic", exc) from exc

    # --- classifiers ----------------------------------------------------
    if "kmeans" in config.models:
        try:
            row, predictor = _fit_kmeans(config, train, val, binner)
            report["models"]["kmeans"] = row
            fitted.add("kmeans", predictor)
        except Exception as exc:
            raise StageError("kmeans", exc) from exc
    if "svm" in config.models:
        try:
            row, predictor = _fit_svm(config, train, val, binner)
            report["models"]["svm"] = row
            fitted.add("svm", predictor)
        except Exception as exc:
            raise StageError("svm", exc) from exc

    # --- neural network -------------------------------------------------
    if "ann" in config.models:
        try:
            row, summary, loss_curve, predictor = _fit_ann(config, train, val, binner)
            report["models"]["ann"] = row
            report["ann_summary"] = summary
            report.setdefault("series", {})["loss_curve"] = loss_curve
            fitted.add("ann", predictor)
        except Exception as exc:
            raise StageError("ann", exc) from exc

    # --- time series ----------------------------------------------------
    try:
        ts_table, series_out = _run_timeseries(config, loaded.records)
        report["timeseries"] = ts_table
        report.setdefault("series", {}).update(series_out)
    except Exception as exc:
        raise StageError("timeseries", exc) from exc

    # --- jaccard availability table ------------------------------------
    jaccard_table = []
    for name in ("mlr", "logistic", "svm"):
        if name in config.models and name in config.features_2020:
            a = config.features[name]
            b = config.features_2020[name]
            inter = len(set(a) & set(b))
            union = len(set(a) | set(b))
            jaccard_table.append(
                {
                    "model": name,
                    "attributes": sorted(a),
                    "attributes_2020": sorted(b),
                    "intersection": inter,
                    "union": union,
                    "jaccard": inference.jaccard(a, b),
                }
            )
    report["jaccard_table"] = _py(jaccard_table)

    # --- validity rulings -----------------------------------------------
    report["validity"] = {
        name: report["models"][name]["validity"]
        for name in report["models"]
        if "validity" in report["models"][name]
    }

    # --- per-movie predictions ------------------------------------------
    try:
        report["per_movie"] = predict_movies(fitted.predictors, val, binner, config.per_movie_rows)
    except Exception as exc:
        raise StageError("per_movie", exc) from exc

    # --- optional 2020-style holdout ------------------------------------
    if config.test_2020:
        try:
            report["test_2020"] = _evaluate_2020(config, fitted, binner)
        except Exception as exc:
            raise StageError("test_2020", exc) from exc

    return _py(report)


# --------------------------------------------------------------------------
# model stages


def _regression_diagnostics(name, fit, train_dm, val_dm, binner):
    from .linear_models import evaluate_binned, predict

    resid = train_dm.target - predict(fit, train_dm)
    n, p = train_dm.n, train_dm.p
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((train_dm.target - train_dm.target.mean()) ** 2))
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
    f_test = inference.f_statistic(fit, train_dm)
    dw = inference.durbin_watson(resid)
    jb = inference.jarque_bera(resid)
    lm = inference.breusch_godfrey(resid, train_dm, lags=min(10, n - p - 2))
    evaluation = evaluate_binned(fit, val_dm, binner)
    rep = inference.RegressionReport(
        model=name, r2=r2, adjusted_r2=adj_r2, f_test=f_test, durbin_watson=dw,
        jarque_bera=jb, lagrange_multiplier=lm, accuracy=evaluation.accuracy,
    )
    valid, reasons = inference.regression_validity(rep)
    return {
        "family": "regression",
        "features": list(train_dm.column_names),
        "coefficients": {"intercept": fit.intercept, **fit.named},
        "r2": r2,
        "adjusted_r2": adj_r2,
        "f_statistic": _stat_row(f_test),
        "durbin_watson": _stat_row(dw),
        "jarque_bera": _stat_row(jb),
        "lagrange_multiplier": _stat_row(lm),
        "accuracy": evaluation.accuracy,
        "confusion": evaluation.confusion,
        "validity": {"valid": valid, "reasons": reasons},
    }


def _linear_predictor(fit, feature_names, binner):
    def predictor(rec: MovieRecord):
        x = _record_features(rec, feature_names)
        if x is None:
            return None
        raw = fit.intercept + float(x @ fit.coefficients)
        return binner(int(round(min(max(raw, 0.0), 100.0))))

    return predictor


def _fit_slr(config, train, val, binner):
    candidates = [c for c in config.slr_candidates if c != "metascore"]
    dm = build_design_matrix(train, candidates, "metascore")
    scores = inference.univariate_r2(dm)
    best = inference.select_best_regressor(scores)
    train_dm = build_design_matrix(train, [best], "metascore")
    val_dm = build_design_matrix(val, [best], "metascore")
    fit = linear_models.fit_ols(train_dm)
    row = _regression_diagnostics("slr", fit, train_dm, val_dm, binner)
    row["selected_feature"] = best
    row["univariate_r2"] = _py(scores)
    return best, _py(row), _linear_predictor(fit, [best], binner)


def _fit_linear(name, config, train, val, binner):
    feats = config.features[name]
    train_dm = build_design_matrix(train, feats, "metascore")
    val_dm = build_design_matrix(val, feats, "metascore")
    if name == "mlr":
        fit = linear_models.fit_ols(train_dm)
    elif name == "ridge":
        fit = linear_models.fit_ridge(train_dm, config.ridge_lambda)
    else:
        fit = linear_models.fit_lasso(train_dm, config.lasso_lambda)
    row = _regression_diagnostics(name, fit, train_dm, val_dm, binner)
    if name == "mlr":
        row["vif"] = _py(inference.vif(train_dm))
    if name in ("ridge", "lasso"):
        row["lambda"] = fit.lam
    return _py(row), _linear_predictor(fit, feats, binner)


def _fit_logistic_model(config, train, val):
    feats = config.features["logistic"]
    cutoff = config.bin_thresholds[1]

    def binary_dm(records):
        dm = build_design_matrix(records, feats, "metascore")
        target = np.array([1.0 if s >= cutoff else 0.0 for s in dm.target])
        return DesignMatrix(dm.column_names, dm.values, target, "success")

    train_dm = binary_dm(train)
    val_dm = binary_dm(val)
    fit = linear_models.fit_logistic(train_dm)
    probs = linear_models.predict_proba(fit, val_dm)
    predicted = (probs >= 0.5).astype(float)
    accuracy = float((predicted == val_dm.target).mean())
    auc = inference.roc_auc(probs, val_dm.target.astype(int))
    wald = [_stat_row(r) for r in inference.wald_test(fit)] if fit.converged else []
    row = {
        "family": "logistic",
        "features": feats,
        "coefficients": {"intercept": fit.intercept, **fit.named},
        "converged": fit.converged,
        "iterations": fit.iterations,
        "accuracy": accuracy,
        "roc_auc": auc,
    }

    def predictor(rec: MovieRecord):
        x = _record_features(rec, feats)
        if x is None:
            return None
        eta = fit.intercept + float(x @ fit.coefficients)
        return ClassLabel.HIT if eta >= 0 else ClassLabel.FLOP

    return _py(row), wald, predictor


def _fit_kmeans(config, train, val, binner):
    feats = config.features["kmeans"]
    train_dm = build_design_matrix(train, feats, "metascore")
    val_dm = build_design_matrix(val, feats, "metascore")
    mean, std = _standardize(train_dm.values)
    Xt = (train_dm.values - mean) / std
    Xv = (val_dm.values - mean) / std
    model = classifiers.kmeans_fit(Xt, 3, seed=config.seed, restarts=config.kmeans_restarts)
    train_labels = [binner(int(s)) for s in train_dm.target]
    predicted = classifiers.kmeans_classify(model, train_labels, Xv)
    truths = [binner(int(s)) for s in val_dm.target]
    confusion, accuracy = inference.confusion_and_accuracy(predicted, truths)
    sil = _predicted_silhouette(Xv, predicted)
    row = {
        "family": "classifier",
        "features": feats,
        "accuracy": accuracy,
        "confusion": confusion,
        "silhouette": sil,
        "inertia": model.inertia,
        "cluster_to_class": {str(k): v.short for k, v in model.cluster_to_class.items()},
    }

    def predictor(rec: MovieRecord):
        x = _record_features(rec, feats)
        if x is None:
            return None
        xs = (x - mean) / std
        d2 = ((model.centroids - xs) ** 2).sum(axis=1)
        return model.cluster_to_class[int(d2.argmin())]

    return _py(row), predictor


def _fit_svm(config, train, val, binner):
    feats = config.features["svm"]
    train_dm = build_design_matrix(train, feats, "metascore")
    val_dm = build_design_matrix(val, feats, "metascore")
    mean, std = _standardize(train_dm.values)
    Xt = (train_dm.values - mean) / std
    Xv = (val_dm.values - mean) / std
    labels = [binner(int(s)) for s in train_dm.target]
    model = classifiers.ordinal_svm_fit(
        Xt, labels, C=config.svm_C, epochs=config.svm_epochs, seed=config.seed,
        feature_names=feats,
    )
    predicted = classifiers.ordinal_svm_predict(model, Xv)
    truths = [binner(int(s)) for s in val_dm.target]
    confusion, accuracy = inference.confusion_and_accuracy(predicted, truths)
    sil = _predicted_silhouette(Xv, predicted)
    row = {
        "family": "classifier",
        "features": feats,
        "accuracy": accuracy,
        "confusion": confusion,
        "silhouette": sil,
        "thresholds": [model.b1, model.b2],
    }

    def predictor(rec: MovieRecord):
        x = _record_features(rec, feats)
        if x is None:
            return None
        xs = (x - mean) / std
        return classifiers.ordinal_svm_predict(model, xs.reshape(1, -1))[0]

    return _py(row), predictor


def _predicted_silhouette(X, predicted_labels):
    """Silhouette over predicted-class groupings; None when degenerate."""
    labels = np.asarray([int(l) for l in predicted_labels])
    if np.unique(labels).size < 2:
        return None
    return inference.silhouette(X, labels)


def _fit_ann(config, train, val, binner):
    feats = config.features["ann"]
    train_dm = build_design_matrix(train, feats, "metascore")
    val_dm = build_design_matrix(val, feats, "metascore")
    mean, std = _standardize(train_dm.values)
    Xt = (train_dm.values - mean) / std
    Xv = (val_dm.values - mean) / std
    yt = [binner(int(s)) for s in train_dm.target]
    yv = [binner(int(s)) for s in val_dm.target]
    model = neural.mlp_init(config.seed, (len(feats), 100, 3))
    train_config = neural.TrainConfig(max_epochs=config.mlp_max_epochs)
    trained, trace = neural.mlp_train(model, Xt, yt, train_config)
    accuracy = neural.mlp_accuracy(trained, Xv, yv)
    predicted = neural.mlp_predict(trained, Xv)
    confusion, _ = inference.confusion_and_accuracy(predicted, yv)
    summary = {
        "attributes": feats,
        "type": "multi-layer perceptron classifier",
        "architecture": {"input": len(feats), "hidden": 100, "output": 3},
        "output_type": "ternary",
        "activation": "logistic",
        "optimizer": "adam",
        "early_stopping": train_config.early_stopping,
        "validation_fraction": train_config.validation_fraction,
        "n_training_examples": int(train_dm.n),
        "initial_loss": trace.losses[0] if trace.losses else None,
        "final_loss": trace.losses[-1] if trace.losses else None,
        "stopped_epoch": trace.stopped_epoch,
        "best_validation_score": trace.best_validation_score,
    }
    row = {
        "family": "neural",
        "features": feats,
        "accuracy": accuracy,
        "confusion": confusion,
    }
    loss_curve = [[i + 1, loss] for i, loss in enumerate(trace.losses)]

    def predictor(rec: MovieRecord):
        x = _record_features(rec, feats)
        if x is None:
            return None
        xs = (x - mean) / std
        return neural.mlp_predict(trained, xs.reshape(1, -1))[0]

    return _py(row), _py(summary), _py(loss_curve), predictor


def _run_timeseries(config, records):
    exog_fields = tuple(config.sarimax_exog)
    series = timeseries.aggregate_monthly(records, exog_fields=exog_fields)
    adf = timeseries.adf_test(series.values)
    fit = timeseries.sarimax_grid_search(
        series,
        grid={k: list(v) for k, v in config.sarimax_grid.items()},
        exog_names=exog_fields,
        max_evaluations=config.sarimax_max_evaluations,
    )
    lb = timeseries.ljung_box(fit.residuals, lags=min(10, fit.nobs - 1))
    resid = fit.residuals
    jb = inference.jarque_bera(resid)
    dw = inference.durbin_watson(resid)
    z = (resid - resid.mean()) / resid.std()
    horizon = config.forecast_horizon
    future_exog = None
    if exog_fields:
        # seasonal-naive future exog: repeat the last 12 observed months
        cols = []
        for name in exog_fields:
            tail = series.exog[name][-12:]
            cols.append(np.array([tail[h % len(tail)] for h in range(horizon)]))
        future_exog = np.column_stack(cols)
    points, intervals = timeseries.forecast(fit, horizon, future_exogenous=future_exog)
    months = timeseries.future_months(series, horizon)
    table = {
        "adf": _stat_row(adf),
        "selected_order": list(fit.spec.order),
        "selected_seasonal_order": list(fit.spec.seasonal_order),
        "exogenous": list(exog_fields),
        "parameters": _py(fit.parameter_dict()),
        "log_likelihood": fit.log_likelihood,
        "aic": fit.aic,
        "bic": fit.bic,
        "hqic": fit.hqic,
        "rmse": fit.one_step_rmse,
        "ljung_box": _stat_row(lb),
        "jarque_bera": _stat_row(jb),
        "durbin_watson": _stat_row(dw),
        "skewness": float(np.mean(z**3)),
        "kurtosis": float(np.mean(z**4)),
        "converged": fit.converged,
        "n_interpolated_months": int(series.interpolated.sum()),
    }
    series_out = {
        "monthly_metascore": [
            [m.isoformat(), float(v), bool(flag)]
            for m, v, flag in zip(series.months, series.values, series.interpolated)
        ],
        "forecast": [
            [m.isoformat(), float(p), float(lo), float(hi)]
            for m, p, (lo, hi) in zip(months, points, intervals)
        ],
    }
    return _py(table), series_out


def predict_movies(predictors, records, binner, limit: int) -> list[dict]:
    """Per-movie prediction rows for the most recent scored movies."""
    scored = [r for r in records if r.metascore is not None]
    scored.sort(key=lambda r: (r.date_published, r.title), reverse=True)
    rows = []
    for rec in scored[:limit]:
        row = {"movie": rec.title, "truth": binner(rec.metascore).short}
        for name in sorted(predictors):
            label = predictors[name](rec)
            row[name] = label.short if label is not None else "-"
        rows.append(row)
    if not rows:
        raise ValueError("no scorable movies")
    return rows


def _evaluate_2020(config, fitted, binner):
    """Score the second holdout CSV with the trained models, reading
    substituted source columns where configured (the attribute swap is
    flagged in the output)."""
    loaded = load_movies(config.test_2020, config.column_map)
    subs = config.test_2020_substitutions

    def substituted(rec: MovieRecord) -> MovieRecord:
        changes = {}
        for target_field, source_field in subs.items():
            if target_field in NUMERIC_FIELDS and source_field in NUMERIC_FIELDS:
                changes[target_field] = getattr(rec, source_field)
        return MovieRecord(**{**rec.__dict__, **changes}) if changes else rec

    records = [substituted(r) for r in loaded.records if r.metascore is not None]
    if not records:
        raise ValueError("no scored rows in the 2020 holdout")
    out = {"substitutions": dict(subs), "n_rows": len(records), "accuracy": {}}
    for name, predictor in fitted.predictors.items():
        hits = total = 0
        for rec in records:
            label = predictor(rec)
            if label is None:
                continue
            total += 1
            truth = binner(rec.metascore)
            if name == "logistic":
                # binary model: compare coarsened truth
                truth_bin = truth == ClassLabel.HIT
                hits += int((label == ClassLabel.HIT) == truth_bin)
            else:
                hits += int(label == truth)
        out["accuracy"][name] = hits / total if total else None
    return _py(out)
