"""Statistical post-processing: jackknife errors, static-potential fits,
digitization error curves and Polyakov-loop scans.

Digitized and undigitized measurements are always paired configuration
by configuration before resampling, so the error of a ratio reflects
only the fluctuation of the projection effect, not the (much larger)
fluctuation of the observables themselves.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigSetMismatchError, FitWindowError

__all__ = [
    "jackknife",
    "paired_ratio",
    "MeasurementTable",
    "PotentialFit",
    "fit_potential",
    "ErrorCurvePoint",
    "error_curve",
    "potential_error",
    "beta_scan",
]


def jackknife(values, estimator=np.mean):
    """Delete-1 jackknife mean and error of an estimator.

    Returns (mean of the leave-one-out estimates, jackknife error).
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n < 2:
        raise ValueError("jackknife needs at least 2 samples")
    loo = np.empty(n)
    for i in range(n):
        loo[i] = estimator(np.delete(values, i))
    mean = loo.mean()
    err = math.sqrt((n - 1) / n * np.sum((loo - mean) ** 2))
    return mean, err


def paired_ratio(num, den):
    """Ratio of means with a delete-1 error over paired samples."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    if num.shape != den.shape:
        raise ConfigSetMismatchError("paired samples differ in length")
    n = len(num)
    if n < 2:
        raise ValueError("need at least 2 samples")
    snum, sden = num.sum(), den.sum()
    loo = (snum - num) / (sden - den)
    center = snum / sden
    err = math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return center, err


@dataclass
class MeasurementTable:
    """Per-configuration observable values for one (ensemble, scheme)."""

    ensemble_id: str
    scheme: str
    bits_per_link: float
    beta: float
    config_indices: list
    values: dict = dc_field(default_factory=dict)  # key -> np.ndarray (n_configs,)
    dims: tuple = None

    @property
    def n_configs(self):
        return len(self.config_indices)

    @classmethod
    def from_records(cls, records):
        """Collect MeasurementRecord rows; one row per (config, observable)."""
        if not records:
            raise ValueError("no records")
        first = records[0]
        configs = sorted({r.config_index for r in records})
        pos = {c: i for i, c in enumerate(configs)}
        values = {}
        seen = set()
        for r in records:
            if r.params:
                key = (r.observable, r.params.get("r"), r.params.get("t"))
            else:
                key = r.observable
            tag = (r.config_index, key)
            if tag in seen:
                raise ValueError(f"duplicate record for {tag}")
            seen.add(tag)
            values.setdefault(key, np.full(len(configs), np.nan))[pos[r.config_index]] = r.value
        for key, arr in values.items():
            if np.any(np.isnan(arr)):
                raise ValueError(f"missing configurations for {key}")
        return cls(
            ensemble_id=first.ensemble_id,
            scheme=first.scheme,
            bits_per_link=first.bits_per_link,
            beta=first.beta,
            config_indices=configs,
            values=values,
        )


@dataclass
class PotentialFit:
    r: int
    V: float
    V_err: float
    t_min: int
    t_max: int
    chi2_dof: float


def _line_fit(ts, ys):
    """Least-squares y = c0 - V * t; returns (V, c0)."""
    A = np.stack([np.ones_like(ts), -ts], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    return coef[1], coef[0]


def _usable_ts(wilson, r, window, mask=None):
    t_min, t_max = window
    ts, ys = [], []
    for t in range(t_min, t_max + 1):
        arr = wilson.get((r, t))
        if arr is None:
            continue
        sel = arr if mask is None else arr[mask]
        wbar = sel.mean()
        if wbar > 0:
            ts.append(t)
            ys.append(wbar)
    return np.array(ts, dtype=np.float64), np.array(ys, dtype=np.float64)


def fit_potential_r(wilson, r, window=(1, 4)):
    """Fit ln W(t, r) = ln C - t V over the window for one separation.

    ``wilson`` maps (r, t) to per-configuration arrays.  Points whose
    ensemble mean is not positive are pruned; fewer than 3 survivors
    raise FitWindowError (the loop signal has sunk into noise).  A
    deliberately two-point window is fit exactly.
    """
    need = min(3, window[1] - window[0] + 1)
    ts, ws = _usable_ts(wilson, r, window)
    if len(ts) < max(need, 2):
        raise FitWindowError(f"r={r}: only {len(ts)} usable t values in {window}")
    n = len(next(iter(wilson.values())))
    V, _ = _line_fit(ts, np.log(ws))

    loo = []
    for i in range(n):
        mask = np.arange(n) != i
        tsi, wsi = _usable_ts(wilson, r, window, mask)
        if len(tsi) < 2:
            continue
        vi, _ = _line_fit(tsi, np.log(wsi))
        loo.append(vi)
    loo = np.array(loo)
    m = len(loo)
    V_err = math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2)) if m >= 2 else 0.0

    # diagnostic uncorrelated chi^2 with jackknife errors on ln W
    chi2 = 0.0
    dof = max(len(ts) - 2, 1)
    _, c0 = _line_fit(ts, np.log(ws))
    for t, wbar in zip(ts, ws):
        arr = wilson[(r, int(t))]
        sw = arr.sum()
        loo_w = (sw - arr) / (n - 1)
        sig = math.sqrt((n - 1) / n * np.sum((loo_w - loo_w.mean()) ** 2))
        sig_log = sig / wbar if wbar > 0 else 0.0
        resid = math.log(wbar) - (c0 - V * t)
        if sig_log > 0:
            chi2 += (resid / sig_log) ** 2
        elif abs(resid) > 1e-10:
            chi2 += np.inf
    return PotentialFit(
        r=int(r), V=float(V), V_err=float(V_err),
        t_min=int(ts[0]), t_max=int(ts[-1]), chi2_dof=float(chi2 / dof),
    )


def fit_potential(wilson, window=(1, 4)):
    """Fits for every separation that survives the window policy."""
    rs = sorted({r for (r, _t) in wilson})
    fits = []
    for r in rs:
        try:
            fits.append(fit_potential_r(wilson, r, window))
        except FitWindowError:
            continue
    return fits


@dataclass
class ErrorCurvePoint:
    scheme: str
    bits_per_link: float
    observable: str
    r: int
    t: int
    rel_value: float
    rel_value_err: float
    rel_error: float
    rel_error_err: float


def _check_paired(orig, dig):
    if orig.config_indices != dig.config_indices:
        raise ConfigSetMismatchError(
            f"configuration sets differ between {orig.scheme} and {dig.scheme}"
        )


def error_curve(orig, digitized, observables=None):
    """Relative observable values/errors per scheme, paired per configuration.

    ``orig`` is the table for the undigitized ensemble, ``digitized`` a
    list of tables on the same configurations.  Output is sorted by
    bits-per-link then scheme.
    """
    points = []
    for dig in sorted(digitized, key=lambda tb: (tb.bits_per_link, tb.scheme)):
        _check_paired(orig, dig)
        keys = observables or sorted(orig.values, key=str)
        for key in keys:
            if key not in dig.values or key not in orig.values:
                continue
            ratio, err = paired_ratio(dig.values[key], orig.values[key])
            name, r, t = (key, 0, 0) if isinstance(key, str) else key
            points.append(
                ErrorCurvePoint(
                    scheme=dig.scheme,
                    bits_per_link=dig.bits_per_link,
                    observable=name,
                    r=r,
                    t=t,
                    rel_value=ratio,
                    rel_value_err=err,
                    rel_error=ratio - 1.0,
                    rel_error_err=err,
                )
            )
    return points


def potential_error(orig, dig, window=(1, 4)):
    """Paired relative error of V(r) per separation.

    Both tables need ("wilson", r, t) entries on identical configuration
    sets.  Returns {r: (rel_error, err)} for separations where both fits
    survive the window policy.
    """
    _check_paired(orig, dig)
    w_orig = {(k[1], k[2]): v for k, v in orig.values.items()
              if isinstance(k, tuple) and k[0] == "wilson"}
    w_dig = {(k[1], k[2]): v for k, v in dig.values.items()
             if isinstance(k, tuple) and k[0] == "wilson"}
    n = orig.n_configs
    out = {}
    for r in sorted({r for (r, _t) in w_orig}):
        try:
            f_orig = fit_potential_r(w_orig, r, window)
            f_dig = fit_potential_r(w_dig, r, window)
        except FitWindowError:
            continue
        center = f_dig.V / f_orig.V - 1.0
        loo = []
        for i in range(n):
            mask = np.arange(n) != i
            try:
                to, wo = _usable_ts(w_orig, r, window, mask)
                td, wd = _usable_ts(w_dig, r, window, mask)
                if len(to) < 2 or len(td) < 2:
                    continue
                vo, _ = _line_fit(to, np.log(wo))
                vd, _ = _line_fit(td, np.log(wd))
                loo.append(vd / vo - 1.0)
            except (ValueError, FloatingPointError):
                continue
        loo = np.array(loo)
        if len(loo) >= 2:
            m = len(loo)
            err = math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2))
        else:
            err = 0.0
        out[r] = (center, err)
    return out


def beta_scan(tables, observable="polyakov_abs"):
    """Observable vs beta per scheme, plus a transition estimate.

    Returns (rows, transitions): rows are (scheme, beta, mean, err)
    sorted by scheme then beta; transitions maps scheme to the midpoint
    of the steepest rising finite-difference interval, or None when
    fewer than 4 beta points exist or the curve never rises.
    """
    by_scheme = {}
    for tb in tables:
        if observable not in tb.values:
            raise ValueError(f"table {tb.scheme} at beta={tb.beta} lacks {observable}")
        mean, err = jackknife(tb.values[observable])
        by_scheme.setdefault(tb.scheme, []).append((tb.beta, mean, err))

    rows = []
    transitions = {}
    for scheme in sorted(by_scheme):
        pts = sorted(by_scheme[scheme])
        rows.extend((scheme, b, m, e) for b, m, e in pts)
        if len(pts) < 4:
            transitions[scheme] = None
            continue
        best_slope = 0.0
        best_mid = None
        for (b1, m1, _), (b2, m2, _) in zip(pts, pts[1:]):
            slope = (m2 - m1) / (b2 - b1)
            if slope > best_slope:
                best_slope = slope
                best_mid = 0.5 * (b1 + b2)
        transitions[scheme] = best_mid
    return rows, transitions
