"""Grouped right-censored survival data container and validation."""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataSchemaError

#: columns every survival table must carry; remaining numeric columns are covariates
REQUIRED_COLUMNS = ("unit_id", "group_id", "time", "status")

#: ground-truth columns a simulated table may carry; never treated as covariates
TRUTH_COLUMNS = ("true_cluster", "true_frailty", "true_eta")


@dataclass
class SurvivalDataset:
    """Right-censored survival data with a group (cluster-of-origin) structure.

    time        : (N,) positive event or censoring times
    status      : (N,) event indicator, 1 = event, 0 = censored
    covariates  : (N, d) design matrix
    group_index : (N,) integer codes 0..M-1
    group_ids   : (M,) original group labels, position g maps code g
    unit_ids    : (N,) unit labels
    covariate_names : (d,) column names
    """

    time: np.ndarray
    status: np.ndarray
    covariates: np.ndarray
    group_index: np.ndarray
    group_ids: np.ndarray
    unit_ids: np.ndarray
    covariate_names: tuple
    truth: dict = field(default_factory=dict)

    @property
    def n_units(self):
        return self.time.shape[0]

    @property
    def n_groups(self):
        return self.group_ids.shape[0]

    @property
    def n_covariates(self):
        return self.covariates.shape[1]

    def events_per_group(self):
        return np.bincount(self.group_index, weights=self.status, minlength=self.n_groups).astype(
            int
        )

    def _group_order(self):
        """Cached (order, starts): stable unit order sorted by group and the
        offsets where each group's block begins.  Used by group_logsumexp."""
        cached = getattr(self, "_order_cache", None)
        if cached is None:
            order = np.argsort(self.group_index, kind="stable")
            counts = np.bincount(self.group_index, minlength=self.n_groups)
            starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
            cached = (order, starts)
            object.__setattr__(self, "_order_cache", cached)
        return cached

    def group_logsumexp(self, values):
        """log sum_i exp(values_i) per group, overflow-free.

        Every group is nonempty by construction (codes come from np.unique), so
        reduceat never sees an empty segment.
        """
        order, starts = self._group_order()
        v = np.asarray(values, dtype=float)[order]
        vmax = np.maximum.reduceat(v, starts)
        # guard: a group whose max is -inf would produce nan from (-inf) - (-inf)
        shift = np.where(np.isfinite(vmax), vmax, 0.0)
        total = np.add.reduceat(np.exp(v - shift[self.group_index[order]]), starts)
        with np.errstate(divide="ignore"):
            return shift + np.log(total)

    @classmethod
    def from_arrays(cls, time, status, covariates, groups, unit_ids=None, covariate_names=None,
                    truth=None):
        time = np.asarray(time, dtype=float)
        status = np.asarray(status)
        covariates = np.asarray(covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates[:, None]
        groups = np.asarray(groups)
        n = time.shape[0]
        if unit_ids is None:
            unit_ids = np.arange(1, n + 1)
        if covariate_names is None:
            covariate_names = tuple(f"x{j + 1}" for j in range(covariates.shape[1]))
        _validate(time, status, covariates, groups, np.asarray(unit_ids))
        group_ids, group_index = np.unique(groups, return_inverse=True)
        status = status.astype(int)
        return cls(
            time=time,
            status=status,
            covariates=covariates,
            group_index=group_index.astype(np.intp),
            group_ids=group_ids,
            unit_ids=np.asarray(unit_ids),
            covariate_names=tuple(covariate_names),
            truth=dict(truth or {}),
        )

    @classmethod
    def from_frame(cls, frame):
        """Build from a table with unit_id, group_id, time, status + covariate columns."""
        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise DataSchemaError(f"missing required column(s): {', '.join(missing)}")
        cov_cols = [c for c in frame.columns if c not in REQUIRED_COLUMNS and c not in TRUTH_COLUMNS]
        if not cov_cols:
            raise DataSchemaError("no covariate columns found")
        for c in cov_cols + ["time", "status"]:
            if not np.issubdtype(frame[c].dtype, np.number):
                raise DataSchemaError(f"column {c!r} must be numeric")
            if frame[c].isna().any():
                raise DataSchemaError(f"column {c!r} contains missing values")
        truth = {c: frame[c].to_numpy() for c in TRUTH_COLUMNS if c in frame.columns}
        return cls.from_arrays(
            time=frame["time"].to_numpy(dtype=float),
            status=frame["status"].to_numpy(),
            covariates=frame[cov_cols].to_numpy(dtype=float),
            groups=frame["group_id"].to_numpy(),
            unit_ids=frame["unit_id"].to_numpy(),
            covariate_names=tuple(cov_cols),
            truth=truth,
        )

    @classmethod
    def from_csv(cls, path):
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
            raise DataSchemaError(f"cannot read {path}: {exc}") from exc
        return cls.from_frame(frame)

    def to_frame(self):
        frame = pd.DataFrame({"unit_id": self.unit_ids,
                              "group_id": self.group_ids[self.group_index],
                              "time": self.time,
                              "status": self.status})
        for j, name in enumerate(self.covariate_names):
            frame[name] = self.covariates[:, j]
        for name, values in self.truth.items():
            frame[name] = values
        return frame


def _validate(time, status, covariates, groups, unit_ids):
    n = time.shape[0]
    for name, arr in (("status", status), ("groups", groups), ("unit_ids", unit_ids)):
        if arr.shape[0] != n:
            raise DataSchemaError(f"{name} has length {arr.shape[0]}, expected {n}")
    if covariates.shape[0] != n:
        raise DataSchemaError(f"covariates have {covariates.shape[0]} rows, expected {n}")
    if n == 0:
        raise DataSchemaError("empty dataset")
    if not np.all(np.isfinite(time)) or np.any(time <= 0):
        raise DataSchemaError("time must be positive and finite")
    status_vals = np.unique(np.asarray(status))
    if not np.isin(status_vals, (0, 1)).all():
        raise DataSchemaError(f"status must be 0/1, found values {status_vals}")
    if not np.all(np.isfinite(covariates)):
        raise DataSchemaError("covariates must be finite")
    if len(np.unique(unit_ids)) != n:
        raise DataSchemaError("unit_id values must be unique")
