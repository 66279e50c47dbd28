"""Panel container, unit splits, the per-round observation batch, and CSV I/O.

Time conventions: the panel stores columns ``0 .. horizon-1``; columns before
``burn_in_end`` fit the point predictor and the rest form the conformal
period. Conformal rounds are numbered ``t = 1, 2, ...`` with round ``t``
reading column ``burn_in_end + t - 1``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from wtqa.rng import make_rng


class PanelError(ValueError):
    """Malformed panel data or an invalid request against a panel."""


@dataclass(frozen=True)
class Panel:
    """Dense panel of features ``(n_units, horizon, d)`` and outcomes ``(n_units, horizon)``.

    ``factors`` is an optional ``(horizon, k)`` covariate shared by all units
    (the observed common factor of the synthetic design).
    """

    features: np.ndarray
    outcomes: np.ndarray
    burn_in_end: int
    unit_tags: Optional[np.ndarray] = None
    unit_ids: Optional[tuple] = None
    factors: Optional[np.ndarray] = None
    time_ids: Optional[tuple] = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.outcomes, dtype=float)
        if x.ndim != 3:
            raise PanelError("features must be (n_units, horizon, d)")
        if y.shape != x.shape[:2]:
            raise PanelError(f"outcomes shape {y.shape} does not match features {x.shape[:2]}")
        if x.shape[0] == 0 or x.shape[1] == 0:
            raise PanelError("empty panel")
        if not np.isfinite(x).all() or not np.isfinite(y).all():
            raise PanelError("panel cells must all be populated with finite values")
        if not 0 < self.burn_in_end < x.shape[1]:
            raise PanelError(f"burn_in_end={self.burn_in_end} must lie in (0, {x.shape[1]})")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "outcomes", y)
        if self.unit_tags is not None:
            tags = np.asarray(self.unit_tags)
            if tags.shape != (x.shape[0],):
                raise PanelError("unit_tags must have one entry per unit")
            object.__setattr__(self, "unit_tags", tags)
        if self.unit_ids is None:
            object.__setattr__(self, "unit_ids", tuple(range(x.shape[0])))
        if self.time_ids is None:
            object.__setattr__(self, "time_ids", tuple(range(x.shape[1])))
        if self.factors is not None:
            f = np.asarray(self.factors, dtype=float)
            if f.ndim != 2 or f.shape[0] != x.shape[1]:
                raise PanelError("factors must be (horizon, k)")
            object.__setattr__(self, "factors", f)

    @property
    def n_units(self) -> int:
        return self.features.shape[0]

    @property
    def horizon(self) -> int:
        return self.features.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[2]

    @property
    def n_rounds(self) -> int:
        """Length of the conformal period."""
        return self.horizon - self.burn_in_end

    def column(self, t: int) -> int:
        if not 1 <= t <= self.n_rounds:
            raise PanelError(f"round {t} outside conformal period 1..{self.n_rounds}")
        return self.burn_in_end + t - 1


@dataclass(frozen=True)
class UnitSplit:
    calib_ids: tuple
    test_ids: tuple
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "calib_ids", tuple(int(i) for i in self.calib_ids))
        object.__setattr__(self, "test_ids", tuple(int(i) for i in self.test_ids))
        if set(self.calib_ids) & set(self.test_ids):
            raise PanelError("calibration and test units overlap")
        if not self.calib_ids:
            raise PanelError("split needs at least one calibration unit")


@dataclass(frozen=True)
class RoundBatch:
    """Everything that arrives at round ``t`` for one target.

    The target's current outcome is deliberately absent; its previous outcome
    appears only when ``lagged_reveal`` is set.
    """

    t: int
    calib_x: np.ndarray
    calib_y: np.ndarray
    target_x: np.ndarray
    lagged_reveal: bool
    lagged_label: Optional[float] = None
    factor: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.lagged_reveal != (self.lagged_label is not None):
            raise PanelError("lagged_label must be present exactly when lagged_reveal is set")
        if self.t == 1 and self.lagged_reveal:
            raise PanelError("no feedback can arrive at round 1")


@dataclass(frozen=True)
class PanelRound:
    """Round ``t`` arrivals for all targets at once, with point predictions.

    ``lagged_labels`` holds the previous-round target outcomes when the shared
    reveal indicator is set, else ``None``.
    """

    t: int
    calib_x: np.ndarray
    calib_y: np.ndarray
    calib_pred: np.ndarray
    target_x: np.ndarray
    target_pred: np.ndarray
    lagged_reveal: bool
    lagged_labels: Optional[np.ndarray] = None
    factor: Optional[np.ndarray] = None

    @property
    def n_targets(self) -> int:
        return self.target_x.shape[0]


def _lagged(panel: Panel, reveals: Sequence[int], t: int):
    if t == 1:
        return False
    return bool(reveals[t - 2])


def stream_round(panel: Panel, split: UnitSplit, target: int, feedback, t: int) -> RoundBatch:
    """Build the round-``t`` batch for one target under a feedback schedule."""
    if target in split.calib_ids:
        raise PanelError(f"unit {target} is a calibration unit")
    if target not in split.test_ids:
        raise PanelError(f"unit {target} is not a test unit")
    col = panel.column(t)
    calib = np.asarray(split.calib_ids)
    reveals = feedback.reveals if hasattr(feedback, "reveals") else feedback
    rev = _lagged(panel, reveals, t)
    label = float(panel.outcomes[target, col - 1]) if rev else None
    return RoundBatch(
        t=t,
        calib_x=panel.features[calib, col],
        calib_y=panel.outcomes[calib, col],
        target_x=panel.features[target, col],
        lagged_reveal=rev,
        lagged_label=label,
        factor=None if panel.factors is None else panel.factors[col],
    )


def iter_panel_rounds(panel: Panel, split: UnitSplit, reveals, predictions: np.ndarray):
    """Yield one :class:`PanelRound` per conformal round.

    ``predictions`` is the ``(n_units, horizon)`` matrix of fixed point
    predictions; ``reveals`` is the shared schedule over conformal rounds.
    """
    calib = np.asarray(split.calib_ids)
    test = np.asarray(split.test_ids)
    for t in range(1, panel.n_rounds + 1):
        col = panel.column(t)
        rev = _lagged(panel, reveals, t)
        yield PanelRound(
            t=t,
            calib_x=panel.features[calib, col],
            calib_y=panel.outcomes[calib, col],
            calib_pred=predictions[calib, col],
            target_x=panel.features[test, col],
            target_pred=predictions[test, col],
            lagged_reveal=rev,
            lagged_labels=panel.outcomes[test, col - 1] if rev else None,
            factor=None if panel.factors is None else panel.factors[col],
        )


def random_unit_split(panel: Panel, n_calib: int, n_test: int, seed: int,
                      always_calib_tag=None) -> UnitSplit:
    """Uniform split without replacement.

    Units tagged ``always_calib_tag`` are placed in calibration first; the
    remaining calibration slots and all test slots are drawn uniformly from
    the other units.
    """
    if n_calib < 1 or n_test < 0:
        raise PanelError("need n_calib >= 1 and n_test >= 0")
    ids = np.arange(panel.n_units)
    forced = np.empty(0, dtype=int)
    if always_calib_tag is not None:
        if panel.unit_tags is None:
            raise PanelError("stratified split requires unit_tags")
        mask = panel.unit_tags == always_calib_tag
        forced, ids = ids[mask], ids[~mask]
    n_draw = n_calib - forced.size
    if n_draw < 0:
        raise PanelError(f"{forced.size} forced calibration units exceed n_calib={n_calib}")
    if n_draw + n_test > ids.size:
        raise PanelError(
            f"requested {n_calib} calibration + {n_test} test units, "
            f"only {panel.n_units} available"
        )
    rng = make_rng(seed, "split")
    perm = rng.permutation(ids)
    calib = np.sort(np.concatenate([forced, perm[:n_draw]]))
    test = np.sort(perm[n_draw:n_draw + n_test])
    return UnitSplit(tuple(calib), tuple(test), seed)


@dataclass(frozen=True)
class PanelCsvSchema:
    unit_col: str = "unit_id"
    time_col: str = "time_id"
    y_col: str = "y"
    feature_prefix: str = "x_"
    tag_col: Optional[str] = None
    feature_cols: Optional[tuple] = field(default=None)


def load_panel_csv(path, schema: Optional[PanelCsvSchema] = None,
                   burn_in_end: Optional[int] = None) -> Panel:
    """Read a long-format panel CSV into a dense :class:`Panel`.

    Units keep their order of first appearance and times are sorted. Unless
    given, ``burn_in_end`` defaults to 40% of the horizon.
    """
    schema = schema or PanelCsvSchema()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for col in (schema.unit_col, schema.time_col, schema.y_col):
            if col not in header:
                raise PanelError(f"{path}: missing column {col!r}")
        if schema.feature_cols is not None:
            fcols = list(schema.feature_cols)
        else:
            fcols = sorted(
                (h for h in header if h.startswith(schema.feature_prefix)
                 and h[len(schema.feature_prefix):].isdigit()),
                key=lambda h: int(h[len(schema.feature_prefix):]),
            )
        if not fcols:
            raise PanelError(f"{path}: no feature columns")
        ui, ti, yi = (header.index(c) for c in (schema.unit_col, schema.time_col, schema.y_col))
        fi = [header.index(c) for c in fcols]
        gi = header.index(schema.tag_col) if schema.tag_col else None

        units: dict = {}
        cells: dict = {}
        tags: dict = {}
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            unit = row[ui].strip()
            try:
                time = int(row[ti])
                y = float(row[yi])
                x = [float(row[j]) for j in fi]
            except (ValueError, IndexError) as exc:
                raise PanelError(f"{path}: row {rowno}: parse error ({exc})") from None
            units.setdefault(unit, len(units))
            if (unit, time) in cells:
                raise PanelError(f"{path}: row {rowno}: duplicate cell ({unit}, {time})")
            cells[(unit, time)] = (y, x)
            if gi is not None:
                tags[unit] = row[gi].strip()
    if not cells:
        raise PanelError(f"{path}: empty panel (header only)")
    times = sorted({t for _, t in cells})
    tpos = {t: k for k, t in enumerate(times)}
    n, T, d = len(units), len(times), len(fi)
    X = np.empty((n, T, d))
    Y = np.empty((n, T))
    filled = np.zeros((n, T), dtype=bool)
    for (unit, time), (y, x) in cells.items():
        i, k = units[unit], tpos[time]
        X[i, k] = x
        Y[i, k] = y
        filled[i, k] = True
    if not filled.all():
        i, k = np.argwhere(~filled)[0]
        uid = list(units)[i]
        raise PanelError(f"{path}: ragged panel, missing cell (unit={uid}, time={times[k]})")
    if burn_in_end is None:
        burn_in_end = max(1, int(0.4 * T))
    tag_arr = np.array([tags[u] for u in units]) if gi is not None else None
    return Panel(X, Y, burn_in_end, unit_tags=tag_arr, unit_ids=tuple(units),
                 time_ids=tuple(times))


def write_panel_csv(panel: Panel, path, tag_col: Optional[str] = None) -> None:
    """Write ``panel`` in the long CSV format; floats use shortest round-trip repr."""
    d = panel.feature_dim
    header = ["unit_id", "time_id", "y"] + [f"x_{j}" for j in range(d)]
    if tag_col and panel.unit_tags is not None:
        header.append(tag_col)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, uid in enumerate(panel.unit_ids):
            for k, tid in enumerate(panel.time_ids):
                row = [uid, tid, repr(float(panel.outcomes[i, k]))]
                row += [repr(float(v)) for v in panel.features[i, k]]
                if len(header) > d + 3:
                    row.append(panel.unit_tags[i])
                w.writerow(row)
