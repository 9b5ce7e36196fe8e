"""Generalization-gap measurement, perturb-one-sample stability, and sweeps.

Every sweep seed drives the whole pipeline for that repetition: the
train/test split, the bandwidth subsample, the feature map and the SGM
shuffling. Grid cells within a seed therefore share the same split, which
keeps comparisons along the swept parameter paired.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, SplitSpec, split, standardize
from .errors import DomainError, TrainingDivergence
from .loss import huber_hinge, margins
from .rff import FourierFeatureMap, median_heuristic_gamma, sample_map
from .sgm import Schedule, SgmConfig, risk_of_features, train_features

__all__ = [
    "GapReport",
    "SweepRecord",
    "PerturbationPair",
    "ExperimentSetup",
    "make_perturbation_pair",
    "measure_gap",
    "empirical_stability",
    "sweep_fourier",
    "sweep_epochs_and_size",
    "sweep_learning_rate",
    "aggregate",
    "SWEEP_COLUMNS",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class GapReport:
    train_loss: float
    test_loss: float
    train_zero_one: float
    test_zero_one: float
    gap_loss: float
    gap_zero_one: float
    seed: int = 0
    config: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_risks(cls, train_risk, test_risk, seed=0, config=None) -> "GapReport":
        train_loss, train_01 = train_risk
        test_loss, test_01 = test_risk
        return cls(
            train_loss,
            test_loss,
            train_01,
            test_01,
            abs(test_loss - train_loss),
            abs(test_01 - train_01),
            seed,
            dict(config or {}),
        )


def measure_gap(train: Dataset, test: Dataset, fmap: FourierFeatureMap, config: SgmConfig, **train_kwargs) -> GapReport:
    """Train once and compare the averaged iterate's train and test risk."""
    Z_train = fmap.transform(train.features)
    model = train_features(Z_train, train.labels, config, **train_kwargs)
    train_risk = risk_of_features(model.w_bar, Z_train, train.labels)
    test_risk = risk_of_features(model.w_bar, fmap.transform(test.features), test.labels)
    echo = config.as_dict()
    echo["resolved_eta"] = model.eta
    return GapReport.from_risks(train_risk, test_risk, config.seed, echo)


@dataclass(frozen=True, eq=False)
class PerturbationPair:
    """Two training sets of equal size that differ in exactly one row."""

    base: Dataset
    neighbor: Dataset
    replaced_index: int

    def __post_init__(self):
        if self.base.n != self.neighbor.n or self.base.d != self.neighbor.d:
            raise DomainError(
                f"pair shapes differ: {self.base.features.shape} vs {self.neighbor.features.shape}"
            )
        if not 0 <= self.replaced_index < self.base.n:
            raise DomainError(f"replaced_index {self.replaced_index} out of range")
        differs = np.any(self.base.features != self.neighbor.features, axis=1) | (
            self.base.labels != self.neighbor.labels
        )
        others = np.delete(differs, self.replaced_index)
        if np.any(others):
            raise DomainError("pair differs outside replaced_index")


def make_perturbation_pair(base: Dataset, pool: Dataset, seed: int = 0, index=None, pool_index=None) -> PerturbationPair:
    """Replace one row of ``base`` with a row drawn from ``pool``.

    Unspecified indices are drawn from a generator seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    if index is None:
        index = int(rng.integers(base.n))
    if pool_index is None:
        pool_index = int(rng.integers(pool.n))
    X = np.array(base.features)
    y = np.array(base.labels)
    X[index] = pool.features[pool_index]
    y[index] = pool.labels[pool_index]
    neighbor = Dataset(X, y, name=f"{base.name}-perturbed", source=base.source)
    return PerturbationPair(base, neighbor, int(index))


def empirical_stability(pair: PerturbationPair, probe: Dataset, fmap: FourierFeatureMap, config: SgmConfig, seeds, **train_kwargs) -> float:
    """Mean over ``seeds`` of the largest loss change on ``probe``.

    For each seed both trainings use that seed, so they visit rows in the
    same order and differ only where the replaced row is used.
    """
    seeds = list(seeds)
    if not seeds:
        raise DomainError("need at least one seed")
    Z_base = fmap.transform(pair.base.features)
    # Same batch path for both sides so unchanged rows are bitwise equal.
    Z_nb = fmap.transform(pair.neighbor.features)
    Z_probe = fmap.transform(probe.features)
    values = []
    for s in seeds:
        cfg = config.with_seed(s)
        w_a = train_features(Z_base, pair.base.labels, cfg, **train_kwargs).w_bar
        w_b = train_features(Z_nb, pair.neighbor.labels, cfg, **train_kwargs).w_bar
        la = huber_hinge(margins(w_a, Z_probe, probe.labels))
        lb = huber_hinge(margins(w_b, Z_probe, probe.labels))
        values.append(float(np.max(np.abs(la - lb))))
    return float(np.mean(values))


@dataclass(frozen=True)
class ExperimentSetup:
    """Data-side settings shared by every cell of a sweep.

    ``gamma=None`` selects the median heuristic on the standardized
    training features.
    """

    D: int = 200
    gamma: float | None = None
    test_fraction: float = 0.2


@dataclass(frozen=True)
class SweepRecord:
    sweep_param: str
    value: str
    seed_count: int
    mean_train_loss: float
    mean_test_loss: float
    mean_gap_loss: float
    std_gap_loss: float
    mean_train_01: float
    mean_test_01: float
    mean_gap_01: float
    std_gap_01: float
    mean_wall_ms: float
    diverged: int = 0
    coords: tuple = ()


SWEEP_COLUMNS = (
    "sweep_param",
    "value",
    "seed_count",
    "mean_train_loss",
    "mean_test_loss",
    "mean_gap_loss",
    "std_gap_loss",
    "mean_train_01",
    "mean_test_01",
    "mean_gap_01",
    "std_gap_01",
    "mean_wall_ms",
    "diverged",
)


def aggregate(sweep_param: str, value, reports, wall_ms, n_diverged: int = 0, coords=()) -> SweepRecord:
    """Collapse per-seed reports into one record (population std over seeds)."""
    count = len(reports) + n_diverged
    if count < 1:
        raise DomainError("aggregate needs at least one run")

    def stat(attr, fn):
        if not reports:
            return math.nan
        return float(fn(np.array([getattr(r, attr) for r in reports])))

    return SweepRecord(
        sweep_param,
        str(value),
        count,
        stat("train_loss", np.mean),
        stat("test_loss", np.mean),
        stat("gap_loss", np.mean),
        stat("gap_loss", np.std),
        stat("train_zero_one", np.mean),
        stat("test_zero_one", np.mean),
        stat("gap_zero_one", np.mean),
        stat("gap_zero_one", np.std),
        float(np.mean(wall_ms)) if len(wall_ms) else math.nan,
        n_diverged,
        tuple(coords),
    )


@dataclass
class _Prepared:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    gamma: float


def _prepare(ds: Dataset, setup: ExperimentSetup, seed: int) -> _Prepared:
    train, test = split(ds, SplitSpec(setup.test_fraction, seed))
    train, scaling = standardize(train)
    test = scaling.apply(test)
    gamma = setup.gamma if setup.gamma is not None else median_heuristic_gamma(train.features, seed=seed)
    return _Prepared(train.features, train.labels, test.features, test.labels, gamma)


def _run_cell(Z_train, y_train, Z_test, y_test, config):
    """One training + evaluation; returns (GapReport or None if diverged, wall ms)."""
    start = time.perf_counter()
    try:
        model = train_features(Z_train, y_train, config)
    except TrainingDivergence:
        return None, (time.perf_counter() - start) * 1e3
    report = GapReport.from_risks(
        risk_of_features(model.w_bar, Z_train, y_train),
        risk_of_features(model.w_bar, Z_test, y_test),
        config.seed,
    )
    return report, (time.perf_counter() - start) * 1e3


def _map_jobs(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _collect(cells, results, seeds, name_of):
    out = []
    per_cell = len(seeds)
    for k, cell in enumerate(cells):
        chunk = results[k * per_cell : (k + 1) * per_cell]
        reports = [r for r, _ in chunk if r is not None]
        wall = [ms for _, ms in chunk]
        name, value = name_of(cell)
        out.append(aggregate(name, value, reports, wall, per_cell - len(reports), coords=cell))
    return out


def _check_seeds(seeds):
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise DomainError("need at least one seed")
    return seeds


def sweep_fourier(ds: Dataset, D_values, config: SgmConfig, seeds, setup: ExperimentSetup = ExperimentSetup(), jobs=None):
    """One record per ``D``; for a given seed every ``D`` sees the same split and shuffling.

    Maps for the same seed are nested: the map with more frequencies
    extends the smaller one.
    """
    D_values = [int(D) for D in D_values]
    if not D_values or min(D_values) < 1:
        raise DomainError("D_values must be a non-empty list of positive integers")
    seeds = _check_seeds(seeds)
    prepared = {s: _prepare(ds, setup, s) for s in seeds}

    def unit(item):
        D, s = item
        p = prepared[s]
        fmap = sample_map(ds.d, D, p.gamma, s)
        return _run_cell(fmap(p.X_train), p.y_train, fmap(p.X_test), p.y_test, config.with_seed(s))

    items = [(D, s) for D in D_values for s in seeds]
    results = _map_jobs(unit, items, jobs)
    return _collect([(D,) for D in D_values], results, seeds, lambda c: ("D", c[0]))


def sweep_epochs_and_size(ds: Dataset, epoch_values, subsample_fractions, config: SgmConfig, seeds, setup: ExperimentSetup = ExperimentSetup(), jobs=None):
    """Grid over ``epochs x training fraction``.

    Subsamples are prefixes of one seeded shuffle of the training split, so
    a larger fraction always contains the smaller ones. Records come out
    fraction-major, epochs ascending within each fraction.
    """
    epoch_values = [int(e) for e in epoch_values]
    fractions = [float(f) for f in subsample_fractions]
    if not epoch_values or min(epoch_values) < 1:
        raise DomainError("epoch values must be >= 1")
    if not fractions or any(not 0.0 < f <= 1.0 for f in fractions):
        raise DomainError("fractions must lie in (0, 1]")
    seeds = _check_seeds(seeds)
    feats = {}
    for s in seeds:
        p = _prepare(ds, setup, s)
        fmap = sample_map(ds.d, setup.D, p.gamma, s)
        order = np.random.default_rng([s, 1]).permutation(p.X_train.shape[0])
        feats[s] = (fmap(p.X_train), p.y_train, fmap(p.X_test), p.y_test, order)

    def unit(item):
        frac, epochs, s = item
        Z_tr, y_tr, Z_te, y_te, order = feats[s]
        m = max(1, math.floor(frac * len(order) + 1e-9))
        idx = order[:m]
        cfg = replace(config.with_seed(s), epochs=epochs)
        return _run_cell(Z_tr[idx], y_tr[idx], Z_te, y_te, cfg)

    cells = [(e, f) for f in fractions for e in epoch_values]
    items = [(f, e, s) for (e, f) in cells for s in seeds]
    results = _map_jobs(unit, items, jobs)
    return _collect(cells, results, seeds, lambda c: ("epochs;fraction", f"{c[0]};{float(c[1])!r}"))


def sweep_learning_rate(ds: Dataset, eta_values, config: SgmConfig, seeds, setup: ExperimentSetup = ExperimentSetup(), jobs=None):
    """One record per step size, in the order given. Diverged runs are counted, not dropped."""
    eta_values = [float(e) for e in eta_values]
    if not eta_values or min(eta_values) <= 0:
        raise DomainError("eta values must be positive")
    seeds = _check_seeds(seeds)
    feats = {}
    for s in seeds:
        p = _prepare(ds, setup, s)
        fmap = sample_map(ds.d, setup.D, p.gamma, s)
        feats[s] = (fmap(p.X_train), p.y_train, fmap(p.X_test), p.y_test)

    def unit(item):
        eta, s = item
        cfg = replace(config.with_seed(s), eta=eta, schedule=Schedule.CONSTANT)
        return _run_cell(*feats[s], cfg)

    items = [(eta, s) for eta in eta_values for s in seeds]
    results = _map_jobs(unit, items, jobs)
    return _collect([(eta,) for eta in eta_values], results, seeds, lambda c: ("eta", repr(float(c[0]))))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_sweep_csv(records, fh, comment: str | None = None, include_timing: bool = True) -> None:
    """Write records with the fixed sweep column set.

    ``comment`` lines are emitted first, each prefixed with ``#``. Without
    ``include_timing`` the wall-time column is left empty, which makes the
    file a pure function of the inputs.
    """
    if comment:
        for line in comment.splitlines():
            fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in records:
        row = [_fmt(getattr(r, c)) for c in SWEEP_COLUMNS]
        if not include_timing:
            row[SWEEP_COLUMNS.index("mean_wall_ms")] = ""
        writer.writerow(row)
