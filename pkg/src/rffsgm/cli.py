"""Command-line front end.

Subcommands: ``train``, ``bounds``, ``sweep {fourier,epochs,lr}``,
``featurize`` and ``stability``. Dataset arguments are file paths or one of
the short names spambase, german, svmguide3, pima (looked up in
``$RFFSGM_DATA_DIR``).

Options can also come from a ``--config`` file of ``key = value`` lines,
with keys spelled like the long flags; command-line flags win.

Exit codes: 0 success, 2 usage, 3 unreadable or malformed data,
4 invalid configuration, 5 numerical failure (divergence).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds as bnd
from .data import BENCHMARK_FILES, Dataset, SplitSpec, load_dataset, load_benchmark, split, standardize
from .errors import ConfigurationError, DataFormatError, DomainError, TrainingDivergence
from .loss import HUBER_HINGE
from .rff import derived_sigma_p, median_heuristic_gamma, sample_map, save_map
from .sgm import Schedule, SgmConfig, resolve_eta, risk_of_features, save_model, train_features
from .stability import (
    ExperimentSetup,
    GapReport,
    empirical_stability,
    make_perturbation_pair,
    sweep_epochs_and_size,
    sweep_fourier,
    sweep_learning_rate,
    write_sweep_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONFIG = 4
EXIT_NUMERIC = 5


class UsageError(Exception):
    pass


# argument types ------------------------------------------------------------


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def gamma_arg(text):
    if text == "median":
        return None
    return positive_float(text)


def parse_grid(text, kind=float):
    """Parse ``a,b,c``, ``start:stop:step`` (inclusive) or ``start:stop:log10``.

    ``log10`` steps by one decade from ``start`` while not exceeding ``stop``.
    """
    text = text.strip()
    if not text:
        raise argparse.ArgumentTypeError("empty grid")
    try:
        if ":" not in text:
            return [kind(v) for v in text.split(",") if v.strip()]
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("expected start:stop:step")
        start, stop = float(parts[0]), float(parts[1])
        if parts[2] == "log10":
            if not (start > 0 and stop >= start):
                raise ValueError("log10 grid needs 0 < start <= stop")
            k0 = math.log10(start)
            count = int(math.floor(math.log10(stop) - k0 + 1e-9)) + 1
            values = [start * 10.0**k for k in range(count)]
            # 1e-4 * 10**3 is not exactly 0.1; snap to the nearest decimal.
            values = [float(f"{v:.12g}") for v in values]
        else:
            step = float(parts[2])
            if not step > 0 or stop < start:
                raise ValueError("arithmetic grid needs step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [start + k * step for k in range(count)]
            values = [float(f"{v:.12g}") for v in values]
        return [kind(v) for v in values]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None


def int_grid(text):
    values = parse_grid(text, float)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"grid {text!r} must contain integers")
    return [int(v) for v in values]


def float_grid(text):
    return parse_grid(text, float)


# parser ----------------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("dataset", help="dataset path, or spambase|german|svmguide3|pima")
    p.add_argument("--format", choices=["auto", "csv", "libsvm"], default="auto")
    p.add_argument("--label-column", type=int, default=-1, help="CSV label column (default: last)")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--gamma", type=gamma_arg, default="median", help="RBF gamma or 'median'")
    p.add_argument("--D", type=positive_int, default=200, help="number of Fourier frequencies")
    p.add_argument("--config", help="key = value file; flags override it")


def _add_sgm_args(p):
    p.add_argument("--eta", type=nonneg_float, default=0.05)
    p.add_argument("--epochs", type=positive_int, default=5)
    p.add_argument("--lambda", dest="lam", type=nonneg_float, default=0.0)
    p.add_argument(
        "--schedule",
        choices=[s.value for s in Schedule],
        default=Schedule.CONSTANT.value,
    )
    p.add_argument("--B", type=positive_float, default=None, help="scale for the theory step sizes")
    p.add_argument("--eps", type=nonneg_float, default=None, help="kernel tolerance (default 1/sqrt(n_train))")


def build_parser():
    parser = argparse.ArgumentParser(prog="rffsgm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="one training run with gap and bound report")
    _add_data_args(p)
    _add_sgm_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--model", help="write the trained model here")
    p.add_argument("--save-map", help="write the feature map here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p.add_argument("--n", type=positive_int)
    p.add_argument("--T", type=positive_int)
    p.add_argument("--eta", type=positive_float)
    p.add_argument("--L", type=positive_float, default=HUBER_HINGE.L)
    p.add_argument("--eps", type=nonneg_float)
    p.add_argument("--d", type=positive_int)
    p.add_argument("--D", type=positive_int)
    p.add_argument("--sigma-p", type=positive_float)
    p.add_argument("--gamma", type=positive_float, help="derive sigma_p from gamma and d")
    p.add_argument("--diam", type=positive_float)
    p.add_argument("--B", type=positive_float)
    p.add_argument("--w-star-norm-sq", type=nonneg_float)
    p.add_argument("--R-star", type=float, default=0.0)
    p.add_argument("--empirical-min", type=float, default=0.0)
    p.add_argument("--c", type=positive_float, default=bnd.DEFAULT_OMEGA_CONSTANT)
    p.add_argument("--include-eps-term", action="store_true")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="generalization-gap sweeps")
    p.add_argument("kind", choices=["fourier", "epochs", "lr"])
    _add_data_args(p)
    _add_sgm_args(p)
    p.add_argument("--grid", help="values of the swept parameter")
    p.add_argument("--sizes", type=float_grid, default="1.0", help="training fractions (epochs sweep)")
    p.add_argument("--seeds", type=int_grid, default="0:9:1")
    p.add_argument("--jobs", type=positive_int, default=1)
    p.add_argument("--timing", action="store_true", help="fill mean_wall_ms (makes output run-dependent)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("featurize", help="dump z-transformed data")
    _add_data_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--which", choices=["all", "train", "test"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("stability", help="perturb-one-sample stability estimate")
    _add_data_args(p)
    _add_sgm_args(p)
    p.add_argument("--seed", type=int, default=0, help="split / map / perturbation seed")
    p.add_argument("--seeds", type=int_grid, default="0:9:1", help="SGM seeds to average over")
    p.add_argument("--index", type=int, default=None, help="training row to replace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)
    return parser


def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key = key.strip().lstrip("-").replace("-", "_")
            values[key] = value.strip()
    return values


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        aliases = {"lambda": "lam"}
        defaults = {}
        for key, value in file_values.items():
            key = aliases.get(key, key)
            if key not in known or key in ("config", "dataset", "kind", "help"):
                raise UsageError(f"{args.config}: unknown key {key!r}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# helpers -----------------------------------------------------------------------


def _log(msg):
    print(msg, file=sys.stderr)


def _load(args) -> Dataset:
    name = args.dataset
    if name.lower() in BENCHMARK_FILES and not Path(name).exists():
        return load_benchmark(name)
    return load_dataset(name, fmt=args.format, label_column=args.label_column)


def _config_comment(args, extra=None):
    items = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out")}
    if args.command != "bounds" and items.get("gamma", 0) is None:
        items["gamma"] = "median"
    if extra:
        items.update(extra)
    return "rffsgm " + __version__ + " " + " ".join(f"{k}={_cfg_value(v)}" for k, v in items.items())


def _cfg_value(v):
    if isinstance(v, (list, tuple)):
        return ",".join(_cfg_value(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@contextlib.contextmanager
def _output(path):
    """Yield a text buffer; on success it is flushed to ``path`` atomically (or stdout)."""
    buf = io.StringIO()
    yield buf
    if path is None:
        sys.stdout.write(buf.getvalue())
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _sgm_config(args, seed):
    return SgmConfig(
        eta=args.eta,
        epochs=args.epochs,
        lam=args.lam,
        seed=seed,
        schedule=Schedule(args.schedule),
        B=args.B,
    )


def _prepared_split(ds, args, seed):
    train, test = split(ds, SplitSpec(args.test_fraction, seed))
    train, scaling = standardize(train)
    test = scaling.apply(test)
    gamma = args.gamma if args.gamma is not None else median_heuristic_gamma(train.features, seed=seed)
    return train, test, gamma


# commands ----------------------------------------------------------------------


TRAIN_COLUMNS = (
    "dataset",
    "n_train",
    "n_test",
    "d",
    "D",
    "gamma",
    "eta",
    "epochs",
    "lambda",
    "seed",
    "T",
    "train_loss",
    "test_loss",
    "gap_loss",
    "train_01",
    "test_01",
    "gap_01",
    "epsilon",
    "sigma_p",
    "diam",
)


def cmd_train(args):
    ds = _load(args)
    train, test, gamma = _prepared_split(ds, args, args.seed)
    n = train.n
    eps = args.eps if args.eps is not None else 1.0 / math.sqrt(n)
    config = _sgm_config(args, args.seed)
    fmap = sample_map(ds.d, args.D, gamma, args.seed)
    Z_train = fmap.transform(train.features)
    model = train_features(Z_train, train.labels, config, epsilon=eps)
    report = GapReport.from_risks(
        risk_of_features(model.w_bar, Z_train, train.labels),
        risk_of_features(model.w_bar, fmap.transform(test.features), test.labels),
        args.seed,
    )
    sigma_p = derived_sigma_p(gamma, ds.d)
    diam = bnd.data_diameter(train.features)
    T = config.epochs * n
    inputs = bnd.BoundInputs(
        n=n, T=T, eta=model.eta if model.eta > 0 else None, L=HUBER_HINGE.L, epsilon=eps,
        d=ds.d, D=args.D, sigma_p=sigma_p, diam=diam, B=args.B,
    )
    table = bnd.bound_table(inputs, empirical_min=report.train_loss)

    _log(f"dataset={ds.name} n={ds.n} d={ds.d} n_train={n} n_test={test.n} (test size = floor(test_fraction*n))")
    _log(f"resolved eta={model.eta!r} gamma={gamma!r} D={args.D} diam={diam!r} sigma_p={sigma_p!r} epsilon={eps!r} T={T}")
    _log(f"train: loss={report.train_loss:.6f} 0/1={report.train_zero_one:.6f}")
    _log(f"test:  loss={report.test_loss:.6f} 0/1={report.test_zero_one:.6f}")
    _log(f"gap:   loss={report.gap_loss:.6f} 0/1={report.gap_zero_one:.6f}")
    for name, value, note in table:
        shown = "n/a" if value is None else repr(value)
        _log(f"bound {name} = {shown}" + (f"  ({note})" if note else ""))

    row = {
        "dataset": ds.name, "n_train": n, "n_test": test.n, "d": ds.d, "D": args.D,
        "gamma": gamma, "eta": model.eta, "epochs": config.epochs, "lambda": config.lam,
        "seed": args.seed, "T": T, "train_loss": report.train_loss,
        "test_loss": report.test_loss, "gap_loss": report.gap_loss,
        "train_01": report.train_zero_one, "test_01": report.test_zero_one,
        "gap_01": report.gap_zero_one, "epsilon": eps, "sigma_p": sigma_p, "diam": diam,
    }
    bound_cols = [f"bound_{name}" for name, _, _ in table]
    for (name, value, _), col in zip(table, bound_cols):
        row[col] = "" if value is None else value

    with _output(args.out) as fh:
        if args.out:
            fh.write("# " + _config_comment(args) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        cols = list(TRAIN_COLUMNS) + bound_cols
        writer.writerow(cols)
        writer.writerow([_cfg_value(row[c]) for c in cols])
    if args.model:
        map_ref = {"d": ds.d, "D": args.D, "gamma": gamma, "seed": args.seed}
        save_model(model, args.model, config, map_ref)
    if args.save_map:
        save_map(fmap, args.save_map)
    return EXIT_OK


def cmd_bounds(args):
    sigma_p = args.sigma_p
    if sigma_p is None and args.gamma is not None and args.d is not None:
        sigma_p = derived_sigma_p(args.gamma, args.d)
    inputs = bnd.BoundInputs(
        n=args.n, T=args.T, eta=args.eta, L=args.L, epsilon=args.eps, d=args.d, D=args.D,
        sigma_p=sigma_p, diam=args.diam, B=args.B, w_star_norm_sq=args.w_star_norm_sq,
    )
    table = bnd.bound_table(
        inputs, R_star=args.R_star, empirical_min=args.empirical_min, c=args.c,
        include_eps_term=args.include_eps_term,
    )
    with _output(args.out) as fh:
        if args.out:
            fh.write("# " + _config_comment(args) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bound", "value", "note"])
        for name, value, note in table:
            writer.writerow([name, "" if value is None else repr(value), note])
    return EXIT_OK


_DEFAULT_GRIDS = {
    "fourier": "10,25,50,100,200",
    "epochs": "1,2,5,10,20,50",
    "lr": "1e-4:1e-1:log10",
}


def cmd_sweep(args):
    grid_text = args.grid or _DEFAULT_GRIDS[args.kind]
    try:
        grid = int_grid(grid_text) if args.kind in ("fourier", "epochs") else float_grid(grid_text)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None
    if args.kind == "lr":
        grid = sorted(grid)
    if args.kind == "lr" and min(grid) <= 0:
        raise UsageError("learning rates must be positive")
    ds = _load(args)
    setup = ExperimentSetup(D=args.D, gamma=args.gamma, test_fraction=args.test_fraction)
    config = _sgm_config(args, 0)
    start = time.perf_counter()
    if args.kind == "fourier":
        records = sweep_fourier(ds, grid, config, args.seeds, setup, jobs=args.jobs)
    elif args.kind == "epochs":
        records = sweep_epochs_and_size(ds, grid, args.sizes, config, args.seeds, setup, jobs=args.jobs)
    else:
        records = sweep_learning_rate(ds, grid, config, args.seeds, setup, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    _log(f"sweep {args.kind} on {ds.name}: {len(records)} rows, {len(args.seeds)} seeds, {elapsed:.2f} s")
    comment = _config_comment(args, {"grid": grid}) if args.out else None
    with _output(args.out) as fh:
        write_sweep_csv(records, fh, comment=comment, include_timing=args.timing)
    if all(r.diverged == r.seed_count for r in records):
        _log("every cell diverged")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_featurize(args):
    ds = _load(args)
    train, test, gamma = _prepared_split(ds, args, args.seed)
    fmap = sample_map(ds.d, args.D, gamma, args.seed)
    parts = {"train": [train], "test": [test], "all": [train, test]}[args.which]
    with _output(args.out) as fh:
        if args.out:
            fh.write("# " + _config_comment(args, {"resolved_gamma": gamma}) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["split", "label"] + [f"z{j}" for j in range(fmap.output_dim)])
        for part in parts:
            Z = fmap.transform(part.features)
            tag = "train" if part is train else "test"
            for z, label in zip(Z, part.labels):
                writer.writerow([tag, int(label)] + [repr(float(v)) for v in z])
    return EXIT_OK


def cmd_stability(args):
    ds = _load(args)
    train, test, gamma = _prepared_split(ds, args, args.seed)
    fmap = sample_map(ds.d, args.D, gamma, args.seed)
    pair = make_perturbation_pair(train, test, seed=args.seed, index=args.index)
    config = _sgm_config(args, 0)
    eps = args.eps if args.eps is not None else 1.0 / math.sqrt(train.n)
    value = empirical_stability(pair, test, fmap, config, args.seeds, epsilon=eps)
    eta = resolve_eta(config, train.n, epsilon=eps)
    T = config.epochs * train.n
    bound = bnd.stability_bound(bnd.BoundInputs(n=train.n, T=T, eta=eta, L=HUBER_HINGE.L))
    _log(f"empirical stability {value!r} vs bound T L^2 eta / n = {bound!r}")
    with _output(args.out) as fh:
        if args.out:
            fh.write("# " + _config_comment(args, {"resolved_gamma": gamma}) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "n", "T", "eta", "replaced_index", "seed_count", "empirical_stability", "stability_bound"])
        writer.writerow([ds.name, train.n, T, repr(eta), pair.replaced_index, len(args.seeds), repr(value), repr(bound)])
    return EXIT_OK


def main(argv=None):
    try:
        args = parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # argparse reports usage errors (and --help / --version) this way
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        _log(f"rffsgm: error: {exc}")
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        _log(f"rffsgm: data error: {exc}")
        return EXIT_DATA
    except TrainingDivergence as exc:
        _log(f"rffsgm: numerical failure: {exc}")
        return EXIT_NUMERIC
    except (ConfigurationError, DomainError) as exc:
        _log(f"rffsgm: configuration error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
