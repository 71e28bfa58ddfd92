"""Benchmark objective functions.

Problems are built as the (compatibility-filtered) product of small
natively implemented ML tuning tasks, embedded deterministic datasets,
and loss metrics, plus a few synthetic objectives with known optima.
Every evaluation is deterministic given the suggestion and a trial seed;
the trial seed perturbs the 80/20 train/validation split, which is what
makes the objective noisy across repeated trials.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvaluationCrash
from .seeding import stable_seed
from .space import ParamSpec, SearchSpace, Suggestion

MIN_ROWS = 20
VALIDATION_FRACTION = 0.2


@dataclass(frozen=True)
class Dataset:
    """A small in-memory dataset produced by a seeded generator."""

    kind: str
    seed: int
    features: np.ndarray
    targets: np.ndarray
    task: str  # "regression" | "classification"

    @property
    def label(self) -> str:
        return f"{self.kind}{self.seed}"

    @property
    def n_classes(self) -> int:
        if self.task != "classification":
            return 0
        return int(self.targets.max()) + 1

    def to_csv(self, path) -> None:
        """Write feature columns plus a target column for inspection."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.features.shape[1])] + ["y"])
            for row, y in zip(self.features, self.targets):
                writer.writerow(list(row) + [y])


def _gen_linear(rng: np.random.Generator, n_rows: int) -> tuple[np.ndarray, np.ndarray, str]:
    X = rng.normal(size=(n_rows, 8))
    w = np.array([2.0, -1.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0])
    y = X @ w + 0.5 * rng.normal(size=n_rows)
    return X, y, "regression"


def _gen_friedman(rng: np.random.Generator, n_rows: int) -> tuple[np.ndarray, np.ndarray, str]:
    X = rng.uniform(size=(n_rows, 8))
    y = (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
        + rng.normal(size=n_rows)
    )
    return X, y, "regression"


def _gen_blobs(rng: np.random.Generator, n_rows: int) -> tuple[np.ndarray, np.ndarray, str]:
    n_classes, n_feat = 3, 4
    centers = rng.normal(scale=3.0, size=(n_classes, n_feat))
    labels = rng.integers(n_classes, size=n_rows)
    X = centers[labels] + rng.normal(size=(n_rows, n_feat))
    return X, labels.astype(int), "classification"


def _gen_moons(rng: np.random.Generator, n_rows: int) -> tuple[np.ndarray, np.ndarray, str]:
    n_a = n_rows // 2
    n_b = n_rows - n_a
    theta_a = rng.uniform(0, np.pi, size=n_a)
    theta_b = rng.uniform(0, np.pi, size=n_b)
    a = np.column_stack([np.cos(theta_a), np.sin(theta_a)])
    b = np.column_stack([1.0 - np.cos(theta_b), 0.5 - np.sin(theta_b)])
    X = np.vstack([a, b]) + 0.15 * rng.normal(size=(n_rows, 2))
    y = np.concatenate([np.zeros(n_a, dtype=int), np.ones(n_b, dtype=int)])
    return X, y, "classification"


GENERATORS = {
    "linear": _gen_linear,
    "friedman": _gen_friedman,
    "blobs": _gen_blobs,
    "moons": _gen_moons,
}


def generate_dataset(kind: str, seed: int, n_rows: int) -> Dataset:
    """Deterministically generate a dataset; same inputs, same bits."""
    if kind not in GENERATORS:
        raise ConfigError(f"unknown dataset generator {kind!r}; known: {sorted(GENERATORS)}")
    if n_rows < MIN_ROWS:
        raise ConfigError(f"n_rows must be >= {MIN_ROWS}, got {n_rows}")
    rng = np.random.default_rng(stable_seed("dataset", kind, seed))
    X, y, task = GENERATORS[kind](rng, n_rows)
    return Dataset(kind=kind, seed=seed, features=X, targets=y, task=task)


# --- metrics (all losses; lower is better) ---------------------------------


def _mse(y_true, y_pred):
    with np.errstate(over="ignore"):  # divergent models overflow to inf, then crash
        return float(np.mean((y_true - y_pred) ** 2))


def _mae(y_true, y_pred):
    return float(np.mean(np.abs(y_true - y_pred)))


def _nll(y_true, proba):
    p = np.clip(proba[np.arange(len(y_true)), y_true.astype(int)], 1e-12, None)
    return float(-np.mean(np.log(p)))


def _error_rate(y_true, proba):
    return float(np.mean(np.argmax(proba, axis=1) != y_true))


METRICS = {
    "mse": ("regression", _mse),
    "mae": ("regression", _mae),
    "nll": ("classification", _nll),
    "err": ("classification", _error_rate),
}


# --- native models ----------------------------------------------------------


def _ridge_fit_predict(params, X_tr, y_tr, X_va):
    alpha = float(params["alpha"])
    if params["standardize"]:
        mu = X_tr.mean(axis=0)
        sd = X_tr.std(axis=0) + 1e-12
        X_tr = (X_tr - mu) / sd
        X_va = (X_va - mu) / sd
    x_mean = X_tr.mean(axis=0)
    y_mean = y_tr.mean()
    Xc = X_tr - x_mean
    A = Xc.T @ Xc + alpha * np.eye(Xc.shape[1])
    beta = np.linalg.solve(A, Xc.T @ (y_tr - y_mean))
    return (X_va - x_mean) @ beta + y_mean


def _sqdist(a, b):
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * a @ b.T
    return np.maximum(sq, 0.0)


def _kernel_ridge_fit_predict(params, X_tr, y_tr, X_va):
    alpha = float(params["alpha"])
    gamma = float(params["gamma"])
    if params["standardize"]:
        mu = X_tr.mean(axis=0)
        sd = X_tr.std(axis=0) + 1e-12
        X_tr = (X_tr - mu) / sd
        X_va = (X_va - mu) / sd
    y_mean = y_tr.mean()
    K = np.exp(-gamma * _sqdist(X_tr, X_tr))
    coef = np.linalg.solve(K + alpha * np.eye(len(X_tr)), y_tr - y_mean)
    return np.exp(-gamma * _sqdist(X_va, X_tr)) @ coef + y_mean


def _minkowski(a, b, p):
    # pairwise distances, rows of a vs rows of b
    diff = np.abs(a[:, None, :] - b[None, :, :])
    return (diff**p).sum(axis=2) ** (1.0 / p)


def _knn_weights(params, X_tr, X_va):
    k = min(int(params["k"]), len(X_tr))
    d = _minkowski(X_va, X_tr, float(params["p"]))
    idx = np.argsort(d, axis=1, kind="stable")[:, :k]
    if params["weights"] == "distance":
        w = 1.0 / (np.take_along_axis(d, idx, axis=1) + 1e-12)
    else:
        w = np.ones_like(idx, dtype=float)
    return idx, w / w.sum(axis=1, keepdims=True)


def _knn_regress(params, X_tr, y_tr, X_va):
    idx, w = _knn_weights(params, X_tr, X_va)
    return (y_tr[idx] * w).sum(axis=1)


def _knn_proba(params, X_tr, y_tr, X_va, n_classes):
    idx, w = _knn_weights(params, X_tr, X_va)
    proba = np.zeros((len(X_va), n_classes))
    for c in range(n_classes):
        proba[:, c] = (w * (y_tr[idx] == c)).sum(axis=1)
    proba += 1e-9
    return proba / proba.sum(axis=1, keepdims=True)


def _mlp_regress(params, X_tr, y_tr, X_va, trial_seed, n_iter=60):
    """One hidden layer, full-batch gradient descent with momentum.

    Deterministic: weights initialize from the trial seed, iteration
    count is fixed.  Divergent settings overflow to non-finite
    predictions, which the evaluator reports as a crash.
    """
    rng = np.random.default_rng(stable_seed("mlp-init", trial_seed))
    mu, sd = X_tr.mean(axis=0), X_tr.std(axis=0) + 1e-12
    X_tr = (X_tr - mu) / sd
    X_va = (X_va - mu) / sd
    y_mean = y_tr.mean()
    y = (y_tr - y_mean)[:, None]
    n, d = X_tr.shape
    h = int(params["hidden"])
    lr, l2 = float(params["lr"]), float(params["l2"])
    mom, scale = float(params["momentum"]), float(params["init_scale"])
    relu = params["activation"] == "relu"
    W1 = scale * rng.normal(size=(d, h)) / math.sqrt(d)
    b1 = np.zeros(h)
    W2 = scale * rng.normal(size=(h, 1)) / math.sqrt(h)
    b2 = np.zeros(1)
    vel = [np.zeros_like(W) for W in (W1, b1, W2, b2)]
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_iter):
            Z = X_tr @ W1 + b1
            H = np.maximum(Z, 0.0) if relu else np.tanh(Z)
            err = (H @ W2 + b2) - y
            gW2 = H.T @ err / n + l2 * W2
            gb2 = err.mean(axis=0)
            dH = err @ W2.T
            dZ = dH * ((Z > 0) if relu else (1.0 - H * H))
            gW1 = X_tr.T @ dZ / n + l2 * W1
            gb1 = dZ.mean(axis=0)
            params_and_grads = ((W1, gW1), (b1, gb1), (W2, gW2), (b2, gb2))
            for v, (W, g) in zip(vel, params_and_grads):
                v *= mom
                v -= lr * g
                W += v
            if not np.isfinite(W1).all():
                return np.full(len(X_va), np.nan)
        Z = X_va @ W1 + b1
        H = np.maximum(Z, 0.0) if relu else np.tanh(Z)
        return (H @ W2 + b2)[:, 0] + y_mean


def _kernel_smoother_regress(params, X_tr, y_tr, X_va):
    """Nadaraya-Watson regression with a tunable bandwidth and kernel."""
    h = float(params["bandwidth"])
    p = float(params["p"])
    shrink = float(params["shrinkage"])
    z = _minkowski(X_va, X_tr, p) / h
    kind = params["kernel"]
    if kind == "gaussian":
        w = np.exp(-0.5 * z * z)
    elif kind == "tricube":
        w = np.where(z < 1.0, (1.0 - np.minimum(z, 1.0) ** 3) ** 3, 0.0)
    else:  # box
        w = (z < 1.0).astype(float)
    y_mean = y_tr.mean()
    mass = w.sum(axis=1)
    with np.errstate(invalid="ignore"):
        local = np.where(mass > 1e-300, w @ y_tr / np.where(mass > 1e-300, mass, 1.0), y_mean)
    return (1.0 - shrink) * local + shrink * y_mean


def _gbs_regress(params, X_tr, y_tr, X_va, trial_seed, n_bins=16):
    """Gradient-boosted stumps on quantile-binned features.

    Row subsampling draws from the trial seed, so repeated evaluation of
    one suggestion within a trial is deterministic.
    """
    rng = np.random.default_rng(stable_seed("gbs-rows", trial_seed))
    n, d = X_tr.shape
    n_rounds = int(params["rounds"])
    lr = float(params["learning_rate"])
    subsample = float(params["subsample"])
    colsample = float(params["colsample"])
    edges = np.quantile(X_tr, np.linspace(0, 1, n_bins + 1)[1:-1], axis=0)  # (bins-1, d)
    bins_tr = np.empty((n, d), dtype=np.int64)
    bins_va = np.empty((len(X_va), d), dtype=np.int64)
    for j in range(d):
        bins_tr[:, j] = np.searchsorted(edges[:, j], X_tr[:, j], side="right")
        bins_va[:, j] = np.searchsorted(edges[:, j], X_va[:, j], side="right")
    y_mean = y_tr.mean()
    pred_tr = np.full(n, y_mean)
    pred_va = np.full(len(X_va), y_mean)
    n_rows = max(8, int(round(subsample * n)))
    n_cols = max(1, int(round(colsample * d)))
    for _ in range(n_rounds):
        rows = rng.choice(n, n_rows, replace=False) if n_rows < n else np.arange(n)
        cols = np.sort(rng.choice(d, n_cols, replace=False)) if n_cols < d else np.arange(d)
        resid = y_tr[rows] - pred_tr[rows]
        best = None  # (sse, feature, threshold bin, left mean, right mean)
        for j in cols:
            b = bins_tr[rows, j]
            sums = np.bincount(b, weights=resid, minlength=n_bins)
            counts = np.bincount(b, minlength=n_bins)
            cs, cc = np.cumsum(sums), np.cumsum(counts)
            total_s, total_c = cs[-1], cc[-1]
            left_c, left_s = cc[:-1], cs[:-1]
            right_c, right_s = total_c - left_c, total_s - left_s
            ok = (left_c > 0) & (right_c > 0)
            if not ok.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                gain = np.where(ok, left_s**2 / left_c + right_s**2 / right_c, -np.inf)
            t = int(np.argmax(gain))
            if best is None or gain[t] > best[0]:
                left_mean = left_s[t] / left_c[t]
                right_mean = right_s[t] / right_c[t]
                best = (gain[t], j, t, left_mean, right_mean)
        if best is None:
            break
        _, j, t, lm, rm = best
        pred_tr += lr * np.where(bins_tr[:, j] <= t, lm, rm)
        pred_va += lr * np.where(bins_va[:, j] <= t, lm, rm)
    return pred_va


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _logreg_proba(params, X_tr, y_tr, X_va, n_classes, n_iter=150):
    lr = float(params["lr"])
    l2 = float(params["l2"])
    if params["fit_intercept"]:
        X_tr = np.column_stack([X_tr, np.ones(len(X_tr))])
        X_va = np.column_stack([X_va, np.ones(len(X_va))])
    W = np.zeros((X_tr.shape[1], n_classes))
    onehot = np.eye(n_classes)[y_tr.astype(int)]
    for _ in range(n_iter):
        G = X_tr.T @ (_softmax(X_tr @ W) - onehot) / len(X_tr) + l2 * W
        W -= lr * G
    return _softmax(X_va @ W)


def _ridge_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("alpha", "real", "log", (1e-6, 1e4)),
            ParamSpec("standardize", "bool"),
        )
    )


def _kernel_ridge_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("alpha", "real", "log", (1e-8, 1e3)),
            ParamSpec("gamma", "real", "log", (1e-5, 1e4)),
            ParamSpec("standardize", "bool"),
        )
    )


def _knn_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("k", "int", "linear", (1, 40)),
            ParamSpec("weights", "cat", values=("uniform", "distance")),
            ParamSpec("p", "real", "linear", (1.0, 4.0)),
        )
    )


def _mlp_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("lr", "real", "log", (1e-5, 0.5)),
            ParamSpec("l2", "real", "log", (1e-8, 1.0)),
            ParamSpec("hidden", "int", "linear", (4, 64)),
            ParamSpec("activation", "cat", values=("relu", "tanh")),
            ParamSpec("momentum", "real", "linear", (0.0, 0.99)),
            ParamSpec("init_scale", "real", "log", (1e-3, 10.0)),
        )
    )


def _kernel_smoother_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("bandwidth", "real", "log", (1e-2, 1e2)),
            ParamSpec("kernel", "cat", values=("gaussian", "tricube", "box")),
            ParamSpec("p", "real", "linear", (1.0, 4.0)),
            ParamSpec("shrinkage", "real", "linear", (0.0, 1.0)),
        )
    )


def _gbs_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("rounds", "int", "log", (1, 400)),
            ParamSpec("learning_rate", "real", "log", (1e-3, 1.0)),
            ParamSpec("subsample", "real", "linear", (0.15, 1.0)),
            ParamSpec("colsample", "real", "linear", (0.15, 1.0)),
        )
    )


def _logreg_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("lr", "real", "log", (1e-4, 10.0)),
            ParamSpec("l2", "real", "log", (1e-7, 10.0)),
            ParamSpec("fit_intercept", "bool"),
        )
    )


# name -> (space factory, supported tasks)
MODELS = {
    "ridge": (_ridge_space, ("regression",)),
    "kridge": (_kernel_ridge_space, ("regression",)),
    "mlp": (_mlp_space, ("regression",)),
    "gbs": (_gbs_space, ("regression",)),
    "kern": (_kernel_smoother_space, ("regression",)),
    "knn": (_knn_space, ("regression", "classification")),
    "logreg": (_logreg_space, ("classification",)),
}


@dataclass(frozen=True)
class MLTaskEvaluator:
    """Trains a native model on a seeded split and scores the metric.

    Picklable so studies can run in worker processes.
    """

    model: str
    dataset: Dataset
    metric: str

    def __call__(self, params: Suggestion, trial_seed: int) -> float:
        ds = self.dataset
        rng = np.random.default_rng(stable_seed("split", trial_seed))
        order = rng.permutation(len(ds.targets))
        n_val = max(1, int(round(VALIDATION_FRACTION * len(order))))
        val, tr = order[:n_val], order[n_val:]
        X_tr, y_tr = ds.features[tr], ds.targets[tr]
        X_va, y_va = ds.features[val], ds.targets[val]
        loss_fn = METRICS[self.metric][1]
        if ds.task == "regression":
            if self.model == "ridge":
                pred = _ridge_fit_predict(params, X_tr, y_tr, X_va)
            elif self.model == "kridge":
                pred = _kernel_ridge_fit_predict(params, X_tr, y_tr, X_va)
            elif self.model == "mlp":
                pred = _mlp_regress(params, X_tr, y_tr, X_va, trial_seed)
            elif self.model == "gbs":
                pred = _gbs_regress(params, X_tr, y_tr, X_va, trial_seed)
            elif self.model == "kern":
                pred = _kernel_smoother_regress(params, X_tr, y_tr, X_va)
            elif self.model == "knn":
                pred = _knn_regress(params, X_tr, y_tr, X_va)
            else:
                raise ConfigError(f"model {self.model!r} does not support regression")
            out = loss_fn(y_va, pred)
        else:
            if self.model == "knn":
                proba = _knn_proba(params, X_tr, y_tr, X_va, ds.n_classes)
            elif self.model == "logreg":
                proba = _logreg_proba(params, X_tr, y_tr, X_va, ds.n_classes)
            else:
                raise ConfigError(f"model {self.model!r} does not support classification")
            out = loss_fn(y_va, proba)
        if not math.isfinite(out):
            raise EvaluationCrash(f"{self.model} produced a non-finite loss")
        return out


@dataclass(frozen=True)
class SphereEvaluator:
    """Sum of squares over the real parameters; optimum 0 at the origin."""

    def __call__(self, params: Suggestion, trial_seed: int) -> float:
        return float(sum(v * v for v in params.values()))


@dataclass(frozen=True)
class IdentityEvaluator:
    """Returns the single parameter's value; optimum 0 at x = 0."""

    def __call__(self, params: Suggestion, trial_seed: int) -> float:
        return float(params["x"])


@dataclass(frozen=True)
class CrashProbeEvaluator:
    """Crashes whenever ``tol`` drops below the knee; smooth elsewhere."""

    knee: float = 1e-4

    def __call__(self, params: Suggestion, trial_seed: int) -> float:
        tol = float(params["tol"])
        if tol < self.knee:
            raise EvaluationCrash(f"tol={tol} below {self.knee}")
        return abs(math.log10(tol) + 2.0)


@dataclass(frozen=True)
class Problem:
    """A single optimization problem: space + deterministic evaluator."""

    id: str
    space: SearchSpace
    evaluator: object
    known_opt: float | None = None


@dataclass(frozen=True)
class ProblemSuite:
    problems: tuple = ()
    split_label: str = "practice"

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(self.problems))
        if not self.problems:
            raise ConfigError("a suite needs at least one problem")
        ids = [p.id for p in self.problems]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate problem ids: {ids}")

    @property
    def ids(self) -> list:
        return [p.id for p in self.problems]


def evaluate(problem: Problem, suggestion: Suggestion, trial_seed: int) -> float:
    """Validate then evaluate; crashes propagate as :class:`EvaluationCrash`."""
    problem.space.validate(suggestion)
    return problem.evaluator(suggestion, trial_seed)


def make_ml_problem(model: str, dataset: Dataset, metric: str) -> Problem:
    space_factory, tasks = MODELS[model]
    return Problem(
        id=f"{model}-{dataset.label}-{metric}",
        space=space_factory(),
        evaluator=MLTaskEvaluator(model, dataset, metric),
    )


def build_suite(models: list, datasets: list, metrics: list, split_label: str = "practice") -> ProblemSuite:
    """Product of models x datasets x metrics, filtered for compatibility.

    A triple is kept when the metric's task matches the dataset's task
    and the model supports that task.  An empty result is a config error.
    """
    if not models or not datasets or not metrics:
        raise ConfigError("models, datasets, and metrics must all be nonempty")
    for m in models:
        if m not in MODELS:
            raise ConfigError(f"unknown model {m!r}; known: {sorted(MODELS)}")
    for m in metrics:
        if m not in METRICS:
            raise ConfigError(f"unknown metric {m!r}; known: {sorted(METRICS)}")
    problems = []
    for model in models:
        _, tasks = MODELS[model]
        for ds in datasets:
            if ds.task not in tasks:
                continue
            for metric in metrics:
                if METRICS[metric][0] != ds.task:
                    continue
                problems.append(make_ml_problem(model, ds, metric))
    if not problems:
        raise ConfigError("no compatible (model, dataset, metric) combinations")
    return ProblemSuite(tuple(problems), split_label)


def make_synthetic_problem(name: str, dim: int = 2) -> Problem:
    """Synthetic objectives with analytically known optima (or crash knees)."""
    if name == "sphere":
        space = SearchSpace(
            tuple(ParamSpec(f"x{i}", "real", "linear", (-1.0, 1.0)) for i in range(dim))
        )
        return Problem(f"sphere{dim}-unit-value", space, SphereEvaluator(), known_opt=0.0)
    if name == "identity":
        space = SearchSpace((ParamSpec("x", "real", "linear", (0.0, 1.0)),))
        return Problem("identity-unit-value", space, IdentityEvaluator(), known_opt=0.0)
    if name == "crashy":
        space = SearchSpace((ParamSpec("tol", "real", "log", (1e-6, 1e-1)),))
        return Problem("crashy-unit-value", space, CrashProbeEvaluator())
    raise ConfigError(f"unknown synthetic problem {name!r}")


# --- suite manifests --------------------------------------------------------

REFERENCE_SUITE = [
    {"model": model, "dataset_kind": kind, "dataset_seed": seed, "metric": metric, "n_rows": 120}
    for model in ("kern", "knn")
    for kind, seed in (("linear", 1), ("friedman", 2), ("linear", 3))
    for metric in ("mse", "mae")
]


def suite_from_manifest(entries: list, split_label: str = "practice") -> ProblemSuite:
    """Build a suite from a manifest: a list of problem descriptors.

    Each entry: ``{"model", "dataset_kind", "dataset_seed", "metric"}``
    plus optional ``n_rows`` (default 300).
    """
    if not isinstance(entries, list) or not entries:
        raise ConfigError("suite manifest must be a nonempty list of problem entries")
    problems = []
    cache: dict[tuple, Dataset] = {}
    for entry in entries:
        missing = {"model", "dataset_kind", "dataset_seed", "metric"} - set(entry)
        if missing:
            raise ConfigError(f"suite entry missing keys {sorted(missing)}: {entry}")
        model, metric = entry["model"], entry["metric"]
        if model not in MODELS:
            raise ConfigError(f"unknown model {model!r}")
        if metric not in METRICS:
            raise ConfigError(f"unknown metric {metric!r}")
        key = (entry["dataset_kind"], int(entry["dataset_seed"]), int(entry.get("n_rows", 300)))
        if key not in cache:
            cache[key] = generate_dataset(*key)
        ds = cache[key]
        if ds.task not in MODELS[model][1] or METRICS[metric][0] != ds.task:
            raise ConfigError(f"incompatible suite entry: {entry}")
        problems.append(make_ml_problem(model, ds, metric))
    return ProblemSuite(tuple(problems), split_label)


def reference_suite() -> ProblemSuite:
    """The bundled desk-scale suite: 2 models x 3 datasets x 2 metrics."""
    return suite_from_manifest(REFERENCE_SUITE, split_label="practice")
