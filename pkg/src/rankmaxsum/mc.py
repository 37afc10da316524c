"""Monte Carlo campaigns: empirical size, power curves and the null independence diagnostic.

Every replicate draws from its own ``SeedSequence`` keyed by
``(seed, campaign tag, grid index, replicate index)``, so results do not
depend on worker count or scheduling order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .baselines import com_from_reports, eb_statistic, max_statistic, permutation_pvalue
from .combine import combine_reports
from .dgp import (
    DEFAULT_GRID,
    CovarianceSpec,
    ErrorSpec,
    SignalDesign,
    SignalSpec,
    generate,
    make_beta_design1,
    make_beta_design2,
)
from .maxtest import (
    c_n,
    draw_multipliers,
    gumbel_pvalue,
    marginal_directions,
    multiplier_maxima,
    multiplier_pvalue_from_maxima,
    precision_directions,
)
from .model import (
    ALL_METHODS,
    Calibration,
    DomainError,
    GumbelCalibration,
    Method,
    RankMaxSumError,
    TestReport,
    validate,
)
from .precision import DEFAULT_SPLITS, estimate_precision
from .ranks import wilcoxon_scores
from .sumtest import normal_upper_pvalue, sum_test_internals

_TAGS = {"size": 1, "power": 2, "independence": 3}


class ReplicateError(RankMaxSumError):
    def __init__(self, replicate: int, cause: Exception):
        super().__init__(f"replicate {replicate} failed: {type(cause).__name__}: {cause}")
        self.replicate = replicate


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: int
    covariance: CovarianceSpec
    error: ErrorSpec = ErrorSpec()
    signal: SignalSpec = SignalSpec()
    methods: tuple[Method, ...] = ALL_METHODS
    replications: int = 1000
    alpha: float = 0.05
    seed: int = 0
    bootstrap_B: int = 2000
    perm_B: int = 500
    max_calibration: Calibration = Calibration.MULTIPLIER
    cv_splits: int = DEFAULT_SPLITS
    oracle_omega: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "max_calibration", Calibration(self.max_calibration))
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.methods:
            raise DomainError("at least one method is required")
        if self.covariance.p != self.p:
            raise DomainError(f"covariance dimension {self.covariance.p} != p={self.p}")
        if self.n < 4:
            raise DomainError(f"simulations need n >= 4, got n={self.n}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class RejectionRow:
    cell: dict
    method: str
    rejections: int
    replications: int

    @property
    def frequency(self) -> float:
        return self.rejections / self.replications

    @property
    def standard_error(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.replications)

    def to_record(self) -> dict:
        return {
            **self.cell,
            "method": self.method,
            "rejections": self.rejections,
            "replications": self.replications,
            "frequency": self.frequency,
            "standard_error": self.standard_error,
        }


@dataclass
class RejectionTable:
    """Rows of rejection frequencies; used both for size tables and power curves."""

    kind: str
    rows: list[RejectionRow] = field(default_factory=list)

    def lookup(self, method: Method | str, **cell) -> RejectionRow:
        method = Method(method).value
        for row in self.rows:
            if row.method == method and all(row.cell.get(k) == v for k, v in cell.items()):
                return row
        raise KeyError(f"no row for {method} with {cell}")

    def to_records(self) -> list[dict]:
        return [row.to_record() for row in self.rows]

    def format_text(self) -> str:
        """Aligned text table in percent, one line per cell, one column per method."""
        methods = []
        cells = []
        for row in self.rows:
            if row.method not in methods:
                methods.append(row.method)
            if row.cell not in cells:
                cells.append(row.cell)
        keys = list(cells[0].keys()) if cells else []
        header = keys + methods
        lines = [header]
        for cell in cells:
            line = [str(cell[k]) for k in keys]
            for m in methods:
                try:
                    line.append(f"{100 * self.lookup(m, **cell).frequency:.1f}")
                except KeyError:
                    line.append("-")
            lines.append(line)
        widths = [max(len(r[i]) for r in lines) for i in range(len(header))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in lines) + "\n"


SizeTable = RejectionTable
PowerCurve = RejectionTable


@dataclass(frozen=True)
class JointTail:
    statistic: str
    correlation: float
    joint_frequency: float
    table: tuple[tuple[int, int], tuple[int, int]]
    replications: int

    def to_record(self) -> dict:
        return {
            "statistic": self.statistic,
            "correlation": self.correlation,
            "joint_frequency": self.joint_frequency,
            "table": [list(r) for r in self.table],
            "replications": self.replications,
        }


@dataclass
class IndependenceDiag:
    rs_rejection: float
    pairs: dict[str, JointTail]
    t_rs: np.ndarray
    centered_max: dict[str, np.ndarray]

    def to_records(self) -> list[dict]:
        out = [{"statistic": "RS", "rejection": self.rs_rejection, "replications": len(self.t_rs)}]
        out.extend(self.pairs[k].to_record() for k in sorted(self.pairs))
        return out


STREAM_NAMES = ("data", "beta", "boot", "perm", "cv")


def replicate_streams(seed: int, key: tuple[int, ...]) -> dict[str, np.random.Generator]:
    """Independent named generators for one replicate, keyed by ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    children = ss.spawn(len(STREAM_NAMES))
    return {k: np.random.Generator(np.random.PCG64(c)) for k, c in zip(STREAM_NAMES, children)}


def _streams(seed: int, tag: str, cell: int, grid_index: int, r: int) -> dict[str, np.random.Generator]:
    return replicate_streams(seed, (_TAGS[tag], cell, grid_index, r))


def _required(methods) -> set[Method]:
    need = set(methods)
    if Method.RC1 in need:
        need |= {Method.RS, Method.RM1}
    if Method.RC2 in need:
        need |= {Method.RS, Method.RM2}
    if Method.COM in need:
        need |= {Method.EB, Method.MAX}
    return need


def evaluate_methods(
    dataset,
    methods,
    streams: dict[str, np.random.Generator],
    *,
    bootstrap_B: int = 2000,
    perm_B: int = 500,
    max_calibration: Calibration | str = Calibration.MULTIPLIER,
    cv_splits: int = DEFAULT_SPLITS,
    omega_hat=None,
) -> dict[Method, TestReport]:
    """Run ``methods`` on one dataset, sharing the rank vector and the multiplier draws.

    ``streams`` maps ``"boot"``, ``"perm"`` and ``"cv"`` to generators.
    """
    validate(dataset)
    methods = tuple(Method(m) for m in methods)
    max_calibration = Calibration(max_calibration)
    if bootstrap_B < 100 or perm_B < 100:
        raise DomainError("bootstrap and permutation counts must be >= 100")
    need = _required(methods)
    X, y, n, p = dataset.X, dataset.y, dataset.n, dataset.p
    scores = wilcoxon_scores(y)
    reports: dict[Method, TestReport] = {}

    if Method.RS in need:
        si = sum_test_internals(X, scores)
        reports[Method.RS] = TestReport(Method.RS, si.t_rs, normal_upper_pvalue(si.t_rs),
                                        Calibration.NORMAL, {"trace_hat": si.trace_hat})

    max_dirs = {}
    if Method.RM1 in need:
        max_dirs[Method.RM1] = (marginal_directions(X), {})
    if Method.RM2 in need:
        aux = {}
        if omega_hat is None:
            est = estimate_precision(X, splits=cv_splits, rng=streams["cv"])
            omega_hat = est.omega_hat
            aux = {"band_k": float(est.band_k), "ridge_tau": est.ridge_tau}
        max_dirs[Method.RM2] = (precision_directions(X, omega_hat), aux)
    if max_dirs:
        G = None
        if max_calibration is Calibration.MULTIPLIER:
            G = draw_multipliers(streams["boot"], bootstrap_B, n)
        cn = c_n(n)
        for m, (D, aux) in max_dirs.items():
            stat = float(np.max((cn * (scores.e @ D)) ** 2))
            if G is not None:
                pv = multiplier_pvalue_from_maxima(multiplier_maxima(D, G), stat)
                aux = {**aux, "B": float(bootstrap_B)}
            else:
                pv = gumbel_pvalue(stat, p)
            reports[m] = TestReport(m, stat, pv, max_calibration, aux)

    if Method.EB in need:
        t_eb = eb_statistic(X, y)
        pv = permutation_pvalue(X, y, t_eb, perm_B, streams["perm"])
        reports[Method.EB] = TestReport(Method.EB, t_eb, pv, Calibration.PERMUTATION,
                                        {"B": float(perm_B)})
    if Method.MAX in need:
        t_max, s2 = max_statistic(X, y)
        reports[Method.MAX] = TestReport(Method.MAX, t_max, gumbel_pvalue(t_max, p),
                                         Calibration.GUMBEL, {"sigma2_hat": s2})
    if Method.COM in need:
        reports[Method.COM] = com_from_reports(reports[Method.EB], reports[Method.MAX])
    if Method.RC1 in need:
        reports[Method.RC1] = combine_reports(Method.RC1, reports[Method.RS], reports[Method.RM1])
    if Method.RC2 in need:
        reports[Method.RC2] = combine_reports(Method.RC2, reports[Method.RS], reports[Method.RM2])
    return {m: reports[m] for m in methods}


def _beta_for(config: ExperimentConfig, streams) -> np.ndarray | None:
    sig = config.signal
    if sig.design is SignalDesign.NULL or sig.size == 0:
        return None
    if sig.design is SignalDesign.DENSE_RANDOM:
        return make_beta_design1(config.p, sig.size, sig.q, streams["beta"], sig.target)
    return make_beta_design2(config.p, sig.size, config.n, config.covariance.matrix)


def _run_chunk(config: ExperimentConfig, tag: str, cell: int, grid_index: int, reps: list[int]):
    out = []
    beta_fixed = None
    if config.signal.design is SignalDesign.THETA_PATTERN and config.signal.size > 0:
        beta_fixed = make_beta_design2(config.p, config.signal.size, config.n,
                                       config.covariance.matrix)
    omega = config.covariance.precision if config.oracle_omega else None
    for r in reps:
        try:
            st = _streams(config.seed, tag, cell, grid_index, r)
            beta = beta_fixed if beta_fixed is not None else _beta_for(config, st)
            ds = generate(config.n, config.covariance, beta, config.error, st["data"])
            if tag == "independence":
                out.append((r, _diag_statistics(ds, config, st, omega)))
            else:
                reports = evaluate_methods(
                    ds, config.methods, st, bootstrap_B=config.bootstrap_B, perm_B=config.perm_B,
                    max_calibration=config.max_calibration, cv_splits=config.cv_splits,
                    omega_hat=omega)
                out.append((r, {m.value: rep.pvalue for m, rep in reports.items()}))
        except Exception as exc:  # noqa: BLE001 - re-raised with the replicate index
            raise ReplicateError(r, exc) from exc
    return out


def _chunks(replications: int, workers: int) -> list[list[int]]:
    size = max(1, min(50, math.ceil(replications / (4 * max(workers, 1)))))
    reps = list(range(replications))
    return [reps[i:i + size] for i in range(0, replications, size)]


def default_workers() -> int:
    return os.cpu_count() or 1


def _execute(config: ExperimentConfig, tag: str, cell: int, grid_index: int, workers: int | None):
    workers = default_workers() if workers is None else workers
    chunks = _chunks(config.replications, workers)
    if workers <= 1:
        parts = [_run_chunk(config, tag, cell, grid_index, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            k = len(chunks)
            parts = list(pool.map(_run_chunk, [config] * k, [tag] * k, [cell] * k,
                                  [grid_index] * k, chunks))
    results = sorted((item for part in parts for item in part), key=lambda t: t[0])
    return [res for _, res in results]


def _cell(config: ExperimentConfig, **extra) -> dict:
    return {
        "n": config.n,
        "p": config.p,
        "rho": config.covariance.rho,
        "error": config.error.kind.value,
        **extra,
    }


def _tabulate(cell: dict, config: ExperimentConfig, results) -> list[RejectionRow]:
    rows = []
    for m in config.methods:
        count = sum(1 for res in results if res[m.value] < config.alpha)
        rows.append(RejectionRow(cell=cell, method=m.value, rejections=count,
                                 replications=len(results)))
    return rows


def run_size(config: ExperimentConfig, workers: int | None = 1, cell: int = 0) -> RejectionTable:
    """Empirical size of each configured method; ``cell`` separates the streams of table cells."""
    if config.signal.design is not SignalDesign.NULL:
        raise DomainError("size experiments require the null signal design")
    results = _execute(config, "size", cell, 0, workers)
    return RejectionTable("size", _tabulate(_cell(config), config, results))


def run_power(config: ExperimentConfig, grid=DEFAULT_GRID, workers: int | None = 1,
              cell: int = 0) -> RejectionTable:
    """Rejection frequencies per grid value of the signal size (s or m).

    Design 1 redraws the coefficient vector in every replicate; design 2 is
    deterministic given the grid value. A grid value of 0 is the null.
    """
    if config.signal.design is SignalDesign.NULL:
        raise DomainError("power experiments need a non-null signal design")
    table = RejectionTable("power")
    for g, size in enumerate(grid):
        cfg = replace(config, signal=replace(config.signal, size=int(size)))
        results = _execute(cfg, "power", cell, g, workers)
        info = _cell(cfg, design=cfg.signal.design.value, size=int(size))
        table.rows.extend(_tabulate(info, cfg, results))
    return table


def _diag_statistics(ds, config: ExperimentConfig, streams, omega=None) -> dict[str, float]:
    X = ds.X
    scores = wilcoxon_scores(ds.y)
    si = sum_test_internals(X, scores)
    centering = GumbelCalibration(config.p).centering
    cn = c_n(ds.n)
    out = {"RS": si.t_rs}
    if Method.RM1 in config.methods:
        out["RM1"] = float(np.max((cn * (scores.e @ marginal_directions(X))) ** 2)) - centering
    if Method.RM2 in config.methods:
        if omega is None:
            omega = estimate_precision(X, splits=config.cv_splits, rng=streams["cv"]).omega_hat
        out["RM2"] = float(np.max((cn * (scores.e @ precision_directions(X, omega))) ** 2)) - centering
    return out


def joint_tail(a: np.ndarray, b: np.ndarray, level: float = 0.10) -> tuple[tuple[tuple[int, int], tuple[int, int]], float]:
    """2x2 counts of (a in upper tail, b in upper tail) at empirical ``1 - level`` cutoffs."""
    qa = np.quantile(a, 1.0 - level)
    qb = np.quantile(b, 1.0 - level)
    ua, ub = a > qa, b > qb
    table = (
        (int(np.sum(~ua & ~ub)), int(np.sum(~ua & ub))),
        (int(np.sum(ua & ~ub)), int(np.sum(ua & ub))),
    )
    return table, table[1][1] / a.size


def run_independence_diag(config: ExperimentConfig, workers: int | None = 1,
                          cell: int = 0) -> IndependenceDiag:
    """Correlation and joint 10% tail frequency between T_RS and the centered max statistics."""
    if config.signal.design is not SignalDesign.NULL:
        raise DomainError("the independence diagnostic is defined under the null")
    results = _execute(config, "independence", cell, 0, workers)
    t_rs = np.array([r["RS"] for r in results])
    pairs, centered = {}, {}
    for name in ("RM1", "RM2"):
        if name not in results[0]:
            continue
        t_max = np.array([r[name] for r in results])
        centered[name] = t_max
        corr = float(np.corrcoef(t_rs, t_max)[0, 1])
        table, joint = joint_tail(t_rs, t_max)
        pairs[name] = JointTail(name, corr, joint, table, len(results))
    rs_rej = float(np.mean(t_rs > norm.ppf(1.0 - config.alpha)))
    return IndependenceDiag(rs_rejection=rs_rej, pairs=pairs, t_rs=t_rs, centered_max=centered)

