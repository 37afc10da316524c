"""Campaign configuration files.

A config is flat ``key = value`` text with dotted section names. ``#``
starts a comment. Keys marked *list* accept comma-separated values; a
campaign runs the cartesian product of its list keys, ordered
error-law-major, then ``n``, then ``p``.

=======================  ==========================================  ===========
key                      meaning                                     default
=======================  ==========================================  ===========
experiment.kind          size | power | independence                 (required)
experiment.replications  Monte Carlo replications per cell           1000
experiment.alpha         nominal level                               0.05
experiment.seed          64-bit seed (the ``--seed`` flag overrides)  none
experiment.methods       list of MAX,EB,COM,RS,RM1,RM2,RC1,RC2       all eight
data.n                   list of sample sizes                        (required)
data.p                   list of dimensions                          (required)
covariance.kind          ar1                                         ar1
covariance.rho           AR(1) correlation                           0.7
error.kind               list of E1,E2,E3,E4                         E1
signal.design            null | dense_random | theta_pattern         null
signal.grid              list of s (or m) values for power runs      1,2,5,10,20,30,40,50
signal.q                 support offset for dense_random             0
signal.target            squared norm for dense_random               0.8
bootstrap.B              Gaussian multipliers for RM1/RM2            2000
permutation.B            permutations for EB                         500
calibration.max          multiplier | gumbel (RM1/RM2)               multiplier
precision.splits         random splits for bandwidth CV              50
precision.oracle         use the true precision matrix (diagnostic)  false
=======================  ==========================================  ===========
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .dgp import DEFAULT_GRID, CovarianceSpec, ErrorLaw, ErrorSpec, SignalDesign, SignalSpec
from .mc import ExperimentConfig
from .model import ALL_METHODS, Calibration, Method, RankMaxSumError

KINDS = ("size", "power", "independence")

SCHEMA: dict[str, str | None] = {
    "experiment.kind": None,
    "experiment.replications": "1000",
    "experiment.alpha": "0.05",
    "experiment.seed": None,
    "experiment.methods": ",".join(m.value for m in ALL_METHODS),
    "data.n": None,
    "data.p": None,
    "covariance.kind": "ar1",
    "covariance.rho": "0.7",
    "error.kind": "E1",
    "signal.design": "null",
    "signal.grid": ",".join(str(g) for g in DEFAULT_GRID),
    "signal.q": "0",
    "signal.target": "0.8",
    "bootstrap.B": "2000",
    "permutation.B": "500",
    "calibration.max": "multiplier",
    "precision.splits": "50",
    "precision.oracle": "false",
}


class ConfigError(RankMaxSumError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Campaign:
    kind: str
    cells: list[ExperimentConfig]
    grid: tuple[int, ...]
    settings: dict[str, str]


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, f"unknown key ({source}:{lineno})")
        if key in values:
            raise ConfigError(key, f"duplicate key ({source}:{lineno})")
        values[key] = value
    return values


def _list(settings, key):
    return [v.strip() for v in settings[key].split(",") if v.strip()]


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def _enum(key, enum, text):
    try:
        return enum(text)
    except ValueError:
        allowed = ", ".join(e.value for e in enum)
        raise ConfigError(key, f"expected one of {allowed}, got {text!r}") from None


def _bool(key, text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(key, f"expected true or false, got {text!r}")


def build_campaign(values: dict[str, str], seed: int | None = None) -> Campaign:
    """Resolve defaults, validate every field and expand the cell grid."""
    settings = {k: v for k, v in SCHEMA.items() if v is not None}
    settings.update(values)
    for key in ("experiment.kind", "data.n", "data.p"):
        if key not in settings:
            raise ConfigError(key, "required key is missing")
    if seed is not None:
        settings["experiment.seed"] = str(seed)
    if "experiment.seed" not in settings:
        raise ConfigError("experiment.seed", "no seed given in the config or on the command line")

    kind = settings["experiment.kind"]
    if kind not in KINDS:
        raise ConfigError("experiment.kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    design = _enum("signal.design", SignalDesign, settings["signal.design"])
    if kind == "power" and design is SignalDesign.NULL:
        raise ConfigError("signal.design", "power campaigns need dense_random or theta_pattern")
    if kind != "power" and design is not SignalDesign.NULL:
        raise ConfigError("signal.design", f"{kind} campaigns require the null design")
    if settings["covariance.kind"] != "ar1":
        raise ConfigError("covariance.kind", f"only ar1 is supported, got {settings['covariance.kind']!r}")

    methods = tuple(_enum("experiment.methods", Method, m) for m in _list(settings, "experiment.methods"))
    ns = [_int("data.n", v) for v in _list(settings, "data.n")]
    ps = [_int("data.p", v) for v in _list(settings, "data.p")]
    errors = [_enum("error.kind", ErrorLaw, v) for v in _list(settings, "error.kind")]
    grid = tuple(_int("signal.grid", v) for v in _list(settings, "signal.grid"))
    seed_value = _int("experiment.seed", settings["experiment.seed"])
    if not 0 <= seed_value < 2**64:
        raise ConfigError("experiment.seed", "must be a 64-bit unsigned integer")
    rho = _float("covariance.rho", settings["covariance.rho"])

    common = dict(
        methods=methods,
        replications=_int("experiment.replications", settings["experiment.replications"]),
        alpha=_float("experiment.alpha", settings["experiment.alpha"]),
        seed=seed_value,
        bootstrap_B=_int("bootstrap.B", settings["bootstrap.B"]),
        perm_B=_int("permutation.B", settings["permutation.B"]),
        max_calibration=_enum("calibration.max", Calibration, settings["calibration.max"]),
        cv_splits=_int("precision.splits", settings["precision.splits"]),
        oracle_omega=_bool("precision.oracle", settings["precision.oracle"]),
    )
    if common["max_calibration"] not in (Calibration.MULTIPLIER, Calibration.GUMBEL):
        raise ConfigError("calibration.max", "expected multiplier or gumbel")
    signal = SignalSpec(design=design, size=0, q=_int("signal.q", settings["signal.q"]),
                        target=_float("signal.target", settings["signal.target"]))
    cells = []
    for err, n, p in product(errors, ns, ps):
        try:
            cells.append(ExperimentConfig(
                n=n, p=p, covariance=CovarianceSpec(p=p, rho=rho), error=ErrorSpec(err),
                signal=signal, **common))
        except RankMaxSumError as exc:
            raise ConfigError("experiment", str(exc)) from exc
    return Campaign(kind=kind, cells=cells, grid=grid, settings=dict(sorted(settings.items())))


def load_campaign(path, seed: int | None = None) -> Campaign:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from exc
    return build_campaign(parse_text(text, str(path)), seed=seed)


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (e.g. ``table1_E1.cfg``)."""
    return Path(__file__).with_name("configs") / name
