"""Run configuration: sectioned ``key = value`` files with environment overrides.

Grammar (all keys optional unless marked)::

    [model]
    type = ppp | matern | thomas | lattice          (required)
    intensity = 1.0          ppp; matern retained intensity (alternative to parent_intensity)
    parent_intensity = ...   matern, thomas
    h = ...                  matern hard-core distance
    mean_daughters = ...     thomas
    sigma = ...              thomas
    d = 2                    ppp, lattice
    spacing = 1.0            lattice

    [mac]
    type = aloha | csma | tdma | cluster-mac | unreasonable-tdma   (required)
    b = ...                  cluster-mac exponent in [0, 1]

    [channel]
    alpha = 4.0
    pathloss = singular | bounded_sum | bounded_min
    theta = 2.0
    distance = (unit-gain distance)
    orientation = receiver | transmitter
    noise = 0.0
    power = 1.0

    [sweep]
    eta = 0.1, 0.05, 0.02    explicit decreasing grid, or
    eta_min / eta_max / points   log-spaced grid (defaults: the analytic fit window, 8 points)
    reps = 100000            typical links per grid point
    seed = 0
    estimator = conditional | raw
    wrap = torus | guard
    threads = 1              0 means one per CPU

    [output]
    directory = out

Every key can be overridden by an environment variable
``NETOUTAGE_<SECTION>_<KEY>`` (upper case, dashes as underscores), for
example ``NETOUTAGE_SWEEP_SEED=7``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UsageError
from .mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma
from .networks import LatticeModel, MaternModel, PoissonModel, Scenario, ThomasModel
from .outage import LinkSpec, PathLossModel

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "ENV_PREFIX"]

ENV_PREFIX = "NETOUTAGE_"

SECTIONS = {
    "model": ("type", "intensity", "parent_intensity", "h", "mean_daughters", "sigma", "d", "spacing"),
    "mac": ("type", "b"),
    "channel": ("alpha", "pathloss", "theta", "distance", "orientation", "noise", "power"),
    "sweep": ("eta", "eta_min", "eta_max", "points", "reps", "seed", "estimator", "wrap", "threads"),
    "output": ("directory",),
}


class ConfigError(UsageError):
    """The configuration text could not be parsed."""


@dataclass
class RunConfig:
    scenario: Scenario
    link: LinkSpec
    pathloss: PathLossModel
    eta: np.ndarray | None = None
    eta_min: float | None = None
    eta_max: float | None = None
    points: int = 8
    reps: int = 100_000
    seed: int = 0
    estimator: str = "conditional"
    threads: int = 1
    directory: str = "out"
    raw: dict = field(default_factory=dict)


def _env_overrides(parser: configparser.ConfigParser, environ) -> None:
    for section, keys in SECTIONS.items():
        for key in keys:
            var = f"{ENV_PREFIX}{section}_{key}".upper().replace("-", "_")
            if var in environ:
                if not parser.has_section(section):
                    parser.add_section(section)
                parser.set(section, key, environ[var])


def _num(sec, key, default=None, kind=float):
    if key not in sec:
        if default is None:
            raise ParameterError(f"missing required key '{key}' in [{sec.name}]")
        return default
    raw = sec[key].strip()
    try:
        if kind is int:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return kind(raw)
    except ValueError:
        raise ParameterError(f"[{sec.name}] {key} = {raw!r} is not a valid {kind.__name__}") from None


def _model(sec):
    kind = sec.get("type", "").strip().lower()
    if kind == "ppp":
        return PoissonModel(_num(sec, "intensity", 1.0), _num(sec, "d", 2, int))
    if kind == "matern":
        h = _num(sec, "h")
        if "parent_intensity" in sec:
            return MaternModel(_num(sec, "parent_intensity"), h)
        return MaternModel.with_intensity(_num(sec, "intensity"), h)
    if kind == "thomas":
        return ThomasModel.of(_num(sec, "parent_intensity"), _num(sec, "mean_daughters"), _num(sec, "sigma"))
    if kind == "lattice":
        return LatticeModel(_num(sec, "d", 2, int), _num(sec, "spacing", 1.0))
    raise ParameterError(f"[model] type must be ppp, matern, thomas or lattice, got {kind!r}")


def _scheme(sec, model):
    kind = sec.get("type", "").strip().lower()
    if kind == "aloha":
        return Aloha(1.0)
    if kind == "csma":
        return CsmaMatern(1.0)
    if kind == "tdma":
        if model.name != "lattice":
            raise ParameterError("TDMA requires a lattice model")
        return TdmaLattice(1, model.d)
    if kind == "cluster-mac":
        if model.name != "thomas":
            raise ParameterError("cluster MAC requires a Thomas model")
        return ClusterMac(_num(sec, "b"), 1.0)
    if kind == "unreasonable-tdma":
        if model.name != "lattice":
            raise ParameterError("run-based TDMA requires a lattice model")
        return UnreasonableTdma(1)
    raise ParameterError(f"[mac] type {kind!r} is not one of aloha, csma, tdma, cluster-mac, unreasonable-tdma")


def parse_config(text: str, environ=None) -> RunConfig:
    """Build a :class:`RunConfig` from configuration text.

    Syntax problems raise :class:`ConfigError`; invalid values raise
    :class:`ParameterError`.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None
    _env_overrides(parser, os.environ if environ is None else environ)
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
    for section in SECTIONS:
        if not parser.has_section(section):
            parser.add_section(section)
    if "type" not in parser["model"] or "type" not in parser["mac"]:
        raise ParameterError("[model] type and [mac] type are required")

    model = _model(parser["model"])
    scheme = _scheme(parser["mac"], model)
    sw = parser["sweep"]
    ch = parser["channel"]
    pathloss = PathLossModel(ch.get("pathloss", "singular").strip(), _num(ch, "alpha", 4.0))
    pathloss.check_dimension(model.d)
    dist = _num(ch, "distance", 0.0)
    link = LinkSpec(
        theta=_num(ch, "theta", 2.0),
        distance=dist if dist > 0 else None,
        orientation=ch.get("orientation", "receiver").strip(),
        noise=_num(ch, "noise", 0.0),
        power=_num(ch, "power", 1.0),
    )
    scenario = Scenario(model, scheme, wrap=sw.get("wrap", "torus").strip())

    eta = None
    if "eta" in sw:
        try:
            eta = np.array([float(v) for v in sw["eta"].replace(",", " ").split()])
        except ValueError:
            raise ParameterError(f"[sweep] eta = {sw['eta']!r} is not a list of numbers") from None
        if len(eta) == 0 or np.any(np.diff(eta) >= 0) or eta[0] > 1 or eta[-1] <= 0:
            raise ParameterError("[sweep] eta must be strictly decreasing within (0, 1]")
    cfg = RunConfig(
        scenario=scenario,
        link=link,
        pathloss=pathloss,
        eta=eta,
        eta_min=_num(sw, "eta_min", 0.0) or None,
        eta_max=_num(sw, "eta_max", 0.0) or None,
        points=_num(sw, "points", 8, int),
        reps=_num(sw, "reps", 100_000, int),
        seed=_num(sw, "seed", 0, int),
        estimator=sw.get("estimator", "conditional").strip(),
        threads=_num(sw, "threads", 1, int),
        directory=parser["output"].get("directory", "out").strip(),
        raw={s: dict(parser[s]) for s in SECTIONS},
    )
    if cfg.reps < 1 or cfg.points < 2 or cfg.threads < 0:
        raise ParameterError("need reps >= 1, points >= 2 and threads >= 0")
    if cfg.estimator not in ("conditional", "raw"):
        raise ParameterError("[sweep] estimator must be conditional or raw")
    return cfg


def load_config(path, environ=None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, environ)
