"""Medium access schemes as thinning operators on node patterns.

Every scheme has a tuning parameter ``eta`` in ``[0, 1]``, the fraction of
nodes that transmit in a slot. The operators take a node pattern and return
the transmitting subset together with the achieved ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ParameterError, UsageError
from .pointprocess import (
    PointPattern,
    estimate_k_function,
    estimate_unit_box_measure,
    matern_intensity,
    matern_radius,
    matern_survivors,
)
from .rng import as_generator, stream

__all__ = [
    "Aloha",
    "CsmaMatern",
    "TdmaLattice",
    "ClusterMac",
    "UnreasonableTdma",
    "MacScheme",
    "TransmitterSet",
    "aloha",
    "csma_matern",
    "tdma_lattice",
    "cluster_mac",
    "unreasonable_tdma",
    "ConditionReport",
    "check_conditions",
    "NEAREST_RADIUS",
]


def _check_fraction(x, name):
    if not 0 <= x <= 1:
        raise ParameterError(f"{name} must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class Aloha:
    """Independent thinning with transmit probability ``p``."""

    p: float

    def __post_init__(self):
        _check_fraction(self.p, "p")

    name = "aloha"

    @property
    def eta(self) -> float:
        return float(self.p)

    def with_eta(self, eta: float) -> "Aloha":
        return Aloha(eta)


@dataclass(frozen=True)
class CsmaMatern:
    """Idealised carrier sensing: Matern type-II thinning tuned to ``target_eta``."""

    target_eta: float

    def __post_init__(self):
        _check_fraction(self.target_eta, "target_eta")

    name = "csma"

    @property
    def eta(self) -> float:
        return float(self.target_eta)

    def with_eta(self, eta: float) -> "CsmaMatern":
        return CsmaMatern(eta)


@dataclass(frozen=True)
class TdmaLattice:
    """Lattice TDMA with ``m`` phases per axis (``eta = m^-d``)."""

    m: int
    d: int = 2

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError("m must be a positive integer")
        if self.d not in (1, 2, 3):
            raise ParameterError("lattice dimension must be 1, 2 or 3")

    name = "tdma"

    @property
    def eta(self) -> float:
        return float(self.m) ** (-self.d)

    def with_eta(self, eta: float) -> "TdmaLattice":
        return TdmaLattice(_integer_root(eta, self.d), self.d)


@dataclass(frozen=True)
class ClusterMac:
    """Cluster-then-daughter thinning: clusters kept w.p. ``eta^(1-b)``, nodes w.p. ``eta^b``."""

    b: float
    eta: float

    def __post_init__(self):
        _check_fraction(self.b, "b")
        _check_fraction(self.eta, "eta")

    name = "cluster-mac"

    @property
    def cluster_prob(self) -> float:
        return self.eta ** (1 - self.b) if self.b < 1 else 1.0

    @property
    def node_prob(self) -> float:
        return self.eta**self.b if self.b > 0 else 1.0

    def with_eta(self, eta: float) -> "ClusterMac":
        return ClusterMac(self.b, eta)


@dataclass(frozen=True)
class UnreasonableTdma:
    """TDMA that activates runs of ``m`` adjacent lattice sites (``eta = m^-2``)."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError("m must be a positive integer")

    name = "unreasonable-tdma"

    @property
    def eta(self) -> float:
        return float(self.m) ** -2

    def with_eta(self, eta: float) -> "UnreasonableTdma":
        return UnreasonableTdma(_integer_root(eta, 2))


MacScheme = Aloha | CsmaMatern | TdmaLattice | ClusterMac | UnreasonableTdma


def _integer_root(eta: float, d: int) -> int:
    if not 0 < eta <= 1:
        raise ParameterError("eta must lie in (0, 1]")
    m = int(round(eta ** (-1.0 / d)))
    if abs(m ** (-d) - eta) > 1e-9 * eta:
        raise ParameterError(f"eta={eta} is not of the form m^-{d} for an integer m")
    return m


@dataclass(frozen=True, eq=False)
class TransmitterSet:
    """Active transmitters, the achieved ``eta`` and the scheme that made them."""

    pattern: PointPattern
    eta: float
    scheme: object
    active: np.ndarray | None = None
    h: float | None = None

    def __len__(self) -> int:
        return len(self.pattern)


def aloha(pattern: PointPattern, p: float, seed=None) -> TransmitterSet:
    """Keep each point independently with probability ``p``."""
    _check_fraction(p, "p")
    rng = as_generator(seed)
    keep = rng.random(len(pattern)) < p
    sub = pattern.subset(keep, f"{pattern.model}+aloha", pattern.intensity * p, aloha_p=float(p))
    return TransmitterSet(sub, float(p), Aloha(p), keep)


def csma_matern(pattern: PointPattern, target_eta: float, seed=None) -> TransmitterSet:
    """Matern type-II thinning of a Poisson pattern down to ``target_eta``.

    The exclusion radius ``h`` solves ``lambda'(h) = target_eta * lambda`` by
    bisection. The reported ``eta`` is the analytic intensity ratio.
    """
    if pattern.model != "PPP":
        raise UsageError("carrier-sensing thinning expects a Poisson input pattern")
    if not 0 < target_eta < 1:
        raise ParameterError("no exclusion radius reaches target_eta outside (0, 1)")
    lam = pattern.intensity
    h = matern_radius(lam, target_eta)
    rng = as_generator(seed)
    marks = rng.random(len(pattern))
    w = pattern.window
    keep = matern_survivors(pattern.coords, marks, h, boxsize=w.sides if w.torus else None)
    eta = matern_intensity(lam, h) / lam
    sub = pattern.subset(keep, "MaternII", eta * lam, parent_intensity=lam, h=h)
    return TransmitterSet(sub, eta, CsmaMatern(target_eta), keep, h)


def _lattice_counts(pattern: PointPattern):
    if pattern.lattice_index is None or pattern.model != "Lattice":
        raise UsageError("a lattice pattern with lattice indices is required")
    s = pattern.params["spacing"]
    return s, np.rint(np.asarray(pattern.window.sides) / s).astype(np.int64)


def tdma_lattice(pattern: PointPattern, m: int, seed=None) -> TransmitterSet:
    """Keep the sublattice ``m s Z^d + phase`` (one slot out of ``m^d``)."""
    scheme = TdmaLattice(m, pattern.d)
    s, counts = _lattice_counts(pattern)
    if pattern.window.torus and np.any(counts % m):
        raise ParameterError(f"window of {counts.tolist()} lattice steps is not divisible by m={m}")
    rng = as_generator(seed)
    phase = rng.integers(0, m, size=pattern.d)
    keep = np.all(np.mod(pattern.lattice_index - phase, m) == 0, axis=1)
    sub = PointPattern(
        pattern.coords[keep],
        pattern.window,
        pattern.intensity / m**pattern.d,
        "Lattice",
        {**pattern.params, "spacing": s * m, "tdma_m": int(m)},
        pattern.seed,
        lattice_index=(pattern.lattice_index[keep] - phase) // m,
    )
    return TransmitterSet(sub, scheme.eta, scheme, keep)


def cluster_mac(pattern: PointPattern, b: float, eta: float, seed=None) -> TransmitterSet:
    """Keep clusters w.p. ``eta^(1-b)``, then their daughters w.p. ``eta^b``."""
    if pattern.parent_ids is None:
        raise UsageError("cluster MAC needs daughter-to-parent links (parent_ids)")
    scheme = ClusterMac(b, eta)
    rng = as_generator(seed)
    ids = pattern.parent_ids
    n_par = int(ids.max()) + 1 if len(ids) else 0
    cluster_on = rng.random(n_par) < scheme.cluster_prob
    node_on = rng.random(len(pattern)) < scheme.node_prob
    keep = cluster_on[ids] & node_on if len(ids) else np.zeros(0, dtype=bool)
    sub = pattern.subset(keep, "Thomas+cluster-mac", pattern.intensity * eta, b=float(b), eta=float(eta))
    return TransmitterSet(sub, float(eta), scheme, keep)


def unreasonable_tdma(pattern: PointPattern, m: int, seed=None) -> TransmitterSet:
    """Activate one run of ``m`` adjacent sites per ``m^2 x m`` block of a square lattice.

    Row ``j`` is active when ``j = phi_y (mod m)``; inside an active row the
    sites with ``(i - phi_x) mod m^2 < m`` transmit. The density is
    ``m^-2`` while neighbouring transmitters stay one lattice step apart.
    """
    scheme = UnreasonableTdma(m)
    if pattern.d != 2:
        raise ParameterError("this TDMA construction is defined on the square lattice")
    s, counts = _lattice_counts(pattern)
    if pattern.window.torus and (counts[0] % (m * m) or counts[1] % m):
        raise ParameterError(f"window of {counts.tolist()} steps must be a multiple of ({m * m}, {m})")
    rng = as_generator(seed)
    phx = int(rng.integers(0, m * m))
    phy = int(rng.integers(0, m))
    i, j = pattern.lattice_index[:, 0], pattern.lattice_index[:, 1]
    keep = (np.mod(j - phy, m) == 0) & (np.mod(i - phx, m * m) < m)
    sub = pattern.subset(keep, "Lattice+unreasonable-tdma", pattern.intensity / m**2, tdma_m=int(m))
    return TransmitterSet(sub, scheme.eta, scheme, keep)


# ---------------------------------------------------------------------------
# reasonableness conditions

NEAREST_RADIUS = math.sqrt(2 / math.sqrt(3))  # ~1.075


@dataclass(frozen=True)
class ConditionReport:
    """Empirical check of the two reasonableness conditions.

    ``box`` holds the estimated second-moment measure of the unit box per
    ``eta`` and ``near`` the mean number of other transmitters within
    ``R lambda_t^(-1/2)`` of a typical one. The first must stay bounded, the
    second bounded away from zero as ``eta -> 0``.
    """

    eta: np.ndarray
    box: np.ndarray
    box_se: np.ndarray
    near: np.ndarray
    near_se: np.ndarray
    box_slope: float
    box_slope_se: float
    near_slope: float
    near_slope_se: float
    box_bounded: bool
    near_positive: bool
    flagged: tuple = ()

    @property
    def reasonable(self) -> bool:
        return self.box_bounded and self.near_positive

    def lines(self) -> list:
        out = [
            f"box measure slope {self.box_slope:.3f} +/- {self.box_slope_se:.3f}: "
            + ("bounded" if self.box_bounded else "grows as eta -> 0"),
            f"near count slope {self.near_slope:.3f} +/- {self.near_slope_se:.3f}: "
            + ("positive" if self.near_positive else "vanishes as eta -> 0"),
            "reasonable" if self.reasonable else "unreasonable",
            f"verdict from trends over eta in [{self.eta.min():.3g}, {self.eta.max():.3g}], not from the limit itself",
        ]
        out += [f"flag: {f}" for f in self.flagged]
        return out


def _loglog_slope(eta, y, se):
    """Weighted slope of ``log y`` on ``log eta`` with its standard error."""
    good = y > 0
    if good.sum() < 2:
        return float("nan"), float("nan")
    x = np.log(eta[good])
    yy = np.log(y[good])
    sd = np.where(se[good] > 0, se[good] / y[good], 1e-6)
    w = 1.0 / np.maximum(sd, 1e-6) ** 2
    X = np.stack([np.ones_like(x), x], 1)
    cov = np.linalg.pinv(X.T @ (w[:, None] * X))
    beta = cov @ X.T @ (w * yy)
    resid = yy - X @ beta
    dof = max(len(x) - 2, 1)
    scale = max(float(np.sum(w * resid**2)) / dof, 1.0)
    return float(beta[1]), float(math.sqrt(cov[1, 1] * scale))


def check_conditions(family, eta_grid, seed: int = 0, min_points: int = 4000, max_patterns: int = 200, radius=NEAREST_RADIUS) -> ConditionReport:
    """Estimate both conditions along a decreasing ``eta`` grid.

    ``family(eta, rng)`` returns a transmitter :class:`PointPattern` (or a
    :class:`TransmitterSet`). Patterns are drawn until ``min_points``
    transmitters have been seen at each grid point.

    The box measure is declared unbounded when its log-log slope against
    ``eta`` is below ``-0.1`` and significantly negative (growth is slow at
    moderate ``eta`` for cluster-type MACs, so a steeper threshold misses
    them); the near count is declared vanishing when its slope is above
    ``0.25`` and significantly positive.
    """
    eta_grid = np.asarray(eta_grid, dtype=float)
    if len(eta_grid) < 4:
        raise ParameterError("at least 4 grid values are needed")
    if np.any(np.diff(eta_grid) >= 0):
        raise ParameterError("eta grid must be strictly decreasing")
    box, box_se, near, near_se, flags = [], [], [], [], []
    for k, eta in enumerate(eta_grid):
        pats, seen = [], 0
        for r in range(max_patterns):
            p = family(eta, stream(seed, k, r))
            p = p.pattern if isinstance(p, TransmitterSet) else p
            pats.append(p)
            seen += len(p)
            if seen >= min_points and len(pats) >= 2:
                break
        if seen < min_points:
            flags.append(f"eta={eta:.4g}: only {seen} transmitters observed")
        try:
            b, bse = estimate_unit_box_measure(pats)
            lam_t = pats[0].intensity
            rr = radius / math.sqrt(lam_t) if pats[0].d == 2 else radius * lam_t ** (-1 / pats[0].d)
            kk, kse = estimate_k_function(pats, [rr])
        except EstimationError:
            flags.append(f"eta={eta:.4g}: no pairs observed")
            b, bse, kk, kse, lam_t = 0.0, float("inf"), np.zeros(1), np.full(1, np.inf), 1.0
        box.append(float(b))
        box_se.append(float(bse))
        near.append(float(lam_t * kk[0]))
        near_se.append(float(lam_t * kse[0]))
    box, box_se, near, near_se = map(np.array, (box, box_se, near, near_se))
    bs, bse = _loglog_slope(eta_grid, box, box_se)
    ns, nse = _loglog_slope(eta_grid, near, near_se)
    box_bounded = not (np.isfinite(bs) and bs < -0.1 and bs + 3 * bse < 0)
    near_positive = bool(np.all(near > 0)) and not (np.isfinite(ns) and ns > 0.25 and ns - 3 * nse > 0)
    return ConditionReport(eta_grid, box, box_se, near, near_se, bs, bse, ns, nse, box_bounded, near_positive, tuple(flags))
