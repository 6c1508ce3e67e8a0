"""Small-``eta`` behaviour of the success probability.

For a MAC family with tuning parameter ``eta`` the success probability
behaves as ``P(eta) ~ P0 - gamma * eta^kappa`` as ``eta -> 0``. This module
returns ``(gamma, kappa)`` for every supported model/MAC pair, the lattice
TDMA bounds built on the Epstein zeta function, and the envelope
``1 - gamma eta^kappa <= P <= 1 / (1 + gamma eta^kappa)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NotSupportedError, NumericalError, ParameterError
from .mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma
from .outage import LinkSpec, PathLossModel, delta, outage_thomas_closed, radial_integral, success_thomas_closed
from .pointprocess import ClusterSpec, ProductDensity, rho2
from .special import TABLE, dirichlet_beta, epstein_zeta, lattice_sum, zeta

__all__ = [
    "AsymptoticResult",
    "ASYMPTOTIC_HEADER",
    "gamma_aloha",
    "gamma_csma_matern",
    "csma_g",
    "epstein_zeta",
    "gamma3_approx",
    "TdmaBounds",
    "tdma_bounds",
    "tdma_exact",
    "cluster_mac_gamma",
    "cluster_mac_gamma_limit",
    "parent_thinning",
    "unreasonable_tdma_p0",
    "gamma_kappa_for",
    "conjecture_envelope",
    "eta_max",
    "ETA_MAX_LEVEL",
]

ASYMPTOTIC_HEADER = ("scheme", "gamma", "kappa", "provenance", "alpha", "theta")

ETA_MAX_LEVEL = 0.15


@dataclass(frozen=True)
class AsymptoticResult:
    """``P(eta) ~ p0 - gamma eta^kappa`` with the method that produced it.

    ``provenance`` is one of ``aloha-quadrature``, ``csma-formula``,
    ``epstein-zeta``, ``cluster-mac``, ``parent-thinning``, ``u3-descriptor``
    or ``fitted``. ``gamma`` is ``nan`` when no value is available; for the
    descriptor entry only its sign (negative) is known.
    """

    scheme: str
    gamma: float
    kappa: float
    provenance: str
    alpha: float
    theta: float
    p0: float = 1.0
    note: str = ""

    def row(self) -> list:
        return [self.scheme, self.gamma, self.kappa, self.provenance, self.alpha, self.theta]

    @property
    def eta_max(self) -> float:
        if not (self.gamma > 0 and self.kappa > 0 and self.p0 == 1.0):
            return float("nan")
        return eta_max(self.gamma, self.kappa)


def _link_gain(pathloss: PathLossModel, link_distance):
    return 1.0 if link_distance is None else float(pathloss.gain(link_distance))


def gamma_aloha(model: ProductDensity, theta: float, pathloss: PathLossModel, lam: float | None = None, link_distance=None, d: int = 2) -> float:
    """``lambda^-1 int rho2(|x|) Delta(x) dx`` by radial quadrature."""
    if not pathloss.alpha > d:
        raise ParameterError(f"the contention integral diverges unless alpha > d (alpha={pathloss.alpha})")
    lam = model.intensity if lam is None else lam
    R = link_distance

    def f(r):
        return rho2(model, r) * delta(r, pathloss, theta, R)

    lr = _link_gain(pathloss, R)
    scale = (theta / lr) ** (1 / pathloss.alpha)
    pts = [*model.breakpoints(), scale, 1.0]
    return radial_integral(f, d, points=pts, epsrel=1e-10) / lam


def csma_g(r, lam: float):
    """Helper ``g(r)`` of the carrier-sensing contention integral."""
    u = np.sqrt(lam * np.pi) * np.asarray(r, dtype=float)
    return 2 * np.pi - 2 * np.arccos(np.clip(u / 2, -1, 1)) + u / 2 * np.sqrt(np.maximum(4 - u * u, 0.0))


def gamma_csma_matern(lam: float, theta: float, alpha: float, link_distance=None) -> float:
    """Spatial contention of carrier sensing on a PPP of intensity ``lam``.

    First term in closed form plus the transition-zone integral over
    ``[1/sqrt(lam pi), 2/sqrt(lam pi)]``. With a link distance ``R`` the
    result is scaled by ``l(R)^-1 = R^alpha``.
    """
    if not alpha > 2:
        raise ParameterError("requires alpha > 2")
    if not lam > 0 or not theta > 0:
        raise ParameterError("requires lam > 0 and theta > 0")
    first = theta * lam ** (alpha / 2) * math.pi ** (alpha / 2) * 2 ** (3 - alpha) / (alpha - 2)
    a = 1 / math.sqrt(lam * math.pi)
    val, err = integrate.quad(lambda r: r ** (1 - alpha) / float(csma_g(r, lam)), a, 2 * a, epsabs=0.0, epsrel=1e-12)
    if err > 1e-8 * abs(val):
        raise NumericalError("carrier-sensing integral did not converge")
    gamma = first + 4 * theta * lam * math.pi**2 * val
    if link_distance is not None:
        gamma *= float(link_distance) ** alpha
    return gamma


def gamma3_approx(alpha: float) -> float:
    """Closed-form approximation of the 3-d lattice sum ``Z^(3)(alpha)``."""
    if not alpha > 3:
        raise ParameterError("requires alpha > 3")
    ups = math.sqrt(math.pi) * math.gamma(alpha / 2 - 0.5) / math.gamma(alpha / 2)
    return (
        4 * ups * zeta(alpha / 2 - 0.5) * dirichlet_beta(alpha / 2 - 0.5)
        - 4 * ups * zeta(alpha - 1)
        + 8 * zeta(alpha / 2) * dirichlet_beta(alpha / 2)
        - 2 * zeta(alpha)
    )


@dataclass(frozen=True)
class TdmaBounds:
    lower: float
    upper: float
    exact: float
    eta: float


def tdma_exact(d: int, m: int, theta: float, alpha: float) -> float:
    """``prod_{x != 0} 1 / (1 + theta' |x|^-alpha)`` with ``theta' = theta m^-alpha``."""
    if not alpha > d:
        raise ParameterError(f"the lattice product is zero unless alpha > d (alpha={alpha}, d={d})")
    if m < 1:
        raise ParameterError("m must be >= 1")
    tp = theta / float(m) ** alpha
    log_inv = lattice_sum(lambda r: np.log1p(tp * r ** (-alpha)), d)
    return math.exp(-log_inv)


def tdma_bounds(d: int, m: int, theta: float, alpha: float) -> TdmaBounds:
    """Epstein-zeta bounds and the exact lattice product for ``m^d``-phase TDMA."""
    Z = TABLE.epstein(d, alpha)
    eta = float(m) ** (-d)
    x = Z * theta * eta ** (alpha / d)
    lower = math.exp(-x)
    upper = 1.0 / (1.0 + x)
    exact = tdma_exact(d, m, theta, alpha)
    tol = 1e-12
    if not (lower - tol <= exact <= upper + tol):
        raise NumericalError(f"lattice product {exact} escapes its bounds [{lower}, {upper}]")
    return TdmaBounds(lower, upper, exact, eta)


def _richardson(values, etas, q):
    """Extrapolate ``G(eta) = g + A eta^q + ...`` to ``eta = 0``."""
    g = list(values)
    e = list(etas)
    while len(g) > 1:
        nxt = []
        for k in range(len(g) - 1):
            r = (e[k] / e[k + 1]) ** q
            nxt.append((r * g[k + 1] - g[k]) / (r - 1))
        g = nxt
        e = e[1:]
    return g[0]


def cluster_mac_gamma(spec: ClusterSpec, b: float, theta: float, pathloss: PathLossModel | None = None, link=None, etas=(1e-6, 1e-7, 1e-8)) -> float:
    """``lim (1 - P(eta)) / eta^b`` of the cluster MAC via Richardson extrapolation.

    The leading correction to ``(1 - P) / eta^b`` is of order
    ``eta^min(b, 1 - b)``, which sets the extrapolation exponent.
    """
    if not 0 < b < 1:
        raise ParameterError("requires 0 < b < 1")
    pathloss = pathloss or PathLossModel("singular", 4.0)
    G = []
    for eta in etas:
        q = outage_thomas_closed(spec.parent_intensity * eta ** (1 - b), spec.mean_daughters * eta**b, spec.sigma, theta, pathloss, link)
        G.append(q / eta**b)
    return _richardson(G, etas, min(b, 1 - b))


def cluster_mac_gamma_limit(spec: ClusterSpec, theta: float, pathloss: PathLossModel | None = None, link_distance=None) -> float:
    """Analytic limit ``c int Delta(x) (f*f)(x) dx`` of the cluster-MAC contention."""
    pathloss = pathloss or PathLossModel("singular", 4.0)
    s2 = spec.sigma**2

    def f(r):
        return math.exp(-r * r / (4 * s2)) / (4 * math.pi * s2) * delta(r, pathloss, theta, link_distance)

    return spec.mean_daughters * radial_integral(f, 2, points=[1.0, 2 * spec.sigma])


def parent_thinning(spec: ClusterSpec, theta: float, pathloss: PathLossModel | None = None, link=None):
    """``(P0, gamma)`` for cluster-only thinning (``b = 0``), where ``kappa = 1``.

    ``P(eta) = P0 exp(-eta mu X)`` with ``X = int [1 - exp(-c beta)]``, so
    ``P0 - P(eta) ~ P0 mu X eta``.
    """
    pathloss = pathloss or PathLossModel("singular", 4.0)
    far, own = success_thomas_closed(spec.parent_intensity, spec.mean_daughters, spec.sigma, theta, pathloss, link, parts=True)
    p0 = 1.0 - own
    return p0, p0 * far


def unreasonable_tdma_p0(theta: float, alpha: float, spacing: float = 1.0) -> float:
    """Limit of the run-based TDMA as runs grow: a full 1-d lattice of interferers."""
    return tdma_exact(1, 1, theta * spacing ** (-alpha), alpha)


def _scheme_label(scheme, model) -> str:
    return f"{model.name}+{scheme.name}"


def gamma_kappa_for(scheme, model, theta: float, pathloss: PathLossModel | None = None, link: LinkSpec | None = None) -> AsymptoticResult:
    """Dispatch to the analytic ``(gamma, kappa)`` of a model/MAC pair.

    ``model`` is one of the node models in :mod:`netoutage.networks`.
    Unsupported pairs raise :class:`NotSupportedError`.
    """
    pathloss = pathloss or PathLossModel("singular", 4.0)
    link = link or LinkSpec(theta=theta)
    R = link.distance
    alpha = pathloss.alpha
    label = _scheme_label(scheme, model)
    common = dict(alpha=alpha, theta=theta)
    pathloss.check_dimension(model.d)

    if isinstance(scheme, Aloha) or (isinstance(scheme, ClusterMac) and scheme.b == 1):
        density = model.product_density() if hasattr(model, "product_density") else None
        if density is None or model.d != 2:
            raise NotSupportedError(f"no product density for ALOHA on {model.name}")
        g = gamma_aloha(density, theta, pathloss, link_distance=R)
        return AsymptoticResult(label, g, 1.0, "aloha-quadrature", note="eta <= eta_max", **common)

    if isinstance(scheme, CsmaMatern):
        if model.name != "ppp" or model.d != 2:
            raise NotSupportedError("carrier sensing is only analysed on a planar PPP")
        if pathloss.kind != "singular":
            raise NotSupportedError("the carrier-sensing formula assumes singular path loss")
        g = gamma_csma_matern(model.intensity, theta, alpha, R)
        return AsymptoticResult(label, g, alpha / 2, "csma-formula", note="eta <= eta_max", **common)

    if isinstance(scheme, TdmaLattice):
        if model.name != "lattice":
            raise NotSupportedError("lattice TDMA needs a lattice model")
        if pathloss.kind != "singular":
            raise NotSupportedError("the lattice-sum result assumes singular path loss")
        lr = _link_gain(pathloss, R)
        g = TABLE.epstein(model.d, alpha) * theta * model.spacing ** (-alpha) / lr
        return AsymptoticResult(label, g, alpha / model.d, "epstein-zeta", note="exact bounds for all eta", **common)

    if isinstance(scheme, ClusterMac):
        if model.name != "thomas":
            raise NotSupportedError("cluster MAC needs a Thomas model")
        if scheme.b == 0:
            p0, g = parent_thinning(model.spec, theta, pathloss, link)
            return AsymptoticResult(label, g, 1.0, "parent-thinning", p0=p0, note="P0 < 1", **common)
        g = cluster_mac_gamma(model.spec, scheme.b, theta, pathloss, link)
        return AsymptoticResult(label, g, scheme.b, "cluster-mac", note="kappa = b < 1", **common)

    if isinstance(scheme, UnreasonableTdma):
        if model.name != "lattice" or model.d != 2:
            raise NotSupportedError("run-based TDMA needs a planar lattice")
        p0 = unreasonable_tdma_p0(theta / _link_gain(pathloss, R), alpha, model.spacing)
        return AsymptoticResult(label, float("nan"), float("nan"), "u3-descriptor", p0=p0, note="P0 < 1, gamma < 0", **common)

    raise NotSupportedError(f"no asymptotic result for {label}")


def conjecture_envelope(gamma: float, kappa: float, eta):
    """``(max(0, 1 - gamma eta^kappa), 1 / (1 + gamma eta^kappa))``."""
    if not gamma > 0 or not kappa > 0:
        raise ParameterError("envelope needs gamma > 0 and kappa > 0")
    x = gamma * np.asarray(eta, dtype=float) ** kappa
    lo = np.maximum(0.0, 1.0 - x)
    hi = 1.0 / (1.0 + x)
    if np.ndim(x) == 0:
        return float(lo), float(hi)
    return lo, hi


def eta_max(gamma: float, kappa: float, level: float = ETA_MAX_LEVEL) -> float:
    """Largest ``eta`` for which the first-order law is a good fit, capped at 1."""
    if not gamma > 0 or not kappa > 0:
        raise ParameterError("needs gamma > 0 and kappa > 0")
    return min(1.0, (level / gamma) ** (1.0 / kappa))
