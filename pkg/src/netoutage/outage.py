"""Success probability of the typical link.

All estimators assume Rayleigh fading on the desired link (exponential
signal power ``S``), which is what makes the conditional estimator exact:
given the transmitter positions, ``P(S >= theta * I) = prod L_h(theta * g_x)``
with ``g_x`` the normalised interferer gains and ``L_h`` the Laplace
transform of the interferer fading.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import CoincidentPointError, EstimationError, NumericalError, ParameterError
from .pointprocess import ClusterSpec, PointPattern, Window, unit_sphere_area
from .rng import stream
from .special import _smooth_step, lattice_sum

__all__ = [
    "PathLossModel",
    "RayleighFading",
    "LinkSpec",
    "OutageEstimate",
    "delta",
    "interference",
    "success_conditional",
    "estimate_success",
    "success_ppp_aloha_closed",
    "success_thomas_closed",
    "success_thomas_aloha_closed",
    "thomas_beta",
    "radial_integral",
    "ESTIMATE_HEADER",
]

ESTIMATE_HEADER = ("eta", "p_success", "std_err", "n_reps", "estimator", "scheme", "alpha", "theta", "seed")

_KINDS = ("singular", "bounded_sum", "bounded_min")

# interferers are down-weighted smoothly between TAPER_START * reach and the
# reach; a hard cut would make lattice sums jump with every shell of points
TAPER_START = 0.5


@dataclass(frozen=True)
class PathLossModel:
    """Power-law attenuation ``l(r)``.

    ``singular``: ``r^-alpha``; ``bounded_sum``: ``1 / (1 + r^alpha)``;
    ``bounded_min``: ``min(1, r^-alpha)``.
    """

    kind: str = "singular"
    alpha: float = 4.0

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "_")
        aliases = {"boundedsum": "bounded_sum", "boundedmin": "bounded_min"}
        kind = aliases.get(kind, kind)
        if kind not in _KINDS:
            raise ParameterError(f"unknown path-loss model {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.alpha > 0:
            raise ParameterError("path-loss exponent must be positive")

    def check_dimension(self, d: int):
        if not self.alpha > d:
            raise ParameterError(f"interference is infinite unless alpha > d (alpha={self.alpha}, d={d})")

    def gain(self, r):
        r = np.asarray(r, dtype=float)
        a = self.alpha
        with np.errstate(divide="ignore"):
            if self.kind == "singular":
                out = r ** (-a)
            elif self.kind == "bounded_sum":
                out = 1.0 / (1.0 + r**a)
            else:
                out = np.minimum(1.0, r ** (-a))
        return out if out.ndim else float(out)

    @property
    def unit_gain_distance(self) -> float:
        """Link distance with ``l(R) = 1``."""
        return 0.0 if self.kind == "bounded_sum" else 1.0


@dataclass(frozen=True)
class RayleighFading:
    """Unit-mean exponential power fading."""

    name: str = "rayleigh"

    def laplace(self, s):
        return 1.0 / (1.0 + s)

    def log_laplace(self, s):
        return -np.log1p(s)

    def loss(self, s):
        """``1 - laplace(s)`` without cancellation for small ``s``."""
        return s / (1.0 + s)

    def sample(self, rng: np.random.Generator, size):
        return rng.standard_exponential(size)


@dataclass(frozen=True)
class LinkSpec:
    """Typical-link geometry and thresholds.

    ``distance=None`` means the unit-gain distance of the path-loss model.
    ``orientation="receiver"`` makes the typical point of the transmitter
    set the receiver; ``"transmitter"`` makes it the transmitter with the
    receiver at ``distance`` in a uniformly random direction.
    ``noise`` is the noise power ``W`` and ``power`` the transmit power.
    """

    theta: float = 2.0
    distance: float | None = None
    orientation: str = "receiver"
    noise: float = 0.0
    power: float = 1.0
    fading: RayleighFading = field(default_factory=RayleighFading)

    def __post_init__(self):
        if not self.theta > 0:
            raise ParameterError("SIR threshold must be positive")
        if self.distance is not None and not self.distance > 0:
            raise ParameterError("link distance must be positive")
        if self.orientation not in ("receiver", "transmitter"):
            raise ParameterError("orientation must be 'receiver' or 'transmitter'")
        if self.noise < 0 or not self.power > 0:
            raise ParameterError("noise must be >= 0 and power > 0")

    def link_distance(self, pathloss: PathLossModel) -> float:
        return pathloss.unit_gain_distance if self.distance is None else float(self.distance)

    def link_gain(self, pathloss: PathLossModel) -> float:
        return 1.0 if self.distance is None else float(pathloss.gain(self.distance))

    def noise_factor(self, pathloss: PathLossModel) -> float:
        if self.noise == 0:
            return 1.0
        return math.exp(-self.theta * self.noise / (self.power * self.link_gain(pathloss)))


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo estimate of the success probability at one ``eta``.

    ``n_reps`` counts typical links. ``std_err`` is computed from the
    variability between independent realizations, which accounts for the
    correlation of links that share a realization. ``link_var`` is the plain
    sample variance of the per-link values.
    """

    eta: float
    p_success: float
    std_err: float
    n_reps: int
    estimator: str
    scheme: str = ""
    alpha: float = float("nan")
    theta: float = float("nan")
    seed: int | None = None
    n_realizations: int = 0
    rejected: int = 0
    link_var: float = float("nan")

    def row(self) -> list:
        return [self.eta, self.p_success, self.std_err, self.n_reps, self.estimator, self.scheme, self.alpha, self.theta, self.seed]


def delta(x, pathloss: PathLossModel, theta: float, link_distance: float | None = None, fading=None):
    """Success-loss kernel ``1 - L_h(theta l(x) / l(R))``.

    For Rayleigh fading this is ``1 / (1 + l(R) / (theta l(x)))``. At
    ``x = 0`` under singular path loss the kernel is 1 (its limit).
    """
    if not theta > 0:
        raise ParameterError("SIR threshold must be positive")
    fading = fading or RayleighFading()
    lr = 1.0 if link_distance is None else pathloss.gain(link_distance)
    s = theta * pathloss.gain(x) / lr
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(s), 1.0, fading.loss(np.where(np.isinf(s), 0.0, s)))
    return out if np.ndim(out) else float(out)


def _coords(points, d=None):
    if isinstance(points, PointPattern):
        return points.coords, points.window
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, d or 1) if d else arr.reshape(1, -1) if arr.size else arr.reshape(0, 1)
    return arr, None


def _distances(transmitters, receiver, window):
    tx, win = _coords(transmitters)
    window = window or win
    rx = np.asarray(receiver, dtype=float).reshape(1, -1)
    if len(tx) == 0:
        return np.empty(0)
    if window is not None:
        return window.distance(rx, tx)
    return np.sqrt(np.sum((tx - rx) ** 2, axis=1))


def interference(transmitters, receiver, pathloss: PathLossModel, fading_draws=None, window: Window | None = None) -> float:
    """Total received power ``sum h_x l(|x - y|)`` at ``receiver``.

    Distances use the window's wrap mode when a window is available.
    ``fading_draws=None`` means unit fading.
    """
    r = _distances(transmitters, receiver, window)
    if pathloss.kind == "singular" and np.any(r == 0):
        raise CoincidentPointError("receiver coincides with a transmitter")
    g = pathloss.gain(r)
    h = np.ones_like(g) if fading_draws is None else np.asarray(fading_draws, dtype=float)
    return math.fsum(h * g)


def success_conditional(transmitters, receiver, link: LinkSpec, pathloss: PathLossModel, window: Window | None = None) -> float:
    """Success probability given the interferer positions.

    Fading on every link is averaged out analytically, leaving
    ``prod_x L_h(theta l(x) / l(R))`` times the noise factor.
    """
    r = _distances(transmitters, receiver, window)
    if pathloss.kind == "singular" and np.any(r == 0):
        raise CoincidentPointError("receiver coincides with a transmitter")
    s = link.theta * pathloss.gain(r) / link.link_gain(pathloss)
    return math.exp(math.fsum(link.fading.log_laplace(s))) * link.noise_factor(pathloss)


# ---------------------------------------------------------------------------
# Monte Carlo


def radial_integral(f, d: int, lo: float = 0.0, hi: float = np.inf, points=None, epsrel: float = 1e-10) -> float:
    """``int_{lo <= |x| < hi} f(|x|) dx`` in R^d."""
    S = unit_sphere_area(d)
    if lo >= hi:
        return 0.0
    pts = sorted(p for p in (points or []) if lo < p < hi)
    knots = [lo, *pts]
    if np.isfinite(hi):
        knots.append(hi)
    total, err = 0.0, 0.0
    spans = list(zip(knots[:-1], knots[1:]))

    def g(r):
        return f(r) * r ** (d - 1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in spans:
            v, e = integrate.quad(g, a, b, epsabs=0.0, epsrel=epsrel, limit=400)
            total += v
            err += e
        if not np.isfinite(hi):
            # r = a / t maps the power-law tail onto (0, 1]
            a = max(knots[-1], 1.0)
            if a > knots[-1]:
                v, e = integrate.quad(g, knots[-1], a, epsabs=0.0, epsrel=epsrel, limit=400)
                total += v
                err += e
            v, e = integrate.quad(lambda t: g(a / t) * a / (t * t) if t > 0 else 0.0, 0.0, 1.0, epsabs=0.0, epsrel=epsrel, limit=400)
            total += v
            err += e
    if not np.isfinite(total) or err > max(1e-7 * abs(total), 1e-14):
        raise NumericalError(f"radial quadrature failed (value {total:.6g}, error {err:.3g})")
    return S * total


def tail_factor(
    intensity: float,
    cutoff: float,
    d: int,
    link: LinkSpec,
    pathloss: PathLossModel,
    start: float | None = None,
    lattice_spacing: float | None = None,
) -> float:
    """Contribution of the interference the window does not resolve.

    Without ``start`` this is the mean-field factor of all transmitters
    beyond ``cutoff``. With ``start`` the simulated interferers enter with
    the tapered factor ``L(w s)`` (see :func:`taper_weight`) and the result
    supplies the complement ``E prod L(s) / L(w s)``: exactly
    ``exp(-lambda int [L(w s) - L(s)] dx)`` for a Poisson transmitter set,
    to first order in the far-field density for mixing processes, and the
    exact lattice product when ``lattice_spacing`` is given (typical point
    on the lattice).
    """
    if intensity <= 0 or not np.isfinite(cutoff):
        return 1.0
    lr = link.link_gain(pathloss)
    fading = link.fading
    if start is None:

        def kern(r):
            return fading.loss(link.theta * pathloss.gain(r) / lr)

        return math.exp(-intensity * radial_integral(kern, d, cutoff, np.inf))

    if lattice_spacing is not None:
        a = float(lattice_spacing)

        def gap(k):
            r = a * np.asarray(k, dtype=float)
            sv = link.theta * pathloss.gain(r) / lr
            return fading.log_laplace(taper_weight(r, start, cutoff) * sv) - fading.log_laplace(sv)

        return math.exp(-lattice_sum(gap, d))

    def kern(r):
        sv = link.theta * pathloss.gain(r) / lr
        return fading.loss(sv) - fading.loss(float(taper_weight(r, start, cutoff)) * sv)

    return math.exp(-intensity * radial_integral(kern, d, start, np.inf, points=[cutoff]))


def taper_weight(dist, start: float, cutoff: float):
    """Weight of a simulated interferer: 1 inside ``start``, 0 from ``cutoff`` on."""
    return 1.0 - _smooth_step((np.asarray(dist) - start) / (cutoff - start))


def _unit_vectors(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _link_values(pattern: PointPattern, link: LinkSpec, pathloss: PathLossModel, rng, estimator: str) -> np.ndarray:
    """Per-typical-link success values for one realization (no tail factor)."""
    w = pattern.window
    pts = pattern.coords
    typ = np.flatnonzero(w.in_core(pts))
    if len(typ) == 0:
        return np.empty(0)
    n, d = pts.shape
    rc = w.reach
    lr = link.link_gain(pathloss)
    if link.orientation == "transmitter":
        rx = pts[typ] + link.link_distance(pathloss) * _unit_vectors(rng, len(typ), d)
    else:
        rx = pts[typ]
    noise_term = link.theta * link.noise / (link.power * lr)
    chunk = max(1, int(2_000_000 // max(n, 1)))
    out = np.empty(len(typ))
    for a in range(0, len(typ), chunk):
        b = min(a + chunk, len(typ))
        disp = w.displacement(rx[a:b, None, :], pts[None, :, :])
        dist = np.sqrt(np.einsum("ijk,ijk->ij", disp, disp))
        use = dist < rc
        use[np.arange(b - a), typ[a:b]] = False
        if pathloss.kind == "singular" and np.any(use & (dist == 0)):
            raise CoincidentPointError("typical receiver coincides with an interferer")
        with np.errstate(divide="ignore"):
            s = np.where(use, link.theta * pathloss.gain(np.where(use, dist, 1.0)) / lr, 0.0)
        s *= taper_weight(dist, TAPER_START * rc, rc)
        if estimator == "conditional":
            out[a:b] = np.exp(np.sum(link.fading.log_laplace(s), axis=1))
        else:
            h = link.fading.sample(rng, s.shape)
            sig = rng.standard_exponential(b - a)
            out[a:b] = (sig >= np.sum(h * s, axis=1) + noise_term).astype(float)
    if estimator == "conditional":
        out *= link.noise_factor(pathloss)
    return out


def _one_realization(scenario, eta, link, pathloss, estimator, seed, point, k, max_retry=20):
    for retry in range(max_retry):
        rng = stream(seed, point, k, retry)
        pattern = scenario.realize(eta, rng)
        try:
            vals = _link_values(pattern, link, pathloss, rng, estimator)
        except CoincidentPointError:
            continue
        return vals, retry
    raise EstimationError(f"realization {k} hit coincident points {max_retry} times")


def estimate_success(
    scenario,
    eta: float,
    link: LinkSpec,
    pathloss: PathLossModel,
    n: int = 100_000,
    seed: int = 0,
    estimator: str = "conditional",
    point: int = 0,
    workers: int = 1,
    max_realizations: int | None = None,
) -> OutageEstimate:
    """Palm estimate of the success probability.

    Every transmitter of a realization whose neighbourhood is fully observed
    serves as a typical point. Realizations ``0, 1, 2, ...`` (each seeded
    by ``(seed, point, k)``) are consumed in order until at least ``n``
    typical links have been collected, so the result does not depend on
    ``workers``. The estimate is the ratio of summed link values to the
    number of links. Simulated interferers fade out smoothly towards the
    window's resolvable range and :func:`tail_factor` supplies the rest.

    ``scenario`` must provide ``realize(eta, rng) -> PointPattern``,
    ``transmitter_intensity(eta)``, ``d`` and ``name``.
    """
    if estimator not in ("conditional", "raw"):
        raise ParameterError("estimator must be 'conditional' or 'raw'")
    if n < 1:
        raise ParameterError("at least one replication is required")
    if not 0 <= eta <= 1:
        raise ParameterError("eta must lie in [0, 1]")
    pathloss.check_dimension(scenario.d)
    common = dict(scheme=scenario.name, alpha=pathloss.alpha, theta=link.theta, seed=seed)
    lam_t = scenario.transmitter_intensity(eta)
    if eta == 0 or lam_t == 0:
        return OutageEstimate(eta, link.noise_factor(pathloss), 0.0, 0, estimator, link_var=0.0, **common)

    probe = scenario.window_for(eta)
    spacing = None
    if link.orientation == "receiver" and hasattr(scenario, "transmitter_lattice"):
        spacing = scenario.transmitter_lattice(eta)
    tail = tail_factor(lam_t, probe.reach, scenario.d, link, pathloss, start=TAPER_START * probe.reach, lattice_spacing=spacing)
    per_real = max(lam_t * probe.core_volume, 1e-9)
    if max_realizations is None:
        max_realizations = int(50 * math.ceil(n / per_real)) + 1000

    sums, counts, sq = [], [], []
    rejected = 0
    total = 0
    k = 0
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while total < n:
            if k >= max_realizations:
                break
            batch = min(max(1, int(math.ceil((n - total) / per_real * 1.05))), max_realizations - k)
            ids = range(k, k + batch)
            args = (scenario, eta, link, pathloss, estimator, seed, point)
            if pool is None:
                results = [_one_realization(*args, i) for i in ids]
            else:
                results = list(pool.map(lambda i: _one_realization(*args, i), ids))
            for vals, retry in results:
                k += 1
                rejected += retry
                vals = vals * tail
                sums.append(math.fsum(vals))
                sq.append(math.fsum(vals * vals))
                counts.append(len(vals))
                total += len(vals)
                if total >= n:
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    if total == 0:
        raise EstimationError("no typical links were observed; increase the window or eta")
    S = np.array(sums)
    M = np.array(counts, dtype=float)
    p = math.fsum(S) / total
    mean_sq = math.fsum(sq) / total
    link_var = max(mean_sq - p * p, 0.0) * total / max(total - 1, 1)
    kr = len(S)
    if kr > 1:
        resid = S - p * M
        se = math.sqrt(math.fsum(resid * resid) / (kr * (kr - 1))) / M.mean()
    else:
        se = math.sqrt(link_var / total)
    return OutageEstimate(
        eta, min(max(p, 0.0), 1.0), se, total, estimator, n_realizations=kr, rejected=rejected, link_var=link_var, **common
    )


# ---------------------------------------------------------------------------
# closed forms


def success_ppp_aloha_closed(lam: float, eta: float, theta: float, alpha: float, link_distance: float = 1.0) -> float:
    """Exact success probability of ALOHA on a planar PPP (Rayleigh, singular).

    ``exp(-eta lam theta^(2/alpha) R^2 (2 pi / alpha) Gamma(2/alpha) Gamma(1 - 2/alpha))``
    """
    if not alpha > 2:
        raise ParameterError("the closed form requires alpha > 2")
    if lam < 0 or not 0 <= eta <= 1 or not theta > 0:
        raise ParameterError("need lam >= 0, 0 <= eta <= 1, theta > 0")
    c = theta ** (2 / alpha) * link_distance**2 * (2 * math.pi / alpha) * math.gamma(2 / alpha) * math.gamma(1 - 2 / alpha)
    return math.exp(-eta * lam * c)


def thomas_beta(s, sigma: float, kern, epsrel: float = 1e-11) -> float:
    """``E kern(|X - y|)`` for ``X ~ N(0, sigma^2 I_2)`` and ``|y| = s``.

    The distance ``|X - y|`` is Rician; its density is integrated against the
    radial kernel with the exponentially scaled Bessel function to avoid
    overflow.
    """
    s2 = sigma * sigma

    def dens(r):
        return r / s2 * math.exp(-((r - s) ** 2) / (2 * s2)) * special.i0e(r * s / s2)

    lo = max(0.0, s - 12 * sigma)
    hi = s + 12 * sigma
    pts = [p for p in (s, 1.0) if lo < p < hi]
    val, err = integrate.quad(lambda r: kern(r) * dens(r), lo, hi, points=pts or None, epsabs=1e-15, epsrel=epsrel, limit=400)
    if err > max(1e-7 * abs(val), 1e-14):
        raise NumericalError(f"inner cluster quadrature failed at s={s:.4g} (error {err:.3g})")
    return val


_BETA_CACHE: dict = {}


def success_thomas_closed(
    parent_intensity: float,
    mean_daughters: float,
    sigma: float,
    theta: float,
    pathloss: PathLossModel | None = None,
    link: LinkSpec | None = None,
    parts: bool = False,
):
    """Success probability on a planar Thomas cluster transmitter set.

    ``P = exp(-mu int [1 - exp(-c beta(y))] dy) * int exp(-c beta(y)) f(y) dy``
    with ``beta = Delta * f``. Returns ``1 - P`` pieces when ``parts`` is
    true: ``(x_far, z_own)`` with ``P = exp(-x_far) * (1 - z_own)``.
    """
    pathloss = pathloss or PathLossModel("singular", 4.0)
    pathloss.check_dimension(2)
    link = link or LinkSpec(theta=theta)
    lr = link.link_gain(pathloss)
    mu, c = float(parent_intensity), float(mean_daughters)
    if mu < 0 or c < 0 or not sigma > 0:
        raise ParameterError("cluster parameters must be non-negative, sigma > 0")

    key = (float(sigma), float(theta), pathloss, float(lr), link.fading)

    def kern(r):
        if r == 0:
            return 1.0
        return link.fading.loss(theta * pathloss.gain(r) / lr)

    def loss(s):
        bkey = key + (s,)
        b = _BETA_CACHE.get(bkey)
        if b is None:
            if len(_BETA_CACHE) > 200_000:
                _BETA_CACHE.clear()
            b = _BETA_CACHE[bkey] = thomas_beta(s, sigma, kern)
        return -math.expm1(-c * b)

    s2 = sigma * sigma
    split = 12 * sigma + 10
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        own, e1 = integrate.quad(lambda s: loss(s) * math.exp(-s * s / (2 * s2)) * s / s2, 0, 14 * sigma, epsabs=0.0, epsrel=1e-10, limit=400)
        far1, e2 = integrate.quad(lambda s: loss(s) * s, 0, split, epsabs=0.0, epsrel=1e-10, limit=400)
        far2, e3 = integrate.quad(lambda s: loss(s) * s, split, np.inf, epsabs=0.0, epsrel=1e-8, limit=400)
    far = 2 * math.pi * mu * (far1 + far2)
    if max(e1 / max(own, 1e-300), (e2 + e3) / max(far1 + far2, 1e-300)) > 1e-6:
        raise NumericalError("outer cluster quadrature did not converge")
    if parts:
        return far, own
    return math.exp(-far) * (1.0 - own)


def success_thomas_aloha_closed(spec: ClusterSpec, eta: float, theta: float, alpha: float = 4.0, pathloss=None, link=None) -> float:
    """ALOHA on a Thomas process: the closed form with ``c`` replaced by ``c eta``."""
    if not 0 <= eta <= 1:
        raise ParameterError("eta must lie in [0, 1]")
    if eta == 0:
        return 1.0
    pathloss = pathloss or PathLossModel("singular", alpha)
    return success_thomas_closed(spec.parent_intensity, spec.mean_daughters * eta, spec.sigma, theta, pathloss, link)


def outage_thomas_closed(parent_intensity, mean_daughters, sigma, theta, pathloss=None, link=None) -> float:
    """``1 - P`` for the Thomas closed form, computed without cancellation."""
    far, own = success_thomas_closed(parent_intensity, mean_daughters, sigma, theta, pathloss, link, parts=True)
    return -math.expm1(-far) + math.exp(-far) * own
