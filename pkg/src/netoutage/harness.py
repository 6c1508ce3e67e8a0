"""Sweeps over ``eta``, scaling fits, taxonomy labels and figure datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from . import asymptotics as asy
from .errors import FitError, NotSupportedError, ParameterError
from .mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma, check_conditions
from .networks import LatticeModel, MaternModel, PoissonModel, Scenario, ThomasModel, describe
from .outage import ESTIMATE_HEADER, LinkSpec, OutageEstimate, PathLossModel, delta, estimate_success, radial_integral
from .pointprocess import ClusterSpec, ProductDensity, matern_intensity, rho2
from .rng import RNG_NAME

__all__ = [
    "SweepResult",
    "FitResult",
    "TaxonomyLabel",
    "eta_grid",
    "default_fit_window",
    "sweep",
    "fit_kappa_gamma",
    "classify",
    "reproduce_figure",
    "FIGURES",
    "fmt",
    "write_csv",
    "gamma_aloha_swapped",
    "thomas_sigma_for_gamma",
]


def fmt(x) -> str:
    """Locale-independent rendering with 9 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    if x is None:
        return ""
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


@dataclass
class SweepResult:
    """Estimates over a decreasing ``eta`` grid plus the analytic law if known."""

    scheme: str
    estimates: list
    analytic: asy.AsymptoticResult | None = None
    config: dict = field(default_factory=dict)

    @property
    def eta(self) -> np.ndarray:
        return np.array([e.eta for e in self.estimates])

    @property
    def p(self) -> np.ndarray:
        return np.array([e.p_success for e in self.estimates])

    @property
    def se(self) -> np.ndarray:
        return np.array([e.std_err for e in self.estimates])

    def rows(self):
        return [e.row() for e in self.estimates]

    def write(self, path) -> Path:
        return write_csv(path, ESTIMATE_HEADER, self.rows())


def eta_grid(lo: float, hi: float, n: int = 8) -> np.ndarray:
    """``n`` logarithmically spaced values from ``hi`` down to ``lo``."""
    if not 0 < lo < hi <= 1:
        raise ParameterError("need 0 < lo < hi <= 1")
    return np.geomspace(hi, lo, n)


def default_fit_window(result: asy.AsymptoticResult | None):
    """``[hi / 10, hi]`` with ``hi = min(eta_max, 0.1)``."""
    hi = 0.1
    if result is not None and np.isfinite(result.eta_max):
        hi = min(result.eta_max, 0.1)
    return hi / 10, hi


def sweep(
    scenario: Scenario,
    etas,
    link: LinkSpec,
    pathloss: PathLossModel,
    n: int = 100_000,
    seed: int = 0,
    estimator: str = "conditional",
    workers: int = 1,
    analytic: bool = True,
) -> SweepResult:
    """Estimate the success probability at every grid value.

    Grid point ``k`` uses the random streams ``(seed, k, ...)`` so each point
    can be recomputed in isolation.
    """
    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 1 or len(etas) == 0:
        raise ParameterError("need a non-empty 1-d eta grid")
    if np.any(np.diff(etas) >= 0):
        raise ParameterError("eta grid must be strictly decreasing")
    if etas[0] > 1 or etas[-1] <= 0:
        raise ParameterError("grid values must lie in (0, 1]")
    ests = [
        estimate_success(scenario, float(e), link, pathloss, n=n, seed=seed, estimator=estimator, point=k, workers=workers)
        for k, e in enumerate(etas)
    ]
    res = None
    if analytic:
        try:
            res = analytic_for(scenario, link, pathloss)
        except NotSupportedError:
            res = None
    cfg = {**describe(scenario), "alpha": pathloss.alpha, "pathloss": pathloss.kind, "theta": link.theta, "n": n, "seed": seed}
    return SweepResult(scenario.name, ests, res, cfg)


def gamma_aloha_swapped(model: ProductDensity, theta: float, pathloss: PathLossModel, link_distance: float | None = None) -> float:
    """ALOHA contention when the typical point is the transmitter.

    ``lambda^-1 int rho2(|x|) Delta(|x - y|) dx`` with the receiver ``y`` at
    the link distance.
    """
    R = pathloss.unit_gain_distance if link_distance is None else link_distance
    lr = 1.0 if link_distance is None else pathloss.gain(link_distance)
    from scipy import integrate

    def ang(r):
        if r == 0:
            return 2 * math.pi * float(delta(R, pathloss, theta, link_distance))
        v, _ = integrate.quad(
            lambda phi: float(delta(math.sqrt(max(r * r + R * R - 2 * r * R * math.cos(phi), 0.0)), pathloss, theta, link_distance)),
            0,
            math.pi,
            epsabs=1e-13,
            epsrel=1e-10,
            limit=200,
        )
        return 2 * v

    pts = sorted({*model.breakpoints(), R, (theta / lr) ** (1 / pathloss.alpha) + R})
    total = 0.0
    knots = [0.0, *[p for p in pts if p > 0]]
    for a, b in zip(knots[:-1], knots[1:]):
        v, _ = integrate.quad(lambda r: rho2(model, r) * ang(r) * r, a, b, epsabs=1e-13, epsrel=1e-9, limit=200)
        total += v
    v, _ = integrate.quad(lambda t: rho2(model, knots[-1] / t) * ang(knots[-1] / t) * knots[-1] ** 2 / t**3 if t > 0 else 0.0, 0, 1, epsabs=1e-13, epsrel=1e-9, limit=200)
    total += v
    return total / model.intensity


def analytic_for(scenario: Scenario, link: LinkSpec, pathloss: PathLossModel) -> asy.AsymptoticResult:
    """Analytic law for a scenario, including the swapped-link ALOHA case."""
    res = asy.gamma_kappa_for(scenario.scheme, scenario.model, link.theta, pathloss, link)
    if link.orientation == "transmitter" and res.provenance == "aloha-quadrature":
        g = gamma_aloha_swapped(scenario.model.product_density(), link.theta, pathloss, link.distance)
        res = asy.AsymptoticResult(res.scheme, g, 1.0, res.provenance, res.alpha, res.theta, note="swapped link")
    return res


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitResult:
    """Weighted log-log fit of ``P0 - P`` against ``eta``.

    ``kappa`` and ``gamma`` are slope and ``exp(intercept)``; ``*_ci`` are
    95% intervals. ``gamma_ref`` is the extrapolated
    ``lim (P0 - P) / eta^kappa_ref`` for a given exponent (``nan`` when no
    reference exponent was supplied).
    """

    kappa: float
    kappa_se: float
    kappa_ci: tuple
    gamma: float
    gamma_ci: tuple
    p0: float
    n_points: int
    window: tuple
    kappa_ref: float = float("nan")
    gamma_ref: float = float("nan")
    gamma_ref_se: float = float("nan")


def _wls(X, y, w=None):
    """Weighted least squares; ``w=None`` marks exact inputs, whose scatter sets the error."""
    exact = w is None
    if exact:
        w = np.ones_like(y)
    W = w[:, None]
    A = X.T @ (W * X)
    cov = np.linalg.inv(A)
    beta = cov @ (X.T @ (w * y))
    resid = y - X @ beta
    dof = len(y) - X.shape[1]
    chi2 = float(np.sum(w * resid**2))
    if dof <= 0:
        scale = 1.0
    else:
        scale = chi2 / dof if exact else max(chi2 / dof, 1.0)
    return beta, cov * scale, dof


def fit_kappa_gamma(result: SweepResult, window=None, p0: float = 1.0, kappa_ref: float | None = None, min_points: int = 4) -> FitResult:
    """Fit ``log(P0 - P) = log gamma + kappa log eta`` by weighted least squares.

    Points enter when they lie in ``window`` and ``P0 - P > 3 SE``; weights
    are the inverse delta-method variances ``(SE / (P0 - P))^-2``. Exact
    (zero-SE) inputs get equal weights.

    With ``kappa_ref`` the contention is also extrapolated at that fixed
    exponent: ``(P0 - P) / eta^kappa_ref`` is regressed on ``eta^kappa_ref``
    and the intercept is the limit.
    """
    if window is None:
        window = default_fit_window(result.analytic)
    lo, hi = window
    eta, p, se = result.eta, result.p, result.se
    gap = p0 - p
    sel = (eta >= lo * (1 - 1e-12)) & (eta <= hi * (1 + 1e-12)) & (gap > 3 * se) & (gap > 0)
    if sel.sum() < min_points:
        raise FitError(
            f"only {int(sel.sum())} grid points in [{lo:.3g}, {hi:.3g}] rise above 3 standard errors; "
            "increase the number of replications or move the window"
        )
    x = np.log(eta[sel])
    y = np.log(gap[sel])
    rel = se[sel] / gap[sel]
    w = 1.0 / np.maximum(rel, 1e-9) ** 2 if np.any(rel > 0) else None
    X = np.stack([np.ones_like(x), x], 1)
    beta, cov, dof = _wls(X, y, w)
    tq = stats.t.ppf(0.975, max(dof, 1))
    k, kse = float(beta[1]), float(math.sqrt(cov[1, 1]))
    lg, lgse = float(beta[0]), float(math.sqrt(cov[0, 0]))
    out = dict(
        kappa=k,
        kappa_se=kse,
        kappa_ci=(k - tq * kse, k + tq * kse),
        gamma=math.exp(lg),
        gamma_ci=(math.exp(lg - tq * lgse), math.exp(lg + tq * lgse)),
        p0=p0,
        n_points=int(sel.sum()),
        window=(lo, hi),
    )
    if kappa_ref is not None and sel.sum() >= 3:
        u = eta[sel] ** kappa_ref
        z = gap[sel] / u
        zse = se[sel] / u
        wz = 1.0 / np.maximum(zse, 1e-300) ** 2 if np.any(zse > 0) else None
        bz, cz, _ = _wls(np.stack([np.ones_like(u), u], 1), z, wz)
        out.update(kappa_ref=float(kappa_ref), gamma_ref=float(bz[0]), gamma_ref_se=float(math.sqrt(cz[0, 0])))
    return FitResult(**out)


# ---------------------------------------------------------------------------
# taxonomy


@dataclass(frozen=True)
class TaxonomyLabel:
    """Class label with the fitted quantities that justify it."""

    label: str
    p0: float
    kappa: float
    gamma: float
    diagnostics: tuple = ()

    def line(self) -> str:
        return f"class={self.label} p0={fmt(self.p0)} kappa={fmt(self.kappa)} gamma={fmt(self.gamma)}"


def _linear_trend(eta, p, se):
    """WLS of ``P`` on ``eta``: returns ``(p0, p0_se, slope, slope_se)``."""
    w = 1.0 / np.maximum(se, 1e-12) ** 2 if np.any(se > 0) else None
    X = np.stack([np.ones_like(eta), eta], 1)
    beta, cov, _ = _wls(X, p, w)
    return float(beta[0]), float(math.sqrt(cov[0, 0])), float(beta[1]), float(math.sqrt(cov[1, 1]))


def classify(result: SweepResult, report=None, alpha: float | None = None, d: int = 2, n_low: int | None = None) -> TaxonomyLabel:
    """Place a sweep in the taxonomy.

    The small-``eta`` half of the grid (at least 4 points) decides whether
    ``1 - P`` vanishes: a log-log slope above 0.25 that is significant at
    3 SE means ``P0 = 1`` and the slope is ``kappa``; otherwise ``P0 < 1``
    and a straight-line fit of ``P`` against ``eta`` gives ``P0`` and the
    sign of ``gamma``. Ambiguous evidence yields ``unclassified``.
    """
    alpha = alpha if alpha is not None else result.config.get("alpha", 4.0)
    order = np.argsort(result.eta)
    eta, p, se = result.eta[order], result.p[order], result.se[order]
    k = n_low or max(4, (len(eta) + 1) // 2)
    eta, p, se = eta[:k], p[:k], se[:k]
    diag = []
    gap = 1 - p
    sel = gap > 3 * se
    kappa_hat = kse = float("nan")
    if sel.sum() >= 3:
        x, y = np.log(eta[sel]), np.log(gap[sel])
        rel = se[sel] / gap[sel]
        w = 1.0 / np.maximum(rel, 1e-9) ** 2 if np.any(rel > 0) else None
        beta, cov, _ = _wls(np.stack([np.ones_like(x), x], 1), y, w)
        kappa_hat, kse = float(beta[1]), float(math.sqrt(cov[1, 1]))
        diag.append(f"log-log slope {kappa_hat:.4f} +/- {kse:.4f} over {int(sel.sum())} points")
    vanishing = np.isfinite(kappa_hat) and kappa_hat > 0.25 and kappa_hat - 3 * kse > 0
    if sel.sum() < 3 and np.all(gap <= 3 * se):
        return TaxonomyLabel("unclassified", 1.0, float("nan"), float("nan"), tuple(diag + ["outage not resolved at small eta"]))

    if vanishing:
        gamma = float(math.exp(beta[0]))
        hi_k = alpha / d
        if abs(kappa_hat - 1) <= 0.1:
            label = "R1"
        elif abs(kappa_hat - hi_k) <= 0.1 * hi_k:
            label = "R3"
        elif 1.1 < kappa_hat < 0.9 * hi_k:
            label = "R2"
        elif kappa_hat < 0.9:
            label = "U1"
        else:
            label = "unclassified"
            diag.append(f"slope {kappa_hat:.3f} outside [0, alpha/d]")
        if report is not None and label.startswith("R") and not report.reasonable:
            diag.append("conditions report an unreasonable MAC")
            diag.extend(report.lines())
            label = "unclassified"
        return TaxonomyLabel(label, 1.0, kappa_hat, gamma, tuple(diag))

    p0, p0se, slope, slope_se = _linear_trend(eta, p, se)
    diag.append(f"linear trend P0={p0:.6f} +/- {p0se:.2g}, slope {slope:.4g} +/- {slope_se:.2g}")
    if not (1 - p0 > 5 * p0se):
        diag.append("P0 is not resolved below 1")
        return TaxonomyLabel("unclassified", p0, kappa_hat, float("nan"), tuple(diag))
    if slope - 3 * slope_se > 0:
        return TaxonomyLabel("U3", p0, kappa_hat, -slope, tuple(diag))
    return TaxonomyLabel("U2", p0, 1.0, max(-slope, 0.0), tuple(diag))


# ---------------------------------------------------------------------------
# figure datasets


def thomas_sigma_for_gamma(lam: float, c: float, target: float, theta: float = 2.0, pathloss: PathLossModel | None = None) -> float:
    """Scatter ``sigma`` giving ALOHA contention ``target`` for a Thomas process.

    The contention is ``lam int Delta + c int Delta (f*f)``; the second term
    falls monotonically from ``c`` (``sigma -> 0``) to 0.
    """
    pathloss = pathloss or PathLossModel("singular", 4.0)
    base = lam * radial_integral(lambda r: delta(r, pathloss, theta), 2)
    need = target - base
    if not 0 < need < c:
        raise ParameterError(f"contention {target} unreachable with c={c} (range ({base:.4g}, {base + c:.4g}))")

    def excess(log_sigma):
        s2 = math.exp(2 * log_sigma)
        v = radial_integral(lambda r: math.exp(-r * r / (4 * s2)) / (4 * math.pi * s2) * delta(r, pathloss, theta), 2, points=[1.0, 2 * math.sqrt(s2)])
        return c * v - need

    return math.exp(optimize.brentq(excess, math.log(1e-3), math.log(1e3), xtol=1e-12))


FIG5_GAMMAS = (3.61, 4.74, 6.54, 9.73)
FIG5_CLUSTER_SIZES = (2.0, 4.0, 8.0, 16.0)
FIGURES = ("2-demo", "3", "4", "5", "6", "7", "8", "swap5", "swap6", "linkR")


@dataclass
class FigureOutput:
    figure: str
    directory: Path
    files: list
    summary: list
    manifest: dict


def _write_manifest(path, items: dict):
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={fmt(v)}\n")


def _summary(label, res: SweepResult, window=None, kappa_ref=None):
    try:
        fit = fit_kappa_gamma(res, window=window, kappa_ref=kappa_ref)
        line = f"{label}: kappa_hat={fmt(fit.kappa)} gamma_hat={fmt(fit.gamma)}"
        if np.isfinite(fit.gamma_ref):
            line += f" gamma_hat(kappa={fmt(fit.kappa_ref)})={fmt(fit.gamma_ref)}"
        return line, fit
    except FitError as exc:
        return f"{label}: fit not possible ({exc})", None


def reproduce_figure(fig: str, outdir, seed: int = 1, n: int = 100_000, workers: int = 1, points: int = 8) -> FigureOutput:
    """Write the dataset behind one figure into ``outdir/fig<id>/``.

    Each curve goes to ``curve-<k>.csv``; ``manifest.txt`` holds
    ``key=value`` lines with the configuration, seeds and analytic overlays.
    """
    fig = str(fig)
    if fig not in FIGURES:
        raise ParameterError(f"unknown figure id {fig!r}; choose from {', '.join(FIGURES)}")
    d = Path(outdir) / f"fig{fig}"
    d.mkdir(parents=True, exist_ok=True)
    pl = PathLossModel("singular", 4.0)
    theta = 2.0
    link = LinkSpec(theta)
    man = {"figure": fig, "seed": seed, "n_per_point": n, "rng": RNG_NAME, "alpha": pl.alpha, "theta": theta, "pathloss": pl.kind}
    files, summary = [], []

    def run(k, scenario, etas, lk=link, window=None, kappa_ref=None, label=None, fit=True):
        res = sweep(scenario, etas, lk, pl, n=n, seed=seed + 1000 * k, workers=workers)
        path = res.write(d / f"curve-{k}.csv")
        files.append(path)
        man[f"curve-{k}.scheme"] = scenario.name
        man[f"curve-{k}.seed"] = seed + 1000 * k
        for key, val in describe(scenario).items():
            man[f"curve-{k}.{key}"] = val
        if res.analytic is not None:
            man[f"curve-{k}.gamma"] = res.analytic.gamma
            man[f"curve-{k}.kappa"] = res.analytic.kappa
            man[f"curve-{k}.provenance"] = res.analytic.provenance
        if not fit:
            return res
        line, fit = _summary(label or f"curve-{k} {scenario.name}", res, window, kappa_ref)
        summary.append(line)
        if fit is not None:
            man[f"curve-{k}.kappa_hat"] = fit.kappa
            man[f"curve-{k}.gamma_hat"] = fit.gamma
        return res

    coarse = np.array([1.0, 0.8, 0.6, 0.4, 0.3, 0.2])
    if fig == "3":
        for k, h in enumerate((0.0, 0.44, 0.7, 1.0), 1):
            model = PoissonModel(0.194) if h == 0 else MaternModel.with_intensity(0.194, h)
            sc = Scenario(model, Aloha(1.0))
            lo, hi = default_fit_window(analytic_for(sc, link, pl))
            run(k, sc, np.concatenate([coarse[coarse > hi], eta_grid(lo, hi, points)]), kappa_ref=1.0, label=f"h={h}")
            man[f"curve-{k}.h"] = h
            man[f"curve-{k}.parent_intensity"] = getattr(model, "parent_intensity", 0.194)
    elif fig in ("4", "swap6"):
        sc = Scenario(PoissonModel(0.3), CsmaMatern(0.5))
        lk = link if fig == "4" else LinkSpec(theta, distance=1.0, orientation="transmitter")
        lo, hi = default_fit_window(analytic_for(sc, lk, pl))
        etas = np.concatenate([[0.9, 0.7, 0.5, 0.3, 0.2, 0.15], eta_grid(lo, hi, points)])
        run(1, sc, etas, lk, kappa_ref=2.0, label="csma" + (" swapped" if fig == "swap6" else ""))
    elif fig == "5":
        lam = 0.48
        for k, (c, g) in enumerate(zip(FIG5_CLUSTER_SIZES, FIG5_GAMMAS), 1):
            sigma = thomas_sigma_for_gamma(lam, c, g, theta, pl)
            sc = Scenario(ThomasModel.of(lam / c, c, sigma), Aloha(1.0))
            lo, hi = default_fit_window(analytic_for(sc, link, pl))
            run(k, sc, np.concatenate([coarse[coarse > hi], eta_grid(lo, hi, points)]), kappa_ref=1.0, label=f"c={c:g} sigma={sigma:.4g}")
        sc = Scenario(PoissonModel(lam), Aloha(1.0))
        lo, hi = default_fit_window(analytic_for(sc, link, pl))
        run(5, sc, np.concatenate([coarse[coarse > hi], eta_grid(lo, hi, points)]), kappa_ref=1.0, label="ppp")
    elif fig == "6":
        sc = Scenario(ThomasModel.of(0.1, 4.0, 3.6), ClusterMac(0.0, 1.0))
        res = run(1, sc, np.geomspace(1.0, 1e-4, 9), fit=False)
        lab = classify(res)
        summary.append(f"parent thinning: {lab.line()}")
        man["curve-1.class"] = lab.label
    elif fig == "7":
        for k, b in enumerate((0.5, 1.0), 1):
            sc = Scenario(ThomasModel.of(0.1, 4.0, 3.6), ClusterMac(b, 1.0))
            window = (1e-6, 1e-4) if b < 1 else None
            etas = np.geomspace(1e-1, 1e-6, 11) if b < 1 else np.geomspace(1.0, 1e-3, 10)
            run(k, sc, etas, window=window, kappa_ref=b, label=f"b={b}")
            man[f"curve-{k}.b"] = b
            man[f"curve-{k}.fit_window"] = f"{window}" if window else "default"
    elif fig == "8":
        k = 0
        for dim in (1, 2, 3):
            ms = np.arange(1, 11)
            rows = {"lower": [], "upper": [], "exact": []}
            for m in ms:
                b = asy.tdma_bounds(dim, int(m), theta, pl.alpha)
                for key in rows:
                    rows[key].append([b.eta, getattr(b, key), 0.0, 0, key, f"lattice{dim}+tdma", pl.alpha, theta, seed])
            for key in ("lower", "upper", "exact"):
                k += 1
                files.append(write_csv(d / f"curve-{k}.csv", ESTIMATE_HEADER, rows[key]))
                man[f"curve-{k}.d"] = dim
                man[f"curve-{k}.kind"] = key
            man[f"d{dim}.gamma"] = asy.TABLE.epstein(dim, pl.alpha) * theta
            man[f"d{dim}.kappa"] = pl.alpha / dim
            summary.append(f"d={dim}: gamma={fmt(man[f'd{dim}.gamma'])} kappa={fmt(pl.alpha / dim)}")
    elif fig == "swap5":
        model = MaternModel(1.0, 1.5)
        sc = Scenario(model, Aloha(1.0))
        lk = LinkSpec(theta, distance=1.0, orientation="transmitter")
        lo, hi = default_fit_window(analytic_for(sc, lk, pl))
        run(1, sc, np.concatenate([coarse[coarse > hi], eta_grid(lo, hi, points)]), lk, kappa_ref=1.0, label="matern h=1.5 swapped")
        man["curve-1.h"] = 1.5
    elif fig == "linkR":
        _link_distance_figure(d, man, files, summary, pl, theta, seed, n, workers, points)
    elif fig == "2-demo":
        sc = Scenario(LatticeModel(2), UnreasonableTdma(1))
        etas = np.array([1 / m**2 for m in range(1, 9)])
        res = run(1, sc, etas, fit=False)
        lab = classify(res)
        summary.append(f"run-based tdma: {lab.line()}")
        man["curve-1.class"] = lab.label
        man["curve-1.p0_limit"] = asy.unreasonable_tdma_p0(theta, pl.alpha)
    _write_manifest(d / "manifest.txt", man)
    return FigureOutput(fig, d, files, summary, man)


LINK_R_VALUES = (1.0, 1.5, 2.0, 2.5, 3.0)
LINK_R_ETA = 0.052
LINK_R_PARENT = 0.3


def link_distance_sweeps(R_values, pl, theta, seed, n, workers, points, model=None, scheme=None, kappa_ref=2.0):
    """Fit the contention at each link distance with windows scaled by ``eta_max``."""
    model = model or PoissonModel(LINK_R_PARENT)
    scheme = scheme or CsmaMatern(0.5)
    out = []
    for i, R in enumerate(R_values):
        lk = LinkSpec(theta, distance=float(R))
        sc = Scenario(model, scheme)
        ana = analytic_for(sc, lk, pl)
        lo, hi = default_fit_window(ana)
        res = sweep(sc, eta_grid(lo, hi, points), lk, pl, n=n, seed=seed + 7919 * i, workers=workers)
        fit = fit_kappa_gamma(res, window=(lo, hi), kappa_ref=kappa_ref)
        out.append((float(R), ana, fit, res))
    return out


def _link_distance_figure(d, man, files, summary, pl, theta, seed, n, workers, points):
    sc = Scenario(PoissonModel(LINK_R_PARENT), CsmaMatern(LINK_R_ETA))
    man["csma.parent_intensity"] = LINK_R_PARENT
    man["csma.eta"] = LINK_R_ETA
    man["csma.h"] = sc.exclusion_radius(LINK_R_ETA)
    rows = []
    for i, R in enumerate(np.linspace(1.0, 3.0, 9)):
        lk = LinkSpec(theta, distance=float(R))
        e = estimate_success(sc, LINK_R_ETA, lk, pl, n=n, seed=seed, point=i, workers=workers)
        rows.append([R, *e.row()])
    files.append(write_csv(d / "curve-1.csv", ("link_distance", *ESTIMATE_HEADER), rows))
    header = ("link_distance", "gamma_analytic", "gamma_fitted", "gamma_fitted_se", "kappa_fitted", "ratio_to_R1", "R_power")
    for k, (model, scheme, power, kref) in enumerate(
        ((PoissonModel(LINK_R_PARENT), CsmaMatern(0.5), 4.0, 2.0), (PoissonModel(1.0), Aloha(1.0), 2.0, 1.0)), 2
    ):
        fits = link_distance_sweeps(LINK_R_VALUES, pl, theta, seed + 31 * k, n, workers, points, model, scheme, kref)
        g1 = fits[0][2].gamma_ref
        rows = [[R, ana.gamma, fit.gamma_ref, fit.gamma_ref_se, fit.kappa, fit.gamma_ref / g1, R**power] for R, ana, fit, _ in fits]
        files.append(write_csv(d / f"curve-{k}.csv", header, rows))
        man[f"curve-{k}.scheme"] = f"{model.name}+{scheme.name}"
        for R, ana, fit, _ in fits:
            summary.append(
                f"{model.name}+{scheme.name} R={R:g}: gamma_hat={fmt(fit.gamma_ref)} ratio={fmt(fit.gamma_ref / g1)} R^{power:g}={fmt(R**power)}"
            )
