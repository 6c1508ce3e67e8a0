"""Spatial node models and their second-order statistics.

Patterns live in a rectangular window that is either a flat torus (the
default, all distances use the minimum-image convention) or a plain box with
a guard band, in which case only points of the inner core are used as
typical points by the estimators.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from .errors import EstimationError, ParameterError, UsageError
from .rng import as_generator

__all__ = [
    "Window",
    "PointPattern",
    "ClusterSpec",
    "ProductDensity",
    "gen_ppp",
    "gen_matern2",
    "gen_thomas",
    "gen_lattice",
    "matern_survivors",
    "rho2",
    "matern_intensity",
    "matern_parent_intensity",
    "matern_radius",
    "window_side",
    "estimate_k_function",
    "estimate_rho2",
    "rho2_bin_average",
    "estimate_unit_box_measure",
    "pair_distances",
    "save_pattern_csv",
    "load_pattern_csv",
]

WINDOW_FACTOR = 20.0


def unit_sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (2, 2*pi, 4*pi for d=1,2,3)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class Window:
    """Axis-aligned simulation box ``[0, side_0) x ... x [0, side_{d-1})``.

    ``wrap="torus"`` identifies opposite faces. ``wrap="guard"`` keeps the box
    flat and reserves a band of width ``band`` along every face; statistics
    are then collected only for points of the core.
    """

    sides: tuple
    wrap: str = "torus"
    band: float = 0.0

    def __post_init__(self):
        sides = tuple(float(s) for s in np.atleast_1d(self.sides))
        object.__setattr__(self, "sides", sides)
        if not 1 <= len(sides) <= 3:
            raise ParameterError("window dimension must be 1, 2 or 3")
        if any(s <= 0 for s in sides):
            raise ParameterError("window sides must be positive")
        if self.wrap not in ("torus", "guard"):
            raise ParameterError(f"unknown wrap mode {self.wrap!r}")
        if self.band < 0:
            raise ParameterError("guard band width must be non-negative")
        if self.wrap == "guard" and any(s <= 2 * self.band for s in sides):
            raise ParameterError("guard band leaves an empty core")

    @classmethod
    def square(cls, side: float, d: int = 2, **kw) -> "Window":
        return cls((side,) * d, **kw)

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def torus(self) -> bool:
        return self.wrap == "torus"

    @property
    def core_volume(self) -> float:
        if self.torus:
            return self.volume
        return float(np.prod([s - 2 * self.band for s in self.sides]))

    @property
    def reach(self) -> float:
        """Largest separation the window resolves without ambiguity."""
        if self.torus:
            return 0.5 * min(self.sides)
        return self.band

    def in_core(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords).reshape(-1, self.d)
        if self.torus:
            return np.ones(len(coords), dtype=bool)
        lo = self.band
        hi = np.asarray(self.sides) - self.band
        return np.all((coords >= lo) & (coords < hi), axis=1)

    def wrap_coords(self, coords: np.ndarray) -> np.ndarray:
        """Map coordinates into ``[0, side)`` (torus only)."""
        L = np.asarray(self.sides)
        out = np.mod(coords, L)
        # np.mod can return exactly L for tiny negative inputs
        out = np.where(out >= L, out - L, out)
        return out

    def displacement(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vector from ``a`` to ``b`` (minimum image on the torus)."""
        diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.torus:
            L = np.asarray(self.sides)
            diff = diff - L * np.round(diff / L)
        return diff

    def distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(self.displacement(a, b) ** 2, axis=-1))

    def contains(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords).reshape(-1, self.d)
        return np.all((coords >= 0) & (coords < np.asarray(self.sides)), axis=1)

    def to_dict(self) -> dict:
        return {"sides": list(self.sides), "wrap": self.wrap, "band": self.band}


@dataclass(frozen=True, eq=False)
class PointPattern:
    """A finite point configuration with its generating model.

    ``intensity`` is the nominal (model) intensity, not the empirical one.
    ``parent_ids`` links Thomas daughters to their cluster; ``lattice_index``
    holds integer lattice coordinates for lattice patterns.
    """

    coords: np.ndarray
    window: Window
    intensity: float
    model: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    parent_ids: np.ndarray | None = None
    lattice_index: np.ndarray | None = None

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1, self.window.d)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        for name in ("parent_ids", "lattice_index"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def d(self) -> int:
        return self.window.d

    def subset(self, mask: np.ndarray, model: str, intensity: float, **params) -> "PointPattern":
        mask = np.asarray(mask, dtype=bool)
        return PointPattern(
            coords=self.coords[mask],
            window=self.window,
            intensity=intensity,
            model=model,
            params={**self.params, **params},
            seed=self.seed,
            parent_ids=None if self.parent_ids is None else self.parent_ids[mask],
            lattice_index=None if self.lattice_index is None else self.lattice_index[mask],
        )


@dataclass(frozen=True)
class ClusterSpec:
    """Thomas cluster process parameters."""

    parent_intensity: float
    mean_daughters: float
    sigma: float

    def __post_init__(self):
        if self.parent_intensity <= 0 or self.mean_daughters <= 0 or self.sigma <= 0:
            raise ParameterError("cluster parameters must all be positive")

    @property
    def intensity(self) -> float:
        return self.parent_intensity * self.mean_daughters


# ---------------------------------------------------------------------------
# Matern type-II intensity relations


def matern_intensity(parent_intensity: float, h: float) -> float:
    """Intensity of the Matern type-II process with hard-core distance ``h``."""
    if h == 0:
        return float(parent_intensity)
    c = math.pi * h * h
    return -math.expm1(-parent_intensity * c) / c


def matern_parent_intensity(intensity: float, h: float) -> float:
    """Parent intensity giving a Matern type-II process of ``intensity``."""
    if h == 0:
        return float(intensity)
    c = math.pi * h * h
    if intensity * c >= 1.0:
        raise ParameterError(f"intensity {intensity} unreachable with h={h} (max {1 / c:.6g})")
    return -math.log1p(-intensity * c) / c


def matern_radius(parent_intensity: float, fraction: float, rtol: float = 1e-10) -> float:
    """Hard-core distance ``h`` that thins a PPP to ``fraction`` of its intensity.

    Bisection on the strictly decreasing map ``h -> matern_intensity / parent``.
    """
    if not 0 < fraction < 1:
        raise ParameterError("the retained fraction must lie in (0, 1)")
    if parent_intensity <= 0:
        raise ParameterError("parent intensity must be positive")
    target = fraction * parent_intensity
    lo, hi = 0.0, 1.0 / math.sqrt(math.pi * target)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if matern_intensity(parent_intensity, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# product densities


def _union_area(r, h):
    r = np.minimum(r, 2 * h)
    return (
        2 * np.pi * h * h
        - 2 * h * h * np.arccos(r / (2 * h))
        + 0.5 * r * np.sqrt(np.maximum(4 * h * h - r * r, 0.0))
    )


@dataclass(frozen=True)
class ProductDensity:
    """Second-order product density of a motion-invariant model."""

    model: str
    params: dict

    @classmethod
    def ppp(cls, intensity: float) -> "ProductDensity":
        return cls("PPP", {"intensity": float(intensity)})

    @classmethod
    def matern(cls, parent_intensity: float, h: float) -> "ProductDensity":
        if h == 0:
            return cls.ppp(parent_intensity)
        return cls("MaternII", {"parent_intensity": float(parent_intensity), "h": float(h)})

    @classmethod
    def thomas(cls, spec: ClusterSpec) -> "ProductDensity":
        return cls(
            "Thomas",
            {"parent_intensity": spec.parent_intensity, "mean_daughters": spec.mean_daughters, "sigma": spec.sigma},
        )

    @property
    def intensity(self) -> float:
        p = self.params
        if self.model == "PPP":
            return p["intensity"]
        if self.model == "MaternII":
            return matern_intensity(p["parent_intensity"], p["h"])
        if self.model == "Thomas":
            return p["parent_intensity"] * p["mean_daughters"]
        raise ParameterError(f"unknown model {self.model!r}")

    def breakpoints(self) -> list:
        """Radii where the density has kinks (helps quadrature)."""
        if self.model == "MaternII":
            return [self.params["h"], 2 * self.params["h"]]
        if self.model == "Thomas":
            return [2 * self.params["sigma"]]
        return []

    def __call__(self, r):
        return rho2(self, r)


def rho2(model: ProductDensity, r):
    """Evaluate the second-order product density at separation(s) ``r``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ParameterError("separation must be non-negative")
    p = model.params
    lam = model.intensity
    if model.model == "PPP":
        out = np.full_like(r_arr, lam * lam)
    elif model.model == "MaternII":
        h, lp = p["h"], p["parent_intensity"]
        c = np.pi * h * h
        g = _union_area(r_arr, h)
        with np.errstate(invalid="ignore", divide="ignore"):
            mid = (2 * g * (-np.expm1(-lp * c)) - 2 * c * (-np.expm1(-lp * g))) / (c * g * (g - c))
        out = np.where(r_arr < h, 0.0, np.where(r_arr > 2 * h, lam * lam, mid))
        # g == c at r == h exactly is a removable point of the middle branch
        out = np.where(np.isfinite(out), out, 0.0)
    elif model.model == "Thomas":
        s2, mu = p["sigma"] ** 2, p["parent_intensity"]
        out = lam * lam * (1 + np.exp(-r_arr * r_arr / (4 * s2)) / (4 * np.pi * s2 * mu))
    else:
        raise ParameterError(f"unknown model {model.model!r}")
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# generators


def window_side(scales, d: int = 2, factor: float = WINDOW_FACTOR, period: float | None = None) -> float:
    """Side length of at least ``factor`` times the largest interaction scale.

    With ``period`` the side is rounded up to a multiple of it so periodic
    structures (lattices, TDMA frames) tile the torus.
    """
    scale = max(float(s) for s in np.atleast_1d(scales) if np.isfinite(s))
    side = factor * scale
    if period:
        side = period * math.ceil(side / period - 1e-9)
    return side


def _check_window_scale(window: Window, scale: float, what: str):
    if min(window.sides) < WINDOW_FACTOR * scale:
        warnings.warn(
            f"window side {min(window.sides):.4g} is below {WINDOW_FACTOR:g}x the {what} scale {scale:.4g}",
            stacklevel=3,
        )


def _uniform_points(rng, n, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + (hi - lo) * rng.random((n, len(lo)))


def gen_ppp(intensity: float, window: Window, seed=None) -> PointPattern:
    """Homogeneous Poisson point process on the whole window."""
    if not intensity > 0:
        raise ParameterError("intensity must be positive")
    rng = as_generator(seed)
    n = rng.poisson(intensity * window.volume)
    pts = _uniform_points(rng, n, np.zeros(window.d), window.sides)
    return PointPattern(pts, window, float(intensity), "PPP", {"intensity": float(intensity)}, _seed_tag(seed))


def _seed_tag(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def matern_survivors(points: np.ndarray, marks: np.ndarray, h: float, boxsize=None) -> np.ndarray:
    """Type-II retention: keep points whose mark is the smallest within ``h``.

    Ties in mark are broken by index. Only the lowest-ranked point of each
    grid cell of diameter ``h`` can survive, so the exact neighbour test is
    run on those candidates against the points ranked below the worst one.
    """
    n, d = points.shape
    if n < 2 or h <= 0:
        return np.ones(n, dtype=bool)
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), marks))] = np.arange(n)

    if boxsize is not None:
        lo = np.zeros(d)
        ext = np.asarray(boxsize, dtype=float)
    else:
        lo = points.min(axis=0)
        ext = points.max(axis=0) - lo + 1e-12
    ncell = np.ceil(ext * math.sqrt(d) / h).astype(np.int64)
    if float(np.prod(ncell.astype(float))) <= 4.0 * n:
        cell_side = ext / ncell
        idx = np.minimum(((points - lo) / cell_side).astype(np.int64), ncell - 1)
        flat = np.ravel_multi_index(idx.T, tuple(ncell))
        order = np.lexsort((rank, flat))
        first = np.ones(n, dtype=bool)
        first[1:] = flat[order][1:] != flat[order][:-1]
        cand = order[first]
    else:
        cand = np.arange(n)

    worst = rank[cand].max()
    low = np.flatnonzero(rank <= worst)
    cand_tree = cKDTree(points[cand], boxsize=boxsize)
    low_tree = cKDTree(points[low], boxsize=boxsize)
    pairs = cand_tree.sparse_distance_matrix(low_tree, h, output_type="ndarray")
    beaten = rank[low[pairs["j"]]] < rank[cand[pairs["i"]]]
    dead = np.zeros(len(cand), dtype=bool)
    dead[pairs["i"][beaten]] = True
    keep = np.zeros(n, dtype=bool)
    keep[cand[~dead]] = True
    return keep


def gen_matern2(parent_intensity: float, hardcore_radius: float, window: Window, seed=None) -> PointPattern:
    """Matern type-II hard-core process by dependent thinning of a PPP."""
    if not parent_intensity > 0:
        raise ParameterError("parent intensity must be positive")
    h = float(hardcore_radius)
    if h < 0:
        raise ParameterError("hard-core radius must be non-negative")
    rng = as_generator(seed)
    lam = matern_intensity(parent_intensity, h)
    if lam * window.core_volume < 10:
        warnings.warn("fewer than 10 retained points expected in the window", stacklevel=2)
    d = window.d
    if window.torus:
        lo, hi = np.zeros(d), np.asarray(window.sides)
    else:
        lo, hi = -h * np.ones(d), np.asarray(window.sides) + h
    n = rng.poisson(parent_intensity * float(np.prod(hi - lo)))
    pts = _uniform_points(rng, n, lo, hi)
    marks = rng.random(n)
    if window.torus:
        pts = window.wrap_coords(pts)
        keep = matern_survivors(pts, marks, h, boxsize=window.sides)
    else:
        keep = matern_survivors(pts, marks, h) & window.contains(pts)
    return PointPattern(
        pts[keep],
        window,
        lam,
        "MaternII",
        {"parent_intensity": float(parent_intensity), "h": h},
        _seed_tag(seed),
    )


def gen_thomas(spec: ClusterSpec, window: Window, seed=None) -> PointPattern:
    """Thomas cluster process; parents are not part of the output."""
    rng = as_generator(seed)
    d = window.d
    if window.torus:
        lo, hi = np.zeros(d), np.asarray(window.sides)
    else:
        pad = 5.0 * spec.sigma
        lo, hi = -pad * np.ones(d), np.asarray(window.sides) + pad
    n_par = rng.poisson(spec.parent_intensity * float(np.prod(hi - lo)))
    parents = _uniform_points(rng, n_par, lo, hi)
    counts = rng.poisson(spec.mean_daughters, n_par)
    ids = np.repeat(np.arange(n_par), counts)
    pts = parents[ids] + spec.sigma * rng.standard_normal((len(ids), d))
    if window.torus:
        pts = window.wrap_coords(pts)
    else:
        inside = window.contains(pts)
        pts, ids = pts[inside], ids[inside]
    return PointPattern(
        pts,
        window,
        spec.intensity,
        "Thomas",
        {"parent_intensity": spec.parent_intensity, "mean_daughters": spec.mean_daughters, "sigma": spec.sigma},
        _seed_tag(seed),
        parent_ids=ids,
    )


def gen_lattice(d: int, spacing: float, window: Window, seed=None, rotate: bool = False) -> PointPattern:
    """Square lattice ``spacing * Z^d`` shifted by a uniform offset.

    On the torus every side must be a whole number of lattice steps.
    Rotation (d=2) is only meaningful without wrapping.
    """
    if spacing <= 0:
        raise ParameterError("lattice spacing must be positive")
    if d != window.d:
        raise ParameterError("lattice dimension does not match the window")
    rng = as_generator(seed)
    offset = spacing * rng.random(d)
    if window.torus:
        if rotate:
            raise ParameterError("a rotated lattice is incompatible with a toroidal window")
        steps = np.asarray(window.sides) / spacing
        counts = np.rint(steps).astype(np.int64)
        if np.any(np.abs(steps - counts) > 1e-9 * steps) or np.any(counts < 1):
            raise ParameterError("window sides must be integer multiples of the lattice spacing")
        index = np.stack(np.meshgrid(*[np.arange(k) for k in counts], indexing="ij"), -1).reshape(-1, d)
        pts = window.wrap_coords(index * spacing + offset)
        angle = 0.0
    else:
        angle = float(rng.uniform(0, 2 * np.pi)) if (rotate and d == 2) else 0.0
        reach = int(math.ceil(math.sqrt(d) * max(window.sides) / spacing)) + 2
        rng_ax = np.arange(-reach, reach + 1)
        index = np.stack(np.meshgrid(*([rng_ax] * d), indexing="ij"), -1).reshape(-1, d)
        pts = index * spacing + offset
        if angle:
            c, s = math.cos(angle), math.sin(angle)
            pts = pts @ np.array([[c, s], [-s, c]])
        inside = window.contains(pts)
        pts, index = pts[inside], index[inside]
    return PointPattern(
        pts,
        window,
        float(spacing) ** (-d),
        "Lattice",
        {"spacing": float(spacing), "offset": offset.tolist(), "angle": angle},
        _seed_tag(seed),
        lattice_index=index,
    )


# ---------------------------------------------------------------------------
# second-order estimation


def pair_distances(pattern: PointPattern, rmax: float):
    """Ordered pairs ``(i, j, r)`` with ``i != j``, ``r <= rmax`` and ``i`` in the core."""
    w = pattern.window
    if rmax > w.reach * (1 + 1e-12):
        raise ParameterError(f"rmax={rmax:.4g} exceeds the resolvable range {w.reach:.4g}")
    pts = pattern.coords
    if w.torus:
        tree = cKDTree(w.wrap_coords(pts), boxsize=w.sides)
    else:
        tree = cKDTree(pts)
    pairs = tree.sparse_distance_matrix(tree, rmax, output_type="ndarray")
    i, j, r = pairs["i"], pairs["j"], pairs["v"]
    sel = i != j
    i, j, r = i[sel], j[sel], r[sel]
    if not w.torus:
        core = w.in_core(pts)
        sel = core[i]
        i, j, r = i[sel], j[sel], r[sel]
    return i, j, r


def _ratio(num: np.ndarray, den: np.ndarray):
    """Pooled ratio of sums and its delta-method standard error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if den.sum() <= 0:
        raise EstimationError("no usable points in the supplied patterns")
    est = num.sum(axis=0) / den.sum()
    k = len(den)
    if k < 2:
        return est, np.full_like(np.atleast_1d(est), np.nan, dtype=float).reshape(np.shape(est))
    resid = num - np.multiply.outer(den, est) if num.ndim > 1 else num - den * est
    se = np.sqrt(np.sum(resid**2, axis=0) / (k * (k - 1))) / den.mean()
    return est, se


def _pair_normaliser(p: PointPattern) -> float:
    n_core = int(np.count_nonzero(p.window.in_core(p.coords)))
    return n_core * max(n_core - 1, 0) / p.window.core_volume


def estimate_k_function(patterns, radii):
    """Ripley's K pooled over patterns.

    Returns ``(k, se)`` arrays aligned with ``radii``; the standard error
    comes from the pattern-to-pattern variability of the pair counts.
    The ``n (n - 1)`` normaliser over-counts by ``1 + int (g - 1) / V`` in
    expectation, a relative bias of order ``1 / (lambda V)`` that matters
    for strongly clustered patterns in small windows.
    """
    patterns = list(patterns)
    if not patterns:
        raise EstimationError("at least one pattern is required")
    radii = np.asarray(radii, dtype=float)
    rmax = float(radii.max())
    num, den = [], []
    for p in patterns:
        _, _, r = pair_distances(p, rmax)
        r.sort()
        num.append(np.searchsorted(r, radii, side="right").astype(float))
        den.append(_pair_normaliser(p))
    return _ratio(np.array(num), np.array(den))


def estimate_rho2(patterns, edges):
    """Product density averaged over distance bins.

    Returns ``(centers, rho, se)``. Compare against
    :func:`rho2_bin_average` rather than point values of the density.
    """
    patterns = list(patterns)
    if not patterns:
        raise EstimationError("at least one pattern is required")
    edges = np.asarray(edges, dtype=float)
    d = patterns[0].d
    shell = unit_sphere_area(d) / d * np.diff(edges**d)
    rows = []
    for p in patterns:
        _, _, r = pair_distances(p, float(edges[-1]))
        counts, _ = np.histogram(r, bins=edges)
        rows.append(counts / (p.window.core_volume * shell))
    rows = np.array(rows)
    rho = rows.mean(axis=0)
    se = rows.std(axis=0, ddof=1) / math.sqrt(len(rows)) if len(rows) > 1 else np.full_like(rho, np.nan)
    return 0.5 * (edges[1:] + edges[:-1]), rho, se


def rho2_bin_average(model: ProductDensity, edges, d: int = 2):
    """Exact shell average of the analytic product density over each bin."""
    edges = np.asarray(edges, dtype=float)
    S = unit_sphere_area(d)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        pts = [x for x in model.breakpoints() if a < x < b]
        val, _ = integrate.quad(lambda r: rho2(model, r) * S * r ** (d - 1), a, b, points=pts or None, limit=200)
        out.append(val / (S / d * (b**d - a**d)))
    return np.array(out)


def _box_fraction(r: np.ndarray, d: int) -> np.ndarray:
    """Fraction of the sphere of radius ``r`` lying in the unit box ``[0,1]^d``."""
    r = np.asarray(r, dtype=float)
    if d == 1:
        return np.where(r <= 1, 0.5, 0.0)
    if d == 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.clip(1 / r, -1, 1)
            mid = (np.arcsin(inv) - np.arccos(inv)) / (2 * np.pi)
        return np.where(r <= 1, 0.25, np.where(r <= math.sqrt(2), mid, 0.0))
    # d == 3: quadrature over a Fibonacci sphere, exact 1/8 below r = 1
    n = 4096
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = np.pi * (1 + 5**0.5) * k
    dirs = np.stack([np.sqrt(1 - z * z) * np.cos(phi), np.sqrt(1 - z * z) * np.sin(phi), z], 1)
    out = np.empty_like(r)
    for idx, rr in np.ndenumerate(r):
        if rr <= 1:
            out[idx] = 0.125
        else:
            v = rr * dirs
            out[idx] = np.mean(np.all((v >= 0) & (v <= 1), axis=1))
    return out


def estimate_unit_box_measure(patterns):
    """Isotropised reduced second moment measure of the unit box ``[0,1]^d``.

    Each pair at distance ``r`` contributes the probability that a uniformly
    rotated copy of its difference vector falls in the box. For a
    motion-invariant process this has the same expectation as the plain
    count, but is insensitive to lattice vectors sitting on the box edge.
    Returns ``(value, se)``.
    """
    patterns = list(patterns)
    if not patterns:
        raise EstimationError("at least one pattern is required")
    d = patterns[0].d
    num, den = [], []
    for p in patterns:
        _, _, r = pair_distances(p, min(math.sqrt(d), p.window.reach))
        num.append(float(np.sum(_box_fraction(r, d))))
        den.append(_pair_normaliser(p))
    return _ratio(np.array(num), np.array(den))


# ---------------------------------------------------------------------------
# CSV export


def save_pattern_csv(pattern: PointPattern, path, active=None) -> Path:
    """Write ``x,y[,z]`` rows (plus ``active`` when given) and a JSON sidecar."""
    path = Path(path)
    cols = "xyz"[: pattern.d]
    header = ",".join(cols) + (",active" if active is not None else "")
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for k, row in enumerate(pattern.coords):
            line = ",".join(f"{v:.9g}" for v in row)
            if active is not None:
                line += f",{int(bool(active[k]))}"
            fh.write(line + "\n")
    meta = {
        "model": pattern.model,
        "intensity": pattern.intensity,
        "params": pattern.params,
        "seed": pattern.seed,
        "window": pattern.window.to_dict(),
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    return path


def load_pattern_csv(path) -> PointPattern:
    path = Path(path)
    meta_path = Path(str(path) + ".json")
    if not meta_path.exists():
        raise UsageError(f"missing metadata sidecar {meta_path}")
    meta = json.loads(meta_path.read_text())
    window = Window(tuple(meta["window"]["sides"]), meta["window"]["wrap"], meta["window"]["band"])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    coords = data[:, : window.d] if data.size else np.empty((0, window.d))
    return PointPattern(coords, window, meta["intensity"], meta["model"], meta["params"], meta["seed"])
