import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from netoutage.errors import ParameterError
from netoutage.pointprocess import (
    ClusterSpec,
    ProductDensity,
    Window,
    estimate_k_function,
    estimate_unit_box_measure,
    gen_lattice,
    gen_matern2,
    gen_ppp,
    gen_thomas,
    load_pattern_csv,
    matern_intensity,
    matern_parent_intensity,
    matern_radius,
    matern_survivors,
    pair_distances,
    rho2,
    rho2_bin_average,
    save_pattern_csv,
    window_side,
)
from netoutage.rng import stream


def test_window_basics():
    w = Window.square(10.0)
    assert w.volume == 100 and w.reach == 5 and w.d == 2
    g = Window.square(10.0, wrap="guard", band=2.0)
    assert g.core_volume == 36 and g.reach == 2
    assert g.in_core(np.array([[1.0, 5.0], [5.0, 5.0]])).tolist() == [False, True]
    with pytest.raises(ParameterError):
        Window.square(4.0, wrap="guard", band=2.0)


@given(
    st.lists(st.floats(-50, 50), min_size=2, max_size=2),
    st.lists(st.floats(-50, 50), min_size=2, max_size=2),
)
def test_minimum_image_is_at_most_half_side(a, b):
    w = Window((7.0, 3.0))
    disp = w.displacement(np.array(a), np.array(b))
    assert np.all(np.abs(disp) <= np.array([3.5, 1.5]) + 1e-9)
    # displacement is a lattice translate of the raw difference
    k = (np.array(b) - np.array(a) - disp) / np.array([7.0, 3.0])
    assert np.allclose(k, np.round(k), atol=1e-9)


def test_ppp_count_is_poisson():
    w = Window.square(20.0)
    n = np.array([len(gen_ppp(0.5, w, stream(1, k))) for k in range(300)])
    assert abs(n.mean() - 200) < 3 * math.sqrt(200 / 300)
    assert 0.7 < n.var() / 200 < 1.3


def test_generators_are_reproducible():
    w = Window.square(30.0)
    a = gen_matern2(1.0, 1.0, w, 5)
    b = gen_matern2(1.0, 1.0, w, 5)
    assert np.array_equal(a.coords, b.coords)
    assert a.coords.flags.writeable is False


def test_matern_intensity_formula():
    lp, h = 2.0, 0.7
    c = math.pi * h * h
    assert matern_intensity(lp, h) == pytest.approx((1 - math.exp(-lp * c)) / c)
    assert matern_parent_intensity(matern_intensity(lp, h), h) == pytest.approx(lp, rel=1e-10)
    h2 = matern_radius(1.0, 0.25)
    assert matern_intensity(1.0, h2) == pytest.approx(0.25, rel=1e-9)
    with pytest.raises(ParameterError):
        matern_parent_intensity(1.0 / (math.pi * h * h), h)


def test_matern_empirical_intensity():
    w = Window.square(30.0)
    n = np.array([len(gen_matern2(1.0, 1.0, w, stream(9, k))) for k in range(200)])
    lam = matern_intensity(1.0, 1.0)
    se = n.std(ddof=1) / math.sqrt(len(n)) / w.volume
    assert abs(n.mean() / w.volume - lam) < 4 * se


@given(st.integers(0, 10_000), st.floats(0.3, 2.0))
@settings(max_examples=25, deadline=None)
def test_matern_survivors_respect_hard_core(seed, h):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 10, (200, 2))
    marks = rng.random(200)
    keep = matern_survivors(pts, marks, h, boxsize=(10.0, 10.0))
    kept = pts[keep]
    if len(kept) > 1:
        t = cKDTree(kept, boxsize=10.0)
        assert not t.query_pairs(h * (1 - 1e-12))
    # the globally smallest mark always survives
    assert keep[np.argmin(marks)]
    # brute-force definition: a point survives iff no lower mark lies within h
    t = cKDTree(pts, boxsize=10.0)
    for i in range(0, 200, 17):
        nb = t.query_ball_point(pts[i], h)
        assert keep[i] == all(marks[j] >= marks[i] for j in nb)


def test_thomas_intensity_and_parents():
    spec = ClusterSpec(0.1, 4.0, 1.0)
    w = Window.square(100.0)
    pats = [gen_thomas(spec, w, stream(2, k)) for k in range(100)]
    n = np.array([len(p) for p in pats])
    assert abs(n.mean() / w.volume - spec.intensity) < 4 * n.std() / 10 / w.volume
    assert pats[0].parent_ids is not None and len(pats[0].parent_ids) == len(pats[0])


def test_lattice_generator():
    w = Window.square(10.0)
    p = gen_lattice(2, 1.0, w, 0)
    assert len(p) == 100
    d = np.sort(w.distance(p.coords[0], p.coords))
    assert d[0] == 0 and d[1] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        gen_lattice(2, 3.0, w, 0)


def test_product_densities():
    lam = 0.5
    assert rho2(ProductDensity.ppp(lam), 3.0) == pytest.approx(lam * lam)
    m = ProductDensity.matern(1.0, 1.0)
    lm = matern_intensity(1.0, 1.0)
    assert rho2(m, 0.5) == 0
    assert rho2(m, 2.5) == pytest.approx(lm * lm)
    # continuous across r = 2h
    assert rho2(m, 2 - 1e-9) == pytest.approx(lm * lm, rel=1e-6)
    spec = ClusterSpec(0.1, 4.0, 3.6)
    t = ProductDensity.thomas(spec)
    r = 2.0
    ref = 0.4**2 * (1 + math.exp(-r * r / (4 * 3.6**2)) / (4 * math.pi * 3.6**2 * 0.1))
    assert rho2(t, r) == pytest.approx(ref)
    with pytest.raises(ParameterError):
        rho2(t, -1.0)


def test_k_function_of_ppp():
    w = Window.square(40.0)
    pats = [gen_ppp(1.0, w, stream(3, k)) for k in range(30)]
    radii = np.array([0.5, 1.0, 2.0])
    k, se = estimate_k_function(pats, radii)
    assert np.all(np.abs(k - math.pi * radii**2) < 4 * se)


def test_rho2_bin_average_of_constant():
    edges = np.linspace(0, 3, 4)
    assert np.allclose(rho2_bin_average(ProductDensity.ppp(2.0), edges), 4.0)


def test_pair_distances_limits():
    w = Window.square(10.0)
    p = gen_ppp(1.0, w, 0)
    with pytest.raises(ParameterError):
        pair_distances(p, 6.0)
    i, j, r = pair_distances(p, 1.0)
    assert np.all(i != j) and np.all(r <= 1.0)


def test_unit_box_measure_of_ppp_is_one():
    w = Window.square(30.0)
    pats = [gen_ppp(1.0, w, stream(4, k)) for k in range(40)]
    val, se = estimate_unit_box_measure(pats)
    assert abs(val - 1.0) < 4 * se


def test_window_side_grows_with_scales():
    assert window_side([1.0, 0.0]) == pytest.approx(20.0)
    assert window_side([1.0, 3.0]) == pytest.approx(60.0)
    # a period forces an integer number of periods
    s = window_side([1.0], period=7.0)
    assert s / 7.0 == pytest.approx(round(s / 7.0))


def test_pattern_csv_round_trip(tmp_path):
    p = gen_matern2(1.0, 1.0, Window.square(15.0), 3)
    path = save_pattern_csv(p, tmp_path / "m.csv")
    q = load_pattern_csv(path)
    assert np.allclose(p.coords, q.coords)
    assert q.window == p.window and q.model == p.model
    assert path.read_text().splitlines()[0] == "x,y"


@pytest.mark.parametrize(
    "make,lam",
    [
        (lambda w, r: gen_ppp(0.5, w, r), 0.5),
        (lambda w, r: gen_matern2(1.0, 1.0, w, r), matern_intensity(1.0, 1.0)),
        (lambda w, r: gen_thomas(ClusterSpec(0.05, 4.0, 1.0), w, r), 0.2),
    ],
    ids=["ppp", "matern", "thomas"],
)
def test_intensity_over_many_realizations(make, lam):
    w = Window.square(20.0)
    n = np.array([len(make(w, stream(11, k))) for k in range(500)], dtype=float)
    se = n.std(ddof=1) / math.sqrt(len(n)) / w.volume
    assert abs(n.mean() / w.volume - lam) <= 3 * se


def test_thomas_k_function_shows_clustering():
    spec = ClusterSpec(0.1, 4.0, 1.0)
    w = Window.square(30.0)
    pats = [gen_thomas(spec, w, stream(9, k)) for k in range(200)]
    radii = np.array([0.5, 1.0, 2.0, 4.0])
    k, se = estimate_k_function(pats, radii)
    # K(r) = pi r^2 + (1 - exp(-r^2 / (4 sigma^2))) / mu; the n(n-1) normaliser
    # has mean lambda^2 V^2 (1 + c / (lambda V)) for a cluster process on the torus
    ref = math.pi * radii**2 + (1 - np.exp(-(radii**2) / 4)) / 0.1
    ref /= 1 + spec.mean_daughters / (spec.intensity * w.volume)
    assert np.all(k > math.pi * radii**2)
    assert np.all(np.abs(k - ref) < 3 * se)
