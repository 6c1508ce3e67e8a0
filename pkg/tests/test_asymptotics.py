import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from netoutage.asymptotics import (
    ASYMPTOTIC_HEADER,
    cluster_mac_gamma,
    cluster_mac_gamma_limit,
    conjecture_envelope,
    eta_max,
    gamma3_approx,
    gamma_aloha,
    gamma_csma_matern,
    gamma_kappa_for,
    parent_thinning,
    tdma_bounds,
    tdma_exact,
    unreasonable_tdma_p0,
)
from netoutage.errors import NotSupportedError, ParameterError
from netoutage.mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma
from netoutage.networks import LatticeModel, MaternModel, PoissonModel, ThomasModel
from netoutage.outage import LinkSpec, PathLossModel
from netoutage.pointprocess import ClusterSpec, ProductDensity

PL = PathLossModel("singular", 4.0)
FIG7 = ClusterSpec(0.1, 4.0, 3.6)


def _product(d, m, theta, alpha, n=400):
    # direct product over the sublattice m Z^d \ 0 inside the ball |k| <= n,
    # plus the continuum estimate of the log-sum beyond it
    n = n if d < 3 else 60
    ax = np.arange(-n, n + 1)
    grids = np.meshgrid(*([ax] * d), indexing="ij")
    k2 = sum(g.astype(float) ** 2 for g in grids).ravel()
    k2 = k2[(k2 > 0) & (k2 <= n * n)]
    area = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[d]
    tail = theta * m ** (-alpha) * area * n ** (d - alpha) / (alpha - d)
    return float(np.exp(-np.sum(np.log1p(theta * (k2 * m * m) ** (-alpha / 2))) - tail))


def test_ppp_aloha_contention():
    assert gamma_aloha(ProductDensity.ppp(1.0), 2.0, PL) == pytest.approx(math.pi**2 / math.sqrt(2), rel=1e-9)


def test_csma_contention_and_eta_max():
    g = gamma_csma_matern(0.3, 2.0, 4.0)
    assert g == pytest.approx(1.956494, abs=2e-6)
    assert eta_max(g, 2.0) == pytest.approx(math.sqrt(0.15 / g))
    assert gamma_csma_matern(0.3, 2.0, 4.0, link_distance=2.0) == pytest.approx(16 * g, rel=1e-9)


def test_matern_contention_below_ppp():
    lam = 0.194
    m = MaternModel.with_intensity(lam, 1.0)
    g_m = gamma_aloha(m.product_density(), 2.0, PL)
    g_p = gamma_aloha(ProductDensity.ppp(lam), 2.0, PL)
    assert 0 < g_m < g_p


def test_tdma_reference_point():
    b = tdma_bounds(1, 2, 2.0, 4.0)
    z = math.pi**4 / 45
    assert b.lower == pytest.approx(math.exp(-z * 2.0 / 16), rel=1e-12)
    assert b.upper == pytest.approx(1 / (1 + z * 2.0 / 16), rel=1e-12)
    assert b.exact == pytest.approx(_product(1, 2, 2.0, 4.0, n=200_000), rel=1e-9)
    assert 0.7629 < b.lower < b.exact < b.upper < 0.7871


@pytest.mark.parametrize("d,m", [(2, 1), (2, 3), (3, 2)])
def test_tdma_exact_against_direct_product(d, m):
    assert tdma_exact(d, m, 2.0, 4.0) == pytest.approx(_product(d, m, 2.0, 4.0), rel=2e-4)


@given(st.integers(1, 3), st.integers(1, 12), st.floats(0.1, 10.0), st.sampled_from([3.5, 4.0, 5.0, 6.0]))
@settings(max_examples=30, deadline=None)
def test_tdma_bounds_sandwich(d, m, theta, alpha):
    if alpha <= d:
        return
    b = tdma_bounds(d, m, theta, alpha)
    assert b.lower <= b.exact <= b.upper


def test_cubic_approximation():
    assert gamma3_approx(4.0) == pytest.approx(16.5262, abs=5e-4)


def test_cluster_mac_limit_agrees_with_extrapolation():
    lim = cluster_mac_gamma_limit(FIG7, 2.0, PL)
    # c int Delta(x) (f*f)(x) dx with f*f a Gaussian of variance 2 sigma^2
    s2 = 2 * 3.6**2
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * (2 / (2 + r**4)) * math.exp(-r * r / (2 * s2)) / (2 * math.pi * s2), 0, np.inf)
    assert lim == pytest.approx(4.0 * val, rel=1e-8)
    assert cluster_mac_gamma(FIG7, 0.5, 2.0, PL) == pytest.approx(lim, rel=1e-5)


def test_parent_thinning_values():
    p0, g = parent_thinning(FIG7, 2.0, PL)
    assert p0 == pytest.approx(0.8558, abs=1e-4)
    assert g == pytest.approx(2.2227, abs=1e-3)


def test_run_based_tdma_limit_is_row_product():
    k = np.arange(1, 200_001, dtype=float)
    ref = float(np.exp(-2 * np.sum(np.log1p(2.0 / k**4))))
    assert unreasonable_tdma_p0(2.0, 4.0) == pytest.approx(ref, rel=1e-10)
    assert ref == pytest.approx(0.08115, abs=1e-5)


def test_dispatch():
    r = gamma_kappa_for(Aloha(1.0), PoissonModel(1.0), 2.0, PL)
    assert r.kappa == 1 and r.provenance == "aloha-quadrature"
    r = gamma_kappa_for(TdmaLattice(1, 2), LatticeModel(2), 2.0, PL)
    assert r.gamma == pytest.approx(12.0536, abs=1e-4) and r.kappa == 2
    r = gamma_kappa_for(TdmaLattice(1, 3), LatticeModel(3), 2.0, PL)
    assert r.kappa == pytest.approx(4 / 3)
    r = gamma_kappa_for(ClusterMac(0.5, 1.0), ThomasModel(FIG7), 2.0, PL)
    assert r.kappa == 0.5 and r.provenance == "cluster-mac"
    r = gamma_kappa_for(ClusterMac(0.0, 1.0), ThomasModel(FIG7), 2.0, PL)
    assert r.p0 < 1 and r.provenance == "parent-thinning"
    r = gamma_kappa_for(UnreasonableTdma(1), LatticeModel(2), 2.0, PL)
    assert r.provenance == "u3-descriptor" and math.isnan(r.gamma)
    assert len(r.row()) == len(ASYMPTOTIC_HEADER)
    with pytest.raises(NotSupportedError):
        gamma_kappa_for(CsmaMatern(1.0), MaternModel(1.0, 1.0), 2.0, PL)
    with pytest.raises(ParameterError):
        gamma_kappa_for(Aloha(1.0), PoissonModel(1.0), 2.0, PathLossModel("singular", 2.0))


def test_link_distance_scaling():
    lk = LinkSpec(2.0, distance=2.0)
    g1 = gamma_kappa_for(Aloha(1.0), PoissonModel(1.0), 2.0, PL).gamma
    g2 = gamma_kappa_for(Aloha(1.0), PoissonModel(1.0), 2.0, PL, lk).gamma
    assert g2 / g1 == pytest.approx(4.0, rel=1e-8)


@given(st.floats(0.01, 50.0), st.floats(0.2, 3.0), st.floats(1e-6, 1.0))
def test_envelope_is_ordered(gamma, kappa, eta):
    lo, hi = conjecture_envelope(gamma, kappa, eta)
    assert 0 <= lo <= hi + 1e-15 and hi <= 1
    assert eta_max(gamma, kappa) <= 1


@pytest.mark.parametrize("alpha", [3.0, 4.0, 5.0, 6.0])
def test_epstein_identity_grid(alpha):
    from netoutage.special import dirichlet_beta, epstein_zeta, zeta

    assert abs(epstein_zeta(2, alpha) - 4 * zeta(alpha / 2) * dirichlet_beta(alpha / 2)) <= 1e-6


def test_bound_ordering_grid():
    # alpha must exceed d, so (d=3, alpha=3) is outside the model and skipped
    for d in (1, 2, 3):
        for alpha in (3.0, 4.0, 6.0):
            if alpha <= d:
                continue
            for m in range(2, 9):
                for theta in (0.5, 2.0, 10.0):
                    b = tdma_bounds(d, m, theta, alpha)
                    assert b.lower <= b.exact <= b.upper


def test_aloha_contention_increases_with_theta():
    pd = ProductDensity.matern(1.0, 1.0)
    g = [gamma_aloha(pd, t, PL) for t in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
    assert all(a < b for a, b in zip(g, g[1:]))


def test_lattice_sum_of_delta_matches_linearisation():
    from netoutage.special import epstein_zeta, lattice_sum

    # sum of Delta over Z^2 equals theta Z(alpha) up to O(theta^2)
    for theta in (1e-2, 1e-3):
        val = lattice_sum(lambda r: theta * r**-4.0 / (1 + theta * r**-4.0), 2)
        lin = theta * epstein_zeta(2, 4.0)
        assert abs(val - lin) <= theta**2 * epstein_zeta(2, 8.0) * (1 + 1e-9)


def test_small_eta_slope_of_ppp_closed_form():
    from netoutage.outage import success_ppp_aloha_closed

    eta = 1e-4
    g = gamma_aloha(ProductDensity.ppp(1.0), 2.0, PL)
    slope = -math.expm1(math.log(success_ppp_aloha_closed(1.0, eta, 2.0, 4.0))) / eta
    assert slope == pytest.approx(g, rel=1e-3)
