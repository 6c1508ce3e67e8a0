import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from netoutage.errors import ParameterError, UsageError
from netoutage.mac import (
    Aloha,
    ClusterMac,
    CsmaMatern,
    TdmaLattice,
    UnreasonableTdma,
    aloha,
    check_conditions,
    cluster_mac,
    csma_matern,
    tdma_lattice,
    unreasonable_tdma,
)
from netoutage.networks import LatticeModel, PoissonModel, Scenario
from netoutage.pointprocess import ClusterSpec, Window, gen_lattice, gen_matern2, gen_ppp, gen_thomas
from netoutage.rng import stream


def test_scheme_parameters():
    assert Aloha(0.3).eta == 0.3
    assert TdmaLattice(3, 2).eta == pytest.approx(1 / 9)
    assert UnreasonableTdma(4).eta == pytest.approx(1 / 16)
    c = ClusterMac(0.5, 0.01)
    assert c.cluster_prob * c.node_prob == pytest.approx(0.01)
    assert ClusterMac(0.0, 0.1).node_prob == 1.0
    with pytest.raises(ParameterError):
        Aloha(1.5)
    with pytest.raises(ParameterError):
        TdmaLattice(0)
    with pytest.raises(ParameterError):
        TdmaLattice(1, 2).with_eta(0.3)


def test_aloha_thinning_fraction():
    p = gen_ppp(1.0, Window.square(100.0), 0)
    t = aloha(p, 0.2, 1)
    assert abs(len(t) / len(p) - 0.2) < 4 * np.sqrt(0.2 * 0.8 / len(p))
    assert t.pattern.intensity == pytest.approx(0.2)


def test_csma_keeps_hard_core_and_target_density():
    w = Window.square(80.0)
    counts = []
    for k in range(20):
        t = csma_matern(gen_ppp(0.3, w, stream(1, k)), 0.1, stream(2, k))
        tree = cKDTree(t.pattern.coords, boxsize=w.sides)
        assert not tree.query_pairs(t.h * (1 - 1e-9))
        counts.append(len(t))
    assert t.eta == pytest.approx(0.1, rel=1e-8)
    lam_hat = np.mean(counts) / w.volume
    assert abs(lam_hat - 0.03) < 4 * np.std(counts) / np.sqrt(20) / w.volume
    with pytest.raises(UsageError):
        csma_matern(gen_matern2(1.0, 0.5, w, 0), 0.1)


def test_tdma_lattice_is_coarser_lattice():
    w = Window.square(12.0)
    t = tdma_lattice(gen_lattice(2, 1.0, w, 0), 3, 5)
    assert len(t) == 16
    d = np.sort(w.distance(t.pattern.coords[0], t.pattern.coords))
    assert d[1] == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        tdma_lattice(gen_lattice(2, 1.0, Window.square(10.0), 0), 3)


def test_cluster_mac_requires_parents():
    w = Window.square(100.0)
    with pytest.raises(UsageError):
        cluster_mac(gen_ppp(0.1, w, 0), 0.5, 0.1)
    p = gen_thomas(ClusterSpec(0.1, 4.0, 1.0), w, 3)
    t = cluster_mac(p, 0.0, 0.5, 4)
    # with b = 0 whole clusters are kept or dropped
    kept = set(p.parent_ids[t.active])
    dropped = set(p.parent_ids[~t.active])
    assert not kept & dropped


def test_unreasonable_tdma_runs():
    w = Window.square(16.0)
    t = unreasonable_tdma(gen_lattice(2, 1.0, w, 0), 4, 1)
    assert len(t) == 256 // 16
    # every transmitter has an active neighbour one step away
    tree = cKDTree(t.pattern.coords, boxsize=w.sides)
    dd, _ = tree.query(t.pattern.coords, k=2)
    assert np.allclose(dd[:, 1], 1.0)


def test_conditions_flag_run_based_tdma():
    etas = np.array([1 / m**2 for m in range(1, 9)])
    bad = check_conditions(Scenario(LatticeModel(2), UnreasonableTdma(1)).family(), etas, seed=3)
    assert not bad.reasonable and not bad.box_bounded
    good = check_conditions(Scenario(LatticeModel(2), TdmaLattice(1)).family(), etas, seed=3)
    assert good.reasonable


def test_conditions_accept_aloha():
    rep = check_conditions(Scenario(PoissonModel(1.0), Aloha(1.0)).family(), np.geomspace(0.1, 1e-3, 6), seed=3)
    assert rep.reasonable
    assert any("reasonable" in line for line in rep.lines())
    with pytest.raises(ParameterError):
        check_conditions(Scenario(PoissonModel(1.0), Aloha(1.0)).family(), [0.1, 0.2, 0.05, 0.01])


def test_achieved_eta_matches_request():
    w = Window.square(40.0)
    ratios = {"aloha": [], "csma": [], "cluster": []}
    for k in range(500):
        p = gen_ppp(0.3, w, stream(21, k))
        ratios["aloha"].append((len(aloha(p, 0.25, stream(22, k))), len(p)))
        ratios["csma"].append((len(csma_matern(p, 0.25, stream(23, k))), len(p)))
        t = gen_thomas(ClusterSpec(0.05, 4.0, 1.0), w, stream(24, k))
        ratios["cluster"].append((len(cluster_mac(t, 0.5, 0.25, stream(25, k))), len(t)))
    for name, pairs in ratios.items():
        kept, tot = np.array(pairs, dtype=float).T
        est = kept.sum() / tot.sum()
        resid = kept - est * tot
        se = math.sqrt(np.sum(resid**2) / (len(tot) * (len(tot) - 1))) / tot.mean()
        assert abs(est - 0.25) <= 3 * se, name


def _k_curve(patterns, radii):
    from netoutage.pointprocess import estimate_k_function

    return estimate_k_function(patterns, radii)


def test_aloha_composition_and_cluster_mac_with_b_one():
    w = Window.square(60.0)
    radii = np.array([0.5, 1.0, 2.0, 4.0])
    twice, once, cmac, alo = [], [], [], []
    for k in range(60):
        p = gen_ppp(1.0, w, stream(31, k))
        twice.append(aloha(aloha(p, 0.5, stream(32, k)).pattern, 0.4, stream(33, k)).pattern)
        once.append(aloha(gen_ppp(1.0, w, stream(34, k)), 0.2, stream(35, k)).pattern)
        t = gen_thomas(ClusterSpec(0.1, 4.0, 1.0), w, stream(36, k))
        cmac.append(cluster_mac(t, 1.0, 0.3, stream(37, k)).pattern)
        t2 = gen_thomas(ClusterSpec(0.1, 4.0, 1.0), w, stream(38, k))
        alo.append(aloha(t2, 0.3, stream(39, k)).pattern)
    for a, b in ((twice, once), (cmac, alo)):
        ka, sa = _k_curve(a, radii)
        kb, sb = _k_curve(b, radii)
        assert np.all(np.abs(ka - kb) <= 3 * np.hypot(sa, sb))
