"""Sweep a handful of MAC schemes and place each in the outage taxonomy.

Run: python demos/taxonomy.py   (a few minutes on one core)
"""

import numpy as np

from netoutage import LinkSpec, PathLossModel
from netoutage.harness import classify, eta_grid, sweep
from netoutage.mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma
from netoutage.networks import LatticeModel, PoissonModel, Scenario, ThomasModel

pl = PathLossModel("singular", 4.0)
link = LinkSpec(2.0)
lattice = np.array([1 / m**2 for m in range(1, 9)])
thomas = ThomasModel.of(0.1, 4.0, 3.6)

cases = {
    "aloha on ppp": (Scenario(PoissonModel(1.0), Aloha(1.0)), eta_grid(1e-3, 0.1, 8)),
    "csma on ppp": (Scenario(PoissonModel(0.3), CsmaMatern(0.5)), eta_grid(0.01, 0.1, 8)),
    "lattice tdma": (Scenario(LatticeModel(2), TdmaLattice(1)), lattice),
    "cluster mac b=0.5": (Scenario(thomas, ClusterMac(0.5, 1.0)), np.geomspace(1e-2, 1e-5, 6)),
    "parent thinning": (Scenario(thomas, ClusterMac(0.0, 1.0)), np.geomspace(1e-1, 1e-4, 6)),
    "run-based tdma": (Scenario(LatticeModel(2), UnreasonableTdma(1)), lattice),
}
for k, (name, (sc, etas)) in enumerate(cases.items()):
    res = sweep(sc, etas, link, pl, n=20_000, seed=10 + k)
    print(f"{name:18s} {classify(res, alpha=4.0).line()}")
