"""Node models and the (model, MAC) scenarios that feed the estimators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .errors import NotSupportedError, ParameterError
from .mac import Aloha, ClusterMac, CsmaMatern, TdmaLattice, UnreasonableTdma, aloha, cluster_mac, csma_matern, tdma_lattice, unreasonable_tdma
from .pointprocess import (
    WINDOW_FACTOR,
    ClusterSpec,
    ProductDensity,
    Window,
    gen_lattice,
    gen_matern2,
    gen_ppp,
    gen_thomas,
    matern_intensity,
    matern_parent_intensity,
    matern_radius,
    window_side,
)

__all__ = ["PoissonModel", "MaternModel", "ThomasModel", "LatticeModel", "Scenario", "describe"]


@dataclass(frozen=True)
class PoissonModel:
    intensity: float
    d: int = 2

    def __post_init__(self):
        if not self.intensity > 0:
            raise ParameterError("intensity must be positive")
        if self.d not in (1, 2, 3):
            raise ParameterError("dimension must be 1, 2 or 3")

    name = "ppp"
    scale = 0.0

    def generate(self, window, rng):
        return gen_ppp(self.intensity, window, rng)

    def product_density(self):
        return ProductDensity.ppp(self.intensity)


@dataclass(frozen=True)
class MaternModel:
    """Matern type-II hard-core nodes (planar)."""

    parent_intensity: float
    h: float
    d: int = 2

    def __post_init__(self):
        if not self.parent_intensity > 0 or self.h < 0:
            raise ParameterError("need parent_intensity > 0 and h >= 0")

    @classmethod
    def with_intensity(cls, intensity: float, h: float) -> "MaternModel":
        """Model whose retained intensity equals ``intensity``."""
        return cls(matern_parent_intensity(intensity, h), h)

    name = "matern"

    @property
    def intensity(self) -> float:
        return matern_intensity(self.parent_intensity, self.h)

    @property
    def scale(self) -> float:
        return self.h

    def generate(self, window, rng):
        return gen_matern2(self.parent_intensity, self.h, window, rng)

    def product_density(self):
        return ProductDensity.matern(self.parent_intensity, self.h)


@dataclass(frozen=True)
class ThomasModel:
    spec: ClusterSpec
    d: int = 2

    @classmethod
    def of(cls, parent_intensity, mean_daughters, sigma) -> "ThomasModel":
        return cls(ClusterSpec(parent_intensity, mean_daughters, sigma))

    name = "thomas"

    @property
    def intensity(self) -> float:
        return self.spec.intensity

    @property
    def scale(self) -> float:
        return self.spec.sigma

    def generate(self, window, rng):
        return gen_thomas(self.spec, window, rng)

    def product_density(self):
        return ProductDensity.thomas(self.spec)


@dataclass(frozen=True)
class LatticeModel:
    d: int = 2
    spacing: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2, 3) or not self.spacing > 0:
            raise ParameterError("need d in {1,2,3} and spacing > 0")

    name = "lattice"

    @property
    def intensity(self) -> float:
        return self.spacing ** (-self.d)

    @property
    def scale(self) -> float:
        return self.spacing

    def generate(self, window, rng):
        return gen_lattice(self.d, self.spacing, window, rng)

    def product_density(self):
        return None


_SUPPORTED = {
    ("ppp", "aloha"),
    ("ppp", "csma"),
    ("matern", "aloha"),
    ("thomas", "aloha"),
    ("thomas", "cluster-mac"),
    ("lattice", "tdma"),
    ("lattice", "unreasonable-tdma"),
}


@dataclass(frozen=True)
class Scenario:
    """A node model combined with a MAC family indexed by ``eta``.

    ``scheme`` is a template; ``scheme.with_eta(eta)`` gives the member used
    at each ``eta``. With ``fused=True`` a MAC whose output law is known in
    closed form is sampled directly (ALOHA on a PPP is a PPP of intensity
    ``eta lambda``, daughter and cluster thinning of a Thomas process is a
    Thomas process with reduced parameters, lattice TDMA is a coarser
    lattice). The law of the transmitter set is unchanged; only the wasted
    work of generating silent nodes is avoided.
    """

    model: object
    scheme: object
    wrap: str = "torus"
    fused: bool = True
    window_factor: float = WINDOW_FACTOR
    _windows: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        key = (self.model.name, self.scheme.name)
        if key not in _SUPPORTED:
            raise NotSupportedError(f"{self.scheme.name} on a {self.model.name} model is not implemented")
        if self.scheme.name == "tdma" and self.scheme.d != self.model.d:
            raise ParameterError("TDMA dimension must match the lattice dimension")
        if self.wrap not in ("torus", "guard"):
            raise ParameterError("wrap must be 'torus' or 'guard'")
        if self.window_factor < WINDOW_FACTOR:
            warnings.warn(
                f"window factor {self.window_factor:g} is below the recommended {WINDOW_FACTOR:g}", stacklevel=2
            )

    @property
    def d(self) -> int:
        return self.model.d

    @property
    def name(self) -> str:
        return f"{self.model.name}+{self.scheme.name}"

    def at(self, eta: float):
        return self.scheme.with_eta(eta)

    def transmitter_intensity(self, eta: float) -> float:
        return eta * self.model.intensity

    def exclusion_radius(self, eta: float) -> float:
        """Carrier-sensing radius at ``eta`` (CSMA only)."""
        return matern_radius(self.model.intensity, eta)

    def transmitter_lattice(self, eta: float) -> float | None:
        """Spacing when the transmitters at ``eta`` form a full lattice, else ``None``."""
        if self.model.name == "lattice" and self.scheme.name == "tdma":
            return self.model.spacing * self.at(eta).m
        return None

    def window_for(self, eta: float) -> Window:
        if not 0 < eta <= 1:
            raise ParameterError("eta must lie in (0, 1]")
        if eta in self._windows:
            return self._windows[eta]
        d = self.d
        lam_t = self.transmitter_intensity(eta)
        scales = [lam_t ** (-1.0 / d), self.model.scale]
        period = None
        if self.scheme.name == "csma" and eta < 1:
            scales.append(self.exclusion_radius(eta))
        elif self.scheme.name == "tdma":
            period = self.at(eta).m * self.model.spacing
        elif self.scheme.name == "unreasonable-tdma":
            period = self.at(eta).m ** 2 * self.model.spacing
        elif self.model.name == "lattice":
            period = self.model.spacing
        side = window_side(scales, d, self.window_factor, period)
        if self.wrap == "torus":
            win = Window.square(side, d)
        else:
            win = Window.square(2 * side, d, wrap="guard", band=side / 2)
        self._windows[eta] = win
        return win

    def realize(self, eta: float, rng):
        """Draw one transmitter pattern at ``eta``."""
        scheme = self.at(eta)
        window = self.window_for(eta)
        m = self.model
        key = (m.name, scheme.name)
        if self.fused:
            if key == ("ppp", "aloha"):
                return gen_ppp(eta * m.intensity, window, rng)
            if key == ("thomas", "aloha"):
                return gen_thomas(ClusterSpec(m.spec.parent_intensity, m.spec.mean_daughters * eta, m.spec.sigma), window, rng)
            if key == ("thomas", "cluster-mac"):
                spec = ClusterSpec(
                    m.spec.parent_intensity * scheme.cluster_prob, m.spec.mean_daughters * scheme.node_prob, m.spec.sigma
                )
                return gen_thomas(spec, window, rng)
            if key == ("lattice", "tdma"):
                return gen_lattice(m.d, m.spacing * scheme.m, window, rng)
        nodes = m.generate(window, rng)
        if isinstance(scheme, Aloha):
            return aloha(nodes, eta, rng).pattern
        if isinstance(scheme, CsmaMatern):
            if eta == 1:
                return nodes
            return csma_matern(nodes, eta, rng).pattern
        if isinstance(scheme, ClusterMac):
            return cluster_mac(nodes, scheme.b, eta, rng).pattern
        if isinstance(scheme, TdmaLattice):
            return tdma_lattice(nodes, scheme.m, rng).pattern
        if isinstance(scheme, UnreasonableTdma):
            return unreasonable_tdma(nodes, scheme.m, rng).pattern
        raise NotSupportedError(self.name)

    def family(self):
        """``(eta, rng) -> pattern`` callable for condition checks."""
        return self.realize


def describe(scenario: Scenario) -> dict:
    """Flat description used in manifests."""
    out = {"model": scenario.model.name, "scheme": scenario.scheme.name, "wrap": scenario.wrap}
    m = scenario.model
    for k in ("intensity", "parent_intensity", "h", "spacing", "d"):
        if hasattr(m, k):
            out[f"model.{k}"] = getattr(m, k)
    if hasattr(m, "spec"):
        out["model.parent_intensity"] = m.spec.parent_intensity
        out["model.mean_daughters"] = m.spec.mean_daughters
        out["model.sigma"] = m.spec.sigma
    if hasattr(scenario.scheme, "b"):
        out["mac.b"] = scenario.scheme.b
    return out

