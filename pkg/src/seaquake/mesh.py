"""Terrain-following structured spectral-element mesh of the ocean strip.

The domain is {(x, z) : z_b(x) <= z <= H} discretized by Nx x Nz
quadrilateral elements.  Element layers follow the seabed through the sigma
mapping z = z_b(x) + sigma (H - z_b(x)); elements are curved in z only,
with uniform element widths in x.

All metric quantities (Jacobians, boundary weights, normals) are derived
from nodal differentiation of the mesh coordinates themselves, so that the
discrete integration-by-parts identities used by the assembled operators
hold to machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .basis import DiffMatrix, QuadratureRule1D, diff_matrix, gll_rule, lagrange_values
from .errors import ConfigurationError


@dataclass(frozen=True)
class TopographySpec:
    """Seabed elevation z_b(x) >= 0, flat outside a finite region.

    kinds:
      flat       constant elevation ``z0``
      bumps      oscillating package b (1 + sin(k_x (x-x_c))) inside a
                 smoothed box of width r_x centered at x_c
      tabulated  cubic interpolation of (x, z_b) samples, constant beyond
                 the sampled range
    """

    kind: str = "flat"
    z0: float = 0.0
    b: float = 0.0
    k_x: float = 0.0
    f_x: float = 0.0
    r_x: float = 0.0
    x_c: float = 0.0
    samples_x: np.ndarray | None = field(default=None, repr=False)
    samples_zb: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("flat", "bumps", "tabulated"):
            raise ConfigurationError(f"unknown topography kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.samples_x is None or self.samples_zb is None:
                raise ConfigurationError("tabulated topography needs sample arrays")
            x = np.asarray(self.samples_x, dtype=float)
            if np.any(np.diff(x) <= 0):
                raise ConfigurationError("tabulated x samples must be increasing")

    def elevation(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "flat":
            return np.full_like(x, self.z0)
        if self.kind == "bumps":
            s = x - self.x_c
            box = _sigmoid(self.f_x * (s + self.r_x / 2)) - _sigmoid(
                self.f_x * (s - self.r_x / 2)
            )
            return self.b * (1.0 + np.sin(self.k_x * s)) * box
        xs = np.asarray(self.samples_x, dtype=float)
        zs = np.asarray(self.samples_zb, dtype=float)
        # zero end slopes keep the bed flat beyond the sampled region
        spline = CubicSpline(xs, zs, bc_type=((1, 0.0), (1, 0.0)))
        return spline(np.clip(x, xs[0], xs[-1]))


def _sigmoid(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    ez = np.exp(t[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def load_topography_file(path) -> TopographySpec:
    """Two-column text file: x (m), z_b (m), monotone in x."""
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigurationError(f"{path}: expected two columns (x, z_b)")
    return TopographySpec(kind="tabulated", samples_x=data[:, 0], samples_zb=data[:, 1])


@dataclass(frozen=True)
class DomainSpec:
    x_min: float
    x_max: float
    H: float
    topography: TopographySpec = field(default_factory=TopographySpec)

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ConfigurationError("x_max must exceed x_min")
        if self.H <= 0:
            raise ConfigurationError("surface height H must be positive")


@dataclass(frozen=True)
class DiscretizationSpec:
    Nx: int
    Nz: int
    Px: int
    Pz: int

    def __post_init__(self):
        if self.Nx < 1 or self.Nz < 1:
            raise ConfigurationError("element counts must be >= 1")
        for p in (self.Px, self.Pz):
            if p < 1 or p > 16:
                raise ConfigurationError("polynomial orders must be in [1, 16]")


class Mesh:
    """Immutable mesh container produced by :func:`build_mesh`.

    Global scalar nodes are numbered gid = ix * nnz + iz with iz running
    fastest (bottom to top).  Vector degrees of freedom are component
    blocked: x components occupy [0, n_nodes), z components
    [n_nodes, 2 n_nodes).
    """

    def __init__(self, domain, disc, rule_x, rule_z):
        self.domain = domain
        self.disc = disc
        self.rule_x: QuadratureRule1D = rule_x
        self.rule_z: QuadratureRule1D = rule_z
        self.diff_x: DiffMatrix = diff_matrix(rule_x)
        self.diff_z: DiffMatrix = diff_matrix(rule_z)
        self._build()

    def _build(self):
        dom, disc = self.domain, self.disc
        Nx, Nz, Px, Pz = disc.Nx, disc.Nz, disc.Px, disc.Pz
        self.nnx = Nx * Px + 1
        self.nnz = Nz * Pz + 1
        self.n_nodes = self.nnx * self.nnz
        self.n_elements = Nx * Nz
        self.hx = (dom.x_max - dom.x_min) / Nx
        self.a = self.hx / 2.0  # dx/dxi, constant on every element

        xi, eta = self.rule_x.nodes, self.rule_z.nodes
        # global x per x-index (element offset + GLL node)
        x1 = np.empty(self.nnx)
        for ex in range(Nx):
            x1[ex * Px : ex * Px + Px + 1] = (
                dom.x_min + ex * self.hx + (xi + 1.0) * self.a
            )
        zb = dom.topography.elevation(x1)
        if np.any(zb < 0):
            raise ConfigurationError("topography must satisfy z_b >= 0")
        if np.max(zb) >= dom.H:
            raise ConfigurationError(
                f"degenerate topography: max z_b = {np.max(zb):.6g} >= H = {dom.H:.6g}"
            )
        # vertical sigma coordinate per z-index
        sigma = np.empty(self.nnz)
        for ez in range(Nz):
            sigma[ez * Pz : ez * Pz + Pz + 1] = (ez + (eta + 1.0) / 2.0) / Nz
        sigma[-1] = 1.0

        self.x_nodes_1d = x1
        self.zb_nodes_1d = zb
        X = np.repeat(x1, self.nnz)
        Z = (zb[:, None] + sigma[None, :] * (dom.H - zb[:, None])).ravel()
        self.X, self.Z = X, Z

        # connectivity: conn[e, i*(Pz+1)+j] = gid of local node (i, j)
        ni, nj = Px + 1, Pz + 1
        conn = np.empty((self.n_elements, ni * nj), dtype=np.int64)
        e = 0
        for ex in range(Nx):
            for ez in range(Nz):
                ix = ex * Px + np.arange(ni)
                iz = ez * Pz + np.arange(nj)
                conn[e] = (ix[:, None] * self.nnz + iz[None, :]).ravel()
                e += 1
        self.conn = conn
        self.ni, self.nj = ni, nj

        # element-local coordinates and metric factors
        Zloc = Z[conn].reshape(self.n_elements, ni, nj)
        Dx, Dz = self.diff_x.entries, self.diff_z.entries
        z_xi = np.einsum("ik,ekj->eij", Dx, Zloc)
        z_eta = np.einsum("jl,eil->eij", Dz, Zloc)
        if np.any(z_eta <= 0):
            raise ConfigurationError("non-positive vertical Jacobian in mesh")
        self.z_xi = z_xi
        self.z_eta = z_eta
        self.detJ = self.a * z_eta
        wq = self.rule_x.weights[:, None] * self.rule_z.weights[None, :]
        self.W = wq[None, :, :] * self.detJ  # quadrature weight x |J|

        # lumped global weights (sum of W at shared nodes)
        Wg = np.zeros(self.n_nodes)
        np.add.at(Wg, conn.ravel(), self.W.reshape(self.n_elements, -1).ravel())
        self.node_weight = Wg

        # boundary registries
        iz_all = np.arange(self.n_nodes) % self.nnz
        self.surface_nodes = np.nonzero(iz_all == self.nnz - 1)[0]
        self.bottom_nodes = np.nonzero(iz_all == 0)[0]

        self._build_boundaries()

    def _build_boundaries(self):
        """1D boundary quadrature weights and outward normals.

        Bottom edge contributions use the elementwise tangent
        (a, z_xi) so that boundary sums match the telescoped volume sums
        exactly; nodal normals are the weight-averaged edge normals.
        """
        Nx, Px = self.disc.Nx, self.disc.Px
        wxi, a = self.rule_x.weights, self.a

        w_plain = np.zeros(self.nnx)  # integral weight with arc-length metric
        w_flux = np.zeros((self.nnx, 2))  # weighted (un-normalized) normal
        for ex in range(Nx):
            e = ex * self.disc.Nz  # bottom-layer element of this column
            c_edge = self.z_xi[e, :, 0]
            arc = np.s_[ex * Px : ex * Px + Px + 1]
            w_plain[arc] += wxi * np.hypot(a, c_edge)
            # outward (downward) normal times ds: (z_b', -1)/sqrt * ds
            w_flux[arc, 0] += wxi * c_edge
            w_flux[arc, 1] += wxi * (-a)
        self.bottom_weight = w_plain
        self.bottom_flux_weight = w_flux
        norms = np.linalg.norm(w_flux, axis=1)
        self.bottom_normal = w_flux / norms[:, None]

        # flat surface: ds = a dxi, normal (0, 1)
        w_s = np.zeros(self.nnx)
        for ex in range(Nx):
            w_s[ex * Px : ex * Px + Px + 1] += wxi * a
        self.surface_weight = w_s
        self.surface_normal = np.tile([0.0, 1.0], (self.nnx, 1))

    # -- queries ----------------------------------------------------------

    def area(self) -> float:
        return float(self.node_weight.sum())

    def locate(self, x: float, z: float):
        """(element, xi, eta) containing the physical point (x, z)."""
        dom, disc = self.domain, self.disc
        if not (dom.x_min - 1e-9 <= x <= dom.x_max + 1e-9):
            raise ConfigurationError(f"x = {x} outside the domain")
        ex = min(int((x - dom.x_min) / self.hx), disc.Nx - 1)
        xi = 2.0 * (x - dom.x_min - ex * self.hx) / self.hx - 1.0
        zb = float(self.domain.topography.elevation(np.array([x]))[0])
        if not (zb - 1e-9 <= z <= dom.H + 1e-9):
            raise ConfigurationError(f"z = {z} outside the water column at x = {x}")
        sigma = (z - zb) / (dom.H - zb)
        ez = min(int(sigma * disc.Nz), disc.Nz - 1)
        eta = 2.0 * (sigma * disc.Nz - ez) - 1.0
        return ex * disc.Nz + ez, float(np.clip(xi, -1, 1)), float(np.clip(eta, -1, 1))

    def interpolate(self, nodal: np.ndarray, x: float, z: float) -> float:
        """Spectral evaluation of a nodal scalar field at a point."""
        e, xi, eta = self.locate(x, z)
        lx = lagrange_values(self.rule_x.nodes, xi)
        lz = lagrange_values(self.rule_z.nodes, eta)
        vals = nodal[self.conn[e]].reshape(self.ni, self.nj)
        return float(lx @ vals @ lz)


def build_mesh(domain: DomainSpec, disc: DiscretizationSpec) -> Mesh:
    """Construct the terrain-following mesh for the given specs."""
    return Mesh(domain, disc, gll_rule(disc.Px), gll_rule(disc.Pz))


def boundary_normal(mesh: Mesh, node: int) -> np.ndarray:
    """Outward unit normal at a bottom-boundary node."""
    iz = node % mesh.nnz
    if iz != 0:
        raise ConfigurationError(f"node {node} is not on the bottom boundary")
    ix = node // mesh.nnz
    return mesh.bottom_normal[ix].copy()
