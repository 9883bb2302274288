"""Special Lagrangian cones, moment maps, and the stability index.

A cone ``C ⊂ ℂᵐ`` is described by an embedding ``(σ, r) ↦ r·X(σ)`` of its
link into the unit sphere.  Two checks certify the geometry at sample
points: the standard symplectic form ``ω′(u, v) = Im⟨u, v⟩`` pulls back to
zero (Lagrangian), and the holomorphic volume form evaluated on a frame has
constant phase ``e^{iθ}`` (special, with phase ``θ``).

Moment maps: for ``X = (A, v, c)`` with ``A`` skew-adjoint, ``v ∈ ℂᵐ``,
``c ∈ ℝ``,

    μ_X(z) = (i/2)·Σ a_ij z_i z̄_j + (i/2)·Σ (v_i z̄_i − v̄_i z_i) + c,

which is real-valued and satisfies ``dμ_X = X̂ ⌟ ω′`` for the generating
field ``X̂(z) = Aᵀz + v``.  (The quadratic form pairs ``z`` with the
*first* index of ``a``, which transposes the field; ``A ↦ Aᵀ`` is a
bijection of the skew-adjoint matrices, so spans are unaffected.)

Restricted to a unit-sphere link, ``ι*(μ_X)`` is homogeneous of order 2,
1, or 0 for the three parts, and — for traceless ``A`` and for ``v`` — a
link eigenfunction.  Counting low-order homogeneous harmonics against the
dimensions forced by these restrictions yields the stability index

    index = M⁺_Σ(2) − m² − 2m + dim G,

where ``M⁺_Σ(2)`` counts exponents in the *closed* interval [0, 2] and
``G`` is the symmetry group of the cone (catalog data).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MixedHomogeneityError, ValidationError, WindowError
from .links import FlatTorus, RoundSphere

__all__ = [
    "MomentElement",
    "SLCone",
    "StabilityReport",
    "moment_eval",
    "hamiltonian_field",
    "verify_hamiltonian",
    "su_basis",
    "translation_basis",
    "restrict_to_cone",
    "stability_index",
    "harvey_lawson_torus",
    "plane_cone",
    "cone_from_json",
    "catalog_cone",
]


# --- moment elements ---------------------------------------------------------


@dataclass(frozen=True)
class MomentElement:
    """Element ``(A, v, c)`` of ``u(m) ⊕ ℂᵐ ⊕ ℝ``."""

    A: np.ndarray
    v: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError("A must be square")
        if v.shape != (A.shape[0],):
            raise ValidationError("v must be a vector matching A")
        if np.abs(A + A.conj().T).max() > 1e-14:
            raise ValidationError("A must be skew-adjoint (A + A* = 0)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", float(self.c))

    @property
    def m(self):
        return self.A.shape[0]


def moment_eval(X, z):
    """Evaluate ``μ_X`` at one point or a batch of points of ℂᵐ."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    zb = z[None, :] if single else z
    quad = np.real(0.5j * np.einsum("ij,ni,nj->n", X.A, zb, zb.conj()))
    lin = -np.imag(np.einsum("i,ni->n", X.v, zb.conj()))
    out = quad + lin + X.c
    return float(out[0]) if single else out


def hamiltonian_field(X, z):
    """Generating vector field ``X̂(z) = Aᵀz + v`` of ``μ_X``."""
    z = np.asarray(z, dtype=complex)
    return z @ X.A + X.v


def verify_hamiltonian(X, samples, step=1e-5):
    """Max residual of ``dμ_X = X̂ ⌟ ω′`` over samples, by central differences.

    Differentiates μ_X along the 2m real coordinate directions and compares
    with ``ω′(X̂(z), e) = Im⟨X̂(z), e⟩``; valid elements come out below 1e−8.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 1:
        samples = samples[None, :]
    if len(samples) == 0:
        raise ValidationError("need at least one sample point")
    m = X.m
    Xz = hamiltonian_field(X, samples)
    worst = 0.0
    for j in range(m):
        for unit in (1.0, 1.0j):
            e = np.zeros(m, dtype=complex)
            e[j] = unit
            dmu = (moment_eval(X, samples + step * e)
                   - moment_eval(X, samples - step * e)) / (2 * step)
            pairing = np.imag(Xz.conj() @ e)
            worst = max(worst, float(np.abs(dmu - pairing).max()))
    return worst


def su_basis(m):
    """Real basis of ``su(m)`` (traceless skew-adjoint), m²−1 elements."""
    out = []
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), dtype=complex)
            E[i, j], E[j, i] = 1.0, -1.0
            out.append(E)
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = E[j, i] = 1.0j
            out.append(E)
    for i in range(m - 1):
        E = np.zeros((m, m), dtype=complex)
        E[i, i], E[i + 1, i + 1] = 1.0j, -1.0j
        out.append(E)
    return out


def translation_basis(m):
    """Real basis of ℂᵐ as translations: e_j and i·e_j."""
    out = []
    for j in range(m):
        for unit in (1.0, 1.0j):
            v = np.zeros(m, dtype=complex)
            v[j] = unit
            out.append(v)
    return out


# --- cones -------------------------------------------------------------------


class SLCone:
    """Special Lagrangian cone with a torus or sphere link.

    ``trig_table`` (torus links) gives each complex coordinate as a sum of
    trigonometric monomials ``c·e^{i k·σ}``; sphere links embed the unit
    sphere of ℝᵐ ⊂ ℂᵐ directly.  Jacobians are analytic in both cases, so
    the Lagrangian/special checks run at tolerance 1e−10.
    """

    def __init__(self, name, m, link, dim_G, trig_table=None, phase_theta=None,
                 validate=True):
        self.name = name
        self.m = int(m)
        self.link = link
        self.dim_G = int(dim_G)
        self.trig_table = trig_table
        if trig_table is not None:
            self._coeffs = [np.array([complex(c) for c, _ in coord])
                            for coord in trig_table]
            self._freqs = [np.array([k for _, k in coord], dtype=float)
                           for coord in trig_table]
        self.phase_theta = (self._detect_phase() if phase_theta is None
                            else float(phase_theta))
        if validate:
            self.validate()

    def __repr__(self):
        return f"SLCone({self.name!r}, m={self.m})"

    # -- embedding

    def link_samples(self, n=12, seed=0):
        """Sample points on the link (angle grid or seeded sphere points)."""
        if isinstance(self.link, FlatTorus):
            return self.link.angle_grid(n)
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((n * n, self.m))
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)

    def embed(self, sigma, r=1.0):
        """Embed link points into ℂᵐ at radius ``r``."""
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        if self.trig_table is not None:
            cols = [np.exp(1j * sigma @ K.T) @ C
                    for C, K in zip(self._coeffs, self._freqs)]
            pts = np.stack(cols, axis=1)
        else:
            pts = sigma.astype(complex)
        return np.asarray(r, dtype=float).reshape(-1, 1) * pts if np.ndim(r) else r * pts

    def frames(self, sigma):
        """Complex frame [∂_r X, tangents] at radius 1 over each sample.

        Torus links use the analytic angle derivatives; sphere links use an
        explicit orthonormal tangent pair completing σ to a right-handed
        basis.
        """
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        npts = len(sigma)
        if self.trig_table is not None:
            dim = sigma.shape[1]
            frame = np.empty((npts, dim + 1, self.m), dtype=complex)
            frame[:, 0, :] = self.embed(sigma, 1.0)
            for a in range(dim):
                for j, (C, K) in enumerate(zip(self._coeffs, self._freqs)):
                    frame[:, a + 1, j] = np.exp(1j * sigma @ K.T) @ (1j * K[:, a] * C)
            return frame
        # sphere link: tangent pair from the smallest-component axis
        frame = np.empty((npts, 3, self.m), dtype=complex)
        frame[:, 0, :] = sigma
        axis = np.argmin(np.abs(sigma), axis=1)
        helper = np.zeros_like(sigma)
        helper[np.arange(npts), axis] = 1.0
        t1 = np.cross(sigma, helper)
        t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
        t2 = np.cross(sigma, t1)
        frame[:, 1, :] = t1
        frame[:, 2, :] = t2
        return frame

    # -- geometric checks

    def _detect_phase(self):
        sigma = self.link_samples(6)
        dets = np.linalg.det(self.frames(sigma))
        return float(cmath.phase(complex(dets[0])))

    def check_unit_link(self, n=16):
        sigma = self.link_samples(n)
        return float(np.abs(np.linalg.norm(self.embed(sigma, 1.0), axis=1) - 1.0).max())

    def check_lagrangian(self, n=16):
        """Max |ω′| over frame pairs at sample points (0 for Lagrangian)."""
        frame = self.frames(self.link_samples(n))
        worst = 0.0
        dim = frame.shape[1]
        for a in range(dim):
            for b in range(a + 1, dim):
                om = np.imag(np.einsum("nj,nj->n", frame[:, a].conj(), frame[:, b]))
                worst = max(worst, float(np.abs(om).max()))
        return worst

    def check_special(self, n=16):
        """Max |Im(e^{−iθ}·det frame)| at sample points (0 for phase θ)."""
        frame = self.frames(self.link_samples(n))
        dets = np.linalg.det(frame)
        return float(np.abs(np.imag(np.exp(-1j * self.phase_theta) * dets)).max())

    def validate(self, n=12, tol=1e-10):
        unit = self.check_unit_link(n)
        lag = self.check_lagrangian(n)
        spec = self.check_special(n)
        if unit > tol:
            raise ValidationError(f"link leaves the unit sphere (dev {unit:.2e})")
        if lag > tol:
            raise ValidationError(f"cone is not Lagrangian (omega dev {lag:.2e})")
        if spec > tol:
            raise ValidationError(f"cone is not special with phase "
                                  f"{self.phase_theta:.6f} (dev {spec:.2e})")
        return {"unit_link": unit, "lagrangian": lag, "special": spec}

    def to_json(self):
        if self.trig_table is None:
            raise ValidationError("only trig-table cones serialize to JSON")
        return {
            "name": self.name,
            "m": self.m,
            "dim_G": self.dim_G,
            "coordinates": [
                [{"c": [c.real, c.imag], "k": [int(x) for x in k]}
                 for c, k in zip(C, K)]
                for C, K in zip(self._coeffs, self._freqs)
            ],
        }


def harvey_lawson_torus():
    """The T² cone ``{(r e^{iφ₁}, r e^{iφ₂}, r e^{−i(φ₁+φ₂)})/√3}`` in ℂ³.

    Its link is flat T² with the induced constant metric
    ``H = (1/3)[[2,1],[1,2]]``; the cone is special with phase π and carries
    a 2-torus of symmetries (dim G = 2).
    """
    s = 1.0 / math.sqrt(3.0)
    table = [
        [(s, (1, 0))],
        [(s, (0, 1))],
        [(s, (-1, -1))],
    ]
    link = FlatTorus(np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0)
    return SLCone("hl-torus-3", 3, link, dim_G=2, trig_table=table)


def plane_cone():
    """The degenerate control case ℝ³ ⊂ ℂ³ (link S², dim G = dim SO(3) = 3)."""
    return SLCone("plane-3", 3, RoundSphere(2), dim_G=3)


def cone_from_json(source):
    """Build a torus-link cone from a JSON trig-monomial table.

    ``source`` is a path, file-like, or already-parsed dict with fields
    ``name``, ``m``, ``dim_G``, and ``coordinates`` (one monomial list per
    complex coordinate, each monomial ``{"c": [re, im], "k": [k1, ...]}``).
    The link metric is induced from the embedding; validation rejects
    non-Lagrangian tables.
    """
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    table = [[(complex(mono["c"][0], mono["c"][1]), tuple(mono["k"]))
              for mono in coord]
             for coord in data["coordinates"]]
    dim = len(table[0][0][1])
    m = int(data["m"])
    if len(table) != m:
        raise ValidationError("need one coordinate table per complex coordinate")
    # induced link metric H_ab = Re <∂_a X, ∂_b X> is constant for closed tables;
    # measure it at one sample and verify constancy at others
    probe = SLCone(data.get("name", "custom"), m, FlatTorus(np.eye(dim)),
                   dim_G=int(data.get("dim_G", 0)), trig_table=table,
                   validate=False)
    sigma = probe.link_samples(7)
    frames = probe.frames(sigma)
    tangents = frames[:, 1:, :]
    Hs = np.real(np.einsum("naj,nbj->nab", tangents.conj(), tangents))
    H = Hs[0]
    if np.abs(Hs - H).max() > 1e-10:
        raise ValidationError("embedding does not induce a constant link metric")
    return SLCone(data.get("name", "custom"), m, FlatTorus(H),
                  dim_G=int(data.get("dim_G", 0)), trig_table=table)


def catalog_cone(name):
    """Look up a built-in cone by CLI name."""
    catalog = {"hl-torus-3": harvey_lawson_torus, "plane-3": plane_cone}
    if name not in catalog:
        raise ValidationError(
            f"unknown cone {name!r}; built-ins: {sorted(catalog)}")
    return catalog[name]()


# --- restriction and stability ----------------------------------------------


@dataclass
class RestrictionResult:
    order: int
    values: np.ndarray
    harmonic_residual: float
    sigma: np.ndarray


def _sphere_harmonic_basis(order, sigma):
    """Explicit spherical-harmonic bases on S² for l = 0, 1, 2."""
    x, y, z = sigma[:, 0], sigma[:, 1], sigma[:, 2]
    if order == 0:
        cols = [np.ones_like(x)]
    elif order == 1:
        cols = [x, y, z]
    else:
        cols = [x * y, y * z, z * x, x * x - y * y, 2 * z * z - x * x - y * y]
    return np.stack(cols, axis=1)


def restrict_to_cone(cone, X, n=24):
    """Restrict ``μ_X`` to the link and detect its homogeneity order.

    Returns the sampled link function ``φ(σ) = μ_X(embed(σ, 1))``, the
    detected order α ∈ {0, 1, 2} (two-point ratio fit at r = 1/2, 1, 2 with
    exactness demanded), and the residual of the eigen-relation
    ``Δ_h φ = −α(α + m − 2) φ``.  Mixed elements (incompatible pure orders)
    raise :class:`MixedHomogeneityError`.
    """
    sigma = cone.link_samples(n)
    p1 = cone.embed(sigma, 1.0)
    phi = moment_eval(X, p1)
    vals = {r: moment_eval(X, cone.embed(sigma, r)) for r in (0.5, 2.0)}
    scale = max(float(np.abs(phi).max()), 1e-300)
    if np.abs(phi).max() < 1e-14:
        return RestrictionResult(0, phi, 0.0, sigma)

    order = None
    for cand in (0, 1, 2):
        resid = max(float(np.abs(vals[r] - r ** cand * phi).max()) / (scale * max(1.0, 2.0 ** cand))
                    for r in (0.5, 2.0))
        if resid < 1e-8:
            order = cand
            break
    if order is None:
        raise MixedHomogeneityError(
            "restricted moment function has no pure homogeneity order in {0,1,2}; "
            "X mixes quadratic/linear/constant parts")

    lam = order * (order + cone.m - 2)
    if isinstance(cone.link, FlatTorus):
        grid = phi.reshape((n,) * cone.link.dim)
        lap = cone.link.laplacian_fft(grid).ravel()
        harm = float(np.abs(lap + lam * phi).max()) / scale
    else:
        basis = _sphere_harmonic_basis(order, sigma)
        coef, *_ = np.linalg.lstsq(basis, phi, rcond=None)
        harm = float(np.abs(phi - basis @ coef).max()) / scale
    return RestrictionResult(order, phi, harm, sigma)


def eigenspace_projection_residual(cone, values, order, n):
    """Distance of a sampled restriction from the matching link eigenspace."""
    lam = order * (order + cone.m - 2)
    scale = max(float(np.abs(values).max()), 1e-300)
    if isinstance(cone.link, FlatTorus):
        grid = values.reshape((n,) * cone.link.dim)
        proj = cone.link.eigenprojection_fft(grid, lam).ravel()
        return float(np.abs(values - proj).max()) / scale
    sigma = cone.link_samples(n)
    basis = _sphere_harmonic_basis(order, sigma)
    coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
    return float(np.abs(values - basis @ coef).max()) / scale


@dataclass
class StabilityReport:
    index: int
    m_plus_2: int
    harmonic_counts: dict
    rank_translations: int
    rank_su: int
    expected_rank_translations: int
    expected_rank_su: int
    degenerate: bool
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "index": self.index,
            "count_up_to_2": self.m_plus_2,
            "harmonic_counts": {str(k): v for k, v in self.harmonic_counts.items()},
            "rank_translations": self.rank_translations,
            "rank_su": self.rank_su,
            "expected_rank_translations": self.expected_rank_translations,
            "expected_rank_su": self.expected_rank_su,
            "degenerate": self.degenerate,
            "warnings": list(self.warnings),
        }


def stability_index(cone, table, n=24, seed=0):
    """Stability index of a special Lagrangian cone, with rank diagnostics.

    The index is the multiplicity-weighted number of homogeneity exponents
    in the closed interval [0, 2] minus ``m² + 2m − dim G``, the dimension
    count of the harmonic functions generated by rigid motions and dilation.
    The report also carries the numerically measured dimensions of the
    spans of the moment maps restricted to the link, for generators ranging
    over translations and over ``su(m)``; for a non-degenerate cone these
    equal ``2m`` and ``m² − 1 − dim G``.
    """
    if table.alpha_hi < 2.0 - table.tol:
        raise WindowError("exponent table window must cover [0, 2]")
    m = cone.m
    m_plus = table.count_M_closed(2.0)
    counts = {k: table.multiplicity(float(k)) for k in (0, 1, 2)}
    index = m_plus - m * m - 2 * m + cone.dim_G

    sigma = cone.link_samples(n, seed=seed)
    pts = cone.embed(sigma, 1.0)

    def span_rank(elements):
        rows = np.stack([moment_eval(X, pts) for X in elements])
        svals = np.linalg.svd(rows, compute_uv=False)
        return int((svals > 1e-8 * svals[0]).sum())

    rank_tr = span_rank([MomentElement(np.zeros((m, m)), v) for v in translation_basis(m)])
    rank_su = span_rank([MomentElement(A, np.zeros(m)) for A in su_basis(m)])

    exp_tr, exp_su = 2 * m, m * m - 1 - cone.dim_G
    warnings = []
    degenerate = rank_tr < exp_tr or rank_su < exp_su
    if degenerate:
        warnings.append(
            f"moment-map restriction is not injective (ranks {rank_tr}/{exp_tr} "
            f"translations, {rank_su}/{exp_su} su({m})); index may undercount")
    if index < 0:
        warnings.append("negative index: cone fails the stability count")
    return StabilityReport(index, m_plus, counts, rank_tr, rank_su,
                           exp_tr, exp_su, degenerate, warnings)
