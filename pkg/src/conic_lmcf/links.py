"""Link manifolds and their Laplace–Beltrami spectra.

A Riemannian cone ``C = Σ × (0, ∞)`` with metric ``dr² + r² h`` is
determined by its link ``(Σ, h)``.  Homogeneous harmonic functions
``r^α φ(σ)`` on the cone correspond to link eigenfunctions

    Δ_h φ = −α(α + m − 2) φ,

so everything downstream (exponent tables, Fredholm counts, stability
indices) starts from the spectrum of ``Δ_h``.

Three link descriptions are supported:

* :class:`FlatTorus` — ``T^d`` with a constant metric ``H`` in angle
  coordinates of period 2π.  Eigenfunctions are ``e^{i k·σ}`` over integer
  vectors ``k`` with eigenvalue ``kᵀ H⁻¹ k``; the spectrum is enumerated
  exactly.
* :class:`RoundSphere` — the unit ``S^d``; eigenvalue ``l(l + d − 1)`` with
  the classical multiplicity.
* :class:`MeshLink` — a closed triangulated surface, either embedded
  (vertices in R³) or intrinsic (per-face edge lengths); cotangent
  stiffness with lumped mass, eigenvalues by shift-invert Lanczos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import ValidationError

__all__ = [
    "EigenEntry",
    "FlatTorus",
    "RoundSphere",
    "MeshLink",
    "read_off",
    "sphere_multiplicity",
]


@dataclass(frozen=True)
class EigenEntry:
    """One eigenvalue of the link Laplacian with its multiplicity.

    ``lam`` is the eigenvalue of −Δ_h (so ``lam ≥ 0``), ``multiplicity``
    the dimension of its eigenspace, and ``basis_tag`` a short label for
    how the eigenspace is realised (a lattice representative, a spherical
    degree, or ``"mesh"``).
    """

    lam: float
    multiplicity: int
    basis_tag: str = ""

    def __post_init__(self):
        if self.lam < -1e-12:
            raise ValidationError(f"negative eigenvalue {self.lam}")
        if self.multiplicity < 1:
            raise ValidationError("multiplicity must be a positive integer")


def _check_sorted(entries):
    lams = [e.lam for e in entries]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValidationError("eigenvalues must be strictly increasing")
    return entries


# --- flat torus -------------------------------------------------------------


class FlatTorus:
    """Flat torus ``T^d = (R/2πZ)^d`` with constant metric matrix ``H``."""

    variant = "FlatTorus"

    def __init__(self, metric):
        H = np.atleast_2d(np.asarray(metric, dtype=float))
        if H.shape[0] != H.shape[1]:
            raise ValidationError("metric must be square")
        if not np.allclose(H, H.T, atol=1e-12):
            raise ValidationError("metric must be symmetric")
        if np.linalg.eigvalsh(H).min() <= 0:
            raise ValidationError("metric must be positive definite")
        self.metric = H
        self.dim = H.shape[0]
        self._Hinv = np.linalg.inv(H)

    def __repr__(self):
        return f"FlatTorus(dim={self.dim})"

    def eigenvalue(self, k):
        """Eigenvalue of the Fourier mode ``e^{i k·σ}``."""
        k = np.asarray(k, dtype=float)
        return float(k @ self._Hinv @ k)

    def spectrum(self, lam_max, group_tol=1e-9):
        """All eigenvalues ≤ ``lam_max`` as sorted :class:`EigenEntry` rows.

        Integer vectors are enumerated over the bounding box of the
        ellipsoid ``kᵀH⁻¹k ≤ lam_max`` (``k_i² ≤ lam_max·H_ii``).
        """
        if lam_max < 0:
            raise ValidationError("lam_max must be nonnegative")
        bounds = [int(math.floor(math.sqrt(lam_max * self.metric[i, i]) + 1e-9))
                  for i in range(self.dim)]
        grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
        ks = np.stack([g.ravel() for g in grids], axis=1)
        lams = np.einsum("ni,ij,nj->n", ks, self._Hinv, ks)
        keep = lams <= lam_max + group_tol
        ks, lams = ks[keep], lams[keep]
        order = np.argsort(lams)
        entries = []
        i = 0
        while i < len(order):
            lam = lams[order[i]]
            j = i
            while j < len(order) and lams[order[j]] <= lam + group_tol * max(1.0, lam):
                j += 1
            rep = ks[order[i]]
            if lam > group_tol:
                # pick a lexicographically positive representative for the tag
                cand = ks[order[i:j]]
                rep = max(map(tuple, cand))
            tag = "k=(" + ",".join(str(int(c)) for c in rep) + ")"
            entries.append(EigenEntry(float(np.mean(lams[order[i:j]])), j - i, tag))
            i = j
        return _check_sorted(entries)

    def _as_grid(self, values):
        values = np.asarray(values)
        if values.ndim == 1:
            n = round(values.size ** (1.0 / self.dim))
            if n**self.dim != values.size:
                raise ValidationError("flat sample vector is not a full angle grid")
            return values.reshape((n,) * self.dim), True
        return values, False

    def laplacian_fft(self, values):
        """Apply Δ_h to a trig-polynomial sampled on a uniform angle grid.

        ``values`` has shape ``(n,)*dim`` (or raveled, as produced by
        sampling on :meth:`angle_grid`); the result is exact for fields
        band-limited below the grid Nyquist, which covers every restricted
        moment function used here.
        """
        values, flat = self._as_grid(values)
        values = np.asarray(values, dtype=complex)
        n = values.shape[0]
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        grids = np.meshgrid(*([freqs] * self.dim), indexing="ij")
        ks = np.stack(grids, axis=-1)
        lam = np.einsum("...i,ij,...j->...", ks, self._Hinv, ks)
        out = np.fft.ifftn(-lam * np.fft.fftn(values))
        out = out.real
        return out.ravel() if flat else out

    def eigenprojection_fft(self, values, lam, tol=1e-9):
        """Project a sampled field onto the λ-eigenspace (exact FFT bands)."""
        values, flat = self._as_grid(values)
        values = np.asarray(values, dtype=complex)
        n = values.shape[0]
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        grids = np.meshgrid(*([freqs] * self.dim), indexing="ij")
        ks = np.stack(grids, axis=-1)
        lams = np.einsum("...i,ij,...j->...", ks, self._Hinv, ks)
        mask = np.abs(lams - lam) <= tol * max(1.0, abs(lam))
        out = np.fft.ifftn(mask * np.fft.fftn(values))
        out = out.real
        return out.ravel() if flat else out

    def angle_grid(self, n):
        """Uniform ``n^dim`` sample grid of angle coordinates in [0, 2π)."""
        phi = 2.0 * np.pi * np.arange(n) / n
        grids = np.meshgrid(*([phi] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def triangulate(self, n):
        """Intrinsic triangulation with ``n²`` vertices (dim 2 only).

        The flat torus generally has no isometric embedding in R³, so the
        mesh is built from per-face edge lengths measured in the metric
        ``H`` rather than from embedded vertex positions.
        """
        if self.dim != 2:
            raise ValidationError("triangulate is implemented for dim=2 links")
        h = 2.0 * np.pi / n

        def elen(v):
            v = np.asarray(v, dtype=float)
            return h * math.sqrt(v @ self.metric @ v)

        idx = lambda i, j: (i % n) * n + (j % n)
        faces = []
        lengths = []
        # each grid cell splits along the (1,1) diagonal
        l_a, l_b, l_d = elen([1, 0]), elen([0, 1]), elen([1, 1])
        for i in range(n):
            for j in range(n):
                # lower triangle (i,j) (i+1,j) (i+1,j+1); opposite-edge lengths
                faces.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
                lengths.append((l_b, l_d, l_a))
                # upper triangle (i,j) (i+1,j+1) (i,j+1)
                faces.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
                lengths.append((l_a, l_b, l_d))
        return MeshLink.from_intrinsic(n * n, faces, lengths)


# --- round sphere -----------------------------------------------------------


def sphere_multiplicity(l, dim):
    """Dimension of the degree-``l`` spherical-harmonic space on ``S^dim``."""
    n = dim + 1  # ambient variables
    low = math.comb(n + l - 3, l - 2) if l >= 2 else 0
    return math.comb(n + l - 1, l) - low


class RoundSphere:
    """Unit round sphere ``S^dim``."""

    variant = "RoundSphere"

    def __init__(self, dim):
        if int(dim) < 1:
            raise ValidationError("sphere dimension must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return f"RoundSphere(dim={self.dim})"

    def spectrum(self, lam_max, group_tol=1e-9):
        entries = []
        l = 0
        while l * (l + self.dim - 1) <= lam_max + group_tol:
            entries.append(EigenEntry(float(l * (l + self.dim - 1)),
                                      sphere_multiplicity(l, self.dim), f"l={l}"))
            l += 1
        return _check_sorted(entries)


# --- triangulated meshes ----------------------------------------------------


def read_off(path):
    """Read an OFF file; returns ``(vertices, faces)`` arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValidationError("not an OFF file (missing OFF header)")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValidationError("only triangle faces are supported")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += cnt + 1
    return verts, np.array(faces, dtype=int)


class MeshLink:
    """Closed orientable triangulated surface link.

    Stores faces plus, per face, the lengths of the edges opposite each
    corner.  Embedded meshes compute those from vertex positions; intrinsic
    meshes supply them directly.
    """

    variant = "Mesh"
    dim = 2

    def __init__(self, vertices, faces):
        vertices = np.asarray(vertices, dtype=float)
        faces = np.asarray(faces, dtype=int)
        self._validate_closed(len(vertices), faces)
        v0, v1, v2 = (vertices[faces[:, i]] for i in range(3))
        lengths = np.stack([
            np.linalg.norm(v2 - v1, axis=1),   # opposite corner 0
            np.linalg.norm(v0 - v2, axis=1),
            np.linalg.norm(v1 - v0, axis=1),
        ], axis=1)
        self.vertices = vertices
        self._init_intrinsic(len(vertices), faces, lengths)

    @classmethod
    def from_intrinsic(cls, n_vertices, faces, face_edge_lengths):
        obj = cls.__new__(cls)
        obj.vertices = None
        faces = np.asarray(faces, dtype=int)
        cls._validate_closed(n_vertices, faces)
        obj._init_intrinsic(n_vertices, faces, np.asarray(face_edge_lengths, dtype=float))
        return obj

    @classmethod
    def from_off(cls, path):
        return cls(*read_off(path))

    # -- construction helpers

    @staticmethod
    def _validate_closed(n_vertices, faces):
        if faces.min() < 0 or faces.max() >= n_vertices:
            raise ValidationError("face index out of range")
        directed = {}
        for f, (a, b, c) in enumerate(faces):
            for u, v in ((a, b), (b, c), (c, a)):
                if u == v:
                    raise ValidationError(f"degenerate face {f}")
                if (u, v) in directed:
                    raise ValidationError("mesh is not orientable (repeated directed edge)")
                directed[(u, v)] = f
        for (u, v) in directed:
            if (v, u) not in directed:
                raise ValidationError("mesh is not closed (boundary edge found)")

    def _init_intrinsic(self, n_vertices, faces, lengths):
        if lengths.shape != (len(faces), 3):
            raise ValidationError("need one opposite-edge length per face corner")
        self.n_vertices = n_vertices
        self.faces = faces
        self.face_edge_lengths = lengths
        self._build_system()

    @property
    def n_faces(self):
        return len(self.faces)

    def _build_system(self):
        faces, L = self.faces, self.face_edge_lengths
        a, b, c = L[:, 0], L[:, 1], L[:, 2]
        s = 0.5 * (a + b + c)
        area2 = s * (s - a) * (s - b) * (s - c)
        if np.any(area2 <= 0):
            raise ValidationError("degenerate triangle (violates triangle inequality)")
        area = np.sqrt(area2)
        # cot at corner i, where L[:, i] is the opposite edge
        cots = np.stack([
            (b * b + c * c - a * a),
            (c * c + a * a - b * b),
            (a * a + b * b - c * c),
        ], axis=1) / (4.0 * area)[:, None]

        n = self.n_vertices
        rows, cols, vals = [], [], []
        mass = np.zeros(n)
        for corner in range(3):
            i = faces[:, (corner + 1) % 3]
            j = faces[:, (corner + 2) % 3]
            w = 0.5 * cots[:, corner]
            rows.extend([i, j, i, j])
            cols.extend([j, i, i, j])
            vals.extend([-w, -w, w, w])
            np.add.at(mass, faces[:, corner], area / 3.0)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        self.stiffness = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self.mass = sp.diags(mass)
        self.total_area = float(mass.sum())

    # -- spectrum

    def eigenvalues(self, count):
        """Lowest ``count`` eigenvalues of Δ_h (raw, with multiplicity)."""
        if count >= self.n_vertices - 1:
            raise ValidationError("count must be well below the vertex count")
        vals = eigsh(self.stiffness, k=count, M=self.mass, sigma=-0.5,
                     which="LM", return_eigenvectors=False)
        vals = np.sort(vals)
        return np.clip(vals, 0.0, None)

    def spectrum(self, lam_max=None, count=10, group_tol=1e-4):
        """Grouped :class:`EigenEntry` rows for the lowest modes.

        Discretization splits continuum multiplicities, so grouping uses a
        coarse relative tolerance appropriate for mesh data.
        """
        vals = self.eigenvalues(count)
        if lam_max is not None:
            vals = vals[vals <= lam_max * (1 + group_tol)]
        entries = []
        i = 0
        while i < len(vals):
            j = i
            while j < len(vals) and vals[j] <= vals[i] + group_tol * max(1.0, vals[i]):
                j += 1
            entries.append(EigenEntry(float(np.mean(vals[i:j])), j - i, "mesh"))
            i = j
        return _check_sorted(entries)
