"""Discrete asymptotics of mode solutions near the cone tip.

Solutions of the mode heat problem with forcing ``f = O(r^{γ−2})`` decompose
near ``r = 0`` as

    u(t, r) = Σ c_{α,k}(t) r^{α+2k} + O(r^γ),

where α runs over the solved mode's admissible exponents in ``[0, γ)`` and
``α + 2k < γ`` (even lifts of homogeneous harmonics — the model space for
polyhomogeneous expansions).  :func:`extract_asymptotics` recovers the
coefficients and the remainder rate from a discrete solution:

1.  Exponents are visited in increasing order.  A candidate is accepted
    only if the current remainder's log–log slope on the innermost annuli
    matches it (rate gate) — this keeps exactly-absent terms out of the
    reported expansion instead of fitting noise.
2.  Accepted coefficients come from least squares on an inner window whose
    size grows with the exponent, with a sacrificial ``r^γ`` column
    absorbing the remainder so it cannot bias the low-order coefficients.
3.  After subtracting the accepted terms, the remainder rate is fitted on
    dyadic annuli spanning [1e−3, 1e−1]·R.

Cutoff extension of a model-space element to the compact manifold is
provided by :func:`extend_asymptotic`; the discrete operator commutes with
the cutoff away from the transition band, which is the computable face of
the extension's mapping property.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, ExceptionalWeightError, ValidationError
from .norms import decay_rate, dyadic_annulus_suprema, smooth_cutoff

__all__ = [
    "AsymptoticExpansion",
    "extract_asymptotics",
    "synthesize",
    "extend_asymptotic",
    "laplace_of_terms",
]


@dataclass
class AsymptoticExpansion:
    """Fitted expansion: ``terms`` of (alpha, k, coefficient) plus remainder."""

    terms: list
    remainder_rate: float
    remainder_sup: float
    gamma: float
    time: float = 0.0

    def __post_init__(self):
        for alpha, k, _ in self.terms:
            if alpha + 2 * k >= self.gamma:
                raise ValidationError(
                    f"term r^{alpha + 2 * k} is not below the weight {self.gamma}")
            if alpha < 0 or k < 0:
                raise ValidationError("terms need alpha >= 0 and k >= 0")


def synthesize(terms, r):
    """Evaluate a term list ``Σ c r^{α+2k}`` on radii ``r``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for alpha, k, c in terms:
        out += c * r ** (alpha + 2 * k)
    return out


def laplace_of_terms(terms, lam, m):
    """Apply the mode Laplacian to a term list (stays in the model space).

    ``L_λ (c r^{α+2k}) = c[(α+2k)(α+2k+m−2) − λ] r^{α+2(k−1)}``; the k = 0
    terms are annihilated because α is an indicial root.
    """
    out = []
    for alpha, k, c in terms:
        if k == 0:
            continue
        e = alpha + 2 * k
        out.append((alpha, k - 1, c * (e * (e + m - 2) - lam)))
    return out


def _mode_exponents(table, lam, gamma):
    """The solved mode's admissible exponents in [0, gamma)."""
    alphas = sorted({e.alpha for e in table.entries
                     if abs(e.lambda_source - lam) <= 1e-9 * max(1.0, lam)
                     and -table.tol <= e.alpha < gamma})
    return alphas


def extract_asymptotics(sol, table, gamma, time_index=-1, gate_tol=0.35,
                        coeff_floor=1e-13, mode_only=True):
    """Fit the discrete asymptotic expansion of a mode solution.

    ``gamma`` must be non-exceptional for the lifted exponent set; basis
    exponents closer than 0.05 trigger an ill-conditioning warning.  The
    returned expansion satisfies ``remainder_rate ≥ γ − 0.15`` for solver
    output with forcing ``O(r^{γ−2})``.

    By default the basis holds only the solved mode's own exponent ladder
    (a single mode cannot carry other modes' orders); ``mode_only=False``
    fits against every table exponent in [0, γ) instead.
    """
    if table.is_exceptional(gamma, lifted=True):
        raise ExceptionalWeightError(
            f"gamma={gamma} is within tolerance of an exceptional exponent",
            offending=[0])
    r = sol.grid.nodes
    u = np.asarray(sol.values[time_index], dtype=float)
    t = float(sol.times[time_index])
    R = sol.grid.R

    if mode_only:
        alphas = _mode_exponents(table, sol.lam, gamma)
    else:
        alphas = sorted({e.alpha for e in table.entries
                         if -table.tol <= e.alpha < gamma})
    raw = sorted((alpha + 2 * k, k, alpha)
                 for alpha in alphas
                 for k in range(int(math.ceil((gamma - alpha) / 2.0)) + 1)
                 if alpha + 2 * k < gamma - table.tol)
    # coinciding exponents (a plain harmonic equal to another's even lift)
    # would give identical columns; keep one representative, preferring the
    # un-lifted harmonic
    basis = []
    for e, k, alpha in raw:
        if basis and abs(e - basis[-1][0]) <= table.tol:
            continue
        basis.append((e, alpha, k))
    exps = [e for e, _, _ in basis]
    if any(b - a < 0.05 for a, b in zip(exps, exps[1:])):
        warnings.warn("basis exponents closer than 0.05: fit may be "
                      "ill-conditioned", stacklevel=2)

    scale = max(float(np.abs(u).max()), 1e-300)
    work = u.copy()
    accepted = []
    window0 = 3e-3 * R
    for i, (e, alpha, k) in enumerate(basis):
        win = min(window0 * 10.0 ** i, 0.1 * R)
        sel = r <= win
        if sel.sum() < 4:
            sel = np.zeros_like(sel)
            sel[:4] = True
            win = r[3]
        # rate gate: does the remainder actually behave like r^e here?
        centers, sups = dyadic_annulus_suprema(r, work, r[0], win)
        good = sups > coeff_floor * scale
        if good.sum() >= 3:
            x, y = np.log(centers[good]), np.log(sups[good])
            slope = float(np.polyfit(x, y, 1)[0])
        else:
            slope = math.inf  # remainder at machine level: nothing to accept
        if abs(slope - e) > gate_tol:
            continue
        cols = [r[sel] ** ee for ee, _, _ in basis[i:]] + [r[sel] ** gamma]
        Amat = np.stack(cols, axis=1)
        colnorm = np.linalg.norm(Amat, axis=0)
        coef, *_ = np.linalg.lstsq(Amat / colnorm, work[sel], rcond=None)
        c = float(coef[0] / colnorm[0])
        accepted.append((alpha, k, c))
        work = work - c * r ** e

    centers, sups = dyadic_annulus_suprema(r, work, 1e-3 * R, 1e-1 * R)
    rem_sup = float(np.abs(work).max())
    if np.all(sups <= 1e-12 * scale):
        rate, _ = math.inf, 0.0
    else:
        try:
            rate, _ = decay_rate(centers, sups)
        except DegenerateDataError:
            rate = math.inf
    return AsymptoticExpansion(accepted, rate, rem_sup, gamma, time=t)


def extend_asymptotic(terms, rho, cutoff):
    """Extend a model-space element by a smooth cutoff: ``χ(ρ)·v(ρ)``.

    χ ≡ 1 for ρ < cutoff/2 and ≡ 0 for ρ > cutoff, so the extension agrees
    with the cone-tip expansion near the singularity and is compactly
    supported in the chart.
    """
    rho = np.asarray(rho, dtype=float)
    chi = smooth_cutoff(rho, cutoff / 2.0, cutoff)
    return chi * synthesize(terms, rho)
