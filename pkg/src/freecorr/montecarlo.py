"""Random-matrix Monte Carlo: sample additive Hermitian ensembles, estimate
normalized power traces over a grid of matrix sizes, fit the 1/N expansion by
weighted least squares, and score the fitted coefficients against predicted
expansion coefficients.

All matrices are kept unit-normalized (eigenvalues O(1)); a component with
scale exponent ``s`` enters the sum as ``N**(-s) * component``, so the k-th
empirical moment estimates the k-th moment of the limiting spectral measure
plus its 1/N corrections directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh as _eigh

from . import engine
from .series import TruncatedSeries

__all__ = [
    "Component",
    "EnsembleSpec",
    "MCReport",
    "gue",
    "wishart",
    "diag_spikes",
    "haar_fixed_spectrum",
    "sample_matrix",
    "empirical_moments",
    "fit_expansion",
    "genus_check",
]

_MAX_N = 2048
_MAX_K = 12
_KINDS = ("gue", "wishart", "diag_spikes", "haar_fixed_spectrum")
_DEFAULT_GRID = (64, 128, 256, 512)
_DEFAULT_SAMPLES = 2000

# named eigenvalue profiles, usable from serialized specs where a Python
# callable is not available
_NAMED_SPECTRA = {
    "uniform01": lambda n: (np.arange(1, n + 1) - 0.5) / n,
}


@dataclass(frozen=True)
class Component:
    """One additive term of an ensemble.

    ``kind`` selects the construction; only the fields relevant to that kind
    are read.  ``scale`` is the exponent s in the N**(-s) prefactor and
    ``conjugate`` requests an independent Haar rotation of this term.
    """

    kind: str
    sigma: float = 1.0
    ratio: float = 1.0
    spikes: tuple = ()
    spectrum: object = None
    scale: float = 0.0
    conjugate: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown component kind {self.kind!r}")
        if self.kind == "wishart" and not self.ratio > 0:
            raise ValueError("wishart ratio must be positive")
        if self.kind == "diag_spikes":
            if not all(math.isfinite(t) for t in self.spikes):
                raise ValueError("spike values must be finite")
        if self.kind == "haar_fixed_spectrum" and self.spectrum is None:
            raise ValueError("fixed-spectrum component needs a spectrum")

    def to_dict(self):
        d = {"kind": self.kind, "scale": self.scale, "conjugate": self.conjugate}
        if self.kind == "gue":
            d["sigma"] = self.sigma
        elif self.kind == "wishart":
            d["ratio"] = self.ratio
        elif self.kind == "diag_spikes":
            d["spikes"] = list(self.spikes)
        else:
            d["spectrum"] = (
                self.spectrum if isinstance(self.spectrum, str)
                else list(np.asarray(self.spectrum, dtype=float))
            )
        return d


def gue(sigma=1.0, scale=0.0, conjugate=False):
    return Component("gue", sigma=float(sigma), scale=scale, conjugate=conjugate)


def wishart(ratio, scale=0.0, conjugate=False):
    return Component("wishart", ratio=float(ratio), scale=scale, conjugate=conjugate)


def diag_spikes(thetas, scale=0.0, conjugate=False):
    return Component(
        "diag_spikes",
        spikes=tuple(float(t) for t in thetas),
        scale=scale,
        conjugate=conjugate,
    )


def haar_fixed_spectrum(spectrum, scale=0.0, conjugate=True):
    # rotation on by default: a bare diagonal matrix is free of nothing
    return Component(
        "haar_fixed_spectrum", spectrum=spectrum, scale=scale, conjugate=conjugate
    )


@dataclass(frozen=True)
class EnsembleSpec:
    """Ordered sum of components."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("ensemble needs at least one component")
        for c in self.components:
            if not isinstance(c, Component):
                raise TypeError("components must be Component instances")

    @classmethod
    def from_dict(cls, data):
        comps = []
        for entry in data["components"]:
            kw = dict(entry)
            kind = kw.pop("kind")
            if "spikes" in kw:
                kw["spikes"] = tuple(float(t) for t in kw["spikes"])
            comps.append(Component(kind, **kw))
        return cls(tuple(comps))

    def to_dict(self):
        return {"components": [c.to_dict() for c in self.components]}


# ----------------------------------------------------------------------
# sampling


def _haar_unitary(n, rng):
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    mag = np.abs(d)
    ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    return q * ph


def _resolve_spectrum(spectrum, n):
    if isinstance(spectrum, str):
        try:
            spectrum = _NAMED_SPECTRA[spectrum]
        except KeyError:
            raise ValueError(f"unknown spectrum profile {spectrum!r}") from None
    vals = np.asarray(spectrum(n) if callable(spectrum) else spectrum, dtype=float)
    if vals.shape != (n,):
        raise ValueError(f"spectrum must provide exactly {n} eigenvalues")
    return vals


def _draw_component(comp, n, rng):
    if comp.kind == "gue":
        x = rng.standard_normal((n, n))
        y = rng.standard_normal((n, n))
        # E[a_ij a_kl] = delta_il delta_jk / n
        return comp.sigma * ((x + x.T) + 1j * (y - y.T)) / (2.0 * math.sqrt(n))
    if comp.kind == "wishart":
        m = max(1, int(round(comp.ratio * n)))
        x = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
        x /= math.sqrt(2)
        return (x @ x.conj().T) / n
    if comp.kind == "diag_spikes":
        if len(comp.spikes) > n:
            raise ValueError("more spikes than matrix dimensions")
        a = np.zeros((n, n), dtype=complex)
        for i, t in enumerate(comp.spikes):
            a[i, i] = t
        return a
    vals = _resolve_spectrum(comp.spectrum, n)
    return np.diag(vals.astype(complex))


def sample_matrix(spec, N, seed):
    """One Hermitian draw of the ensemble at size ``N``.

    ``seed`` is an integer key (or seed sequence) for a fresh generator, or an
    ``np.random.Generator`` to draw from a shared stream.  Identical
    ``(spec, N, seed)`` give bitwise-identical matrices.
    """
    if N > _MAX_N:
        raise ValueError(f"matrix size capped at N={_MAX_N}")
    if N < 1:
        raise ValueError("matrix size must be positive")
    if isinstance(spec, Component):
        spec = EnsembleSpec((spec,))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    total = np.zeros((N, N), dtype=complex)
    for comp in spec.components:
        term = _draw_component(comp, N, rng)
        if comp.conjugate:
            u = _haar_unitary(N, rng)
            term = u @ term @ u.conj().T
        if comp.scale:
            term = term * float(N) ** (-comp.scale)
        total += term
    # rotations leave Hermiticity intact only up to rounding
    return (total + total.conj().T) / 2.0


def empirical_moments(A, K):
    """``N^{-1} Tr A^k`` for k = 1..K, via the Hermitian eigensolver."""
    if K > _MAX_K:
        raise ValueError(f"moment order capped at K={_MAX_K}")
    vals = _eigh(A, eigvals_only=True, driver="evr", check_finite=False)
    out = np.empty(K)
    powers = np.ones_like(vals)
    for k in range(K):
        powers = powers * vals
        out[k] = powers.mean()
    return out


# ----------------------------------------------------------------------
# estimation and fitting


def _estimate(spec, K, N_grid, samples, seed):
    """Per-size means and standard errors of the first K moments."""
    means = np.empty((len(N_grid), K))
    errs = np.empty((len(N_grid), K))
    for i, n in enumerate(N_grid):
        rng = np.random.default_rng([seed, n])  # independent stream per size
        data = np.empty((samples, K))
        for s in range(samples):
            data[s] = empirical_moments(sample_matrix(spec, n, rng), K)
        means[i] = data.mean(axis=0)
        errs[i] = data.std(axis=0, ddof=1) / math.sqrt(samples)
    return means, errs


def _wls(N_grid, y, se, powers):
    """Weighted LS of y against (1/N)**p for p in powers.

    Weights are inverse variances; a deterministic column (all-zero standard
    errors) falls back to an unweighted fit with zero covariance.
    """
    x = 1.0 / np.asarray(N_grid, dtype=float)
    design = np.column_stack([x**p for p in powers])
    if np.max(se) == 0.0:
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        return beta, np.zeros((len(powers), len(powers)))
    if np.min(se) == 0.0:
        raise ValueError("mixed zero/nonzero standard errors across the grid")
    w = 1.0 / se**2
    xtw = design.T * w
    gram = xtw @ design
    try:
        cov = np.linalg.inv(gram)
    except np.linalg.LinAlgError:
        raise ValueError("singular design: N grid too degenerate") from None
    beta = cov @ (xtw @ y)
    return beta, cov


def _zscores(beta, cov, pred):
    z = []
    for i, p in enumerate(pred):
        if p is None:
            z.append(None)
            continue
        sd = math.sqrt(max(cov[i][i], 0.0))
        diff = float(beta[i]) - p
        if sd == 0.0:
            z.append(0.0 if diff == 0.0 else math.inf)
        else:
            z.append(diff / sd)
    return tuple(z)


@dataclass
class MCReport:
    """Fit summary for one moment order.

    ``basis`` lists the powers of 1/N in the design, ``coefficients`` the
    fitted values in the same order; ``predictions`` and ``z_scores`` are
    present when reference coefficients were supplied.
    """

    k: int
    N_grid: tuple
    means: tuple
    stderrs: tuple
    basis: tuple
    coefficients: tuple
    covariance: tuple
    predictions: tuple = None
    z_scores: tuple = None

    @property
    def max_abs_z(self):
        if not self.z_scores:
            return None
        vals = [abs(z) for z in self.z_scores if z is not None]
        return max(vals) if vals else None

    def to_dict(self):
        return {
            "k": self.k,
            "N_grid": list(self.N_grid),
            "means": list(self.means),
            "stderrs": list(self.stderrs),
            "basis": list(self.basis),
            "coefficients": list(self.coefficients),
            "covariance": [list(row) for row in self.covariance],
            "predictions": None if self.predictions is None else list(self.predictions),
            "z_scores": None if self.z_scores is None else list(self.z_scores),
        }


def _pack_report(k, N_grid, means, errs, basis, beta, cov, pred):
    z = None if pred is None else _zscores(beta, cov, pred)
    return MCReport(
        k=k,
        N_grid=tuple(int(n) for n in N_grid),
        means=tuple(float(v) for v in means),
        stderrs=tuple(float(v) for v in errs),
        basis=tuple(basis),
        coefficients=tuple(float(b) for b in beta),
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
        predictions=None if pred is None else tuple(pred),
        z_scores=z,
    )


def fit_expansion(
    spec,
    K,
    N_grid=_DEFAULT_GRID,
    samples=_DEFAULT_SAMPLES,
    orders_to_fit=1,
    seed=20260816,
    predictions=None,
    expensive=False,
):
    """Estimate moments over the grid and fit ``a + b/N (+ c/N^2)``.

    ``predictions`` maps k to a coefficient tuple aligned with the fitted
    basis (entries may be None to skip scoring that coefficient).  Order-2
    fits need at least five grid points and are gated behind ``expensive``
    because they also need roughly 10x the sampling budget to resolve.
    Returns one :class:`MCReport` per k.
    """
    if orders_to_fit not in (1, 2):
        raise ValueError("orders_to_fit must be 1 or 2")
    if orders_to_fit == 2:
        if not expensive:
            raise ValueError("order-2 fits are expensive; pass expensive=True")
        if len(N_grid) < 5:
            raise ValueError("order-2 fits need at least 5 grid points")
    if len(N_grid) < orders_to_fit + 2:
        raise ValueError("N grid leaves no residual degrees of freedom")
    means, errs = _estimate(spec, K, N_grid, samples, seed)
    basis = tuple(range(orders_to_fit + 1))
    reports = []
    for j in range(K):
        k = j + 1
        beta, cov = _wls(N_grid, means[:, j], errs[:, j], basis)
        pred = None if predictions is None else predictions.get(k)
        reports.append(
            _pack_report(k, N_grid, means[:, j], errs[:, j], basis, beta, cov, pred)
        )
    return reports


def genus_check(K=8, N_grid=(16, 32, 64, 128), samples=4000, seed=20260816):
    """Topological-expansion fit for the pure quadratic-profile ensemble.

    For each even k <= K, fits ``a + c/N^2`` (odd moments vanish and so does
    the 1/N term) and scores ``a`` against the Catalan number and ``c``
    against the profile-free second-order moment row.  Returns one
    :class:`MCReport` per even k.
    """
    if K > 8 or K % 2:
        raise ValueError("genus check supports even K <= 8")
    order = K + 4
    psi = TruncatedSeries([0.0, 0.0, 0.5] + [0.0] * (order - 2))
    zero = TruncatedSeries([0.0] * (order + 1))
    _, nu2 = engine.correction2_hc(psi, zero, zero, K)
    means, errs = _estimate(EnsembleSpec((gue(),)), K, N_grid, samples, seed)
    reports = []
    for k in range(2, K + 1, 2):
        j = k - 1
        beta, cov = _wls(N_grid, means[:, j], errs[:, j], (0, 2))
        half = k // 2
        catalan = math.comb(k, half) // (half + 1)
        pred = (float(catalan), float(nu2[j]))
        reports.append(
            _pack_report(k, N_grid, means[:, j], errs[:, j], (0, 2), beta, cov, pred)
        )
    return reports
