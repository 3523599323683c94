"""Moment formulas: LLN terms and 1/N-type corrections from transform jets.

Input is the jet at the expansion center of one or more scalar
functions: the exponential growth profile of the transform (``psi``),
plus lower-order profiles (``phi``, then ``t``, ...) supplying the
correction terms.  Hermitian-ensemble inputs are centered at 0, the
signature/representation ("schur") side is centered at 1.

All moment formulas are finite sums of weighted derivatives of products
of the profile derivatives, evaluated at the center; they stay exact on
``Fraction`` jets.  Each has an independent cross-check in the
non-crossing-partition module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ncpart import CumulantTable
from .series import TruncatedSeries

__all__ = [
    "AsymptoticInput",
    "ExpansionResult",
    "lln_moments_hc",
    "correction1_hc",
    "correction2_hc",
    "higher_corrections_hc",
    "regime_moments",
    "schur_lln_moments",
    "schur_correction1",
    "quantized_cumulants",
    "hc_cumulants",
    "finite_rank_phi",
    "voiculescu_psi",
    "expand",
    "default_order",
]

_MAX_CORRECTION_ORDER = 4


def default_order(k_max, n_max=0):
    """Truncation order the engine needs: ``k_max + n_max + 2``."""
    return k_max + n_max + 2


def _require_order(series, needed, what):
    if series.order < needed:
        raise ValueError(
            f"{what} needs truncation order >= {needed}, got {series.order}"
        )


def _weight(k, m, s, B):
    return Fraction(
        math.factorial(k),
        math.factorial(m) * math.factorial(m + s) * math.factorial(k - m - B),
    )


def _deriv_sum(powers, extra, k, B, s=1, denom_extra=1):
    """sum_m  k!/(m! (m+s)! (k-m-B)!) * d^m[ (psi')^(k-m-B) * extra ]|_center.

    ``powers[j]`` must hold the j-th power of psi'.  ``extra`` multiplies
    every term; ``denom_extra`` divides the whole sum.
    """
    total = 0
    for m in range(0, k - B + 1):
        prod = powers[k - m - B] if extra is None else powers[k - m - B] * extra
        dm = prod.deriv_at_center(m)
        if dm == 0:
            continue
        total += _weight(k, m, s, B) * dm
    if denom_extra != 1:
        total = total / denom_extra
    return total


def _powers(series, top):
    out = [TruncatedSeries.constant(1, series.order, series.center)]
    for _ in range(top):
        out.append(out[-1] * series)
    return out


def _as_number(x):
    # collapse Fractions produced by the weights when inputs were floats
    if isinstance(x, Fraction):
        return x
    return x


# ----------------------------------------------------------------------
# Hermitian (center 0) side


def lln_moments_hc(psi, K):
    """Law-of-large-numbers moments ``mu_1 .. mu_K``.

    ``mu_k = sum_m k!/(m!(m+1)!(k-m)!) d^m[(psi')^(k-m)]|_0``, with the
    ``m = k`` term read as the derivative of the constant 1.
    """
    _require_order(psi, K + 1, "psi")
    p = psi.derivative()
    powers = _powers(p, K)
    return [_as_number(_deriv_sum(powers, None, k, B=0)) for k in range(1, K + 1)]


def correction1_hc(psi, phi, K):
    """First correction ``mu'_1 .. mu'_K`` (coefficient of 1/N)."""
    _require_order(psi, K + 1, "psi")
    _require_order(phi, K, "phi")
    p = psi.derivative()
    powers = _powers(p, K)
    extra = phi.derivative()
    return [_as_number(_deriv_sum(powers, extra, k, B=1)) for k in range(1, K + 1)]


def correction2_hc(psi, phi, t, K):
    """Second correction at the 1/N^2 scale, returned as two rows.

    The first row collects the terms driven by the third profile ``t``
    and the square of ``phi``; the second row is the profile-free part
    driven by higher derivatives of ``psi`` alone (it is what survives
    for a single ensemble, e.g. the genus-one term of a pure quadratic
    profile).  The full 1/N^2 coefficient is their sum.
    """
    _require_order(psi, K + 2, "psi")
    _require_order(phi, K + 1, "phi")
    _require_order(t, K, "t")
    p1 = psi.derivative()
    powers = _powers(p1, K)
    phi1 = phi.derivative()
    t1 = t.derivative()
    p2 = p1.derivative()
    p3 = p2.derivative()

    mu2 = []
    nu2 = []
    for k in range(1, K + 1):
        a = _deriv_sum(powers, t1, k, B=1)
        b = _deriv_sum(powers, phi1 * phi1, k, B=2, denom_extra=2) if k >= 2 else 0
        mu2.append(_as_number(a + b))

        v = 0
        if k >= 3:
            v += _deriv_sum(powers, p3, k, B=3, s=1, denom_extra=24)
            v += _deriv_sum(powers, p3, k, B=3, s=2, denom_extra=12)
        if k >= 4:
            v += _deriv_sum(powers, p2 * p2, k, B=4, s=2, denom_extra=12)
        nu2.append(_as_number(v))
    return mu2, nu2


def _weak_compositions_by_weight(j):
    """All (b_1..b_j) >= 0 with sum_i i*b_i = j, as tuples."""
    out = []

    def rec(i, remaining, acc):
        if i > j:
            if remaining == 0:
                out.append(tuple(acc))
            return
        for b in range(remaining // i + 1):
            rec(i + 1, remaining - i * b, acc + [b])

    rec(1, j, [])
    return out


def higher_corrections_hc(series_list, K, n):
    """Rows ``mu^(0) .. mu^(n)`` of the multi-profile expansion.

    ``series_list[i]`` is the order-``i`` profile (missing entries are
    treated as zero).  Row ``j`` is

        sum over (b_1..b_j) with sum i*b_i = j, and m <= k - B, of
        k!/(m!(m+1)!(k-m-B)! b_1!..b_j!) *
        d^m[ (psi_0')^(k-m-B) * prod_i (psi_i')^(b_i) ]|_0,   B = sum b_i.

    Valid in the separated-scales regime; supported through order 4.
    """
    if n > _MAX_CORRECTION_ORDER:
        raise ValueError(f"orders beyond {_MAX_CORRECTION_ORDER} unsupported, got {n}")
    if not series_list:
        raise ValueError("need at least the base profile")
    base = series_list[0]
    _require_order(base, K + 1, "psi_0")
    order = base.order
    center = base.center
    derivs = []
    for i in range(n + 1):
        if i < len(series_list) and series_list[i] is not None:
            s = series_list[i]
            if s.center != center:
                raise ValueError("all profiles must share the expansion center")
            _require_order(s, K, f"psi_{i}")
            derivs.append(s.derivative())
        else:
            derivs.append(TruncatedSeries.zero(order - 1, center))

    powers = _powers(derivs[0], K)
    rows = []
    for j in range(n + 1):
        row = []
        for k in range(1, K + 1):
            total = 0
            for bs in _weak_compositions_by_weight(j):
                B = sum(bs)
                if B > k:
                    continue
                extra = None
                skip = False
                for i, b in enumerate(bs, start=1):
                    if b == 0:
                        continue
                    f = derivs[i].pow_int(b)
                    extra = f if extra is None else extra * f
                    if all(c == 0 for c in extra.coeffs):
                        skip = True
                        break
                if skip:
                    continue
                denom = 1
                for b in bs:
                    denom *= math.factorial(b)
                total += _deriv_sum(powers, extra, k, B=B, denom_extra=denom)
            row.append(_as_number(total))
        rows.append(row)
    return rows


def hc_cumulants(series_list, n, K):
    """Cumulant table for the Hermitian side.

    Row ``i`` holds ``i! * psi_i^{(m)}(0)/(m-1)!`` for m = 1..K; with it
    the rows of :func:`higher_corrections_hc` times ``n!`` become
    non-crossing partition sums (the infinitesimal-moment route).
    """
    rows = []
    for i in range(n + 1):
        if i < len(series_list) and series_list[i] is not None:
            s = series_list[i]
            row = [
                math.factorial(i) * m * s.coeffs[m] if m <= s.order else 0
                for m in range(1, K + 1)
            ]
        else:
            row = [0] * K
        rows.append(row)
    return CumulantTable(rows=rows)


def regime_moments(psi, K, growth_exponent):
    """Moments of the limit measure in the three growth regimes.

    Above the critical growth the spectrum collapses to a point mass at
    ``psi'(0)``; at critical growth the LLN sum applies; below it the
    moments are the raw cumulant sequence.
    """
    _require_order(psi, K + 1, "psi")
    if growth_exponent > 1:
        v = psi.coeffs[1]
        return {"regime": "degenerate", "moments": [v**k for k in range(1, K + 1)]}
    if growth_exponent == 1:
        return {"regime": "critical", "moments": lln_moments_hc(psi, K)}
    if growth_exponent >= 0:
        return {
            "regime": "subcritical",
            "moments": [k * psi.coeffs[k] for k in range(1, K + 1)],
        }
    raise ValueError("growth exponent must be >= 0")


# ----------------------------------------------------------------------
# signature/representation (center 1) side


def schur_lln_moments(psi, K):
    """LLN moments on the discrete side; the extra ``x^k`` factor keeps
    the lattice-to-continuum change of variables exact."""
    _require_order(psi, K + 1, "psi")
    if psi.center != 1:
        raise ValueError("discrete-side profiles are centered at 1")
    p = psi.derivative()
    powers = _powers(p, K)
    x = TruncatedSeries.variable(p.order, 1)
    xpow = [TruncatedSeries.constant(1, p.order, 1)]
    for _ in range(K):
        xpow.append(xpow[-1] * x)
    return [
        _as_number(_deriv_sum(powers, xpow[k], k, B=0)) for k in range(1, K + 1)
    ]


def schur_correction1(psi, phi, K):
    """First correction on the discrete side.

    The numerator picks up the half-shift ``-1/(2x)`` relative to the
    Hermitian case; with zero profiles every moment correction is -1/2.
    """
    _require_order(psi, K + 1, "psi")
    _require_order(phi, K, "phi")
    if psi.center != 1 or phi.center != 1:
        raise ValueError("discrete-side profiles are centered at 1")
    p = psi.derivative()
    powers = _powers(p, K)
    order = p.order
    x = TruncatedSeries.variable(order, 1)
    half = Fraction(1, 2) if phi.is_exact() else 0.5
    numer = phi.derivative().truncate(order) - x.reciprocal() * half
    xpow = [TruncatedSeries.constant(1, order, 1)]
    for _ in range(K):
        xpow.append(xpow[-1] * x)
    return [
        _as_number(_deriv_sum(powers, xpow[k] * numer, k, B=1))
        for k in range(1, K + 1)
    ]


def quantized_cumulants(psi, phi, K):
    """Cumulant table in the quantized convention, rows 0 and 1.

    Row 0: degree-n coefficient (times n) of ``psi(e^u) + log((e^u-1)/u)``;
    row 1: same for ``phi(e^u) - u/2``.  With zero profiles, row 0 is the
    uniform-[0,1] free cumulant sequence and row 1 starts at -1/2.
    """
    _require_order(psi, K, "psi")
    _require_order(phi, K, "phi")
    if psi.center != 1 or phi.center != 1:
        raise ValueError("discrete-side profiles are centered at 1")
    T = max(psi.order, K)
    eu = TruncatedSeries([Fraction(1, math.factorial(j)) for j in range(T + 1)])
    bridge = TruncatedSeries(
        [Fraction(1, math.factorial(j + 1)) for j in range(T + 1)]
    ).log_series()
    row0_series = psi.compose(eu.truncate(psi.order)) + bridge
    row1_series = phi.compose(eu.truncate(phi.order))
    row0 = [n * row0_series.coeffs[n] for n in range(1, K + 1)]
    row1 = [n * row1_series.coeffs[n] for n in range(1, K + 1)]
    row1[0] = row1[0] - (Fraction(1, 2) if phi.is_exact() else 0.5)
    return CumulantTable(rows=[row0, row1])


# ----------------------------------------------------------------------
# profile constructors


def finite_rank_phi(thetas, order, center=0):
    """Correction profile of finitely many rank-one spikes.

    ``phi(x) = sum_n log(1/(1 - theta_n x))``; coefficient of ``x^m`` is
    ``sum_n theta_n^m / m``.
    """
    coeffs = [0]
    for m in range(1, order + 1):
        acc = 0
        for th in thetas:
            acc += th**m
        coeffs.append(_div_exact(acc, m))
    return TruncatedSeries(coeffs, center)


def voiculescu_psi(gamma1, gamma2, xs, order):
    """Base profile with linear, quadratic, and spike parts.

    ``psi(b) = gamma1*b + gamma2*b^2/2 + sum_n (-x_n b - log(1 - x_n b))``.
    """
    coeffs = [0] * (order + 1)
    if order >= 1:
        coeffs[1] = gamma1
    if order >= 2:
        coeffs[2] = _div_exact(gamma2, 2) + sum(_div_exact(x**2, 2) for x in xs)
    for m in range(3, order + 1):
        coeffs[m] = sum(_div_exact(x**m, m) for x in xs)
    return TruncatedSeries(coeffs, 0)


def _div_exact(a, b):
    if isinstance(a, (int, Fraction)):
        return Fraction(a) / b
    return a / b


# ----------------------------------------------------------------------
# input/result containers


@dataclass
class AsymptoticInput:
    """Transform log-asymptotics: side tag, profile jets, scale parameter.

    ``series[i]`` is the order-``i`` profile; ``epsilon`` is the scale
    separation (1 means the adjacent-integer-power regime, values below
    ``1/n`` the separated regime).  ``epsilon`` is carried as metadata
    and validated, never silently altered.
    """

    side: str
    series: list
    epsilon: float | None = None

    def __post_init__(self):
        if self.side not in ("hc", "schur"):
            raise ValueError(f"side must be 'hc' or 'schur', got {self.side!r}")
        if not self.series:
            raise ValueError("need at least one profile")
        center = 0 if self.side == "hc" else 1
        for s in self.series:
            if s.center != center:
                raise ValueError(
                    f"{self.side} side expects center {center}, got {s.center!r}"
                )

    @property
    def psi(self):
        return self.series[0]

    def profile(self, i):
        if i < len(self.series):
            return self.series[i]
        return TruncatedSeries.zero(self.psi.order, self.psi.center)

    def to_dict(self):
        return {
            "side": self.side,
            "series": [s.to_dict() for s in self.series],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            side=d["side"],
            series=[TruncatedSeries.from_dict(s) for s in d["series"]],
            epsilon=d.get("epsilon"),
        )


@dataclass
class ExpansionResult:
    """Moment rows by correction order, with their N-power scales."""

    orders: list
    scales: list
    side: str
    kmax: int
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "orders": [[_to_float(v) for v in row] for row in self.orders],
            "scales": list(self.scales),
            "side": self.side,
            "kmax": self.kmax,
            "meta": {
                k: ([_to_float(v) for v in v_] if isinstance(v_, list) else v_)
                for k, v_ in self.meta.items()
            },
        }


def _to_float(v):
    if isinstance(v, Fraction):
        return float(v)
    return v


def expand(inp, K, n, epsilon=None):
    """Route an asymptotic input to the right expansion theorem.

    Returns an :class:`ExpansionResult` with one row per order 0..n.
    Raises ``ValueError`` on regime/parameter combinations no theorem
    covers (callers map that to a configuration error).
    """
    eps = epsilon if epsilon is not None else inp.epsilon
    if inp.side == "schur":
        if n > 1:
            raise ValueError("discrete side supports orders 0 and 1 only")
        rows = [schur_lln_moments(inp.psi, K)]
        if n >= 1:
            rows.append(schur_correction1(inp.psi, inp.profile(1), K))
        return ExpansionResult(
            orders=rows,
            scales=[f"N^-{j}" if j else "N^0" for j in range(n + 1)],
            side="schur",
            kmax=K,
        )

    if eps is None:
        eps = 1.0
    if n <= 1 or (n == 2 and eps == 1):
        rows = [lln_moments_hc(inp.psi, K)]
        meta = {}
        if n >= 1:
            rows.append(correction1_hc(inp.psi, inp.profile(1), K))
        if n == 2:
            mu2, nu2 = correction2_hc(inp.psi, inp.profile(1), inp.profile(2), K)
            rows.append([a + b for a, b in zip(mu2, nu2)])
            meta = {"order2_profile_part": mu2, "order2_base_part": nu2}
        return ExpansionResult(
            orders=rows,
            scales=[f"N^-{j}" if j else "N^0" for j in range(n + 1)],
            side="hc",
            kmax=K,
            meta=meta,
        )

    if eps >= 1.0 / n:
        raise ValueError(
            f"order {n} needs scale separation epsilon < 1/{n}; got {eps}"
        )
    rows = higher_corrections_hc(list(inp.series), K, n)
    scales = ["N^0"] + [f"N^-{j * eps:g}" for j in range(1, n + 1)]
    return ExpansionResult(orders=rows, scales=scales, side="hc", kmax=K, meta={"epsilon": eps})
