"""Small-size exact checks of the determinant and operator identities.

Everything here runs at toy scale (N <= 6) where the defining formulas
can be evaluated by brute force: determinants are expanded as signed
permutation sums to keep cancellation under control, and derivatives are
taken by lifting one coordinate at a time to a truncated jet.  These
routines are the ground truth the asymptotic engine is tested against.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .series import TruncatedSeries

__all__ = [
    "hc_eval",
    "schur_eval",
    "schur_dimension",
    "check_dk_eigenrelation",
    "check_dk_schur_eigenrelation",
    "check_dk_expansion_equivalence",
    "dk_direct",
    "dk_expanded",
    "enumerate_signatures",
    "verification_report",
]

_MAX_PERM_N = 6  # 720 permutation terms


def _perm_sign(perm):
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1 if inv % 2 else 1


def _vandermonde(vals):
    out = 1
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            out *= vals[i] - vals[j]
    return out


def _check_distinct(vals, label, gap=0.0):
    svals = sorted(float(v) for v in vals)
    for a, b in zip(svals, svals[1:]):
        if b - a <= gap:
            raise ValueError(f"{label} entries too close: gap {b - a:g} <= {gap:g}")


def _superfactorial(n):
    out = 1
    for i in range(1, n):
        out *= math.factorial(i)
    return out


def _det_perm(rows):
    """Signed permutation-sum determinant.

    Entries may be numbers or jets (one jet per product is typical); the
    scalar part of each product is folded first so a jet multiplication
    happens at most once per permutation.
    """
    n = len(rows)
    if n > _MAX_PERM_N:
        raise ValueError(f"permutation-sum determinant capped at N={_MAX_PERM_N}")
    total = None
    for perm in itertools.permutations(range(n)):
        scal = _perm_sign(perm)
        jet = None
        for i in range(n):
            e = rows[i][perm[i]]
            if isinstance(e, TruncatedSeries):
                jet = e if jet is None else jet * e
            else:
                scal = scal * e
        term = jet * scal if jet is not None else scal
        total = term if total is None else total + term
    return total


# ----------------------------------------------------------------------
# evaluations


def hc_eval(xs, lams):
    """Fixed-spectrum unitary average via the explicit determinant ratio.

    Both coordinate lists must be pairwise distinct; values are exact at
    the N=1 boundary and float elsewhere.
    """
    xs = [float(v) for v in xs]
    lams = [float(v) for v in lams]
    n = len(xs)
    if len(lams) != n:
        raise ValueError("coordinate count mismatch")
    if n > _MAX_PERM_N:
        raise ValueError(f"permutation-sum evaluation capped at N={_MAX_PERM_N}")
    if n == 1:
        return math.exp(xs[0] * lams[0])
    _check_distinct(xs, "x")
    _check_distinct(lams, "lambda")
    terms = []
    for perm in itertools.permutations(range(n)):
        s = sum(xs[i] * lams[perm[i]] for i in range(n))
        terms.append(_perm_sign(perm) * math.exp(s))
    det = math.fsum(terms)
    return _superfactorial(n) * det / (_vandermonde(xs) * _vandermonde(lams))


def schur_dimension(signature, N):
    """Dimension by the hook-content style product over index pairs."""
    if N > 12:
        raise ValueError("dimension evaluation capped at N=12")
    lam = list(signature) + [0] * (N - len(signature))
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError("signature must be weakly decreasing")
    out = Fraction(1)
    for i in range(N):
        for j in range(i + 1, N):
            out *= Fraction(lam[i] - (i + 1) - lam[j] + (j + 1), j - i)
    assert out.denominator == 1
    return int(out)


def _signature_exponents(signature, N):
    lam = list(signature) + [0] * (N - len(signature))
    if len(lam) != N:
        raise ValueError("signature longer than N")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError("signature must be weakly decreasing")
    if any(int(v) != v for v in lam):
        raise ValueError("signature entries must be integers")
    return [int(lam[j]) + N - 1 - j for j in range(N)]


def schur_eval(us, signature, exact=False):
    """Rational character value: bialternant ratio at the given point.

    ``exact=True`` keeps Fraction arithmetic end to end (inputs must be
    rational, none of them zero when the signature has negative parts).
    The all-ones point is resolved through the dimension product instead
    of the (degenerate) determinant ratio.
    """
    n = len(us)
    if n > 5:
        raise ValueError("character evaluation capped at N=5")
    us = [Fraction(u) for u in us] if exact else [float(u) for u in us]
    if all(u == 1 for u in us):
        d = schur_dimension(signature, n)
        return d if exact else float(d)
    _check_distinct(us, "u")
    exps = _signature_exponents(signature, n)
    rows = [[_ipow(us[i], e) for e in exps] for i in range(n)]
    det = _det_perm(rows)
    return det / _vandermonde(us)


def _ipow(base, e):
    if e >= 0:
        return base**e
    if base == 0:
        raise ZeroDivisionError("negative power of zero evaluation point")
    return (Fraction(1) if isinstance(base, Fraction) else 1.0) / base ** (-e)


def enumerate_signatures(N, lo, hi):
    """All weakly decreasing integer tuples of length N in [lo, hi]."""
    rng = range(hi, lo - 1, -1)
    return [
        sig
        for sig in itertools.product(rng, repeat=N)
        if all(a >= b for a, b in zip(sig, sig[1:]))
    ]


# ----------------------------------------------------------------------
# jet lifts


def _jet_pow(jet, e):
    if e >= 0:
        return jet.pow_int(e)
    return jet.pow_int(-e).reciprocal()


def _u_deriv_power(jet, u, k):
    """Apply (u d/du)^k to a jet centered at u; returns the value."""
    s = jet
    x = TruncatedSeries.variable(max(jet.order, 1), center=u)
    for _ in range(k):
        s = s.derivative() * x
    return s.coeffs[0]


# ----------------------------------------------------------------------
# operator identity checks


def check_dk_eigenrelation(xs, lams, k):
    """Relative error of the power-sum eigenrelation on the HC function.

    The Vandermonde prefactor cancels inside the operator, so the left
    side is the coordinate-wise k-th jet derivative of the exponential
    determinant alone.
    """
    xs = [float(v) for v in xs]
    lams = [float(v) for v in lams]
    n = len(xs)
    if n > 5 or k > 4:
        raise ValueError("eigenrelation check capped at N=5, k=4")
    _check_distinct(xs, "x")
    _check_distinct(lams, "lambda")
    lhs_sum = 0.0
    for i in range(n):
        rows = []
        for a in range(n):
            if a == i:
                # entry exp(lam_j * x) lifted to a jet in x at x_i
                rows.append(
                    [
                        TruncatedSeries(
                            [math.exp(lams[j] * xs[i]) * lams[j] ** m / math.factorial(m)
                             for m in range(k + 1)],
                            center=xs[i],
                        )
                        for j in range(n)
                    ]
                )
            else:
                rows.append([math.exp(lams[j] * xs[a]) for j in range(n)])
        jet_det = _det_perm(rows)
        lhs_sum += jet_det.coeffs[k] * math.factorial(k)
    lhs = _superfactorial(n) * lhs_sum / (_vandermonde(xs) * _vandermonde(lams))
    rhs = sum(l**k for l in lams) * hc_eval(xs, lams)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


def check_dk_schur_eigenrelation(us, signature, k, exact=False):
    """Error of the shifted-power-sum eigenrelation on a character.

    Exact mode returns 0 on exact equality (and the identity is required
    to hold exactly); numeric mode returns the double-precision relative
    error.
    """
    n = len(us)
    if n > 4 or k > 4:
        raise ValueError("character eigenrelation capped at N=4, k=4")
    us = [Fraction(u) for u in us] if exact else [float(u) for u in us]
    _check_distinct(us, "u")
    exps = _signature_exponents(signature, n)
    lhs_sum = None
    for i in range(n):
        rows = []
        for a in range(n):
            if a == i:
                jet = TruncatedSeries.variable(max(k, 1), center=us[i])
                rows.append([_jet_pow(jet, e) for e in exps])
            else:
                rows.append([_ipow(us[a], e) for e in exps])
        val = _u_deriv_power(_det_perm(rows), us[i], k)
        lhs_sum = val if lhs_sum is None else lhs_sum + val
    lhs = lhs_sum / _vandermonde(us)
    rhs = sum(e**k for e in exps) * schur_eval(us, signature, exact=exact)
    if exact:
        return 0 if lhs == rhs else 1
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


def _poly_eval(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deriv(coeffs, m):
    c = list(coeffs)
    for _ in range(m):
        c = [i * c[i] for i in range(1, len(c))]
        if not c:
            return [0.0]
    return c


def dk_direct(xs, k, polys):
    """sum_i d_i^k (V * f) / V for f = prod_i polys[i](x_i), by jets."""
    xs = [float(v) for v in xs]
    n = len(xs)
    direct = 0.0
    for i in range(n):
        jet = TruncatedSeries.from_polynomial(polys[i], k, center=xs[i])
        xjet = TruncatedSeries.variable(k, center=xs[i])
        for a in range(n):
            if a == i:
                continue
            jet = jet * _poly_eval(polys[a], xs[a])
        for a in range(n):
            for b in range(a + 1, n):
                if a == i:
                    jet = jet * (xjet - xs[b])
                elif b == i:
                    jet = jet * (xs[a] - xjet)
                else:
                    jet = jet * (xs[a] - xs[b])
        direct += jet.coeffs[k] * math.factorial(k)
    return direct / _vandermonde(xs)


def dk_expanded(xs, k, polys):
    """Divided-difference expansion of the same operator: ordered
    distinct index chains of length m+1 with binomial weights."""
    xs = [float(v) for v in xs]
    n = len(xs)
    expanded = 0.0
    for m in range(k + 1):
        w = math.comb(k, m)
        for chain in itertools.permutations(range(n), m + 1):
            l0 = chain[0]
            dcoef = _poly_deriv(polys[l0], k - m)
            num = _poly_eval(dcoef, xs[l0])
            for a in range(n):
                if a != l0:
                    num *= _poly_eval(polys[a], xs[a])
            den = 1.0
            for lt in chain[1:]:
                den *= xs[l0] - xs[lt]
            expanded += w * num / den
    return expanded


def check_dk_expansion_equivalence(xs, k, polys):
    """Direct jet evaluation of the operator vs its divided-difference
    expansion, for f a product of per-coordinate polynomials.

    ``polys[i]`` holds ascending coefficients of the factor in x_i.
    """
    xs = [float(v) for v in xs]
    n = len(xs)
    if n > 4 or k > 3:
        raise ValueError("expansion equivalence capped at N=4, k=3")
    if len(polys) != n:
        raise ValueError("need one polynomial per coordinate")
    _check_distinct(xs, "x")
    direct = dk_direct(xs, k, polys)
    expanded = dk_expanded(xs, k, polys)
    scale = max(abs(direct), abs(expanded), 1.0)
    return abs(direct - expanded) / scale


# ----------------------------------------------------------------------
# randomized batches


def _draw_distinct(rng, n, lo, hi, gap):
    for _ in range(200):
        vals = np.sort(rng.uniform(lo, hi, size=n))[::-1]
        if n == 1 or np.min(-np.diff(vals)) >= gap:
            return [float(v) for v in vals]
    raise RuntimeError("could not draw a well-separated tuple")


def verification_report(seed=20260816, instances=50):
    """Run all identity checks on randomized instances.

    Returns a list of dicts, one per check:
    {"check", "instances", "max_rel_err", "pass"}.
    """
    rng = np.random.default_rng(seed)
    report = []

    errs = []
    for _ in range(instances):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        xs = _draw_distinct(rng, n, -1.2, 1.2, 0.15)
        lams = _draw_distinct(rng, n, -1.2, 1.2, 0.15)
        errs.append(check_dk_eigenrelation(xs, lams, k))
    report.append(
        {
            "check": "dk_hc_eigenrelation",
            "instances": instances,
            "max_rel_err": float(max(errs)),
            "pass": max(errs) <= 1e-8,
        }
    )

    worst = 0
    count = 0
    for n in (2, 3):
        us = [Fraction(3, 2), Fraction(1, 3), Fraction(-5, 4)][:n]
        for sig in enumerate_signatures(n, -3, 3):
            for k in (1, 2, 3):
                worst = max(worst, check_dk_schur_eigenrelation(us, sig, k, exact=True))
                count += 1
    report.append(
        {
            "check": "dk_schur_eigenrelation_exact",
            "instances": count,
            "max_rel_err": float(worst),
            "pass": worst == 0,
        }
    )

    errs = []
    for _ in range(instances):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        xs = _draw_distinct(rng, n, -1.5, 1.5, 0.15)
        polys = [
            [float(v) for v in rng.integers(-3, 4, size=int(rng.integers(2, 5)))]
            for _ in range(n)
        ]
        errs.append(check_dk_expansion_equivalence(xs, k, polys))
    report.append(
        {
            "check": "dk_expansion_equivalence",
            "instances": instances,
            "max_rel_err": float(max(errs)),
            "pass": max(errs) <= 1e-9,
        }
    )

    return report
