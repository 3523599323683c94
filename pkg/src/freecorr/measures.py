"""Spectral measures: reconstruction from asymptotic data and closed forms.

Two routes produce a measure here.  ``reconstruct_density`` follows the
principal inverse branch of the moment-generating map into the upper half
plane and reads the density off the boundary values; ``detect_outliers``
walks the real line for numerator poles passed by that branch, each one an
atom.  ``catalog`` returns the known closed forms on quadrature-ready grids
so that both routes can be checked against exact series coefficients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

__all__ = [
    "RationalFunction",
    "KFunction",
    "SpectralMeasure",
    "detect_outliers",
    "solve_branch",
    "stieltjes_values",
    "reconstruct_density",
    "quadrature_moments",
    "catalog",
    "eval_correction_functional",
]


# ----------------------------------------------------------------------
# small polynomial kernel (ascending coefficients, Fraction-friendly)

def _ptrim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(a, b):
    n = max(len(a), len(b))
    return _ptrim(
        [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
    )


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _ptrim(out)


def _pscale(a, s):
    return _ptrim([s * ai for ai in a])


def _pder(a):
    if len(a) <= 1:
        return (0,)
    return _ptrim([i * a[i] for i in range(1, len(a))])


def _peval(a, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _pdeg(a):
    a = _ptrim(a)
    return len(a) - 1 if any(v != 0 for v in a) else -1


class RationalFunction:
    """Quotient of two polynomials, coefficients ascending.

    No gcd reduction is attempted; build-up products may carry common
    factors, which the pole/residue helpers tolerate (a removable pole
    reports residue zero and is filtered by callers).
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1,)):
        self.num = _ptrim(num)
        self.den = _ptrim(den)
        if all(v == 0 for v in self.den):
            raise ZeroDivisionError("zero denominator polynomial")

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def x(cls):
        return cls((0, 1))

    def __call__(self, x):
        return _peval(self.num, x) / _peval(self.den, x)

    def __add__(self, other):
        other = self._coerce(other)
        return RationalFunction(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(_pscale(self.num, -1), self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return RationalFunction(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return RationalFunction(_pmul(self.num, other.den), _pmul(self.den, other.num))

    @staticmethod
    def _coerce(v):
        if isinstance(v, RationalFunction):
            return v
        return RationalFunction((v,))

    def derivative(self):
        return RationalFunction(
            _padd(
                _pmul(_pder(self.num), self.den),
                _pscale(_pmul(self.num, _pder(self.den)), -1),
            ),
            _pmul(self.den, self.den),
        )

    def real_poles(self, tol=1e-9):
        """Real roots of the denominator (simple or not), ascending."""
        den = [float(c) for c in self.den]
        if _pdeg(den) < 1:
            return []
        roots = np.roots(den[::-1])
        scale = max(1.0, max(abs(r) for r in roots))
        out = sorted(r.real for r in roots if abs(r.imag) <= tol * scale)
        merged = []
        for r in out:
            if not merged or abs(r - merged[-1]) > tol * max(1.0, abs(r)):
                merged.append(r)
        return merged

    def residue(self, p):
        """Residue at a simple pole ``p``; removable points report 0."""
        dp = _peval(_pder(self.den), p)
        if abs(complex(dp)) < 1e-12:
            raise ValueError("residue requested at a non-simple pole")
        return _peval(self.num, p) / dp

    def limit_coefficients(self):
        """(L, c1, c2): value at infinity and the next two 1/x coefficients.

        L is None when the function diverges at infinity.
        """
        dn, dd = _pdeg(self.num), _pdeg(self.den)
        if dn > dd:
            return None, None, None
        lead = self.den[dd]
        L = self.num[dd] / lead if dn == dd else 0 * lead
        q = _padd(self.num, _pscale(self.den, -L))  # deg <= dd-1
        c1 = (q[dd - 1] / lead if dd - 1 >= 0 and dd - 1 < len(q) else 0) if dd >= 1 else 0
        # next order needs the denominator's subleading term as well:
        # (q1 x^{d-1} + q2 x^{d-2})/(b x^d + b1 x^{d-1}) ~ c1/x + (q2/b - c1*b1/b)/x^2
        q2 = q[dd - 2] if dd - 2 >= 0 and dd - 2 < len(q) else 0
        b1 = self.den[dd - 1] if dd - 1 >= 0 else 0
        c2 = q2 / lead - c1 * b1 / lead
        return L, c1, c2


# ----------------------------------------------------------------------
# the inverse-branch map

@dataclass(frozen=True)
class KFunction:
    """Moment-generating map of one model: F plus the atom numerator.

    ``side`` selects the center singularity: "hc" pins it at 0 with
    F(x) = psi'(x) + 1/x, "schur" at 1 with F(x) = x psi'(x) + x/(x-1).
    ``numerator`` is the density/atom numerator N(x) (already including
    the -1/(2x) shift on the discrete side); None selects leading-order
    mode where the branch itself is the transform.
    """

    side: str
    psi_prime: RationalFunction
    numerator: RationalFunction | None = None

    def __post_init__(self):
        if self.side not in ("hc", "schur"):
            raise ValueError("side must be 'hc' or 'schur'")

    @property
    def center(self):
        return 0.0 if self.side == "hc" else 1.0

    def F_rational(self):
        if self.side == "hc":
            return self.psi_prime + RationalFunction((1,), (0, 1))
        x = RationalFunction.x()
        return x * self.psi_prime + RationalFunction((0, 1), (-1, 1))

    def F(self, x):
        return self.F_rational()(x)

    def F_prime(self, x):
        return self.F_rational().derivative()(x)

    def F_poles(self, tol=1e-9):
        """Real poles of F other than the center singularity."""
        return [
            p
            for p in self.F_rational().real_poles(tol)
            if abs(p - self.center) > tol * max(1.0, abs(p))
        ]

    def critical_points(self, tol=1e-9):
        """Real branch points of the inverse map, ascending."""
        F = self.F_rational()
        dF = F.derivative()
        num = [float(c) for c in dF.num]
        if _pdeg(num) < 1:
            return []
        roots = np.roots(num[::-1])
        scale = max(1.0, max(abs(r) for r in roots))
        crits = []
        for r in roots:
            if abs(r.imag) > tol * scale:
                continue
            p = r.real
            if abs(_peval([float(c) for c in F.den], p)) < tol:
                continue  # coincides with a pole of F
            if not any(abs(p - c) <= tol * max(1.0, abs(p)) for c in crits):
                crits.append(p)
        return sorted(crits)

    def infinity_behaviour(self):
        """(L, regular): limit of F at infinity and whether the crossing
        is transversal (simple 1/x term) rather than a branch point."""
        L, c1, c2 = self.F_rational().limit_coefficients()
        if L is None:
            return None, None
        L = float(L)
        return L, abs(float(c1)) > 1e-12

    def support(self, tol=1e-9):
        """Interval carrying the continuous part, or None when there is
        no branch cut at all (pure-atom measures)."""
        values = [self.F(c) for c in self.critical_points(tol)]
        L, regular = self.infinity_behaviour()
        if L is not None and regular is False:
            values.append(L)
        if len(values) < 2:
            return None
        return (min(values), max(values))

    def branch_seed(self, y):
        if self.side == "hc":
            return 1.0 / y
        return 1.0 + 1.0 / (y - 1.0 - self.psi_prime(1.0))


# ----------------------------------------------------------------------
# outlier atoms

def _numerator_tail(num_rf):
    """lim x*N(x) for proper N; None when N does not decay."""
    dn, dd = _pdeg(num_rf.num), _pdeg(num_rf.den)
    if dn >= dd:
        return None
    if dn == dd - 1:
        return float(num_rf.num[dd - 1]) / float(num_rf.den[dd])
    return 0.0


def detect_outliers(kf, tol=1e-9):
    """Atoms of the reconstructed measure.

    The inverse branch starting at the center singularity sweeps the real
    line (through infinity if nothing blocks it) until the first branch
    point.  Every numerator pole it passes contributes an atom of weight
    -Res(N dx); a pole landing exactly on the stopping branch point
    contributes half of that.  Returns dicts with keys ``location``,
    ``weight``, ``pole`` (None for the crossing at infinity) and
    ``boundary`` (True for the half-weight case), sorted by location.
    """
    if kf.numerator is None:
        return []
    center = kf.center
    crits = kf.critical_points(tol)
    fpoles = kf.F_poles(tol)
    obstacles = sorted(crits + fpoles)
    crit_set = list(crits)

    npoles = kf.numerator.real_poles(tol)
    for p in npoles:
        if abs(p - center) <= tol * max(1.0, abs(p)):
            raise ValueError("numerator pole at the center singularity")

    def is_crit(pos):
        return any(abs(pos - c) <= tol * max(1.0, abs(pos)) for c in crit_set)

    atoms = {}

    def emit(key, location, weight, boundary, pole):
        if key in atoms or abs(weight) < 1e-13:
            return
        atoms[key] = {
            "location": float(location) + 0.0,  # normalize -0.0
            "weight": float(weight),
            "pole": pole,
            "boundary": boundary,
        }

    def scan(poles, start, stop, direction):
        """Emit atoms for numerator poles on the open segment from
        ``start`` towards ``stop`` (None meaning unbounded)."""
        for p in poles:
            if start is not None and (p - start) * direction <= tol * max(1.0, abs(p)):
                continue
            if stop is None:
                passed = True
                at_stop = False
            else:
                gap = (stop - p) * direction
                at_stop = abs(p - stop) <= tol * max(1.0, abs(p)) + tol
                passed = gap > 0 and not at_stop
            if at_stop and is_crit(stop):
                emit(p, kf.F(p), -0.5 * kf.numerator.residue(p), True, p)
            elif passed:
                emit(p, kf.F(p), -kf.numerator.residue(p), False, p)

    covered_all = False
    for direction in (1.0, -1.0):
        if covered_all:
            break
        side_obs = [o for o in obstacles if (o - center) * direction > 0]
        stop = min(side_obs, key=lambda o: (o - center) * direction) if side_obs else None
        scan(npoles, center, stop, direction)
        if stop is not None:
            continue
        # the walk escapes to infinity on this side
        L, regular = kf.infinity_behaviour()
        if L is None:
            continue
        n1 = _numerator_tail(kf.numerator)
        if n1 is None:
            raise NotImplementedError(
                "numerator does not decay at infinity; the measure has a "
                "point-derivative component there"
            )
        if not regular:
            # branch point at infinity: the walk stops there, half weight
            emit("inf", L, 0.5 * n1, True, None)
            continue
        emit("inf", L, n1, False, None)
        # wrap around: continue from the far end back towards the center
        far_obs = [o for o in obstacles if (o - center) * direction < 0]
        stop2 = min(far_obs, key=lambda o: (o - center) * direction) if far_obs else None
        far_poles = [p for p in npoles if (p - center) * direction < 0]
        scan(far_poles, None, stop2, direction)
        if stop2 is None:
            covered_all = True

    return sorted(atoms.values(), key=lambda a: a["location"])


# ----------------------------------------------------------------------
# branch following and densities

def _newton(kf, y, x0, max_iter=80, rtol=1e-13):
    x = complex(x0)
    for _ in range(max_iter):
        f = kf.F(x) - y
        if abs(f) <= rtol * max(1.0, abs(y)):
            return x
        fp = kf.F_prime(x)
        if fp == 0 or not (math.isfinite(fp.real if isinstance(fp, complex) else fp)):
            return None
        step = f / fp
        cap = 0.5 * max(1.0, abs(x))
        if abs(step) > cap:
            step *= cap / abs(step)
        x = x - step
    return None


def solve_branch(kf, ys, x0=None):
    """Follow the principal inverse branch along the path ``ys``.

    ``ys`` is traversed in order; each solve is seeded by the previous
    root, so the path must be continuous.  Failed points come back NaN.
    """
    ys = np.asarray(ys, dtype=complex)
    out = np.full(ys.shape, complex(np.nan, np.nan), dtype=complex)
    x = complex(kf.branch_seed(ys[0])) if x0 is None else complex(x0)
    for i, y in enumerate(ys):
        nxt = _newton(kf, y, x)
        if nxt is None:
            # one fresh attempt from the asymptotic seed before giving up
            nxt = _newton(kf, y, kf.branch_seed(y))
        if nxt is None:
            continue
        x = nxt
        out[i] = x
    return out


def _ramp_to(kf, target, eta):
    """A descent path from far right of the support down to ``target``."""
    sup = kf.support()
    hi = max(abs(v) for v in sup) if sup else abs(kf.center) + 1.0
    start = max(float(target), hi) + 2.0 * (hi + 1.0) + 3.0
    ramp = np.linspace(start, float(target), 64, endpoint=False)
    return ramp + 1j * eta


def stieltjes_values(kf, ys):
    """Transform values on given upper-half-plane points.

    Leading-order mode: the branch itself (continuous side takes its
    logarithm).  Correction mode: -N(x)/F'(x) on the branch.
    """
    ys = np.asarray(ys, dtype=complex)
    out = np.empty(ys.shape, dtype=complex)
    for i, y in enumerate(ys):
        path = np.concatenate([_ramp_to(kf, y.real, y.imag), [y]])
        x = solve_branch(kf, path)[-1]
        if kf.numerator is None:
            out[i] = cmath.log(x) if kf.side == "schur" else x
        else:
            out[i] = -kf.numerator(x) / kf.F_prime(x)
    return out


@dataclass
class SpectralMeasure:
    """Continuous density on a grid plus a finite list of atoms.

    ``weights`` (optional) are quadrature weights for the continuous
    part; when absent, moments fall back to the trapezoid rule with a
    square-root edge correction controlled by ``sqrt_edges``.
    """

    grid: np.ndarray
    density: np.ndarray
    atoms: tuple = ()
    support: tuple | None = None
    sqrt_edges: bool = False
    weights: np.ndarray | None = None
    kind: str = "signed"
    meta: dict = field(default_factory=dict)

    def mass(self):
        return quadrature_moments(self, 0)[0]

    def moments(self, kmax):
        return quadrature_moments(self, kmax)

    def to_dict(self):
        return {
            "support": None if self.support is None else [float(v) for v in self.support],
            "atoms": [{"location": float(x), "weight": float(w)} for x, w in self.atoms],
            "kind": self.kind,
            "meta": self.meta,
        }


def quadrature_moments(measure, kmax):
    """Moments 0..kmax of a SpectralMeasure (continuous part + atoms)."""
    t = np.asarray(measure.grid, dtype=float)
    d = np.asarray(measure.density, dtype=float)
    ok = np.isfinite(d)
    t, d = t[ok], d[ok]
    out = []
    for k in range(kmax + 1):
        if measure.weights is not None:
            w = np.asarray(measure.weights, dtype=float)[ok]
            val = float(np.sum(w * t**k))
        elif len(t) >= 2:
            val = float(_trapezoid(d * t**k, t))
            if measure.sqrt_edges and measure.support is not None:
                lo, hi = measure.support
                # density ~ c/sqrt(t-lo): integral of the missing sliver is
                # 2*rho(t0)*(t0-lo) to leading order
                if t[0] > lo:
                    val += 2.0 * d[0] * (t[0] - lo) * ((lo + t[0]) / 2.0) ** k
                if t[-1] < hi:
                    val += 2.0 * d[-1] * (hi - t[-1]) * ((hi + t[-1]) / 2.0) ** k
        else:
            val = 0.0
        for x, w in measure.atoms:
            val += w * x**k
        out.append(val)
    return out


def reconstruct_density(kf, grid, eta=1e-3, reference_moments=None):
    """Continuous density along ``grid`` from the inverse branch.

    Evaluates at heights eta and eta/2 and extrapolates the linear-in-eta
    error away.  ``reference_moments`` (moments 0..2 of the continuous
    part alone, atoms netted out by the caller) calibrates the overall
    orientation of the branch; without it the positive-mass orientation
    is chosen.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must be a 1d array with at least two points")
    raw = []
    for h in (eta, 0.5 * eta):
        path = np.concatenate([_ramp_to(kf, grid[-1], h), grid[::-1] + 1j * h])
        xs = solve_branch(kf, path)[64:][::-1]
        if kf.numerator is None:
            if kf.side == "schur":
                vals = np.array(
                    [cmath.log(x).imag if x == x else np.nan for x in xs]
                )
            else:
                vals = np.imag(xs)
            vals = -vals / math.pi
        else:
            g = np.empty(len(xs))
            for i, x in enumerate(xs):
                if x != x:  # NaN
                    g[i] = np.nan
                    continue
                fp = kf.F_prime(x)
                g[i] = (kf.numerator(x) / fp).imag / math.pi
            vals = g
        raw.append(vals)
    dens = 2.0 * raw[1] - raw[0]

    sign = 1.0
    probe = SpectralMeasure(grid=grid, density=dens, support=kf.support(), sqrt_edges=True)
    q = quadrature_moments(probe, 2)
    if reference_moments is not None:
        ref = list(reference_moments)[:3]
        err_plus = sum(abs(q[i] - ref[i]) for i in range(len(ref)))
        err_minus = sum(abs(-q[i] - ref[i]) for i in range(len(ref)))
        if err_minus < err_plus:
            sign = -1.0
    elif q[0] < 0:
        sign = -1.0

    return SpectralMeasure(
        grid=grid,
        density=sign * dens,
        support=kf.support(),
        sqrt_edges=True,
        kind="probability" if kf.numerator is None else "signed",
        meta={"eta": eta, "orientation": sign},
    )


# ----------------------------------------------------------------------
# closed-form catalog

def _angular_nodes(lo, hi, n):
    """Midpoint nodes in the angle that straightens sqrt edges."""
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    phi = (np.arange(n) + 0.5) / n * math.pi - 0.5 * math.pi
    t = mid + rad * np.sin(phi)
    dphi = math.pi / n
    # weights carry the jacobian; density values multiply in later
    jac = rad * np.cos(phi) * dphi
    return t, jac


def _measure_from_density(fn, lo, hi, n, atoms=(), kind="signed", meta=None):
    t, jac = _angular_nodes(lo, hi, n)
    d = np.array([fn(v) for v in t])
    return SpectralMeasure(
        grid=t,
        density=d,
        atoms=tuple(atoms),
        support=(lo, hi),
        sqrt_edges=True,
        weights=d * jac,
        kind=kind,
        meta=meta or {},
    )


def _uniform_patch(lo, hi, n, k_density=1.0):
    n |= 1  # composite Simpson needs an odd node count
    t = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return t, w * (h / 3.0) * k_density


def catalog(name, npoints=4001, **params):
    """Closed-form measures by model name.

    LLN entries are probability measures; ``*_correction`` entries are the
    signed first-order corrections, complete with every atom required for
    their moments to match the series engine (including mass).
    """
    builders = {
        "semicircle": _cat_semicircle,
        "gue_correction": _cat_gue_correction,
        "gue_spike_correction": _cat_gue_spike,
        "wishart_lln": _cat_wishart_lln,
        "wishart_correction": _cat_wishart_correction,
        "wishart_spike_correction": _cat_wishart_spike,
        "plancherel_lln": _cat_plancherel_lln,
        "plancherel_spike_correction": _cat_plancherel_spike,
        "tiling_lln": _cat_tiling_lln,
        "tiling_correction": _cat_tiling_correction,
        "uniform_lln": _cat_uniform_lln,
        "uniform_correction": _cat_uniform_correction,
    }
    if name not in builders:
        raise KeyError(f"unknown measure {name!r}; have {sorted(builders)}")
    return builders[name](npoints, **params)


def _cat_semicircle(n):
    return _measure_from_density(
        lambda t: math.sqrt(max(4.0 - t * t, 0.0)) / (2.0 * math.pi),
        -2.0,
        2.0,
        n,
        kind="probability",
    )


def _cat_gue_correction(n):
    return _measure_from_density(
        lambda t: (t * t - 2.0) / (2.0 * math.pi * math.sqrt(max(4.0 - t * t, 1e-300))),
        -2.0,
        2.0,
        n,
    )


def _cat_gue_spike(n, spike):
    th = float(spike)
    if abs(th) == 1.0:
        raise ValueError("spike strength on the unit circle is degenerate")
    atoms = []
    if abs(th) >= 1.0:
        atoms.append((th + 1.0 / th, 1.0))

    def dens(t):
        return (
            -th
            * (t - 2.0 * th)
            / ((th * (t - th) - 1.0) * 2.0 * math.pi * math.sqrt(max(4.0 - t * t, 1e-300)))
        )

    return _measure_from_density(dens, -2.0, 2.0, n, atoms=atoms, meta={"spike": th})


def _cat_wishart_lln(n, ratio):
    lam = float(ratio)
    if lam < 1.0:
        raise ValueError("dimension ratio below one is not supported here")
    lo, hi = (math.sqrt(lam) - 1.0) ** 2, (math.sqrt(lam) + 1.0) ** 2

    def dens(t):
        return math.sqrt(max((hi - t) * (t - lo), 0.0)) / (2.0 * math.pi * t)

    return _measure_from_density(dens, lo, hi, n, kind="probability", meta={"ratio": lam})


def _cat_wishart_correction(n, ratio):
    lam = float(ratio)
    if lam <= 1.0:
        raise ValueError(
            "the correction needs ratio > 1; at and below 1 it acquires "
            "point-derivative terms at the origin"
        )
    lo, hi = lam + 1.0 - 2.0 * math.sqrt(lam), lam + 1.0 + 2.0 * math.sqrt(lam)

    def dens(u):
        num = lam * u * u - 2.0 * lam * lam * u + (lam + 1.0) * u + (lam - 1.0) ** 3
        return num / (2.0 * math.pi * u**3 * math.sqrt(max((hi - u) * (u - lo), 1e-300)))

    return _measure_from_density(dens, lo, hi, n, meta={"ratio": lam})


def _cat_wishart_spike(n, spike):
    # dimension ratio pinned at 1; mass balances with a half atom at the
    # hard edge (the branch point sits at infinity there)
    th = float(spike)
    if abs(th - 1.0) == 1.0:
        raise ValueError("spike strength at the transition is degenerate")
    atoms = [(0.0, -0.5)]
    if abs(th - 1.0) > 1.0:
        atoms.append((th + 1.0 + 1.0 / (th - 1.0), 1.0))

    def dens(t):
        return (
            th
            * (2.0 - th)
            / ((1.0 - th) * t + th * th)
            / (2.0 * math.pi * math.sqrt(max((4.0 - t) * t, 1e-300)))
        )

    return _measure_from_density(dens, 0.0, 4.0, n, atoms=atoms, meta={"spike": th})


def _cat_plancherel_lln(n, intensity):
    g = float(intensity)
    if g <= 0:
        raise ValueError("intensity must be positive")
    lo, hi = (math.sqrt(g) - 1.0) ** 2, (math.sqrt(g) + 1.0) ** 2

    def dens(t):
        arg = (t - 1.0 + g) / (2.0 * math.sqrt(g * t))
        return math.acos(min(1.0, max(-1.0, arg))) / math.pi

    m = _measure_from_density(dens, lo, hi, n, kind="probability", meta={"intensity": g})
    if g < 1.0:
        # below unit intensity a saturated block appears next to the origin
        t2, w2 = _uniform_patch(0.0, lo, max(101, n // 4))
        m.grid = np.concatenate([t2, m.grid])
        m.density = np.concatenate([np.ones_like(t2), m.density])
        m.weights = np.concatenate([w2, m.weights])
        m.support = (0.0, hi)
    return m


def _cat_plancherel_spike(n, intensity, spike):
    g, a = float(intensity), float(spike)
    if g <= 1.0:
        raise ValueError("the correction formula needs intensity > 1")
    if a <= 0:
        raise ValueError("spike rate must be positive")
    lo, hi = (math.sqrt(g) - 1.0) ** 2, (math.sqrt(g) + 1.0) ** 2
    atoms = []
    loc = a + 1.0 + g + g / a
    if a > math.sqrt(g):
        atoms.append((loc, 1.0))
    elif a == math.sqrt(g):
        atoms.append((loc, 0.5))

    def dens(t):
        lead = a * (t - 2.0 * a - g - 1.0) / (g + a * a + a * g + a - a * t)
        return (lead - (t + 1.0 - g) / (2.0 * t)) / (
            2.0 * math.pi * math.sqrt(max((hi - t) * (t - lo), 1e-300))
        )

    return _measure_from_density(
        dens, lo, hi, n, atoms=atoms, meta={"intensity": g, "spike": a}
    )


def _tiling_geometry(fraction):
    al = float(fraction)
    if not 0.5 < al < 1.0:
        raise ValueError("row fraction must lie strictly between 1/2 and 1")
    rho = math.sqrt(1.0 - (2.0 * al - 1.0) ** 2)
    return al, (1.0 - rho) / (2.0 * al), (1.0 + rho) / (2.0 * al)


def _cat_tiling_lln(n, fraction):
    al, lo, hi = _tiling_geometry(fraction)

    def dens(t):
        disc = 1.0 - (2.0 * al * t - 1.0) ** 2
        if disc <= 0:
            return 0.0
        arg = (1.0 - 2.0 * al) / math.sqrt(disc)
        return math.acos(min(1.0, max(-1.0, arg))) / math.pi

    m = _measure_from_density(dens, lo, hi, n, kind="probability", meta={"fraction": al})
    # saturated bands between the ellipse and the lattice bounds
    left_t, left_w = _uniform_patch(0.0, lo, max(101, n // 4))
    right_t, right_w = _uniform_patch(hi, 1.0 / al, max(101, n // 4))
    m.grid = np.concatenate([left_t, m.grid, right_t])
    m.density = np.concatenate([np.ones_like(left_t), m.density, np.ones_like(right_t)])
    m.weights = np.concatenate([left_w, m.weights, right_w])
    m.support = (0.0, 1.0 / al)
    return m


def _cat_tiling_correction(n, fraction, edge_weight):
    al, lo, hi = _tiling_geometry(fraction)
    A = float(edge_weight)
    if A <= 1.0:
        raise ValueError("edge weight must exceed one")
    thr = (A + 1.0) ** 2 / (2.0 * (A * A + 1.0))
    loc = (-1.0 + 2.0 * al * A - A) / (al * (A * A - 1.0))
    # saturated-boundary atoms keep every moment (mass included) aligned
    # with the series engine; the spike may join them past its threshold
    atoms = [(0.0, 0.5), (1.0 / al, -0.5)]
    if al > thr:
        atoms.append((loc, -1.0))
    elif al == thr:
        atoms.append((loc, -0.5))

    def dens(t):
        disc = 1.0 - (2.0 * al - 1.0) ** 2 - (2.0 * al * t - 1.0) ** 2
        pref = (
            al
            + (1.0 - 2.0 * al) / (4.0 * t)
            - al * (2.0 * al - 1.0) / (4.0 * (al * t - 1.0))
            + al
            * (2.0 * A * A * al - A * A - 2.0 * A + 2.0 * al - 1.0)
            / (2.0 * (-al * t + A * A * al * t - 2.0 * al * A + 1.0 + A))
        )
        return pref / (math.pi * math.sqrt(max(disc, 1e-300)))

    return _measure_from_density(
        dens,
        lo,
        hi,
        n,
        atoms=sorted(atoms),
        meta={"fraction": al, "edge_weight": A, "spike_threshold": thr},
    )


def _cat_uniform_lln(n):
    t, w = _uniform_patch(0.0, 1.0, n)
    return SpectralMeasure(
        grid=t,
        density=np.ones_like(t),
        support=(0.0, 1.0),
        weights=w,
        kind="probability",
    )


def _cat_uniform_correction(n):
    t = np.linspace(0.0, 1.0, n)
    return SpectralMeasure(
        grid=t,
        density=np.zeros_like(t),
        atoms=((0.0, 0.5), (1.0, -0.5)),
        support=None,
        weights=np.zeros_like(t),
    )


# ----------------------------------------------------------------------
# correction functionals of a polynomial test function

def _poly_dd(coeffs, a):
    """(P(t) - P(a))/(t - a) by synthetic division, ascending coeffs."""
    desc = list(reversed(_ptrim(coeffs)))
    out = []
    acc = 0
    for c in desc:
        acc = acc * a + c
        out.append(acc)
    return tuple(reversed(out[:-1])) if len(out) > 1 else (0,)


def _sc_int(fn, n=16385):
    """Integral over (-2,2) against 1/sqrt(4-t^2), angular midpoints."""
    phi = (np.arange(n) + 0.5) / n * math.pi - 0.5 * math.pi
    t = 2.0 * np.sin(phi)
    return float(np.sum(fn(t))) * (math.pi / n)


def eval_correction_functional(model, poly_coeffs, **params):
    """Value of a named correction functional on a polynomial.

    ``poly_coeffs`` ascending.  Each entry returns the coefficient of the
    matching correction scale, so results compare directly with the
    series-engine rows of the same model.
    """
    P = _ptrim([float(c) for c in poly_coeffs])
    if _pdeg(P) > 16:
        raise ValueError("polynomial degree capped at 16")
    dP = _pder(P)
    ddP = _pder(dP)

    if model == "gue_pure_second":
        return _sc_int(lambda t: _peval(ddP, t) * (t * t - 2.0)) / (24.0 * math.pi)

    if model == "gue_full_second":
        return (
            _sc_int(
                lambda t: _peval(ddP, t) * (t * t - 2.0) / 12.0
                + _peval(dP, t) * (t**3 - 3.0 * t) / 2.0
                + _peval(P, t) * (t * t - 2.0)
            )
            / (2.0 * math.pi)
        )

    if model == "gue_third":
        # this kernel convention carries 3! relative to the scale
        # coefficient; divide it out so the result lines up with row 3
        return (
            _sc_int(
                lambda t: _peval(ddP, t) * (t**4 - 4.0 * t * t + 2.0)
                + _peval(dP, t) * (6.0 * t**3 - 18.0 * t)
                + _peval(P, t) * (6.0 * t * t - 12.0)
            )
            / (2.0 * math.pi)
            / 6.0
        )

    if model == "gue_spiked_second":
        th1 = float(params["spike"])
        th2 = float(params["sub_spike"])
        if abs(th1) == 1.0:
            raise ValueError("spike strength on the unit circle is degenerate")
        hat = th1 + 1.0 / th1
        dd1 = _poly_dd(dP, hat)  # (P'(t)-P'(hat))/(t-hat)
        dd2 = _poly_dd(dd1, hat)  # minus P''(hat), divided again
        # term with sqrt(4-t^2) in the numerator: absorb as 4 cos^2
        n = 16385
        phi = (np.arange(n) + 0.5) / n * math.pi - 0.5 * math.pi
        t = 2.0 * np.sin(phi)
        grow = float(np.sum(_peval(dP, t) * (2.0 * np.cos(phi)) ** 2)) * (math.pi / n)
        val = th2 / (2.0 * math.pi) * grow
        val += th1 * th1 / (2.0 * math.pi) * _sc_int(lambda u: _peval(dd1, u))
        val -= (
            (th1 * th1 - 1.0)
            / (4.0 * math.pi)
            * _sc_int(lambda u: (u - 2.0 * th1) * _peval(dd2, u))
        )
        val += _sc_int(lambda u: _peval(ddP, u) * (u * u - 2.0)) / (24.0 * math.pi)
        return val

    if model == "separated_spikes":
        th1 = float(params["spike"])
        th2 = float(params["sub_spike"])
        if abs(th1) == 1.0 or abs(th2) == 1.0:
            raise ValueError("spike strength on the unit circle is degenerate")
        hat1 = th1 + 1.0 / th1
        dd1 = _poly_dd(dP, hat1)
        dd2 = _poly_dd(dd1, hat1)
        val = 0.0
        if abs(th2) >= 1.0:
            val += _peval(P, th2 + 1.0 / th2)
        val -= (
            _sc_int(lambda u: (u - 2.0 * th2) / (u - th2 - 1.0 / th2) * _peval(P, u))
            / (2.0 * math.pi)
        )
        val += th1 * th1 / (2.0 * math.pi) * _sc_int(lambda u: _peval(dd1, u))
        val -= (
            (th1 * th1 - 1.0)
            / (4.0 * math.pi)
            * _sc_int(lambda u: (u - 2.0 * th1) * _peval(dd2, u))
        )
        return val

    raise KeyError(f"unknown functional model {model!r}")
