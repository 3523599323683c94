"""Non-crossing partition lattice: enumeration and cumulant transforms.

The moment formulas elsewhere in the package are closed-form
derivative sums; this module provides the independent combinatorial
route.  Moments are sums over non-crossing partitions of products of
cumulants, corrections are the same sums with blocks carrying marked
orders, so any formula bug shows up as a mismatch between the two
routes.

Partitions of {1..k} are enumerated by the first-element arc
decomposition: the block containing 1 cuts the remaining elements into
independent runs, each of which is partitioned recursively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "NoncrossingPartition",
    "CumulantTable",
    "enumerate_nc",
    "iter_nc",
    "cumulants_to_moments",
    "moments_to_cumulants",
    "infinitesimal_moments",
    "quantized_r_shift",
    "uniform01_free_cumulants",
]

_MAX_K = 14


class NoncrossingPartition:
    """A non-crossing set partition of {1, .., k} in canonical form.

    Blocks are stored sorted by their minima, elements ascending.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks))
        if not canon or any(not b for b in canon):
            raise ValueError("blocks must be non-empty")
        self.blocks = canon

    @property
    def size(self):
        return sum(len(b) for b in self.blocks)

    @property
    def num_blocks(self):
        return len(self.blocks)

    def block_sizes(self):
        return tuple(len(b) for b in self.blocks)

    def to_string(self):
        """Canonical dump: blocks separated by '|', elements by ','."""
        return "|".join(",".join(str(e) for e in b) for b in self.blocks)

    @classmethod
    def from_string(cls, s):
        blocks = [[int(e) for e in part.split(",")] for part in s.split("|")]
        p = cls(blocks)
        flat = sorted(e for b in p.blocks for e in b)
        if flat != list(range(1, len(flat) + 1)):
            raise ValueError(f"not a partition of 1..k: {s!r}")
        return p

    def __eq__(self, other):
        return isinstance(other, NoncrossingPartition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"NoncrossingPartition({self.to_string()!r})"


def _nc_blocks(seq):
    """Yield non-crossing partitions of the sorted tuple ``seq``.

    Members of the first element's block split the rest into runs that
    are partitioned independently; blocks never straddle two runs.
    """
    if not seq:
        yield ()
        return
    first = seq[0]
    rest = seq[1:]
    n = len(rest)

    def rec(i):
        # structure over rest[i:]: (further members of first's block, other blocks)
        if i == n:
            yield ((), ())
            return
        for tail_parts in _nc_blocks(rest[i:]):
            yield ((), tail_parts)
        for j in range(i, n):
            for gap_parts in _nc_blocks(rest[i:j]):
                for members, blocks in rec(j + 1):
                    yield ((rest[j],) + members, gap_parts + blocks)

    for members, blocks in rec(0):
        yield ((first,) + members,) + blocks


def iter_nc(k):
    """Stream the non-crossing partitions of {1..k} without storing them."""
    if not 1 <= k <= _MAX_K:
        raise ValueError(f"k must be in 1..{_MAX_K}, got {k}")
    for blocks in _nc_blocks(tuple(range(1, k + 1))):
        yield NoncrossingPartition(blocks)


@lru_cache(maxsize=None)
def _enumerate_cached(k):
    return tuple(iter_nc(k))


def enumerate_nc(k):
    """All non-crossing partitions of {1..k} (Catalan-many).

    Cached for k <= 10; larger k re-enumerates each call (the k = 14
    list alone holds ~2.7M partitions -- prefer :func:`iter_nc` there).
    """
    if not 1 <= k <= _MAX_K:
        raise ValueError(f"k must be in 1..{_MAX_K}, got {k}")
    if k <= 10:
        return list(_enumerate_cached(k))
    return list(iter_nc(k))


# ----------------------------------------------------------------------
# cumulant <-> moment transforms


def cumulants_to_moments(kappa):
    """Free-cumulant to moment transform via the partition sum.

    ``kappa[i]`` is the cumulant of order ``i + 1``.  Returns moments
    ``m_1 .. m_K`` with ``K = len(kappa)``.
    """
    K = len(kappa)
    out = []
    for k in range(1, K + 1):
        total = 0
        for p in enumerate_nc(k) if k <= 10 else iter_nc(k):
            term = 1
            for b in p.blocks:
                term *= kappa[len(b) - 1]
                if term == 0:
                    break
            total += term
        out.append(total)
    return out


def moments_to_cumulants(moments):
    """Inverse transform, solving the partition sum block by block.

    The partition with a single block is the only one involving the
    top-order cumulant, so the system is triangular.
    """
    K = len(moments)
    kappa = []
    for k in range(1, K + 1):
        rest = 0
        for p in enumerate_nc(k) if k <= 10 else iter_nc(k):
            if p.num_blocks == 1:
                continue
            term = 1
            for b in p.blocks:
                term *= kappa[len(b) - 1]
                if term == 0:
                    break
            rest += term
        kappa.append(moments[k - 1] - rest)
    return kappa


@dataclass
class CumulantTable:
    """Rows of cumulant sequences, one per correction order.

    ``rows[i][n-1]`` is the order-``i`` cumulant of degree ``n``.
    """

    rows: list = field(default_factory=list)

    @property
    def order(self):
        return len(self.rows) - 1

    def to_dict(self):
        return {"order": self.order, "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d):
        return cls(rows=[list(r) for r in d["rows"]])


def _compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def infinitesimal_moments(table, K, order=None):
    """Moment expansion rows from a cumulant table.

    Row ``i`` of the result is

        sum over non-crossing partitions pi of {1..k}, and over
        assignments of orders (l_1, .., l_p) >= 0 summing to i across
        the blocks, of  i!/(l_1! ... l_p!) * prod_j kappa^{(l_j)}_{|V_j|}.

    Row 0 reduces to :func:`cumulants_to_moments` of the base row.
    Supported through order 4.
    """
    n = table.order if order is None else order
    if n > 4:
        raise ValueError(f"orders beyond 4 unsupported, got {n}")
    if n > table.order:
        raise ValueError(f"table has {table.order + 1} rows, need {n + 1}")
    for row in table.rows[: n + 1]:
        if len(row) < K:
            raise ValueError(f"cumulant rows must reach degree {K}")

    # the inner composition sum only depends on the multiset of block sizes
    @lru_cache(maxsize=None)
    def inner(i, sizes):
        total = 0
        for lam in _compositions(i, len(sizes)):
            w = Fraction(math.factorial(i))
            term = 1
            for lj, sz in zip(lam, sizes):
                w /= math.factorial(lj)
                term *= table.rows[lj][sz - 1]
                if term == 0:
                    break
            if term != 0:
                total += w * term if w != 1 else term
        return total

    rows = []
    for i in range(n + 1):
        row_i = []
        for k in range(1, K + 1):
            total = 0
            for p in enumerate_nc(k) if k <= 10 else iter_nc(k):
                total += inner(i, tuple(sorted(p.block_sizes())))
            row_i.append(total)
        rows.append(row_i)
    return rows


# ----------------------------------------------------------------------
# quantized shift


@lru_cache(maxsize=None)
def uniform01_free_cumulants(K):
    """Free cumulants of the uniform measure on [0, 1], exact.

    Computed as ``n * [u^n] log((e^u - 1)/u)``; starts 1/2, 1/12, 0,
    -1/720, ...
    """
    from .series import TruncatedSeries

    egf = TruncatedSeries(
        [Fraction(1, math.factorial(j + 1)) for j in range(K + 1)]
    )
    b = egf.log_series()
    return tuple(n * b.coeffs[n] for n in range(1, K + 1))


def quantized_r_shift(kappa, direction, row=0):
    """Translate cumulants between the ordinary and quantized conventions.

    Order-0 rows differ by the uniform-[0,1] free cumulants; order-1
    rows differ by (1/2, 0, 0, ...).  ``direction`` is ``"to_quantized"``
    or ``"from_quantized"``.
    """
    K = len(kappa)
    if row == 0:
        shift = uniform01_free_cumulants(K)
    elif row == 1:
        shift = tuple([Fraction(1, 2)] + [0] * (K - 1))
    else:
        raise ValueError(f"row must be 0 or 1, got {row}")
    if direction == "to_quantized":
        return [k - s for k, s in zip(kappa, shift)]
    if direction == "from_quantized":
        return [k + s for k, s in zip(kappa, shift)]
    raise ValueError(f"unknown direction {direction!r}")
