import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freecorr.ncpart import (
    CumulantTable,
    NoncrossingPartition,
    cumulants_to_moments,
    enumerate_nc,
    infinitesimal_moments,
    iter_nc,
    moments_to_cumulants,
    quantized_r_shift,
    uniform01_free_cumulants,
)


# ---------------------------------------------------------------------------
# independent oracles

def all_set_partitions(k):
    """Every set partition of {1..k}, via restricted growth strings."""
    def rec(i, blocks):
        if i > k:
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(1, [])


def has_crossing(blocks):
    for b1, b2 in combinations(blocks, 2):
        for a, b in combinations(b1, 2):
            for x, y in combinations(b2, 2):
                if a < x < b < y or x < a < y < b:
                    return True
    return False


def catalan(n):
    c = [1]
    for m in range(n):
        c.append(sum(c[i] * c[m - i] for i in range(m + 1)))
    return c[n]


# ---------------------------------------------------------------------------


class TestEnumeration:
    @pytest.mark.parametrize("k", range(1, 10))
    def test_counts_are_catalan(self, k):
        assert len(enumerate_nc(k)) == catalan(k)

    @pytest.mark.parametrize("k", [10, 11, 12])
    def test_counts_are_catalan_streaming(self, k):
        assert sum(1 for _ in iter_nc(k)) == catalan(k)

    @pytest.mark.parametrize("k", range(1, 9))
    def test_matches_filtered_set_partitions(self, k):
        mine = {p.to_string() for p in enumerate_nc(k)}
        ref = {
            NoncrossingPartition(blocks).to_string()
            for blocks in all_set_partitions(k)
            if not has_crossing(blocks)
        }
        assert mine == ref

    def test_no_duplicates(self):
        for k in range(1, 9):
            ps = [p.to_string() for p in enumerate_nc(k)]
            assert len(ps) == len(set(ps))

    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_nc(0)
        with pytest.raises(ValueError):
            enumerate_nc(15)

    def test_block_profile_counts(self):
        # number of partitions with a given multiset of block sizes is
        # n! / ((n - #blocks + 1)! * prod_size multiplicity!)
        for n in range(2, 10):
            seen = {}
            for p in enumerate_nc(n):
                key = tuple(sorted(p.block_sizes()))
                seen[key] = seen.get(key, 0) + 1
            for sizes, count in seen.items():
                ell = len(sizes)
                denom = math.factorial(n - ell + 1)
                for s in set(sizes):
                    denom *= math.factorial(sizes.count(s))
                assert count == math.factorial(n) // denom, (n, sizes)


class TestStrings:
    def test_dump_format(self):
        p = NoncrossingPartition([(2,), (1, 3), (4,)])
        assert p.to_string() == "1,3|2|4"

    def test_roundtrip(self):
        for k in range(1, 7):
            for p in enumerate_nc(k):
                assert NoncrossingPartition.from_string(p.to_string()) == p

    def test_from_string_rejects_gaps(self):
        with pytest.raises(ValueError):
            NoncrossingPartition.from_string("1,3|4")


class TestTransforms:
    def test_semicircle_moments(self):
        kappa = [0, 1, 0, 0, 0, 0, 0, 0]
        m = cumulants_to_moments(kappa)
        assert m == [0, 1, 0, 2, 0, 5, 0, 14]

    def test_free_poisson_moments(self):
        lam = Fraction(2)
        m = cumulants_to_moments([lam] * 4)
        assert m == [2, 6, 22, 90]

    def test_inverse_on_uniform_moments(self):
        m = [Fraction(1, k + 1) for k in range(1, 7)]
        kappa = moments_to_cumulants(m)
        assert kappa[:4] == [
            Fraction(1, 2),
            Fraction(1, 12),
            Fraction(0),
            Fraction(-1, 720),
        ]

    def test_uniform01_cumulants_agree_with_moment_inversion(self):
        # two independent routes: log((e^u-1)/u) coefficients vs
        # non-crossing inversion of the moments 1/(k+1)
        K = 8
        via_series = uniform01_free_cumulants(K)
        via_nc = moments_to_cumulants([Fraction(1, k + 1) for k in range(1, K + 1)])
        assert list(via_series) == via_nc

    def test_quantized_shift_example(self):
        out = quantized_r_shift([0] * 6, "from_quantized")
        assert out[:4] == [
            Fraction(1, 2),
            Fraction(1, 12),
            Fraction(0),
            Fraction(-1, 720),
        ]
        back = quantized_r_shift(out, "to_quantized")
        assert back == [0] * 6

    def test_quantized_shift_row1(self):
        out = quantized_r_shift([0] * 4, "from_quantized", row=1)
        assert out == [Fraction(1, 2), 0, 0, 0]


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=3),
        min_size=6,
        max_size=6,
    )
)
def test_transform_roundtrip_exact(kappa):
    assert moments_to_cumulants(cumulants_to_moments(kappa)) == kappa


class TestInfinitesimal:
    def test_row0_matches_plain_transform(self):
        base = [Fraction(1, 2), Fraction(-1, 3), Fraction(2), Fraction(1, 5)]
        table = CumulantTable(rows=[base, [1, 1, 1, 1]])
        rows = infinitesimal_moments(table, K=4, order=0)
        assert rows[0] == cumulants_to_moments(base)

    def test_row1_matches_marked_block_sum(self):
        base = [Fraction(1, 2), Fraction(-1, 3), Fraction(2), Fraction(1, 5), 0, 1]
        row1 = [Fraction(1), Fraction(2), Fraction(-1, 2), Fraction(3), 1, 0]
        table = CumulantTable(rows=[base, row1])
        got = infinitesimal_moments(table, K=6, order=1)[1]

        # independent route: mark one block with the order-1 cumulant
        expect = []
        for k in range(1, 7):
            total = Fraction(0)
            for p in enumerate_nc(k):
                for marked in range(p.num_blocks):
                    term = Fraction(1)
                    for j, b in enumerate(p.blocks):
                        row = row1 if j == marked else base
                        term *= row[len(b) - 1]
                    total += term
            expect.append(total)
        assert got == expect

    def test_row2_weights(self):
        # order 2 assigns either one block of order 2 (weight 1) or two
        # blocks of order 1 (weight 2!/(1!1!) = 2, i.e. ordered pairs)
        base = [Fraction(1), Fraction(1, 2), 0, 0]
        row1 = [Fraction(1, 3), Fraction(2), 0, 0]
        row2 = [Fraction(5), Fraction(-1), 0, 0]
        table = CumulantTable(rows=[base, row1, row2])
        got = infinitesimal_moments(table, K=4, order=2)[2]

        expect = []
        for k in range(1, 5):
            total = Fraction(0)
            for p in enumerate_nc(k):
                bs = p.block_sizes()
                for v in range(p.num_blocks):
                    term = row2[bs[v] - 1]
                    for w in range(p.num_blocks):
                        if w != v:
                            term *= base[bs[w] - 1]
                    total += term
                for v in range(p.num_blocks):
                    for w in range(p.num_blocks):
                        if v == w:
                            continue
                        term = row1[bs[v] - 1] * row1[bs[w] - 1]
                        for u in range(p.num_blocks):
                            if u != v and u != w:
                                term *= base[bs[u] - 1]
                        total += term
            expect.append(total)
        assert got == expect

    def test_order_guard(self):
        table = CumulantTable(rows=[[1], [1], [1], [1], [1], [1]])
        with pytest.raises(ValueError):
            infinitesimal_moments(table, K=1, order=5)
