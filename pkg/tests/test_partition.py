import math

import numpy as np
import pytest

from ktmix.measure import (
    CountingMeasure,
    Interval,
    LebesgueMeasure,
    OutOfSupportError,
)
from ktmix.partition import CustomPartition, HistogramSequence

INF = math.inf


class TestCutPoints:
    def test_level_one_is_the_center(self):
        h = HistogramSequence(0.0, 1.0, max_level=3)
        assert list(h.cut_points(1)) == [0.0]

    def test_level_two(self):
        h = HistogramSequence(0.0, 1.0, max_level=3)
        assert list(h.cut_points(2)) == [-1.0, 0.0, 1.0]

    def test_level_three(self):
        h = HistogramSequence(0.0, 1.0, max_level=3)
        assert list(h.cut_points(3)) == [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]

    def test_counts_and_monotonicity(self):
        h = HistogramSequence(0.3, 0.7, max_level=12)
        for k in range(1, 13):
            cuts = h.cut_points(k)
            assert cuts.size == 2**k - 1
            assert np.all(np.diff(cuts) > 0)

    def test_level_out_of_range(self):
        h = HistogramSequence(0.0, 1.0, max_level=3)
        with pytest.raises(ValueError):
            h.cut_points(0)
        with pytest.raises(ValueError):
            h.cut_points(4)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            HistogramSequence(0.0, 0.0)
        with pytest.raises(ValueError):
            HistogramSequence(0.0, -1.0)


class TestCells:
    def test_full_line_level_two(self):
        h = HistogramSequence(0.0, 1.0, max_level=2)
        cells = h.cells(2)
        assert [str(c) for c in cells] == [
            "(-inf, -1.0]", "(-1.0, 0.0]", "(0.0, 1.0]", "(1.0, inf)"
        ]

    def test_level_zero_covers_support(self):
        h = HistogramSequence(0.5, 0.25, support=Interval.closed_open(0.0, 1.0), max_level=2)
        assert h.cells(0) == [Interval.closed_open(0.0, 1.0)]

    def test_bounded_support_level_one(self):
        h = HistogramSequence(0.5, 0.25, support=Interval.closed_open(0.0, 1.0), max_level=1)
        assert h.cells(1) == [Interval(0.0, 0.5, True, True), Interval(0.5, 1.0, False, False)]

    def test_natural_support_level_two(self):
        # center 1, scale 1 over the naturals: cells hold {1}, {2}, {3,4,...}
        m = CountingMeasure.harmonic_naturals()
        h = HistogramSequence(1.0, 1.0, support=m, max_level=2)
        cells = h.cells(2)
        assert len(cells) == 3
        masses = [m.measure_of(c) for c in cells]
        assert masses == pytest.approx([1 / 2, 1 / 6, 1 / 3], abs=1e-15)

    def test_cell_count_bound(self):
        full = HistogramSequence(0.0, 1.0, max_level=10)
        clipped = HistogramSequence(0.0, 1.0, support=Interval.closed_open(0.0, 1.0), max_level=10)
        for k in range(11):
            assert len(full.cells(k)) == 2**k
            assert len(clipped.cells(k)) <= 2**k


class TestCellOf:
    def test_examples(self):
        h = HistogramSequence(0.0, 1.0, max_level=2)
        assert h.cell_of(2, 0.3) == 2    # (0, 1]
        assert h.cell_of(2, -5.0) == 0   # leftmost tail
        assert h.cell_of(2, 0.0) == 1    # (-1, 0], right-closed boundary

    def test_outside_support_raises(self):
        h = HistogramSequence(0.5, 0.25, support=Interval.closed_open(0.0, 1.0), max_level=2)
        with pytest.raises(OutOfSupportError):
            h.cell_of(2, 1.5)
        with pytest.raises(OutOfSupportError):
            h.cell_of(2, 1.0)  # support excludes its upper end

    def test_non_integer_outside_lattice_support(self):
        h = HistogramSequence(1.0, 1.0, support=CountingMeasure.unit_naturals(), max_level=3)
        with pytest.raises(OutOfSupportError):
            h.cell_of(3, 2.5)

    def test_consistency_with_cells(self):
        rng = np.random.default_rng(123)
        h = HistogramSequence(0.2, 1.3, max_level=8)
        ys = rng.normal(0, 3, size=10_000)
        ks = rng.integers(0, 9, size=10_000)
        for y, k in zip(ys, ks):
            cell = h.cells(int(k))[h.cell_of(int(k), float(y))]
            assert cell.contains(float(y))


class TestRefinement:
    def test_histogram_sequence_refines(self):
        assert HistogramSequence(0.0, 1.0, max_level=8).verify_refinement()
        assert HistogramSequence(-3.7, 0.01, max_level=8).verify_refinement()
        bounded = HistogramSequence(0.5, 0.25, support=Interval.closed_open(0.0, 1.0), max_level=8)
        assert bounded.verify_refinement()
        lattice = HistogramSequence(1.0, 1.0, support=CountingMeasure.unit_naturals(), max_level=8)
        assert lattice.verify_refinement()

    def test_missing_cut_breaks_refinement(self):
        base = HistogramSequence(0.0, 1.0, max_level=4)
        levels = [list(base.cut_points(k)) for k in range(1, 5)]
        levels[2].remove(0.0)  # drop a level-2 cut from level 3 only
        assert not CustomPartition(levels).verify_refinement()

    def test_dyadic_splits_of_unit_interval(self):
        levels = []
        for j in range(1, 7):
            step = 2.0 ** -j
            levels.append([i * step for i in range(1, 2**j)])
        part = CustomPartition(levels, support=Interval.closed_open(0.0, 1.0))
        assert part.verify_refinement()
        assert len(part.cells(6)) == 64

    def test_union_of_cells_has_full_mass(self):
        cases = [
            (LebesgueMeasure(Interval.closed_open(0.0, 1.0)),
             HistogramSequence(0.5, 0.25, support=Interval.closed_open(0.0, 1.0), max_level=6)),
            (CountingMeasure.harmonic_naturals(),
             HistogramSequence(1.0, 1.0, support=CountingMeasure.harmonic_naturals(), max_level=6)),
        ]
        for measure, part in cases:
            whole = measure.measure_of(part.cells(0)[0])
            for k in range(7):
                total = sum(measure.measure_of(c) for c in part.cells(k))
                assert total == pytest.approx(whole, rel=1e-12)

    def test_cells_pairwise_disjoint(self):
        h = HistogramSequence(0.0, 1.0, max_level=6)
        for k in range(7):
            cells = h.cells(k)
            for left, right in zip(cells, cells[1:]):
                assert left.intersect(right) is None


class TestCustomPartition:
    def test_rejects_unsorted_cuts(self):
        with pytest.raises(ValueError):
            CustomPartition([[1.0, 0.5]])

    def test_rejects_non_finite_cuts(self):
        with pytest.raises(ValueError):
            CustomPartition([[0.0], [0.0, INF]])

    def test_lazy_levels_are_idempotent(self):
        h = HistogramSequence(0.0, 1.0, max_level=5)
        first = h.cells(4)
        again = h.cells(4)
        assert first is again
