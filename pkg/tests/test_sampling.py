"""Tests for chart domains and sample point generation."""

import numpy as np
import pytest

from rhlab.exceptions import BadParams, DomainExhausted, PointExcluded
from rhlab.geometry.fields import ChartDomain, Exclusion
from rhlab.services.sampling import sample_points


def _disk_exclusion(radius: float) -> Exclusion:
    return Exclusion(
        f"r <= {radius:g}", lambda p: float(np.linalg.norm(p)) <= radius
    )


class TestChartDomain:
    def test_require_rejects_points_outside_box(self) -> None:
        """Validate points against a box.

        Returns
        -------
        None
            Asserts inside points pass and outside points raise.
        """
        domain = ChartDomain.box([0.0, 0.0], [1.0, 2.0])
        np.testing.assert_array_equal(domain.require([0.5, 1.5]), [0.5, 1.5])
        with pytest.raises(PointExcluded, match="outside"):
            domain.require([1.5, 0.5])

    def test_require_names_the_exclusion(self) -> None:
        """Validate a point inside an excluded disk.

        Returns
        -------
        None
            Asserts the error message names the exclusion.
        """
        domain = ChartDomain.box([-1.0, -1.0], [1.0, 1.0]).with_exclusions(
            _disk_exclusion(0.5)
        )
        assert domain.excluded_by([0.1, 0.1]) == "r <= 0.5"
        assert not domain.admits([0.1, 0.1])
        with pytest.raises(PointExcluded, match="r <= 0.5"):
            domain.require([0.1, 0.1])

    def test_product_shifts_exclusions(self) -> None:
        """Combine two domains with exclusions.

        Returns
        -------
        None
            Asserts each exclusion acts on its own factor.
        """
        left = ChartDomain.box([-1.0], [1.0]).with_exclusions(
            Exclusion("x <= 0", lambda p: p[0] <= 0.0)
        )
        right = ChartDomain.box([0.0, 0.0], [1.0, 1.0])
        product = left.product(right)
        assert product.dim == 3
        assert product.admits([0.5, 0.2, 0.2])
        assert not product.admits([-0.5, 0.2, 0.2])

    def test_degenerate_box_is_rejected(self) -> None:
        """Build a box of zero volume.

        Returns
        -------
        None
            Asserts ``BadParams`` is raised for flat and inverted boxes.
        """
        with pytest.raises(BadParams):
            ChartDomain.box([0.0, 1.0], [1.0, 1.0])
        with pytest.raises(BadParams):
            ChartDomain.box([0.0], [0.0])
        with pytest.raises(BadParams):
            ChartDomain.box([1.0, 0.0], [0.0, 1.0])

    def test_mismatched_corners_are_rejected(self) -> None:
        """Build a box from corners of different lengths.

        Returns
        -------
        None
            Asserts ``BadParams`` is raised.
        """
        with pytest.raises(BadParams):
            ChartDomain.box([0.0, 0.0], [1.0])


class TestSamplePoints:
    def test_same_seed_gives_same_points(self) -> None:
        """Draw twice with one seed.

        Returns
        -------
        None
            Asserts both draws are identical and differ from another seed.
        """
        domain = ChartDomain.box([0.0, -1.0, 2.0], [1.0, 1.0, 3.0])
        first = sample_points(domain, 20, seed=7)
        second = sample_points(domain, 20, seed=7)
        other = sample_points(domain, 20, seed=8)
        np.testing.assert_array_equal(np.stack(first), np.stack(second))
        assert not np.array_equal(np.stack(first), np.stack(other))

    def test_points_respect_box_and_exclusions(self) -> None:
        """Draw points from an annulus.

        Returns
        -------
        None
            Asserts every point is admissible.
        """
        domain = ChartDomain.box([-1.0, -1.0], [1.0, 1.0]).with_exclusions(
            _disk_exclusion(0.4)
        )
        points = sample_points(domain, 50, seed=0)
        assert len(points) == 50
        assert all(domain.admits(point) for point in points)

    def test_extra_exclusions_apply(self) -> None:
        """Draw points with an exclusion passed by the caller.

        Returns
        -------
        None
            Asserts the extra exclusion is honoured.
        """
        domain = ChartDomain.box([0.0, 0.0], [1.0, 1.0])
        upper_half = Exclusion("y >= 0.5", lambda p: p[1] >= 0.5)
        points = sample_points(domain, 30, seed=3, extra=(upper_half,))
        assert all(point[1] < 0.5 for point in points)

    def test_excessive_rejection_is_exhausted(self) -> None:
        """Draw from a box whose exclusions cover almost everything.

        Returns
        -------
        None
            Asserts ``DomainExhausted`` is raised.
        """
        domain = ChartDomain.box([-1.0, -1.0], [1.0, 1.0]).with_exclusions(
            _disk_exclusion(1.4)
        )
        with pytest.raises(DomainExhausted):
            sample_points(domain, 10, seed=0, max_rejection_ratio=0.5)

    def test_count_must_be_positive(self) -> None:
        """Ask for zero points.

        Returns
        -------
        None
            Asserts ``BadParams`` is raised for zero and negative counts.
        """
        with pytest.raises(BadParams):
            sample_points(ChartDomain.box([0.0], [1.0]), 0, seed=0)
        with pytest.raises(BadParams):
            sample_points(ChartDomain.box([0.0], [1.0]), -3, seed=0)
