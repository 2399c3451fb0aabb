# pylint: disable-all
import json

import pytest

import ivt


def uniform_cell(lo, hi, y_shift=None):
    """One-bin conditional with X ~ U[lo, hi) and Y = X (or X + V)."""
    if y_shift is None:
        return ivt.m.BivariateGrid([lo, hi], [lo, hi], [[1.0]])
    return ivt.m.BivariateGrid([lo, hi, hi + y_shift], [lo, hi],
                               [[0.5], [0.5]])


@pytest.fixture
def two_bin_joint():
    """
    Two z-bins on [0, 1] with x-marginals that differ but both spread over
    two x-bins.
    """
    return ivt.m.JointLaw.from_points(
        [0.25, 0.75],
        [ivt.m.BivariateGrid([0, 1, 2], [0, 0.5, 1],
                             [[0.25, 0.25], [0.25, 0.25]]),
         ivt.m.BivariateGrid([0, 1, 2], [0, 0.5, 1],
                             [[0.1, 0.5], [0.2, 0.2]])])


@pytest.fixture
def bernoulli_joint():
    """Atoms at z=0 and z=1 with X = Y ~ U[0,1] and U[3,4]."""
    return ivt.m.JointLaw.from_atoms(
        [0.0, 1.0], [uniform_cell(0.0, 1.0), uniform_cell(3.0, 4.0)])


@pytest.fixture
def location_joint():
    """X ~ z + U[0,1], Y = X + V on the z-grid 0, 0.2, 0.3, 0.35."""
    z = [0.0, 0.2, 0.3, 0.35]
    return ivt.m.JointLaw.from_points(
        z, [uniform_cell(value, value + 1.0, y_shift=1.0) for value in z])


@pytest.fixture
def write_json(tmp_path):
    """Write a document into the test's temporary directory."""
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write
