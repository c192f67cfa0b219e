"""Shared problem builders for the test suite."""

import pytest

from diffuselab import expr as ex
from diffuselab.fields import ProblemSpec
from diffuselab.geometry import Cuboid, Disk, Interval


def spec_1d(alpha=2.0, beta=1.0, gamma=1.0, kappa=0.0, q="1", h="0", g="0.1",
            box=(-1.0, 1.0), inner=(-0.5, 0.5)):
    return ProblemSpec(
        cuboid=Cuboid((box[0],), (box[1],)),
        shape=Interval(inner[0], inner[1]),
        alpha=alpha, beta=beta, gamma=gamma, kappa=kappa,
        q=ex.parse(q), h=ex.parse(h), g=ex.parse(g),
    )


def spec_2d(alpha=2.0, beta=1.0, gamma=1.0, q="1", h="0", g="0.1",
            box=(-1.0, 1.0), center=(0.0, 0.0), radius=0.3):
    return ProblemSpec(
        cuboid=Cuboid((box[0], box[0]), (box[1], box[1])),
        shape=Disk(center, radius),
        alpha=alpha, beta=beta, gamma=gamma, kappa=0.0,
        q=ex.parse(q), h=ex.parse(h), g=ex.parse(g),
    )


def const_exact_1d(kappa=0.0, beta=1.0, gamma=1.0, alpha=2.0):
    """Data for which u = 1 solves both problems exactly."""
    g = "0" if kappa == 0 else repr(-kappa)
    return spec_1d(alpha=alpha, beta=beta, gamma=gamma, kappa=kappa,
                   q=repr(gamma), h=repr(beta), g=g)


def const_exact_2d(beta=1.0, gamma=1.0, alpha=2.0):
    return spec_2d(alpha=alpha, beta=beta, gamma=gamma,
                   q=repr(gamma), h=repr(beta), g="0")


@pytest.fixture
def generic_1d():
    return spec_1d()


@pytest.fixture
def generic_2d():
    return spec_2d()
