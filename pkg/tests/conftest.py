from __future__ import annotations

import math

import pytest

from steklov_lab.experiments import ClusteredDisk, GluedFamily
from steklov_lab.mesh import make_annulus_mesh, make_disk_mesh, make_rectangle_mesh


@pytest.fixture(scope="session")
def small_disk():
    return make_disk_mesh(6, 40)


@pytest.fixture(scope="session")
def disk():
    return make_disk_mesh(20, 160)


@pytest.fixture(scope="session")
def annulus():
    return make_annulus_mesh(4, 40)


@pytest.fixture(scope="session")
def rect():
    return make_rectangle_mesh(0.2, 1.0, 4, 20)


@pytest.fixture(scope="session")
def coarse_family():
    """A cheap glued family used by the property suites."""
    return GluedFamily(ClusteredDisk(6, 48), 0.3, (4, 16))


@pytest.fixture(scope="session")
def glued_configs():
    """Three glued surfaces: two aspects on the disk and a reversed strip."""
    fam = GluedFamily(ClusteredDisk(6, 48), 0.3, (4, 16))
    rev = GluedFamily(ClusteredDisk(6, 48), 0.25, (4, 16), reverse=True)
    return [fam.mesh(1.5), fam.mesh(2.5), rev.mesh(2.0)]


TWO_PI = 2 * math.pi


ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
