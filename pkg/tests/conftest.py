import numpy as np
import pytest

from pflion.image_formation import CcdModel, ImagingSystem, gaussian_psf
from pflion.pfl_design import design_zoneplate
from pflion.trap_physics import TrapParams
from pflion.wave_optics import focal_field_radial, pupil_from_zoneplate

LAM = 369.5e-9
F = 3e-3
D = 5e-3

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def nominal_spec():
    return design_zoneplate(LAM, F, D)


@pytest.fixture(scope="session")
def nominal_psf(nominal_spec):
    return focal_field_radial(pupil_from_zoneplate(nominal_spec), F, 2e-6, 201)


@pytest.fixture(scope="session")
def nominal_system(nominal_spec, nominal_psf):
    return ImagingSystem.from_zoneplate(nominal_spec, nominal_psf, 615.0, magnification_uncertainty=9.0)


@pytest.fixture(scope="session")
def nominal_trap():
    return TrapParams.from_amu(174, 882e3, 1.6e6, temperature=4.7e-4,
                               axial_frequency_uncertainty=2e3)


@pytest.fixture
def gauss_system():
    """Cheap stand-in optics: Gaussian object-plane PSF of 120 nm sigma."""
    return ImagingSystem(615.0, gaussian_psf(120e-9, 10e-9, 161), 0.05)


@pytest.fixture
def small_ccd():
    return CcdModel(array_size=(128, 128))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
