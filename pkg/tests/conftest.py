import pytest

from casimir_audit.config import material_from_table
from casimir_audit.dielectric import CarrierGas, FreeCarrierTerm, Material, OscillatorTerm
from casimir_audit.presets import MATERIALS

SI_RESONANCE = 6.6e15


def builtin(name):
    return material_from_table(name, MATERIALS[name])


def si_core(name="si", carriers=None, free_carriers=None):
    return Material(name, (OscillatorTerm(10.66 * SI_RESONANCE**2, SI_RESONANCE),), free_carriers, carriers)


@pytest.fixture
def ideal():
    return Material("ideal", ideal_metal=True)


@pytest.fixture
def vacuum():
    return Material("vacuum")


@pytest.fixture
def gold():
    return Material("au", free_carriers=FreeCarrierTerm("drude", 1.37e16, 5.32e13))


@pytest.fixture
def si():
    return si_core()


@pytest.fixture
def doped_si():
    gas = CarrierGas(1e20, critical_density=1e24)
    return si_core("si-doped", gas, FreeCarrierTerm("drude", 5e13, 1e13))



def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import SUMMARY
    except ImportError:
        return
    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in sorted(SUMMARY):
            terminalreporter.write_line(line)
