"""Shared fixtures: the CHSH functional, Tsirelson measurements, key-qubit lifts."""

import math

import numpy as np
import pytest

from ptbounds import MeasurementFamily, chsh, max_entangled

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def binary_povm_from_observable(obs: np.ndarray) -> list[np.ndarray]:
    """Two-outcome POVM (I + O)/2, (I - O)/2 for an observable with eigenvalues +-1."""
    eye = np.eye(obs.shape[0], dtype=np.complex128)
    return [(eye + obs) / 2.0, (eye - obs) / 2.0]


def tsirelson_measurements() -> MeasurementFamily:
    """Qubit measurements achieving 2 sqrt(2) on the maximally entangled pair."""
    alice = [binary_povm_from_observable(PAULI_Z), binary_povm_from_observable(PAULI_X)]
    bob = [
        binary_povm_from_observable((PAULI_Z + PAULI_X) / math.sqrt(2.0)),
        binary_povm_from_observable((PAULI_Z - PAULI_X) / math.sqrt(2.0)),
    ]
    return MeasurementFamily(alice, bob)


def key_lifted_measurements(d_shield: int) -> MeasurementFamily:
    """Tsirelson qubit measurements on the key qubits, identity on the shields."""
    base = tsirelson_measurements()
    lift = lambda povm: [np.kron(e, np.eye(d_shield)) for e in povm]
    return MeasurementFamily([lift(p) for p in base.alice], [lift(p) for p in base.bob])


@pytest.fixture(scope="session")
def chsh_functional():
    return chsh()


@pytest.fixture(scope="session")
def tsirelson_meas():
    return tsirelson_measurements()


@pytest.fixture(scope="session")
def phi_plus():
    return max_entangled(2)
