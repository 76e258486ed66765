"""Tolerances and limits shared by every module.

Qubit ordering convention used everywhere: qubit 0 is the most significant
bit of a computational-basis label, and operators are stored row-major as
dense ``complex128`` arrays.
"""

import math
import os

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-9
# Frobenius reconstruction error allowed per unit of dimension.
RECONSTRUCTION_TOL = 1e-9
NORMALIZATION_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

DEFAULT_MAX_QUBITS = 12

# c in the flow / min-entropy relation: 2 / log2(e) == 2 ln 2.
ENTROPY_RATE_CONSTANT = 2.0 * math.log(2.0)


def max_qubits() -> int:
    """Qubit cap, overridable through ``INFOFLUX_MAX_QUBITS``."""
    raw = os.environ.get("INFOFLUX_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    value = int(raw)
    if value < 1:
        raise ValueError("INFOFLUX_MAX_QUBITS must be a positive integer")
    return value


def max_dim() -> int:
    return 2 ** max_qubits()
