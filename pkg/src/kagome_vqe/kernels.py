"""Hot statevector kernels, each in a numba and a numpy flavour.

Amplitudes are little-endian: bit ``q`` of a basis index is qubit ``q``.
Pauli terms are packed as ``(xmask, zmask, phase)`` with the action

    P |i> = phase * (-1)**popcount(i & zmask) |i ^ xmask>

where ``phase = 1j**(number of Y factors)`` (``Y = iXZ``).

Mutating kernels work in place. The public names at the bottom of the module
point at one flavour, picked by :mod:`kagome_vqe._accel`.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# numba flavour
# --------------------------------------------------------------------------


@njit
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit
def apply_1q_numba(psi, q, u00, u01, u10, u11):
    bit = 1 << q
    for i in range(psi.shape[0]):
        if i & bit:
            continue
        j = i | bit
        a = psi[i]
        b = psi[j]
        psi[i] = u00 * a + u01 * b
        psi[j] = u10 * a + u11 * b


@njit
def apply_cnot_numba(psi, control, target):
    cbit = 1 << control
    tbit = 1 << target
    for i in range(psi.shape[0]):
        if (i & cbit) and not (i & tbit):
            j = i | tbit
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp


@njit
def apply_cz_numba(psi, a, b):
    mask = (1 << a) | (1 << b)
    for i in range(psi.shape[0]):
        if (i & mask) == mask:
            psi[i] = -psi[i]


@njit
def pauli_expectation_numba(psi, xmasks, zmasks, phases, coeffs):
    total = 0.0 + 0.0j
    for k in range(xmasks.shape[0]):
        xm = xmasks[k]
        zm = zmasks[k]
        acc = 0.0 + 0.0j
        for i in range(psi.shape[0]):
            v = psi[i]
            if _parity(i & zm):
                v = -v
            acc += np.conj(psi[i ^ xm]) * v
        total += coeffs[k] * phases[k] * acc
    return total


@njit
def pauli_apply_numba(psi, xmasks, zmasks, phases, coeffs, out):
    for i in range(out.shape[0]):
        out[i] = 0.0
    for k in range(xmasks.shape[0]):
        xm = xmasks[k]
        zm = zmasks[k]
        w = coeffs[k] * phases[k]
        for i in range(psi.shape[0]):
            v = w * psi[i]
            if _parity(i & zm):
                v = -v
            out[i ^ xm] += v


@njit
def parity_average_numba(weights, masks, coeffs):
    total = 0.0
    for k in range(masks.shape[0]):
        m = masks[k]
        acc = 0.0
        for i in range(weights.shape[0]):
            if _parity(i & m):
                acc -= weights[i]
            else:
                acc += weights[i]
        total += coeffs[k] * acc
    return total


# --------------------------------------------------------------------------
# numpy flavour
# --------------------------------------------------------------------------


def _signs(dim, zmask):
    idx = np.arange(dim, dtype=np.int64)
    return 1 - 2 * (np.bitwise_count(idx & zmask) & 1).astype(np.int64)


def apply_1q_numpy(psi, q, u00, u01, u10, u11):
    view = psi.reshape(-1, 2, 1 << q)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = u00 * a + u01 * b
    view[:, 1, :] = u10 * a + u11 * b


def apply_cnot_numpy(psi, control, target):
    idx = np.arange(psi.shape[0], dtype=np.int64)
    sel = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    partner = sel | (1 << target)
    psi[sel], psi[partner] = psi[partner], psi[sel].copy()


def apply_cz_numpy(psi, a, b):
    idx = np.arange(psi.shape[0], dtype=np.int64)
    mask = (1 << a) | (1 << b)
    psi[(idx & mask) == mask] *= -1


def pauli_expectation_numpy(psi, xmasks, zmasks, phases, coeffs):
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    total = 0.0 + 0.0j
    for xm, zm, ph, c in zip(xmasks, zmasks, phases, coeffs):
        acc = np.vdot(psi[idx ^ xm], _signs(dim, zm) * psi)
        total += c * ph * acc
    return total


def pauli_apply_numpy(psi, xmasks, zmasks, phases, coeffs, out):
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    out[:] = 0.0
    for xm, zm, ph, c in zip(xmasks, zmasks, phases, coeffs):
        # the map i -> i ^ xm is a permutation, so no index collides
        out[idx ^ xm] += (c * ph) * _signs(dim, zm) * psi


def parity_average_numpy(weights, masks, coeffs):
    dim = weights.shape[0]
    total = 0.0
    for m, c in zip(masks, coeffs):
        total += c * float(np.dot(_signs(dim, m), weights))
    return total


FLAVOURS = {
    "numba": {
        "apply_1q": apply_1q_numba,
        "apply_cnot": apply_cnot_numba,
        "apply_cz": apply_cz_numba,
        "pauli_expectation": pauli_expectation_numba,
        "pauli_apply": pauli_apply_numba,
        "parity_average": parity_average_numba,
    },
    "numpy": {
        "apply_1q": apply_1q_numpy,
        "apply_cnot": apply_cnot_numpy,
        "apply_cz": apply_cz_numpy,
        "pauli_expectation": pauli_expectation_numpy,
        "pauli_apply": pauli_apply_numpy,
        "parity_average": parity_average_numpy,
    },
}

_active = FLAVOURS["numba" if USE_NUMBA else "numpy"]
apply_1q = _active["apply_1q"]
apply_cnot = _active["apply_cnot"]
apply_cz = _active["apply_cz"]
pauli_expectation = _active["pauli_expectation"]
pauli_apply = _active["pauli_apply"]
parity_average = _active["parity_average"]
