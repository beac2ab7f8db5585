"""Dense complex matrix algebra for finite-dimensional quantum objects.

Density operators, POVM effects, Kraus channels, Bloch-vector geometry and
Choi matrices, plus the scalar operations (Born rule, positivity tests,
channel application) that the rest of the toolkit is built on.  All values
are immutable after construction and safe for unrestricted concurrent reads.

JSON convention shared by every module in this package: a complex number
serializes as a two-element array ``[re, im]``, and a matrix as a row-major
nested list of such pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Tolerance for structural validity checks (positivity, normalization,
#: trace preservation, unitarity).
VALIDITY_TOL = 1e-9

#: Tolerance for algebraic identities that hold to machine precision.
IDENTITY_TOL = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array)
    out.setflags(write=False)
    return out


def as_cmatrix(entries, dim: int | None = None) -> np.ndarray:
    """Coerce ``entries`` to a square complex matrix, optionally of size ``dim``."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {m.shape[0]}")
    return m


def hermitian_deviation(m: np.ndarray) -> float:
    """Max entrywise deviation of ``m`` from its own conjugate transpose."""
    return float(np.abs(m - m.conj().T).max())


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


PAULI_X = _frozen(np.array([[0, 1], [1, 0]], dtype=complex))
PAULI_Y = _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
PAULI_Z = _frozen(np.array([[1, 0], [0, -1]], dtype=complex))


@dataclass(frozen=True)
class DensityOperator:
    """A positive, trace-one operator describing a preparation equivalence class."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_cmatrix(self.matrix)
        if hermitian_deviation(m) > VALIDITY_TOL:
            raise ValueError("density operator must be Hermitian")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eigs.min() < -VALIDITY_TOL:
            raise ValueError(f"density operator has negative eigenvalue {eigs.min():.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > VALIDITY_TOL:
            raise ValueError(f"density operator must have unit trace, got {tr}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Effect:
    """A POVM element: Hermitian with spectrum inside ``[0, 1]``."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_cmatrix(self.matrix)
        if hermitian_deviation(m) > VALIDITY_TOL:
            raise ValueError("effect must be Hermitian")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eigs.min() < -VALIDITY_TOL or eigs.max() > 1.0 + VALIDITY_TOL:
            raise ValueError(f"effect spectrum {eigs} outside [0, 1]")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    """An ordered set of effects summing to the identity."""

    effects: tuple[Effect, ...]

    def __post_init__(self) -> None:
        effects = tuple(self.effects)
        if not effects:
            raise ValueError("a POVM needs at least one outcome")
        dim = effects[0].dim
        if any(e.dim != dim for e in effects):
            raise ValueError("all POVM elements must share a dimension")
        total = sum(e.matrix for e in effects)
        if np.abs(total - identity(dim)).max() > VALIDITY_TOL:
            raise ValueError("POVM elements must sum to the identity")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def outcome_count(self) -> int:
        return len(self.effects)

    def __len__(self) -> int:
        return len(self.effects)

    def __getitem__(self, k: int) -> Effect:
        return self.effects[k]


@dataclass(frozen=True)
class KrausChannel:
    """A trace-preserving CP map given by operators ``{W}`` with sum W†W = I.

    Zero Kraus operators are permitted, so representations of the same
    channel may have different cardinality.  Operators may be rectangular
    (``dim_out x dim_in``).
    """

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(w, dtype=complex) for w in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(w.shape != shape for w in ops):
            raise ValueError("all Kraus operators must share one 2-d shape")
        dim_in = shape[1]
        total = sum(w.conj().T @ w for w in ops)
        if np.abs(total - identity(dim_in)).max() > VALIDITY_TOL:
            raise ValueError("channel is not trace preserving (sum W†W != I)")
        object.__setattr__(self, "kraus_ops", tuple(_frozen(w) for w in ops))

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True)
class ChoiMatrix:
    """Channel-state image of a channel, unnormalized convention, trace ``dim_in``.

    Ordering is fixed as output-system-first: ``C = sum_ij T(|i><j|) (x) |i><j|``.
    """

    matrix: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self) -> None:
        m = as_cmatrix(self.matrix, self.dim_in * self.dim_out)
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eigs.min() < -VALIDITY_TOL:
            raise ValueError("Choi matrix must be positive semidefinite")
        # Partial trace over the output factor must give I_{dim_in} for a
        # trace-preserving channel.
        blocks = m.reshape(self.dim_out, self.dim_in, self.dim_out, self.dim_in)
        reduced = np.einsum("aiaj->ij", blocks)
        if np.abs(reduced - identity(self.dim_in)).max() > VALIDITY_TOL:
            raise ValueError("Choi matrix does not trace down to the identity")
        object.__setattr__(self, "matrix", _frozen(m))


def pure_density(psi: Sequence[complex]) -> DensityOperator:
    """Rank-one density operator ``|psi><psi|`` for a normalized vector."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > VALIDITY_TOL:
        raise ValueError(f"state vector must be normalized, got norm {norm}")
    v = v / norm
    return DensityOperator(np.outer(v, v.conj()))


def born_probability(rho: DensityOperator, effect: Effect, tol: float = VALIDITY_TOL) -> float:
    """Outcome probability ``Tr(rho E)``, clamped to [0, 1] near the boundary.

    Raises ``ValueError`` on a dimension mismatch or if the trace acquires an
    imaginary part beyond ``tol`` (which signals invalid inputs).
    """
    if rho.dim != effect.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {effect.dim}")
    t = complex(np.trace(rho.matrix @ effect.matrix))
    if abs(t.imag) > tol:
        raise ValueError(f"Tr(rho E) has imaginary part {t.imag:.3e}")
    p = t.real
    if -tol <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + tol:
        return 1.0
    return p


def is_positive_semidefinite(m, tol: float = VALIDITY_TOL) -> bool:
    """True iff the minimum eigenvalue of the Hermitian part is >= ``-tol``.

    Uses a symmetric eigendecomposition rather than a Cholesky attempt so
    that near-singular projectors pass cleanly.  Rejects non-Hermitian input.
    """
    a = as_cmatrix(m)
    if hermitian_deviation(a) > tol:
        raise ValueError("input is not Hermitian within tolerance")
    eigs = np.linalg.eigvalsh((a + a.conj().T) / 2)
    return bool(eigs.min() >= -tol)


def density_from_bloch(r: Sequence[float]) -> DensityOperator:
    """Qubit state ``(I + x X + y Y + z Z) / 2`` for a Bloch vector inside the ball."""
    v = np.asarray(r, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValueError("a Bloch vector has exactly three real components")
    if np.linalg.norm(v) > 1.0 + VALIDITY_TOL:
        raise ValueError(f"Bloch vector lies outside the unit ball: |r| = {np.linalg.norm(v)}")
    x, y, z = v
    m = (identity(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2
    return DensityOperator(m)


def bloch_from_density(rho: DensityOperator) -> np.ndarray:
    """Bloch vector ``(x, y, z)`` of a qubit density operator."""
    if rho.dim != 2:
        raise ValueError("Bloch coordinates are defined for qubits only")
    m = rho.matrix
    x = 2.0 * m[0, 1].real
    y = -2.0 * m[0, 1].imag
    z = (m[0, 0] - m[1, 1]).real
    return np.array([x, y, z])


def channel_action(channel: KrausChannel, matrix: np.ndarray) -> np.ndarray:
    """Raw operator-sum action ``sum W m W†`` on an arbitrary matrix."""
    m = as_cmatrix(matrix, channel.dim_in)
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for w in channel.kraus_ops:
        out += w @ m @ w.conj().T
    return out


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Apply a trace-preserving channel to a state; the output is validated."""
    if rho.dim != channel.dim_in:
        raise ValueError(f"dimension mismatch: channel expects {channel.dim_in}, state is {rho.dim}")
    return DensityOperator(channel_action(channel, rho.matrix))


def unitary_rotation_y(theta: float) -> np.ndarray:
    """2x2 rotation by ``theta`` about the Bloch y axis.

    Matrix-level comparisons of these unitaries are exact; ``theta`` and
    ``theta + 2*pi`` differ by a global sign and agree only as channels.
    """
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    return _frozen(np.array([[c, -s], [s, c]], dtype=complex))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    """Single-Kraus channel ``rho -> U rho U†``."""
    return KrausChannel((np.asarray(u, dtype=complex),))


def choi_matrix(channel: KrausChannel) -> ChoiMatrix:
    """Choi matrix ``C = sum_ij T(|i><j|) (x) |i><j|`` (trace equals ``dim_in``)."""
    d = channel.dim_in * channel.dim_out
    c = np.zeros((d, d), dtype=complex)
    for w in channel.kraus_ops:
        v = w.reshape(-1)
        c += np.outer(v, v.conj())
    return ChoiMatrix(c, channel.dim_in, channel.dim_out)


def choi_deviation(a: KrausChannel, b: KrausChannel) -> float:
    """Max entrywise difference of the two channels' Choi matrices."""
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ValueError("channels act on different dimensions")
    return float(np.abs(choi_matrix(a).matrix - choi_matrix(b).matrix).max())


def channels_equal(a: KrausChannel, b: KrausChannel, tol: float = IDENTITY_TOL) -> bool:
    """True iff the Choi matrices agree entrywise within ``tol``."""
    return choi_deviation(a, b) <= tol


# ---------------------------------------------------------------------------
# JSON conventions


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex_from_json(p) for p in row] for row in rows], dtype=complex)
