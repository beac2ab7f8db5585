"""Unitary freedom of operator-sum representations.

Any unitary recombination ``X_v = sum_u u[v, u] W_u`` of a channel's Kraus
operators represents the same channel; zero operators may be appended first
so that representations of different cardinality can be related.  The two
explicit remixing families here rotate the balanced two-element
representation of the y-axis projection channel into its other balanced
two- and three-element representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .operational import (
    Transformation,
    mix_channels,
    rotation_transformations,
    y_projection_channel,
)
from .qmath import (
    IDENTITY_TOL,
    VALIDITY_TOL,
    KrausChannel,
    apply_channel,
    bloch_from_density,
    choi_deviation,
    density_from_bloch,
    identity,
)


@dataclass(frozen=True)
class RemixMatrix:
    """A unitary recombination matrix acting on Kraus-operator indices."""

    u: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.u, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("remix matrix must be square")
        if np.abs(m @ m.conj().T - identity(m.shape[0])).max() > VALIDITY_TOL:
            raise ValueError("remix matrix must be unitary")
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "u", m)

    @property
    def size(self) -> int:
        return self.u.shape[0]


def with_zero_ops(channel: KrausChannel, count: int) -> KrausChannel:
    """Pad the Kraus set with explicit zero operators up to ``count`` entries.

    Padding never happens silently inside ``remix_kraus``; callers pad so
    the provenance of every operator stays visible.
    """
    current = len(channel.kraus_ops)
    if count < current:
        raise ValueError(f"cannot pad {current} operators down to {count}")
    zero = np.zeros((channel.dim_out, channel.dim_in), dtype=complex)
    return KrausChannel(channel.kraus_ops + (zero,) * (count - current))


def remix_kraus(channel: KrausChannel, u: RemixMatrix) -> KrausChannel:
    """Recombine the Kraus set by a unitary matrix; the channel is unchanged."""
    if u.size != len(channel.kraus_ops):
        raise ValueError(
            f"remix matrix is {u.size}x{u.size} but the channel has "
            f"{len(channel.kraus_ops)} Kraus operators; pad with zero operators first"
        )
    ops = np.stack(channel.kraus_ops)
    mixed = np.einsum("nm,mij->nij", u.u, ops)
    return KrausChannel(tuple(mixed))


def pair_remix_unitary(theta: float) -> RemixMatrix:
    """2x2 remix sending the balanced pair at angles (0, pi) to (theta, theta+pi)."""
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return RemixMatrix(np.array([[c, s], [-s, c]], dtype=complex))


def triple_remix_unitary(theta: float) -> RemixMatrix:
    """3x3 remix sending the zero-padded balanced pair to the balanced triple.

    Row ``k`` produces the rotation at ``theta + 4k*pi/3``; modulo a full
    turn these are the angles ``theta + 2k*pi/3``, with the wrapped operator
    carrying a global sign that is invisible at the channel level.
    """
    rows = []
    for k in range(3):
        angle = theta / 2 + k * 2 * math.pi / 3
        rows.append(
            [
                math.sqrt(2 / 3) * math.cos(angle),
                math.sqrt(2 / 3) * math.sin(angle),
                math.sqrt(1 / 3),
            ]
        )
    return RemixMatrix(np.array(rows, dtype=complex))


@dataclass(frozen=True)
class MixtureIdentityReport:
    """Choi deviations of the five decompositions plus the projection check."""

    identities: tuple[tuple[str, float], ...]
    bloch_projection_max_dev: float

    @property
    def max_choi_dev(self) -> float:
        return max(dev for _, dev in self.identities)

    def to_json(self) -> dict:
        return {
            "identities": [
                {"name": name, "choi_dev": dev} for name, dev in self.identities
            ],
            "bloch_projection_max_dev": self.bloch_projection_max_dev,
        }


def _bloch_grid() -> list[np.ndarray]:
    """Deterministic sample of the closed Bloch ball, axes included."""
    points = [np.zeros(3)]
    for x in (-0.5, 0.0, 0.5):
        for y in (-0.5, 0.0, 0.5):
            for z in (-0.5, 0.0, 0.5):
                r = np.array([x, y, z])
                if np.linalg.norm(r) <= 1.0:
                    points.append(r)
    for axis in range(3):
        for sign in (-1.0, 1.0):
            r = np.zeros(3)
            r[axis] = sign
            points.append(r)
    return points


def verify_mixture_identities(tol: float = IDENTITY_TOL) -> MixtureIdentityReport:
    """Verify the five convex decompositions of the y-axis projection channel
    and its geometric action.

    Each decomposition is rebuilt with ``mix_channels`` and compared to the
    channel (defined by its balanced two-element Kraus set) at the Choi
    level; separately, the channel is checked to send every Bloch vector
    ``(x, y, z)`` on a ball grid to ``(0, y, 0)``.  Raises when any identity
    fails beyond ``tol``, which would signal an implementation bug.
    """
    rotations = rotation_transformations()
    projection = Transformation("T", y_projection_channel())
    decompositions = (
        ("K1", ((0.5, "T0"), (0.5, "T180"))),
        ("K2", ((0.5, "T60"), (0.5, "T240"))),
        ("K3", ((0.5, "T120"), (0.5, "T300"))),
        ("K4", ((1 / 3, "T0"), (1 / 3, "T120"), (1 / 3, "T240"))),
        ("K5", ((1 / 3, "T60"), (1 / 3, "T180"), (1 / 3, "T300"))),
    )
    identities = []
    for name, weighted in decompositions:
        mixture = mix_channels([(w, rotations[label]) for w, label in weighted], name)
        identities.append((name, choi_deviation(mixture.channel, projection.channel)))

    worst = 0.0
    for r in _bloch_grid():
        rho_out = apply_channel(projection.channel, density_from_bloch(r))
        expected = np.array([0.0, r[1], 0.0])
        worst = max(worst, float(np.abs(bloch_from_density(rho_out) - expected).max()))

    report = MixtureIdentityReport(tuple(identities), worst)
    if report.max_choi_dev > tol or report.bloch_projection_max_dev > tol:
        raise ArithmeticError(
            f"projection-channel identities fail: choi {report.max_choi_dev:.3e}, "
            f"bloch {report.bloch_projection_max_dev:.3e}"
        )
    return report
