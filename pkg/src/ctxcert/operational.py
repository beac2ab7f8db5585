"""Finite operational theories: labeled procedures and their equivalence classes.

A theory is a finite collection of preparations, transformations and
measurements together with declared convex-mixture relations.  Mixture
provenance is recorded in ``context_note`` strings; equivalence of
procedures is decided by operator equality alone, never by context.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .qmath import (
    IDENTITY_TOL,
    VALIDITY_TOL,
    DensityOperator,
    Effect,
    KrausChannel,
    Povm,
    choi_matrix,
    channels_equal,
    identity,
    matrix_from_json,
    matrix_to_json,
    pure_density,
    unitary_channel,
    unitary_rotation_y,
)

#: Exhaustive outcome-permutation search is refused above this many outcomes.
MAX_PERMUTATION_OUTCOMES = 8


@dataclass(frozen=True)
class Preparation:
    label: str
    rho: DensityOperator
    context_note: str = ""


@dataclass(frozen=True)
class Measurement:
    label: str
    povm: Povm
    context_note: str = ""


@dataclass(frozen=True)
class Transformation:
    label: str
    channel: KrausChannel
    context_note: str = ""


@dataclass(frozen=True)
class MixtureDecl:
    """A declared convex decomposition: ``target = sum_i weight_i * component_i``."""

    kind: str  # "prep" | "meas" | "transf"
    target: str
    components: tuple[tuple[float, str], ...]

    def __post_init__(self) -> None:
        if self.kind not in ("prep", "meas", "transf"):
            raise ValueError(f"unknown mixture kind {self.kind!r}")
        object.__setattr__(self, "components", tuple((float(w), str(l)) for w, l in self.components))


def _check_weights(weights: Sequence[float], tol: float) -> None:
    if any(w < -tol for w in weights):
        raise ValueError("mixture weights must be nonnegative")
    if abs(sum(weights) - 1.0) > tol:
        raise ValueError(f"mixture weights must sum to 1, got {sum(weights)}")


class OperationalTheory:
    """A named finite collection of procedures with verified mixture relations."""

    def __init__(
        self,
        preparations: Iterable[Preparation] = (),
        transformations: Iterable[Transformation] = (),
        measurements: Iterable[Measurement] = (),
        mixtures: Iterable[MixtureDecl] = (),
        tol: float = VALIDITY_TOL,
    ) -> None:
        self.preparations: dict[str, Preparation] = {}
        self.transformations: dict[str, Transformation] = {}
        self.measurements: dict[str, Measurement] = {}
        for p in preparations:
            if p.label in self.preparations:
                raise ValueError(f"duplicate preparation label {p.label!r}")
            self.preparations[p.label] = p
        for t in transformations:
            if t.label in self.transformations:
                raise ValueError(f"duplicate transformation label {t.label!r}")
            self.transformations[t.label] = t
        for m in measurements:
            if m.label in self.measurements:
                raise ValueError(f"duplicate measurement label {m.label!r}")
            self.measurements[m.label] = m
        self.mixtures: tuple[MixtureDecl, ...] = tuple(mixtures)
        dims = (
            [p.rho.dim for p in self.preparations.values()]
            + [m.povm.dim for m in self.measurements.values()]
            + [t.channel.dim_in for t in self.transformations.values()]
        )
        if dims and any(d != dims[0] for d in dims):
            raise ValueError("all procedures in a theory must share one dimension")
        self.dim = dims[0] if dims else 0
        dev = self.max_mixture_deviation()
        if dev > tol:
            raise ValueError(f"a declared mixture fails to verify (deviation {dev:.3e})")

    def max_mixture_deviation(self) -> float:
        """Largest entrywise deviation of any declared mixture from its target."""
        worst = 0.0
        for decl in self.mixtures:
            weights = [w for w, _ in decl.components]
            _check_weights(weights, VALIDITY_TOL)
            if decl.kind == "prep":
                target = self.preparations[decl.target].rho.matrix
                total = sum(w * self.preparations[l].rho.matrix for w, l in decl.components)
                worst = max(worst, float(np.abs(total - target).max()))
            elif decl.kind == "meas":
                target = self.measurements[decl.target].povm
                parts = [self.measurements[l].povm for _, l in decl.components]
                if any(p.outcome_count != target.outcome_count for p in parts):
                    raise ValueError(f"mixture {decl.target!r} mixes unequal outcome counts")
                for k in range(target.outcome_count):
                    total = sum(w * povm[k].matrix for (w, _), povm in zip(decl.components, parts))
                    worst = max(worst, float(np.abs(total - target[k].matrix).max()))
            else:
                target = choi_matrix(self.transformations[decl.target].channel).matrix
                total = sum(
                    w * choi_matrix(self.transformations[l].channel).matrix
                    for w, l in decl.components
                )
                worst = max(worst, float(np.abs(total - target).max()))
        return worst

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "preparations": [
                {"label": p.label, "rho": matrix_to_json(p.rho.matrix)}
                for p in self.preparations.values()
            ],
            "measurements": [
                {"label": m.label, "effects": [matrix_to_json(e.matrix) for e in m.povm.effects]}
                for m in self.measurements.values()
            ],
            "transformations": [
                {"label": t.label, "kraus": [matrix_to_json(w) for w in t.channel.kraus_ops]}
                for t in self.transformations.values()
            ],
            "mixtures": [
                {
                    "kind": d.kind,
                    "target": d.target,
                    "components": [{"weight": w, "label": l} for w, l in d.components],
                }
                for d in self.mixtures
            ],
        }

    @classmethod
    def from_json(cls, doc: dict, tol: float = VALIDITY_TOL) -> "OperationalTheory":
        preps = [
            Preparation(entry["label"], DensityOperator(matrix_from_json(entry["rho"])))
            for entry in doc.get("preparations", ())
        ]
        meas = [
            Measurement(
                entry["label"],
                Povm(tuple(Effect(matrix_from_json(e)) for e in entry["effects"])),
            )
            for entry in doc.get("measurements", ())
        ]
        transf = [
            Transformation(
                entry["label"],
                KrausChannel(tuple(matrix_from_json(w) for w in entry["kraus"])),
            )
            for entry in doc.get("transformations", ())
        ]
        mixtures = [
            MixtureDecl(
                entry["kind"],
                entry["target"],
                tuple((c["weight"], c["label"]) for c in entry["components"]),
            )
            for entry in doc.get("mixtures", ())
        ]
        return cls(preps, transf, meas, mixtures, tol=tol)


# ---------------------------------------------------------------------------
# Equivalence of procedures (decided by operator equality, the exact quantum
# criterion for equal statistics under every counterpart procedure).


def prep_equivalent(p: Preparation, q: Preparation, tol: float = IDENTITY_TOL) -> bool:
    if p.rho.dim != q.rho.dim:
        raise ValueError("preparations act on different dimensions")
    return bool(np.abs(p.rho.matrix - q.rho.matrix).max() <= tol)


def meas_equivalent(
    m: Measurement,
    n: Measurement,
    allow_permutation: bool = True,
    tol: float = IDENTITY_TOL,
) -> tuple[int, ...] | None:
    """Outcome pairing under which the two POVMs agree elementwise, or ``None``.

    Returns a permutation ``pi`` with ``E_k = F_pi(k)`` within ``tol`` if one
    exists.  Outcome-count mismatch yields ``None`` (it is not an error).
    With ``allow_permutation`` false only the identity pairing is tried.
    Permuted outcome lists describe the same equivalence class, so the flag
    defaults to true.
    """
    if m.povm.dim != n.povm.dim:
        raise ValueError("measurements act on different dimensions")
    k = m.povm.outcome_count
    if k != n.povm.outcome_count:
        return None

    def matches(pi: tuple[int, ...]) -> bool:
        return all(
            np.abs(m.povm[i].matrix - n.povm[pi[i]].matrix).max() <= tol for i in range(k)
        )

    if not allow_permutation:
        ident = tuple(range(k))
        return ident if matches(ident) else None
    if k > MAX_PERMUTATION_OUTCOMES:
        raise ValueError(
            f"refusing exhaustive permutation search over {k} > {MAX_PERMUTATION_OUTCOMES} outcomes"
        )
    for pi in itertools.permutations(range(k)):
        if matches(pi):
            return pi
    return None


def transf_equivalent(s: Transformation, t: Transformation, tol: float = IDENTITY_TOL) -> bool:
    if (s.channel.dim_in, s.channel.dim_out) != (t.channel.dim_in, t.channel.dim_out):
        raise ValueError("transformations act on different dimensions")
    return channels_equal(s.channel, t.channel, tol=tol)


# ---------------------------------------------------------------------------
# Context-generating constructions.


def _mixture_note(components: Sequence[tuple[float, str]]) -> str:
    return "mixture: " + " + ".join(f"{w:g}*{label}" for w, label in components)


def mix_preparations(
    components: Sequence[tuple[float, Preparation]], label: str, tol: float = VALIDITY_TOL
) -> Preparation:
    """Convex mixture of preparations; component labels are kept as the context."""
    weights = [w for w, _ in components]
    _check_weights(weights, tol)
    dims = {p.rho.dim for _, p in components}
    if len(dims) != 1:
        raise ValueError("mixture components act on different dimensions")
    rho = sum(w * p.rho.matrix for w, p in components)
    note = _mixture_note([(w, p.label) for w, p in components])
    return Preparation(label, DensityOperator(rho), note)


def mix_measurements(
    components: Sequence[tuple[float, Measurement]], label: str, tol: float = VALIDITY_TOL
) -> Measurement:
    """Element-wise convex mixture of measurements with equal outcome counts."""
    weights = [w for w, _ in components]
    _check_weights(weights, tol)
    counts = {m.povm.outcome_count for _, m in components}
    if len(counts) != 1:
        raise ValueError("mixture components have different outcome counts")
    k = counts.pop()
    effects = tuple(
        Effect(sum(w * m.povm[i].matrix for w, m in components)) for i in range(k)
    )
    note = _mixture_note([(w, m.label) for w, m in components])
    return Measurement(label, Povm(effects), note)


def coarse_grain_povm(
    m: Measurement, partition: Sequence[Sequence[int]], label: str | None = None
) -> Measurement:
    """Merge outcomes along a partition of the outcome indices.

    ``partition`` must consist of disjoint index sets that jointly cover all
    outcomes; merged effects are the partial sums.
    """
    k = m.povm.outcome_count
    seen: set[int] = set()
    for block in partition:
        for j in block:
            if j < 0 or j >= k:
                raise ValueError(f"outcome index {j} out of range")
            if j in seen:
                raise ValueError(f"outcome index {j} appears twice in the partition")
            seen.add(j)
    if seen != set(range(k)):
        raise ValueError("partition does not cover all outcomes")
    effects = tuple(Effect(sum(m.povm[j].matrix for j in block)) for block in partition)
    new_label = label if label is not None else f"{m.label}|coarse"
    note = "coarse graining of " + m.label
    return Measurement(new_label, Povm(effects), note)


def mix_channels(
    components: Sequence[tuple[float, Transformation]], label: str, tol: float = VALIDITY_TOL
) -> Transformation:
    """Convex mixture of channels via the union of sqrt(weight)-scaled Kraus sets."""
    weights = [w for w, _ in components]
    _check_weights(weights, tol)
    dims = {(t.channel.dim_in, t.channel.dim_out) for _, t in components}
    if len(dims) != 1:
        raise ValueError("mixture components act on different dimensions")
    ops: list[np.ndarray] = []
    for w, t in components:
        scale = math.sqrt(w)
        ops.extend(scale * op for op in t.channel.kraus_ops)
    mixed = KrausChannel(tuple(ops))
    # The Choi matrix is additive over Kraus terms, so this holds to rounding.
    expected = sum(w * choi_matrix(t.channel).matrix for w, t in components)
    dev = float(np.abs(choi_matrix(mixed).matrix - expected).max())
    if dev > 10 * IDENTITY_TOL:
        raise ArithmeticError(f"mixed channel deviates from the weighted sum by {dev:.3e}")
    note = _mixture_note([(w, t.label) for w, t in components])
    return Transformation(label, mixed, note)


# ---------------------------------------------------------------------------
# The canonical hexagon instance: six pure qubit states forming two
# interleaved trines in the z-x great circle, the five decompositions of the
# completely mixed state, the three associated PVMs with their uniform
# mixture, and the y-axis projection channel with its five decompositions.

SQRT3 = math.sqrt(3.0)

#: Angles (as channel labels) of the six rotations about the Bloch y axis.
ROTATION_LABELS = ("T0", "T60", "T120", "T180", "T240", "T300")


def hexagon_state_vectors() -> dict[str, np.ndarray]:
    """The six real unit vectors, sixty degrees apart on the z-x circle."""
    return {
        "a": np.array([1.0, 0.0]),
        "A": np.array([0.0, 1.0]),
        "b": np.array([0.5, SQRT3 / 2]),
        "B": np.array([SQRT3 / 2, -0.5]),
        "c": np.array([0.5, -SQRT3 / 2]),
        "C": np.array([SQRT3 / 2, 0.5]),
    }


def hexagon_states() -> dict[str, DensityOperator]:
    return {name: pure_density(v) for name, v in hexagon_state_vectors().items()}


def rotation_transformations() -> dict[str, Transformation]:
    """Unitary rotation channels at 0, 60, ..., 300 degrees about the y axis."""
    out = {}
    for k, name in enumerate(ROTATION_LABELS):
        theta = k * math.pi / 3
        out[name] = Transformation(name, unitary_channel(unitary_rotation_y(theta)))
    return out


def y_projection_channel() -> KrausChannel:
    """The channel that collapses every Bloch vector onto the y axis.

    Defined operationally by the Kraus set ``{U_0/sqrt(2), U_pi/sqrt(2)}``;
    the projection property is verified in tests rather than assumed.
    """
    s = math.sqrt(0.5)
    return KrausChannel((s * unitary_rotation_y(0.0), s * unitary_rotation_y(math.pi)))


def hexagon_theory() -> OperationalTheory:
    """The canonical instance used by all the no-go drivers.

    Contains the six pure hexagon preparations, the five mixtures that each
    produce the completely mixed state, the three antipodal-pair PVMs with
    their uniform mixture and the coin-flip measurement, and the six
    rotations with the y-axis projection channel declared as five distinct
    convex mixtures of them.
    """
    states = hexagon_states()
    preps = {name: Preparation(name, rho) for name, rho in states.items()}
    mixed_preps = [
        mix_preparations([(0.5, preps["a"]), (0.5, preps["A"])], "aA"),
        mix_preparations([(0.5, preps["b"]), (0.5, preps["B"])], "bB"),
        mix_preparations([(0.5, preps["c"]), (0.5, preps["C"])], "cC"),
        mix_preparations(
            [(1 / 3, preps["a"]), (1 / 3, preps["b"]), (1 / 3, preps["c"])], "abc"
        ),
        mix_preparations(
            [(1 / 3, preps["A"]), (1 / 3, preps["B"]), (1 / 3, preps["C"])], "ABC"
        ),
    ]
    prep_mixture_decls = [
        MixtureDecl("prep", "aA", ((0.5, "a"), (0.5, "A"))),
        MixtureDecl("prep", "bB", ((0.5, "b"), (0.5, "B"))),
        MixtureDecl("prep", "cC", ((0.5, "c"), (0.5, "C"))),
        MixtureDecl("prep", "abc", ((1 / 3, "a"), (1 / 3, "b"), (1 / 3, "c"))),
        MixtureDecl("prep", "ABC", ((1 / 3, "A"), (1 / 3, "B"), (1 / 3, "C"))),
    ]

    pvms = {
        "Ma": Measurement("Ma", Povm((Effect(states["a"].matrix), Effect(states["A"].matrix)))),
        "Mb": Measurement("Mb", Povm((Effect(states["b"].matrix), Effect(states["B"].matrix)))),
        "Mc": Measurement("Mc", Povm((Effect(states["c"].matrix), Effect(states["C"].matrix)))),
    }
    mixed_meas = mix_measurements(
        [(1 / 3, pvms["Ma"]), (1 / 3, pvms["Mb"]), (1 / 3, pvms["Mc"])], "M"
    )
    coin = Measurement(
        "Mtrivial",
        Povm((Effect(identity(2) / 2), Effect(identity(2) / 2))),
        "ignores the system and flips a fair coin",
    )
    meas_mixture_decls = [
        MixtureDecl("meas", "M", ((1 / 3, "Ma"), (1 / 3, "Mb"), (1 / 3, "Mc"))),
    ]

    rotations = rotation_transformations()
    projection = Transformation("T", y_projection_channel())
    transf_mixture_decls = [
        MixtureDecl("transf", "T", ((0.5, "T0"), (0.5, "T180"))),
        MixtureDecl("transf", "T", ((0.5, "T60"), (0.5, "T240"))),
        MixtureDecl("transf", "T", ((0.5, "T120"), (0.5, "T300"))),
        MixtureDecl("transf", "T", ((1 / 3, "T0"), (1 / 3, "T120"), (1 / 3, "T240"))),
        MixtureDecl("transf", "T", ((1 / 3, "T60"), (1 / 3, "T180"), (1 / 3, "T300"))),
    ]

    return OperationalTheory(
        preparations=list(preps.values()) + mixed_preps,
        transformations=list(rotations.values()) + [projection],
        measurements=list(pvms.values()) + [mixed_meas, coin],
        mixtures=prep_mixture_decls + meas_mixture_decls + transf_mixture_decls,
    )
