"""Constraint systems for noncontextuality assumptions and their certificates.

The common core of the preparation and transformation no-go arguments is a
tiny constraint-feasibility question: can nonnegative distribution values at
each ontic point satisfy a set of complementarity ("at least one of the pair
vanishes") constraints together with a family of mutually equal linear
forms, while every distribution still carries total mass one?

``pointwise_feasibility`` decides this mechanically.  Stage 1 enumerates the
zero patterns allowed by the complementarity pairs, works out the extreme
rays of each pattern's solution cone in exact rational arithmetic, and
records a human-readable elimination derivation wherever a pattern forces
the all-zero solution.  Stage 2 asks (as a small linear program) whether
nonnegative combinations of the collected rays can give every variable
total mass exactly one; a yes is returned as an explicit finite model, a no
as the exhaustive case table.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .ontomodel import Distribution, IndicatorSet, OnticSpace, OntModel, is_outcome_deterministic
from .operational import (
    Transformation,
    hexagon_state_vectors,
    hexagon_theory,
    mix_channels,
    rotation_transformations,
    y_projection_channel,
)
from .qmath import (
    IDENTITY_TOL,
    VALIDITY_TOL,
    DensityOperator,
    Effect,
    Povm,
    apply_channel,
    born_probability,
    choi_deviation,
    density_from_bloch,
    identity,
    matrix_to_json,
    pure_density,
)

#: Hard ceiling on the zero-pattern enumeration (2**20 patterns).
MAX_DISJOINT_PAIRS = 20

#: Tolerance of the stage-2 normalization check ("each distribution
#: integrates to one").
NORMALIZATION_TOL = 1e-9


class VerificationError(RuntimeError):
    """A driver failed to certify the verdict its premises guarantee."""


def _as_fraction(value) -> Fraction:
    """Exact coefficient coercion; floats are accepted only when a small
    rational reproduces them exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        guess = Fraction(value).limit_denominator(10**9)
        if float(guess) == value:
            return guess
        raise ValueError(f"float {value!r} has no small exact rational representation")
    raise TypeError(f"cannot interpret {value!r} as an exact coefficient")


@dataclass(frozen=True)
class ConstraintSystem:
    """Nonnegative pointwise unknowns with complementarity pairs and a family
    of linear forms constrained to be mutually equal at every ontic point."""

    variables: tuple[str, ...]
    disjoint_pairs: tuple[tuple[str, str], ...]
    equality_groups: tuple[tuple[tuple[str, Fraction], ...], ...]

    def __init__(
        self,
        variables: Sequence[str],
        disjoint_pairs: Iterable[Sequence[str]] = (),
        equality_groups: Iterable[Mapping[str, object]] = (),
    ) -> None:
        names = tuple(str(v) for v in variables)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        declared = set(names)
        pairs = []
        seen_pairs = set()
        for pair in disjoint_pairs:
            u, v = (str(x) for x in pair)
            if u == v:
                raise ValueError(f"a disjointness pair needs two distinct variables, got {u!r}")
            if u not in declared or v not in declared:
                raise ValueError(f"pair ({u!r}, {v!r}) references undeclared variables")
            key = frozenset((u, v))
            if key in seen_pairs:
                raise ValueError(f"duplicate pair ({u!r}, {v!r})")
            seen_pairs.add(key)
            pairs.append((u, v))
        forms = []
        for group in equality_groups:
            entries = []
            for var, coeff in group.items():
                if var not in declared:
                    raise ValueError(f"form references undeclared variable {var!r}")
                frac = _as_fraction(coeff)
                if frac != 0:
                    entries.append((str(var), frac))
            entries.sort(key=lambda item: names.index(item[0]))
            forms.append(tuple(entries))
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "disjoint_pairs", tuple(pairs))
        object.__setattr__(self, "equality_groups", tuple(forms))

    def form_dicts(self) -> list[dict[str, Fraction]]:
        return [dict(form) for form in self.equality_groups]

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "disjoint_pairs": [list(p) for p in self.disjoint_pairs],
            "equality_groups": [
                {var: str(coeff) for var, coeff in form} for form in self.equality_groups
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ConstraintSystem":
        return cls(
            variables=doc["variables"],
            disjoint_pairs=doc.get("disjoint_pairs", ()),
            equality_groups=doc.get("equality_groups", ()),
        )


@dataclass(frozen=True)
class DerivationStep:
    """One sound elimination move in a pattern's all-zero derivation."""

    kind: str  # "coefficient-clash" | "vanishing-form" | "sign-elimination"
    variables: tuple[str, ...]
    left_form: int
    right_form: int
    detail: str
    left_coeff: str | None = None
    right_coeff: str | None = None

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind,
            "variables": list(self.variables),
            "left_form": self.left_form,
            "right_form": self.right_form,
            "detail": self.detail,
        }
        if self.left_coeff is not None:
            doc["left_coeff"] = self.left_coeff
            doc["right_coeff"] = self.right_coeff
        return doc


@dataclass(frozen=True)
class CaseRow:
    """One zero pattern with its forced conclusion."""

    pattern: tuple[int, ...]
    zeroed: tuple[str, ...]
    conclusion: str  # "all-zero" | "ray" | "mixed-values"
    ray: tuple[str, ...] | None = None
    steps: tuple[DerivationStep, ...] = ()
    values: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        doc: dict = {
            "pattern": list(self.pattern),
            "zeroed": list(self.zeroed),
            "conclusion": self.conclusion,
        }
        doc["ray"] = list(self.ray) if self.ray is not None else None
        if self.steps:
            doc["steps"] = [s.to_json() for s in self.steps]
        if self.values is not None:
            doc["values"] = list(self.values)
        return doc


@dataclass(frozen=True)
class PremiseCheck:
    name: str
    max_deviation: float

    def to_json(self) -> dict:
        return {"name": self.name, "max_deviation": self.max_deviation}


@dataclass(frozen=True)
class Certificate:
    """Feasibility verdict backed by either a witness model or a case table."""

    verdict: str  # "Feasible" | "Infeasible"
    system: ConstraintSystem | None
    witness: OntModel | None
    cases: tuple[CaseRow, ...]
    premise_checks: tuple[PremiseCheck, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.verdict == "Feasible"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "system": self.system.to_json() if self.system is not None else None,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "cases": [c.to_json() for c in self.cases],
            "premise_checks": [p.to_json() for p in self.premise_checks],
        }


# ---------------------------------------------------------------------------
# Exact rational linear algebra (tiny systems; robustness beats generality).


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot cols)."""
    mat = [list(r) for r in rows]
    n_cols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        pivot_row = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [x - factor * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat, pivots


def _nullspace(rows: list[list[Fraction]], n_cols: int) -> list[list[Fraction]]:
    """Basis of the rational nullspace of the row system."""
    if not rows:
        return [[Fraction(1) if j == i else Fraction(0) for j in range(n_cols)] for i in range(n_cols)]
    rref, pivots = _rref(rows)
    free_cols = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * n_cols
        vec[fc] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -rref[row_idx][fc]
        basis.append(vec)
    return basis


def _equality_rows(system: ConstraintSystem) -> list[dict[str, Fraction]]:
    """Differences "form 0 minus form i" whose pointwise vanishing encodes the
    mutual equality of all forms."""
    forms = system.form_dicts()
    rows = []
    for other in forms[1:]:
        row = dict(forms[0])
        for var, coeff in other.items():
            row[var] = row.get(var, Fraction(0)) - coeff
        rows.append({v: c for v, c in row.items() if c != 0})
    return rows


def _pattern_extreme_rays(
    system: ConstraintSystem, forced_zero: frozenset[str]
) -> list[tuple[Fraction, ...]]:
    """Extreme rays of ``{x >= 0 : equality rows hold, x[forced] = 0}``.

    A nonzero nonnegative solution is an extreme ray exactly when the
    equality rows restricted to its support have nullity one, so supports
    are enumerated outright; the systems here never exceed a handful of
    variables.  Rays are normalized so their first nonzero coordinate is 1.
    """
    free = [v for v in system.variables if v not in forced_zero]
    if not free:
        return []
    rows = _equality_rows(system)
    matrix = [[row.get(v, Fraction(0)) for v in free] for row in rows]
    rays: list[tuple[Fraction, ...]] = []
    for size in range(1, len(free) + 1):
        for support in itertools.combinations(range(len(free)), size):
            sub = [[row[j] for j in support] for row in matrix]
            basis = _nullspace(sub, size)
            if len(basis) != 1:
                continue
            vec = basis[0]
            if any(x == 0 for x in vec):
                continue  # true support is smaller; found at a smaller size
            if all(x > 0 for x in vec):
                pass
            elif all(x < 0 for x in vec):
                vec = [-x for x in vec]
            else:
                continue  # not signable into the nonnegative orthant
            scale = vec[0]
            vec = [x / scale for x in vec]
            full = [Fraction(0)] * len(system.variables)
            for j, value in zip(support, vec):
                full[system.variables.index(free[j])] = value
            rays.append(tuple(full))
    return rays


# ---------------------------------------------------------------------------
# Human-readable all-zero derivations.


def _reduce_forms(
    forms: list[dict[str, Fraction]], zero: set[str]
) -> list[dict[str, Fraction]]:
    return [{v: c for v, c in f.items() if v not in zero} for f in forms]


def _derive_all_zero(
    system: ConstraintSystem, forced_zero: frozenset[str]
) -> tuple[bool, tuple[DerivationStep, ...]]:
    """Iteratively eliminate variables that the pattern forces to zero.

    Two sound moves are used, both relying on the mutual equality of the
    forms and on nonnegativity: if two reduced forms differ by a uniformly
    signed combination of variables, those variables vanish; the special
    case of a single shared variable with clashing coefficients is recorded
    as such, and a form that has already reduced to zero annihilates any
    other uniformly signed form.  Returns whether every free variable was
    eliminated, plus the recorded steps.
    """
    forms = system.form_dicts()
    zero = set(forced_zero)
    steps: list[DerivationStep] = []
    progress = True
    while progress:
        progress = False
        reduced = _reduce_forms(forms, zero)
        for i in range(len(reduced)):
            for j in range(i + 1, len(reduced)):
                diff = dict(reduced[i])
                for var, coeff in reduced[j].items():
                    diff[var] = diff.get(var, Fraction(0)) - coeff
                diff = {v: c for v, c in diff.items() if c != 0}
                if not diff:
                    continue
                positive = all(c > 0 for c in diff.values())
                negative = all(c < 0 for c in diff.values())
                if not (positive or negative):
                    continue
                vars_ = tuple(sorted(diff))
                if len(vars_) == 1 and vars_[0] in reduced[i] and vars_[0] in reduced[j]:
                    v = vars_[0]
                    left, right = reduced[i][v], reduced[j][v]
                    steps.append(
                        DerivationStep(
                            kind="coefficient-clash",
                            variables=(v,),
                            left_form=i,
                            right_form=j,
                            left_coeff=str(left),
                            right_coeff=str(right),
                            detail=(
                                f"equating forms {i} and {j} leaves ({left})*{v} = ({right})*{v}, "
                                f"so {v} = 0"
                            ),
                        )
                    )
                elif not reduced[i] or not reduced[j]:
                    empty, other = (i, j) if not reduced[i] else (j, i)
                    steps.append(
                        DerivationStep(
                            kind="vanishing-form",
                            variables=vars_,
                            left_form=empty,
                            right_form=other,
                            detail=(
                                f"form {empty} reduces to 0, so form {other} = 0 and "
                                f"nonnegativity forces {', '.join(vars_)} = 0"
                            ),
                        )
                    )
                else:
                    steps.append(
                        DerivationStep(
                            kind="sign-elimination",
                            variables=vars_,
                            left_form=i,
                            right_form=j,
                            detail=(
                                f"forms {i} and {j} differ by a uniformly signed combination "
                                f"of {', '.join(vars_)}, so these vanish"
                            ),
                        )
                    )
                zero.update(vars_)
                progress = True
                break
            if progress:
                break
    complete = all(v in zero for v in system.variables)
    return complete, tuple(steps)


# ---------------------------------------------------------------------------
# The certifier.


def pointwise_feasibility(system: ConstraintSystem, tol: float = NORMALIZATION_TOL) -> Certificate:
    """Decide whether normalized distributions can satisfy the system.

    Raises ``ValueError`` for a system without variables or with more than
    ``MAX_DISJOINT_PAIRS`` complementarity pairs.
    """
    if not system.variables:
        raise ValueError("degenerate system: no variables")
    n_pairs = len(system.disjoint_pairs)
    if n_pairs > MAX_DISJOINT_PAIRS:
        raise ValueError(
            f"{n_pairs} disjointness pairs exceed the enumeration bound of {MAX_DISJOINT_PAIRS}"
        )

    cases: list[CaseRow] = []
    rays: list[tuple[Fraction, ...]] = []
    seen: set[tuple[Fraction, ...]] = set()
    for bits in itertools.product((0, 1), repeat=n_pairs):
        forced = frozenset(system.disjoint_pairs[i][bits[i]] for i in range(n_pairs))
        pattern_rays = _pattern_extreme_rays(system, forced)
        if pattern_rays:
            first = tuple(str(x) for x in pattern_rays[0])
            cases.append(CaseRow(bits, tuple(sorted(forced)), "ray", ray=first))
            for ray in pattern_rays:
                if ray not in seen:
                    seen.add(ray)
                    rays.append(ray)
        else:
            complete, steps = _derive_all_zero(system, forced)
            cases.append(
                CaseRow(
                    bits,
                    tuple(sorted(forced)),
                    "all-zero",
                    steps=steps if complete else (),
                )
            )

    if not rays:
        return Certificate("Infeasible", system, None, tuple(cases))

    # Stage 2: nonnegative ray weights giving every variable total mass one.
    matrix = np.array([[float(ray[i]) for ray in rays] for i in range(len(system.variables))])
    target = np.ones(len(system.variables))
    result = linprog(
        c=np.zeros(len(rays)),
        A_eq=matrix,
        b_eq=target,
        bounds=[(0, None)] * len(rays),
        method="highs",
    )
    if result.status == 2:  # proven infeasible
        return Certificate("Infeasible", system, None, tuple(cases))
    if result.status != 0:
        raise RuntimeError(f"normalization solve failed unexpectedly: {result.message}")

    weights = np.maximum(result.x, 0.0)
    used = [(w, ray) for w, ray in zip(weights, rays) if w > 1e-12]
    residual = float(
        np.abs(
            sum(w * np.array([float(x) for x in ray]) for w, ray in used) - target
        ).max()
    )
    if residual > tol:
        raise RuntimeError(f"normalization residual {residual:.3e} exceeds {tol}")
    witness = _witness_model(system, used)
    _verify_witness(system, witness, tol)
    return Certificate("Feasible", system, witness, tuple(cases))


def _witness_model(
    system: ConstraintSystem, used: list[tuple[float, tuple[Fraction, ...]]]
) -> OntModel:
    """One ontic point per surviving ray; each variable's values across the
    points form its distribution."""
    space = OnticSpace(len(used))
    prep_map = {}
    for i, var in enumerate(system.variables):
        weights = np.array([w * float(ray[i]) for w, ray in used])
        prep_map[var] = Distribution(weights)
    return OntModel(space=space, prep_map=prep_map)


def _verify_witness(system: ConstraintSystem, witness: OntModel, tol: float) -> float:
    """Re-check the witness against the system it claims to satisfy."""
    values = {v: witness.prep_map[v].weights for v in system.variables}
    worst = 0.0
    for u, v in system.disjoint_pairs:
        worst = max(worst, float((values[u] * values[v]).max()))
    forms = system.form_dicts()
    if forms:
        evaluated = [
            sum(float(c) * values[v] for v, c in form.items()) if form else np.zeros(witness.space.size)
            for form in forms
        ]
        for other in evaluated[1:]:
            worst = max(worst, float(np.abs(evaluated[0] - other).max()))
    for var in system.variables:
        worst = max(worst, abs(float(values[var].sum()) - 1.0))
    if worst > tol:
        raise RuntimeError(f"witness deviates from its system by {worst:.3e}")
    return worst


# ---------------------------------------------------------------------------
# The preparation no-go driver.


def build_prep_system() -> ConstraintSystem:
    """Three complementarity pairs plus the five decompositions of the
    completely mixed state, one variable per hexagon preparation."""
    half = Fraction(1, 2)
    third = Fraction(1, 3)
    return ConstraintSystem(
        variables=("a", "A", "b", "B", "c", "C"),
        disjoint_pairs=(("a", "A"), ("b", "B"), ("c", "C")),
        equality_groups=(
            {"a": half, "A": half},
            {"b": half, "B": half},
            {"c": half, "C": half},
            {"a": third, "b": third, "c": third},
            {"A": third, "B": third, "C": third},
        ),
    )


def _orthogonality_deviation() -> float:
    states = {name: pure_density(v).matrix for name, v in hexagon_state_vectors().items()}
    worst = 0.0
    for x, y in (("a", "A"), ("b", "B"), ("c", "C")):
        worst = max(worst, float(np.abs(states[x] @ states[y]).max()))
    return worst


def _mixture_deviation() -> float:
    theory = hexagon_theory()
    center = identity(2) / 2
    worst = 0.0
    for label in ("aA", "bB", "cC", "abc", "ABC"):
        worst = max(worst, float(np.abs(theory.preparations[label].rho.matrix - center).max()))
    return worst


def prep_nogo(tol: float = IDENTITY_TOL) -> Certificate:
    """Certify that no noncontextual assignment of distributions exists for
    the six hexagon preparations.

    First verifies the numeric premises on the canonical instance (the three
    orthogonalities that imply single-shot distinguishability, and the five
    mixtures all equal to the completely mixed state), then runs the
    pointwise certifier, whose verdict must be Infeasible.
    """
    checks = (
        PremiseCheck("orthogonality", _orthogonality_deviation()),
        PremiseCheck("mixtures-equal-center", _mixture_deviation()),
    )
    for check in checks:
        if check.max_deviation > tol:
            raise VerificationError(
                f"premise {check.name!r} deviates by {check.max_deviation:.3e}"
            )
    cert = pointwise_feasibility(build_prep_system())
    if cert.feasible:
        raise VerificationError("the preparation system was unexpectedly feasible")
    return Certificate("Infeasible", cert.system, None, cert.cases, checks)


# ---------------------------------------------------------------------------
# The measurement no-go driver.


@dataclass(frozen=True)
class ForcedIndicator:
    """The constant indicator pair forced for the coin-flip measurement."""

    outcome_count: int
    by_state_independence: tuple[float, float]
    by_permutation_symmetry: tuple[float, float]
    values: tuple[float, float]

    def indicator_set(self, size: int = 1) -> IndicatorSet:
        return IndicatorSet(np.tile(np.array(self.values).reshape(-1, 1), (1, size)))

    def to_json(self) -> dict:
        return {
            "outcome_count": self.outcome_count,
            "by_state_independence": list(self.by_state_independence),
            "by_permutation_symmetry": list(self.by_permutation_symmetry),
            "values": list(self.values),
        }


def trivial_povm_forced_indicator() -> ForcedIndicator:
    """Derive the forced representation of the coin-flip measurement twice.

    (a) Its outcome statistics are independent of the prepared state, since
    ``Tr(rho I/2) = 1/2`` for every state, so each indicator function is the
    constant one half.  (b) Swapping the two outcomes leaves the measurement
    in the same equivalence class, so a noncontextual representation must
    satisfy ``xi_1 = xi_2`` alongside ``xi_1 + xi_2 = 1``.  Both derivations
    must agree.
    """
    half_identity = Effect(identity(2) / 2)
    probes = [pure_density(v) for v in hexagon_state_vectors().values()]
    probes.append(DensityOperator(identity(2) / 2))
    # The y-axis states complete a spanning set of Hermitian operators, so
    # constancy on these probes implies constancy on every state (the Born
    # value is affine in the state).
    probes.append(density_from_bloch((0.0, 1.0, 0.0)))
    probes.append(density_from_bloch((0.0, -1.0, 0.0)))
    born_values = [born_probability(rho, half_identity) for rho in probes]
    dev = max(abs(p - 0.5) for p in born_values)
    if dev > IDENTITY_TOL:
        raise VerificationError(f"coin-flip statistics depend on the state (dev {dev:.3e})")
    by_independence = (born_values[0], 1.0 - born_values[0])

    # Exact solve of xi_1 - xi_2 = 0, xi_1 + xi_2 = 1.
    rows = [[Fraction(1), Fraction(-1), Fraction(0)], [Fraction(1), Fraction(1), Fraction(1)]]
    rref, pivots = _rref(rows)
    solution = [rref[pivots.index(c)][2] for c in (0, 1)]
    by_symmetry = (float(solution[0]), float(solution[1]))

    if max(abs(x - y) for x, y in zip(by_independence, by_symmetry)) > IDENTITY_TOL:
        raise VerificationError("the two forced-indicator derivations disagree")
    return ForcedIndicator(
        outcome_count=2,
        by_state_independence=by_independence,
        by_permutation_symmetry=by_symmetry,
        values=by_symmetry,
    )


_ALLOWED_MIXED_VALUES = {
    (Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1)),
    (Fraction(2, 3), Fraction(1, 3)),
    (Fraction(1, 3), Fraction(2, 3)),
}

_FORBIDDEN_MIXED_VALUE = (Fraction(1, 2), Fraction(1, 2))


def meas_nogo() -> Certificate:
    """Certify that outcome-deterministic sharp representations cannot mix to
    the forced coin-flip representation.

    The eight deterministic assignments to the three antipodal indicator
    pairs are enumerated exactly; their uniform element-wise mixtures only
    ever take the value pairs {0,1}, {1,0}, {2/3,1/3} or {1/3,2/3}, never
    the {1/2,1/2} that noncontextuality forces for the mixed measurement.
    """
    theory = hexagon_theory()
    coin = theory.measurements["Mtrivial"].povm
    mixed = theory.measurements["M"].povm
    povm_dev = max(
        float(np.abs(mixed[k].matrix - coin[k].matrix).max()) for k in range(2)
    )
    forced = trivial_povm_forced_indicator()
    forced_dev = max(abs(v - 0.5) for v in forced.values)
    checks = (
        PremiseCheck("mixed-povm-equals-coin-povm", povm_dev),
        PremiseCheck("forced-coin-indicator", forced_dev),
    )
    for check in checks:
        if check.max_deviation > IDENTITY_TOL:
            raise VerificationError(f"premise {check.name!r} deviates by {check.max_deviation:.3e}")

    pairs = (("a", "A"), ("b", "B"), ("c", "C"))
    rows: list[CaseRow] = []
    third = Fraction(1, 3)
    for bits in itertools.product((0, 1), repeat=3):
        # bit 0: the lower-case member takes value 1; bit 1: the capital does.
        lower_ones = sum(1 for b in bits if b == 0)
        mixed_pair = (third * lower_ones, third * (3 - lower_ones))
        if mixed_pair == _FORBIDDEN_MIXED_VALUE:
            raise VerificationError(f"assignment {bits} mixed to the forbidden (1/2, 1/2)")
        if mixed_pair not in _ALLOWED_MIXED_VALUES:
            raise VerificationError(f"assignment {bits} produced unexpected values {mixed_pair}")
        zeroed = tuple(sorted(pair[1 - b] for pair, b in zip(pairs, bits)))
        rows.append(
            CaseRow(
                pattern=bits,
                zeroed=zeroed,
                conclusion="mixed-values",
                values=(str(mixed_pair[0]), str(mixed_pair[1])),
            )
        )
    return Certificate("Infeasible", None, None, tuple(rows), checks)


@dataclass(frozen=True)
class OdUnsharpReport:
    """The coin-flip POVM's forced representation versus outcome determinism."""

    povm: Povm
    forced_values: tuple[float, float]
    outcome_deterministic: bool
    contradiction: bool

    def to_json(self) -> dict:
        return {
            "povm": [matrix_to_json(e.matrix) for e in self.povm.effects],
            "forced_values": list(self.forced_values),
            "outcome_deterministic": self.outcome_deterministic,
            "contradiction": self.contradiction,
        }


def od_unsharp_contradiction() -> OdUnsharpReport:
    """Outcome determinism for unsharp measurements contradicts measurement
    noncontextuality: the coin-flip POVM's forced constant representation is
    not idempotent."""
    forced = trivial_povm_forced_indicator()
    coin = Povm((Effect(identity(2) / 2), Effect(identity(2) / 2)))
    deterministic = is_outcome_deterministic(forced.indicator_set(size=1))
    return OdUnsharpReport(
        povm=coin,
        forced_values=forced.values,
        outcome_deterministic=deterministic,
        contradiction=not deterministic,
    )


# ---------------------------------------------------------------------------
# The transformation no-go driver.

#: Rotation labels standing in for the six preparation variables, pairing
#: each angle with its half-turn opposite.
TRANSF_VARIABLE_ORDER = ("T0", "T180", "T120", "T300", "T240", "T60")

#: The five decompositions of the projection channel, as (name, weights).
K_IDENTITIES = (
    ("K1", ((Fraction(1, 2), "T0"), (Fraction(1, 2), "T180"))),
    ("K2", ((Fraction(1, 2), "T60"), (Fraction(1, 2), "T240"))),
    ("K3", ((Fraction(1, 2), "T120"), (Fraction(1, 2), "T300"))),
    ("K4", ((Fraction(1, 3), "T0"), (Fraction(1, 3), "T120"), (Fraction(1, 3), "T240"))),
    ("K5", ((Fraction(1, 3), "T60"), (Fraction(1, 3), "T180"), (Fraction(1, 3), "T300"))),
)


def build_transf_system() -> ConstraintSystem:
    """The image-distribution system induced by the five channel mixtures and
    the disjoint-image pairs; structurally the preparation system under the
    angle relabeling."""
    half = Fraction(1, 2)
    third = Fraction(1, 3)
    return ConstraintSystem(
        variables=TRANSF_VARIABLE_ORDER,
        disjoint_pairs=(("T0", "T180"), ("T120", "T300"), ("T240", "T60")),
        equality_groups=(
            {"T0": half, "T180": half},
            {"T120": half, "T300": half},
            {"T240": half, "T60": half},
            {"T0": third, "T120": third, "T240": third},
            {"T60": third, "T180": third, "T300": third},
        ),
    )


def transf_nogo(grid_points: int = 36, tol: float = IDENTITY_TOL) -> Certificate:
    """Certify that no noncontextual assignment of transition matrices exists
    for the six rotations and the projection channel.

    Step 1 verifies the five convex decompositions of the projection channel
    at the Choi level.  Step 2 verifies the disjoint-image premise: on a grid
    of pure states in the z-x plane, rotations differing by a half turn
    produce orthogonal outputs.  Step 3 certifies the induced pointwise
    system, which must be infeasible.
    """
    rotations = rotation_transformations()
    projection = Transformation("T", y_projection_channel())

    checks: list[PremiseCheck] = []
    for name, weighted in K_IDENTITIES:
        mixture = mix_channels([(float(w), rotations[l]) for w, l in weighted], name)
        checks.append(PremiseCheck(name, choi_deviation(mixture.channel, projection.channel)))

    worst = 0.0
    for k in range(grid_points):
        phi = 2 * math.pi * k / grid_points
        rho = pure_density(np.array([math.cos(phi / 2), math.sin(phi / 2)]))
        for theta_label, opposite_label in (("T0", "T180"), ("T60", "T240"), ("T120", "T300")):
            out1 = apply_channel(rotations[theta_label].channel, rho).matrix
            out2 = apply_channel(rotations[opposite_label].channel, rho).matrix
            worst = max(worst, abs(complex(np.trace(out1 @ out2))))
    checks.append(PremiseCheck("disjoint-image", worst))

    for check in checks:
        if check.max_deviation > tol:
            raise VerificationError(f"premise {check.name!r} deviates by {check.max_deviation:.3e}")

    cert = pointwise_feasibility(build_transf_system())
    if cert.feasible:
        raise VerificationError("the transformation system was unexpectedly feasible")
    return Certificate("Infeasible", cert.system, None, cert.cases, tuple(checks))


# ---------------------------------------------------------------------------
# The full-measurement-set contradiction.


@dataclass(frozen=True)
class GleasonWitness:
    """A strictly fractional value forced on an allegedly idempotent function.

    Under measurement noncontextuality every effect is represented by one
    response function, and the generalized quadratic-form representation
    theorem makes that function ``Tr(rho_lambda E)`` for some state assigned
    to each ontic state.  Where the function of the first projector takes
    the value 1, the assigned state is that projector's ray, so the second
    projector's function takes the squared overlap as its value, which is
    strictly between 0 and 1.
    """

    psi: np.ndarray
    psi_prime: np.ndarray
    forced_value: float
    contradiction: bool

    def to_json(self) -> dict:
        from .qmath import complex_to_json

        return {
            "psi": [complex_to_json(z) for z in self.psi],
            "psi_prime": [complex_to_json(z) for z in self.psi_prime],
            "forced_value": self.forced_value,
            "contradiction": self.contradiction,
        }


def gleason_contradiction(
    psi: Sequence[complex], psi_prime: Sequence[complex], tol: float = VALIDITY_TOL
) -> GleasonWitness:
    """Force a strictly fractional response value from two non-orthogonal,
    non-parallel rays; raises ``ValueError`` when the overlap is 0 or 1
    within ``tol`` (no contradiction is available from such a pair)."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    w = np.asarray(psi_prime, dtype=complex).reshape(-1)
    if v.shape != (2,) or w.shape != (2,):
        raise ValueError("expected two 2-component state vectors")
    for vec in (v, w):
        if abs(np.linalg.norm(vec) - 1.0) > tol:
            raise ValueError("state vectors must be normalized")
    forced = born_probability(pure_density(v), Effect(np.outer(w, w.conj())))
    if forced <= tol:
        raise ValueError("orthogonal pair: the forced value is 0, not fractional")
    if forced >= 1.0 - tol:
        raise ValueError("parallel pair: the forced value is 1, not fractional")
    return GleasonWitness(psi=v, psi_prime=w, forced_value=forced, contradiction=True)
