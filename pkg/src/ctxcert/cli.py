"""Command-line front end.

Subcommands run the no-go drivers, certify user-supplied instances, run
model simulations, and emit the hexagon-geometry figure.  Machine-readable
output goes to ``--out`` (stdout when omitted, in which case the one-line
human summary moves to stderr).  Exit codes: 0 success or expected verdict,
1 internal error, 2 input error, 3 a feasibility query came back Feasible,
4 a verification deviated from its expected outcome.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import nogo
from .bbmodel import BBPreparation, PureOnticState, bb_simulate
from .operational import OperationalTheory, hexagon_state_vectors, prep_equivalent
from .qmath import Effect, Povm, identity, matrix_from_json, pure_density

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_FEASIBLE = 3
EXIT_DEVIATION = 4

DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 12345


class InputError(ValueError):
    """Bad user input: malformed file, unknown name, invalid flag value."""


# ---------------------------------------------------------------------------
# Output plumbing.


def _render_text(doc, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(doc, dict):
        lines = []
        for key, value in doc.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.append(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
        return "\n".join(lines)
    if isinstance(doc, list):
        lines = []
        for value in doc:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}- {value}")
        return "\n".join(lines) if lines else f"{pad}[]"
    return f"{pad}{doc}"


def _emit(payload: str, out: str | None, summary: str) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
        print(summary)
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")
        print(summary, file=sys.stderr)


def _emit_doc(doc: dict, args: argparse.Namespace, summary: str) -> None:
    if args.format == "text":
        payload = _render_text(doc) + "\n"
    else:
        payload = json.dumps(doc, indent=2) + "\n"
    _emit(payload, args.out, summary)


# ---------------------------------------------------------------------------
# nogo subcommand.


def cmd_nogo(args: argparse.Namespace) -> int:
    target = args.target
    if target == "prep":
        cert = nogo.prep_nogo()
        doc = cert.to_json()
        summary = f"prep: {cert.verdict} across {len(cert.cases)} zero patterns"
        ok = not cert.feasible
    elif target == "meas":
        cert = nogo.meas_nogo()
        doc = cert.to_json()
        summary = (
            f"meas: {cert.verdict}; {len(cert.cases)} deterministic assignments, "
            "none mixes to (1/2, 1/2)"
        )
        ok = not cert.feasible
    elif target == "transf":
        cert = nogo.transf_nogo()
        doc = cert.to_json()
        summary = f"transf: {cert.verdict} across {len(cert.cases)} zero patterns"
        ok = not cert.feasible
    elif target == "gleason":
        vectors = hexagon_state_vectors()
        witness = nogo.gleason_contradiction(vectors["a"], vectors["b"], tol=args.tol)
        doc = witness.to_json()
        summary = f"gleason: forced fractional value {witness.forced_value:.6f}"
        ok = witness.contradiction
    elif target == "od-unsharp":
        report = nogo.od_unsharp_contradiction()
        doc = report.to_json()
        summary = (
            "od-unsharp: forced representation "
            f"{tuple(round(v, 6) for v in report.forced_values)} is not idempotent"
        )
        ok = report.contradiction
    else:  # pragma: no cover - argparse restricts the choices
        raise InputError(f"unknown target {target!r}")
    _emit_doc(doc, args, summary)
    return EXIT_OK if ok else EXIT_DEVIATION


# ---------------------------------------------------------------------------
# feasibility subcommand.


def _system_from_theory(theory: OperationalTheory, tol: float) -> nogo.ConstraintSystem:
    """Derive the pointwise system a noncontextual model of the theory must
    solve: one variable per non-target preparation, disjointness from
    orthogonality, one equality form per declared preparation mixture."""
    decls = [d for d in theory.mixtures if d.kind == "prep"]
    targets = {d.target for d in decls}
    target_preps = [theory.preparations[t] for t in sorted(targets)]
    for i in range(1, len(target_preps)):
        if not prep_equivalent(target_preps[0], target_preps[i], tol=tol):
            raise InputError(
                "mixture targets fall into more than one equivalence class; "
                "this system type has a single family of mutually equal forms"
            )
    variables = [label for label in theory.preparations if label not in targets]
    for d in decls:
        for _, label in d.components:
            if label in targets:
                raise InputError(
                    f"mixture component {label!r} is itself a mixture target; unsupported"
                )
    pairs = []
    for i, u in enumerate(variables):
        for v in variables[i + 1 :]:
            product = theory.preparations[u].rho.matrix @ theory.preparations[v].rho.matrix
            if float(np.abs(product).max()) <= tol:
                pairs.append((u, v))
    forms = []
    for d in decls:
        form = {}
        for weight, label in d.components:
            frac = Fraction(weight).limit_denominator(10**9)
            form[label] = form.get(label, Fraction(0)) + frac
        forms.append(form)
    return nogo.ConstraintSystem(variables, pairs, forms)


def cmd_feasibility(args: argparse.Namespace) -> int:
    try:
        text = Path(args.instance).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.instance}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        print(
            f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_INPUT
    try:
        if isinstance(doc, dict) and "variables" in doc:
            system = nogo.ConstraintSystem.from_json(doc)
        elif isinstance(doc, dict) and "preparations" in doc:
            theory = OperationalTheory.from_json(doc, tol=args.tol)
            system = _system_from_theory(theory, tol=args.tol)
        else:
            raise InputError("instance is neither a constraint system nor a theory")
        cert = nogo.pointwise_feasibility(system)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc_out = cert.to_json()
    summary = f"feasibility: {cert.verdict} ({len(cert.cases)} zero patterns)"
    _emit_doc(doc_out, args, summary)
    return EXIT_OK if cert.feasible else EXIT_FEASIBLE


# ---------------------------------------------------------------------------
# simulate-bb subcommand.


def _parse_prep_spec(spec: str) -> BBPreparation:
    vectors = hexagon_state_vectors()
    if spec.startswith("@"):
        doc = json.loads(Path(spec[1:]).read_text(encoding="utf-8"))
        return BBPreparation(
            tuple(
                (entry["weight"], PureOnticState(np.array([complex(re, im) for re, im in entry["state"]])))
                for entry in doc
            )
        )
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if not parts:
        raise InputError("empty preparation spec")
    mixture = []
    for part in parts:
        if ":" in part:
            weight_text, name = part.split(":", 1)
            weight = float(weight_text)
        else:
            weight, name = 1.0, part
        if name not in vectors:
            raise InputError(f"unknown state {name!r}; choose from {sorted(vectors)}")
        mixture.append((weight, PureOnticState(vectors[name])))
    return BBPreparation(tuple(mixture))


def _parse_povm_spec(spec: str) -> Povm:
    vectors = hexagon_state_vectors()
    if spec.startswith("@"):
        doc = json.loads(Path(spec[1:]).read_text(encoding="utf-8"))
        effects = doc["effects"] if isinstance(doc, dict) else doc
        return Povm(tuple(Effect(matrix_from_json(m)) for m in effects))
    antipodes = {"a": "A", "b": "B", "c": "C"}
    if spec in antipodes:
        first = pure_density(vectors[spec]).matrix
        second = pure_density(vectors[antipodes[spec]]).matrix
        return Povm((Effect(first), Effect(second)))
    if spec in ("trivial", "mixed"):
        # The uniform mixture of the three antipodal PVMs equals the
        # coin-flip POVM, so both names yield {I/2, I/2}.
        return Povm((Effect(identity(2) / 2), Effect(identity(2) / 2)))
    raise InputError(f"unknown POVM {spec!r}; choose a/b/c/mixed/trivial or @file")


def cmd_simulate_bb(args: argparse.Namespace) -> int:
    try:
        prep = _parse_prep_spec(args.prep)
        povm = _parse_povm_spec(args.povm)
    except (InputError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = bb_simulate(prep, povm, args.samples, args.seed)
    doc = report.to_json()
    within = report.within_sigma(4.0)
    summary = (
        f"simulate-bb: n={report.n} seed={report.seed} "
        f"max|freq-born|={report.max_abs_dev:.3e} ({'within' if within else 'OUTSIDE'} 4 sigma)"
    )
    _emit_doc(doc, args, summary)
    return EXIT_OK if within else EXIT_DEVIATION


# ---------------------------------------------------------------------------
# figure-bloch subcommand.

_FIGURE_SIZE = 420.0
_FIGURE_RADIUS = 170.0


def _disk_xy(x: float, z: float) -> tuple[float, float]:
    cx = cy = _FIGURE_SIZE / 2
    return (cx + _FIGURE_RADIUS * x, cy - _FIGURE_RADIUS * z)


def render_bloch_disk_svg() -> str:
    """SVG of the z-x great-circle disk with the six states, the three
    antipodal segments, the two trine triangles, and the center marker."""
    states = {
        "a": (0.0, 1.0),
        "A": (0.0, -1.0),
        "b": (math.sqrt(3) / 2, -0.5),
        "B": (-math.sqrt(3) / 2, 0.5),
        "c": (-math.sqrt(3) / 2, -0.5),
        "C": (math.sqrt(3) / 2, 0.5),
    }
    cx = cy = _FIGURE_SIZE / 2
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_FIGURE_SIZE:.0f}" height="{_FIGURE_SIZE:.0f}" '
        f'viewBox="0 0 {_FIGURE_SIZE:.0f} {_FIGURE_SIZE:.0f}">',
        f'  <circle class="disk" cx="{cx}" cy="{cy}" r="{_FIGURE_RADIUS}" '
        'fill="none" stroke="#444444" stroke-width="1.5"/>',
        f'  <text x="{cx + 6:.1f}" y="{cy - _FIGURE_RADIUS - 8:.1f}" font-size="13" '
        'fill="#444444">+z</text>',
        f'  <text x="{cx + _FIGURE_RADIUS + 6:.1f}" y="{cy + 4:.1f}" font-size="13" '
        'fill="#444444">+x</text>',
    ]
    for first, second in (("a", "A"), ("b", "B"), ("c", "C")):
        x1, y1 = _disk_xy(*states[first])
        x2, y2 = _disk_xy(*states[second])
        lines.append(
            f'  <line class="decomposition-segment" x1="{x1:.2f}" y1="{y1:.2f}" '
            f'x2="{x2:.2f}" y2="{y2:.2f}" stroke="#1f77b4" stroke-width="1.6"/>'
        )
    for trine in (("a", "b", "c"), ("A", "B", "C")):
        points = " ".join(
            "{:.2f},{:.2f}".format(*_disk_xy(*states[name])) for name in trine
        )
        lines.append(
            f'  <polygon class="decomposition-triangle" points="{points}" '
            'fill="none" stroke="#d62728" stroke-width="1.6"/>'
        )
    lines.append(
        f'  <circle class="center-marker" cx="{cx}" cy="{cy}" r="4" fill="#2ca02c"/>'
    )
    lines.append(
        f'  <text x="{cx + 8:.1f}" y="{cy + 14:.1f}" font-size="13" fill="#2ca02c">I/2</text>'
    )
    for name, (x, z) in states.items():
        px, py = _disk_xy(x, z)
        lines.append(
            f'  <circle class="state-marker" cx="{px:.2f}" cy="{py:.2f}" r="5" fill="#111111"/>'
        )
        lx = px + (10 if x >= 0 else -22)
        ly = py + (-10 if z >= 0 else 18)
        lines.append(
            f'  <text class="state-label" x="{lx:.2f}" y="{ly:.2f}" font-size="15" '
            f'fill="#111111">{name}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_figure_bloch(args: argparse.Namespace) -> int:
    svg = render_bloch_disk_svg()
    _emit(svg, args.out, "figure-bloch: 6 states, 3 segments, 2 triangles, center marker")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxcert",
        description="Certify contextuality no-go theorems and explore their instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance")
        p.add_argument("--out", default=None, help="write machine-readable output here")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p_nogo = sub.add_parser("nogo", help="run one of the no-go drivers")
    p_nogo.add_argument(
        "target", choices=("prep", "meas", "transf", "gleason", "od-unsharp")
    )
    add_common(p_nogo)
    p_nogo.set_defaults(func=cmd_nogo)

    p_feas = sub.add_parser("feasibility", help="certify a user-supplied instance")
    p_feas.add_argument("instance", help="JSON constraint system or operational theory")
    add_common(p_feas)
    p_feas.set_defaults(func=cmd_feasibility)

    p_sim = sub.add_parser("simulate-bb", help="seeded model simulation")
    p_sim.add_argument("--prep", required=True, help='e.g. "0.5:a,0.5:A" or "@prep.json"')
    p_sim.add_argument("--povm", required=True, help='one of a/b/c/mixed/trivial or "@povm.json"')
    p_sim.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate_bb)

    p_fig = sub.add_parser("figure-bloch", help="emit the disk geometry as SVG")
    add_common(p_fig)
    p_fig.set_defaults(func=cmd_figure_bloch)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", 1e-9) <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "samples", 1) < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except nogo.VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_DEVIATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
