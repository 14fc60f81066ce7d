"""Command-line front end emitting deterministic JSON reports.

Usage:
    stabgraph check-opsys --n 1 --group X --m0-coeffs '{"I":[1,0],"Y":[0,1],"Z":[0,1]}'
    stabgraph stabilizer-span --n 2 --group ZI,IZ
    stabgraph kl-verify --n 3 --group ZZI,IZZ --errors III,XII,IXI,IIX

Exit codes:
    0 - verdict true
    1 - verdict false
    2 - usage or input error (one-line diagnostic on stderr, no report)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stabgraph import __version__
from stabgraph.exceptions import StabgraphError
from stabgraph.linalg import DEFAULT_TOL, dagger, hs_norm, matrix_from_json
from stabgraph.ncgraph import (
    build_ncgraph,
    find_anticliques,
    finite_average_check,
    group_unitaries,
    is_operator_system,
    kl_verify,
    pauli_coeffs_to_matrix,
)
from stabgraph.pauli import (
    canonicalizing_circuit,
    codespace_projector,
    generate_group,
    parse_pauli_list,
    to_matrix,
    z_generators,
)
from stabgraph.stabilizer import (
    M0Coefficients,
    classical_stabilizer_check,
    expected_span_rank,
    independent_generators,
    invalid_m0_sample,
    theorem2_span,
    valid_m0_check,
    valid_m0_sample,
    z_form_matrices,
)

SCHEMA = 1
TOL_ENV = "STABGRAPH_TOL"
COMMANDS = (
    "check-opsys",
    "anticliques",
    "kl-verify",
    "stabilizer-span",
    "classical-check",
    "canonicalize",
    "lemma-check",
)
NEEDS_GROUP = {"check-opsys", "anticliques", "kl-verify", "stabilizer-span", "classical-check", "canonicalize"}
NEEDS_M0 = {"check-opsys", "anticliques"}


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    tol: float = DEFAULT_TOL
    seed: int = 0
    group: tuple | None = None
    m0: dict | None = None
    errors: tuple | None = None
    s: int | None = None
    trials: int = 200
    output: str | None = None
    human: bool = False
    timing: bool = False
    jobs: int = 1

    def inputs(self) -> dict:
        """The fields that determine the verdict, as echoed in reports."""
        out = {"command": self.command, "n": self.n, "tol": self.tol, "seed": self.seed}
        for key in ("group", "m0", "errors", "s"):
            value = getattr(self, key)
            if value is not None:
                out[key] = list(value) if isinstance(value, tuple) else value
        if self.command == "lemma-check" and self.m0 is None:
            out["trials"] = self.trials
        return out

    @classmethod
    def from_inputs(cls, inputs: dict) -> "RunConfig":
        data = dict(inputs)
        for key in ("group", "errors"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        config = cls(**data)
        validate(config)
        return config


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stabgraph", description="Noncommutative-graph and stabilizer-code verifier.")
    parser.add_argument("--version", action="version", version=f"stabgraph {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--n", type=int, required=True, help="qubit count")
    parser.add_argument("--tol", type=float, default=None, help=f"tolerance (default ${TOL_ENV} or {DEFAULT_TOL})")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--group", help="comma-separated Pauli generators, e.g. ZZI,IZZ")
    parser.add_argument("--group-file", help="JSON array of generator strings")
    parser.add_argument("--m0", help="JSON file: dense matrix, Pauli coefficients or sigma-index coefficients")
    parser.add_argument("--m0-coeffs", help='inline Pauli coefficients, e.g. \'{"I":[1,0],"X":[1,0]}\'')
    parser.add_argument("--errors", help="comma-separated Pauli error operators")
    parser.add_argument("--errors-file", help="JSON array of error strings")
    parser.add_argument("--s", type=int, help="number of Z generators (lemma-check)")
    parser.add_argument("--trials", type=int, default=200, help="random trials for lemma-check")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--human", action="store_true", help="print a text summary instead of JSON")
    parser.add_argument("--timing", action="store_true", help="include elapsed_ms (breaks byte-identical output)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for brute-force loops")
    return parser


def _load_json(path: str, flag: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{flag}: bad JSON in {path}: {exc.msg}") from exc


def _string_list(value, flag: str) -> tuple:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise UsageError(f"{flag}: expected a JSON array of strings")
    return tuple(v.strip() for v in value)


def _pick(inline, path, flag_inline: str, flag_file: str):
    if inline is not None and path is not None:
        raise UsageError(f"both {flag_inline} and {flag_file} given (ambiguous source)")
    return inline, path


def parse_inputs(argv: list[str]) -> RunConfig:
    args = build_parser().parse_args(argv)

    tol = args.tol
    if tol is None:
        env = os.environ.get(TOL_ENV)
        try:
            tol = float(env) if env else DEFAULT_TOL
        except ValueError as exc:
            raise UsageError(f"${TOL_ENV}: not a number: {env!r}") from exc

    group_inline, group_file = _pick(args.group, args.group_file, "--group", "--group-file")
    group = None
    if group_inline is not None:
        group = tuple(t.strip() for t in group_inline.split(",") if t.strip())
    elif group_file is not None:
        group = _string_list(_load_json(group_file, "--group-file"), "--group-file")

    errors_inline, errors_file = _pick(args.errors, args.errors_file, "--errors", "--errors-file")
    errors = None
    if errors_inline is not None:
        errors = tuple(t.strip() for t in errors_inline.split(",") if t.strip())
    elif errors_file is not None:
        errors = _string_list(_load_json(errors_file, "--errors-file"), "--errors-file")

    coeffs_inline, m0_file = _pick(args.m0_coeffs, args.m0, "--m0-coeffs", "--m0")
    m0 = None
    if coeffs_inline is not None:
        try:
            m0 = json.loads(coeffs_inline)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--m0-coeffs: bad JSON: {exc.msg}") from exc
        if isinstance(m0, dict) and "coeffs" not in m0 and "alpha" not in m0 and "re" not in m0:
            m0 = {"n": args.n, "coeffs": m0}
    elif m0_file is not None:
        m0 = _load_json(m0_file, "--m0")
    if m0 is not None and not isinstance(m0, dict):
        raise UsageError("M0 must be a JSON object")

    config = RunConfig(
        command=args.command,
        n=args.n,
        tol=tol,
        seed=args.seed,
        group=group,
        m0=m0,
        errors=errors,
        s=args.s,
        trials=args.trials,
        output=args.output,
        human=args.human,
        timing=args.timing,
        jobs=args.jobs,
    )
    validate(config)
    return config


def validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise UsageError(f"unknown command {config.command!r}")
    if not (isinstance(config.tol, float) and math.isfinite(config.tol) and config.tol > 0):
        raise UsageError("--tol: tolerance must be positive")
    if config.n < 1:
        raise UsageError("--n: qubit count must be at least 1")
    if config.jobs < 1:
        raise UsageError("--jobs: must be at least 1")
    if config.command in NEEDS_GROUP and not config.group:
        raise UsageError(f"--group: required for {config.command}")
    if config.command in NEEDS_M0 and config.m0 is None:
        raise UsageError(f"--m0 or --m0-coeffs: required for {config.command}")
    if config.command == "kl-verify" and not config.errors:
        raise UsageError("--errors: required for kl-verify")
    if config.command == "lemma-check":
        s = config.s if config.s is not None else config.n
        if not 1 <= s <= config.n:
            raise UsageError("--s: need 1 <= s <= n")
        if config.trials < 1:
            raise UsageError("--trials: must be at least 1")


# ---------------------------------------------------------------- helpers


def _m0_matrix(payload: dict, n: int) -> np.ndarray:
    if "re" in payload:
        m = matrix_from_json(payload)
    elif "alpha" in payload:
        m = M0Coefficients.from_json(payload).to_matrix()
    elif "coeffs" in payload:
        m = pauli_coeffs_to_matrix(payload["coeffs"], payload.get("n", n))
    else:
        raise UsageError("M0 JSON needs one of 're', 'alpha' or 'coeffs'")
    if m.shape[0] != 2**n:
        raise UsageError(f"M0 has dimension {m.shape[0]}, expected {2**n} for n={n}")
    return m


def _m0_coefficients(payload: dict, n: int, s: int) -> M0Coefficients:
    if "alpha" in payload:
        return M0Coefficients.from_json(payload)
    if "coeffs" in payload:
        coeffs = {}
        for key, value in payload["coeffs"].items():
            if not isinstance(value, list) or len(value) != 2:
                raise UsageError(f"coefficient for {key} must be [re, im]")
            coeffs[key] = complex(float(value[0]), float(value[1]))
        c = M0Coefficients.from_letters(coeffs, s)
        if c.n != n:
            raise UsageError(f"coefficient keys have {c.n} letters, expected {n}")
        return c
    raise UsageError("lemma-check needs Pauli or sigma-index coefficients, not a dense matrix")


def _group(config: RunConfig):
    gens = parse_pauli_list(",".join(config.group), config.n)
    return generate_group(gens, config.n)


def _c(z) -> list:
    return [complex(z).real, complex(z).imag]


def _matrix_payload(m) -> list:
    return [[_c(v) for v in row] for row in np.asarray(m)]


def _stabilizer_or_fail(group):
    if not group.is_abelian:
        raise StabgraphError("generators do not commute; not a stabilizer group")
    if not group.minus_identity_free:
        raise StabgraphError("-I is in the group; not a stabilizer group")


# ---------------------------------------------------------------- commands


def _check_opsys(config):
    group = _group(config)
    m0 = _m0_matrix(config.m0, config.n)
    unitaries = group_unitaries(group)
    graph = build_ncgraph(unitaries, m0, config.tol)
    ok, witness = is_operator_system(graph.space, config.tol)
    details = {
        "group_order": len(group),
        "rank": graph.space.rank,
        "witness": witness,
        "finite_average_is_identity": finite_average_check(unitaries, m0, config.tol),
    }
    return ok, details


def _anticliques(config):
    group = _group(config)
    m0 = _m0_matrix(config.m0, config.n)
    graph = build_ncgraph(group_unitaries(group), m0, config.tol)
    ok, witness = is_operator_system(graph.space, config.tol)
    details = {"group_order": len(group), "rank": graph.space.rank, "operator_system": ok}
    if not ok:
        details["witness"] = witness
        return False, details
    if not group.is_abelian:
        details["reason"] = "group is not abelian"
        return False, details
    search = find_anticliques(graph, config.tol)
    details["joint_ranks"] = list(search.joint_ranks)
    details["certificates"] = [
        {
            "rank": c.rank,
            "eigenvalues": [_c(v) for v in c.eigenvalues],
            "scalars": {k: _c(v) for k, v in sorted(c.scalars.items())},
            "residual": c.residual,
        }
        for c in search.certificates
    ]
    details["counterexamples"] = len(search.counterexamples)
    return not search.counterexamples, details


def _kl_verify(config):
    group = _group(config)
    _stabilizer_or_fail(group)
    errors = parse_pauli_list(",".join(config.errors), config.n)
    p = codespace_projector(group)
    ok, lam = kl_verify(p, [to_matrix(e) for e in errors], config.tol)
    return ok, {"code_rank": int(round(np.trace(p).real)), "lambda": _matrix_payload(lam)}


def _stabilizer_span(config):
    group = _group(config)
    _stabilizer_or_fail(group)
    s = len(independent_generators(group.generators))
    result = theorem2_span(group, config.tol)
    expected = expected_span_rank(config.n, s)
    details = {
        "s": s,
        "lhs_rank": result.lhs.rank,
        "rhs_rank": result.rhs.rank,
        "expected_rank": expected,
        "equal": result.equal,
    }
    return result.equal and result.lhs.rank == expected, details


def _classical_check(config):
    group = _group(config)
    _stabilizer_or_fail(group)
    ok, report = classical_stabilizer_check(group, config.tol, jobs=config.jobs)
    details = {
        "checked": len(report),
        "compressing": sum(v.compresses for v in report),
        "disagreements": [v.pauli for v in report if not v.agree],
        "errors": {v.pauli: {"compresses": v.compresses, "in_span": v.in_span} for v in report},
    }
    return ok, details


def _canonicalize(config):
    group = _group(config)
    _stabilizer_or_fail(group)
    u, images, gates = canonicalizing_circuit(group)
    d = 2**config.n
    unitarity = hs_norm(dagger(u) @ u - np.eye(d))
    worst = 0.0
    for zi, g in zip(z_generators(config.n, len(images)), images):
        worst = max(worst, hs_norm(u @ to_matrix(zi) @ dagger(u) - to_matrix(g)))
    details = {
        "gates": [" ".join(str(t) for t in g) for g in gates],
        "images": [str(g) for g in images],
        "unitarity_residual": unitarity,
        "conjugation_residual": worst,
    }
    return unitarity <= config.tol and worst <= config.tol, details


def _lemma_case(coeffs: M0Coefficients, tol: float) -> dict:
    analytic, violations = valid_m0_check(coeffs, tol)
    graph = build_ncgraph(z_form_matrices(coeffs.n, coeffs.s), coeffs.to_matrix(), tol)
    numeric, _ = is_operator_system(graph.space, tol)
    return {"analytic": analytic, "numeric": numeric, "violations": violations}


def _lemma_check(config):
    s = config.s if config.s is not None else config.n
    if config.m0 is not None:
        case = _lemma_case(_m0_coefficients(config.m0, config.n, s), config.tol)
        return case["analytic"] == case["numeric"], {"s": s, **case}
    agree = valid = 0
    mismatched = []
    for t in range(config.trials):
        seed = config.seed + t
        if t % 2 == 0:
            coeffs = valid_m0_sample(config.n, s, seed)
        else:
            coeffs = invalid_m0_sample(config.n, s, seed)
        case = _lemma_case(coeffs, config.tol)
        valid += case["analytic"]
        if case["analytic"] == case["numeric"]:
            agree += 1
        else:
            mismatched.append(seed)
    details = {"s": s, "trials": config.trials, "agree": agree, "analytic_valid": valid, "mismatched_seeds": mismatched}
    return agree == config.trials, details


DISPATCH = {
    "check-opsys": _check_opsys,
    "anticliques": _anticliques,
    "kl-verify": _kl_verify,
    "stabilizer-span": _stabilizer_span,
    "classical-check": _classical_check,
    "canonicalize": _canonicalize,
    "lemma-check": _lemma_check,
}


# ---------------------------------------------------------------- reports


def _normalize(obj):
    """Round floats to 12 significant digits and turn numpy/complex values into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _normalize(_c(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(f"{float(obj):.12g}")
        return 0.0 if x == 0 else x
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_normalize(obj), sort_keys=True, indent=2) + "\n"


def run(config: RunConfig) -> tuple[dict, int]:
    """Dispatch ``config``; returns the report and its exit code (0 or 1).

    Input errors surface as :class:`UsageError` or :class:`StabgraphError`.
    """
    start = time.perf_counter()
    verdict, details = DISPATCH[config.command](config)
    inputs = config.inputs()
    report = {
        "schema": SCHEMA,
        "command": config.command,
        "inputs": inputs,
        "inputs_digest": hashlib.sha256(canonical_json(inputs).encode()).hexdigest(),
        "verdict": bool(verdict),
        "details": details,
        "version": __version__,
    }
    if config.timing:
        report["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return _normalize(report), 0 if verdict else 1


def render_human(report: dict) -> str:
    lines = [f"{report['command']}: {'PASS' if report['verdict'] else 'FAIL'}"]
    for key, value in sorted(report["details"].items()):
        if isinstance(value, (dict, list)) and len(json.dumps(value)) > 80:
            value = f"<{type(value).__name__} of {len(value)}>"
        lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_inputs(argv)
        report, code = run(config)
    except (UsageError, StabgraphError, ValueError, KeyError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"stabgraph: error: {msg}", file=sys.stderr)
        return 2
    text = render_human(report) if config.human else canonical_json(report)
    if config.output:
        Path(config.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
