"""Command-line front end.

Subcommands ``analyze``, ``classify``, ``corner``, ``bwsim`` and ``examples``
read maps in the JSON map format and print deterministic JSON reports (TSV
tables for ``bwsim``).  Exit codes: 0 success, 1 an asserted verdict is
false, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import bwsim, corner, qorder, qpure
from .errors import MalformedInput, QPosError
from .generators import SCHUR_COUNTEREXAMPLE, phiu_map
from .jsonio import decode_matrix, dumps, encode_complex, encode_matrix, load_map, map_to_json, state_to_json
from .superop import (
    CP_TOL,
    SuperOp,
    block_corner_map,
    conjugate_by_unitary,
    from_kraus,
    identity,
    is_completely_positive,
    schur_map,
    state_map,
)

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_EPS = (0.1, 0.5, 0.9)


class _InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _t_grid(text: str):
    """``default``, ``log:a:b:n`` (0 prepended) or a comma list."""
    if text == "default":
        return None
    if text.startswith("log:"):
        try:
            _, a, b, n = text.split(":")
            return np.concatenate([[0.0], np.logspace(np.log10(float(a)), np.log10(float(b)), int(n))])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad log grid {text!r}") from exc
    return np.array(_float_list(text))


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _digest(path) -> str:
    try:
        with open(path, "rb") as fh:
            return "sha256:" + hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _matrix_arg(path):
    doc = _read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("data", doc.get("matrix"))
    return decode_matrix(doc)


def _sorted_eigs(z):
    z = np.asarray(z)
    order = np.lexsort((np.round(z.imag, 10), np.round(z.real, 10)))
    return [encode_complex(complex(np.round(x.real, 12), np.round(x.imag, 12))) for x in z[order]]


def _report(args, inputs, **body) -> dict:
    out = {"command": args.command, "argv": _echo(args), "inputs": inputs}
    out.update(body)
    return out


def _echo(args) -> dict:
    skip = {"func", "command", "timing"}
    echo = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, np.ndarray):
            v = [float(x) for x in v]
        echo[k] = v
    return echo


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> tuple[int, str]:
    phi = load_map(args.path)
    report = {
        "dim_in": phi.dim_in,
        "dim_out": phi.dim_out,
    }
    square = phi.is_square_map
    report["unital"] = bool(phi.is_unital()) if phi.dim_in == phi.dim_out else False
    report["self_adjoint"] = bool(phi.is_self_adjoint())
    cp = is_completely_positive(phi, args.tol)
    report["cp"] = {"verdict": bool(cp.verdict), "min_choi_eig": cp.min_eig}
    if square:
        report["eigenvalues"] = _sorted_eigs(phi.eigenvalues())
        report["negative_eigenvalue"] = qorder.has_negative_eigenvalue(phi)
        cert = qorder.is_q_positive(phi, args.t_grid, args.tol)
        report["q_positive"] = cert.to_json()
        report["eps_deformations"] = [
            {"eps": e, "q_positive": bool(qorder.is_q_positive(qorder.eps_deform(phi, e), args.t_grid, args.tol).verdict)}
            for e in args.eps_grid
        ]
    body = _report(args, {"map": _digest(args.path)}, result=report)
    return EXIT_OK, dumps(body)


def cmd_classify(args) -> tuple[int, str]:
    phi = load_map(args.path)
    verdict = qpure.classify_q_pure(phi, args.t_grid)
    body = _report(args, {"map": _digest(args.path)}, result=verdict.to_json())
    return EXIT_OK, dumps(body)


def _state_density(phi: SuperOp):
    """``D`` if ``phi`` is ``A -> tr(DA) I``, else None."""
    if qpure.numerical_rank(phi) != 1 or not phi.is_unital():
        return None
    n = phi.dim_in
    D = phi.matrix[0].reshape(n, n).T
    return D if np.allclose(phi.matrix, state_map(D).matrix, atol=1e-10) else None


def _q_pure_or_none(phi: SuperOp):
    try:
        v = qpure.classify_q_pure(phi)
    except (QPosError, ValueError):
        return None
    return v if isinstance(v, (qpure.RankOneFaithful, qpure.InvertibleSchur)) else None


def cmd_corner(args) -> tuple[int, str]:
    left_doc = _read_json(args.left)
    phi = load_map(args.left)
    inputs = {"left": _digest(args.left)}
    psi = None
    if args.right:
        psi = load_map(args.right)
        inputs["right"] = _digest(args.right)
    result = {}
    gamma = None

    if args.contraction:
        right_doc = _read_json(args.right) if args.right else None
        if left_doc.get("repr") != "kraus" or right_doc is None or right_doc.get("repr") != "kraus":
            raise MalformedInput("--contraction needs both maps in kraus representation")
        C = _matrix_arg(args.contraction)
        inputs["contraction"] = _digest(args.contraction)
        from .superop import KrausSet

        left_ops = [decode_matrix(S) for S in left_doc["data"]]
        right_ops = [decode_matrix(T) for T in right_doc["data"]]
        spec = corner.CornerSpec(KrausSet(tuple(left_ops)), KrausSet(tuple(right_ops)), C)
        gamma = corner.corner_from_contraction(spec)
        phi, psi = from_kraus(left_ops), from_kraus(right_ops)
        result["mode"] = "contraction"
    elif args.unitary:
        U = _matrix_arg(args.unitary)
        inputs["unitary"] = _digest(args.unitary)
        gamma = corner.unitary_conjugation_corner(phi, U)
        target = conjugate_by_unitary(phi, U)
        if psi is not None and psi.distance(target) > 1e-8:
            raise MalformedInput("right map is not the unitary conjugate of the left map")
        psi = target
        result["mode"] = "unitary"
    elif args.identity_target:
        v = qpure.classify_q_pure(phi)
        if not isinstance(v, qpure.InvertibleSchur):
            raise MalformedInput("--identity-target needs an invertible q-pure left map")
        base = corner.flow_corner_to_identity(v.lambdas)
        U = v.U
        gamma = SuperOp(U @ base.matrix @ U.conj().T, base.shape_in, base.shape_out)
        psi = identity(1)
        result["mode"] = "identity-target"
        result["lambdas"] = [float(x) for x in v.lambdas]
    elif args.auto_max:
        result["mode"] = "auto-max"
    else:
        raise MalformedInput("choose one of --contraction, --unitary, --identity-target, --auto-max")

    if psi is None:
        raise MalformedInput("a right map is required")

    D1, D2 = _state_density(phi), _state_density(psi)
    if D1 is not None and D2 is not None:
        res = corner.max_corner_norm_rank_one(D1, D2, restarts=args.restarts, rng=args.seed)
        norm = {"value": res.value, "faithful": res.faithful}
        if res.value < 1 - 1e-6:
            norm["conclusion"] = "every corner has norm < 1, so the induced flows are not cocycle conjugate"
        result["max_corner_norm"] = norm
    elif args.auto_max:
        raise MalformedInput("--auto-max needs two rank-one state maps")

    exit_code = EXIT_OK
    if gamma is not None:
        result["corner"] = bool(corner.verify_corner(phi, gamma, psi, args.tol))
        cert = corner.is_q_corner(phi, gamma, psi, args.t_grid, args.tol)
        result["q_corner"] = cert.to_json()
        if _q_pure_or_none(phi) is not None and _q_pure_or_none(psi) is not None and cert.verdict:
            hm = corner.is_hypermaximal_over_resolvent_family(phi, gamma, psi, grid=args.t_grid, tol=args.tol)
            result["hypermaximal"] = hm.to_json()
    if args.assert_hypermaximal:
        hm = result.get("hypermaximal")
        if hm is None or not hm["hypermaximal"]:
            exit_code = EXIT_FALSE
    return exit_code, dumps(_report(args, inputs, result=result))


def _profile(text: str) -> bwsim.BoundaryWeightSpec:
    if text == "indicator01":
        return bwsim.BoundaryWeightSpec.indicator01()
    if text.startswith("sampled:"):
        doc = _read_json(text.split(":", 1)[1])
        try:
            x = np.asarray(doc["x"], dtype=float)
            f = decode_matrix(doc["f"]) if np.ndim(doc["f"]) == 2 else np.asarray(doc["f"], dtype=complex)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"sampled profile needs x and f: {exc}") from exc
        return bwsim.BoundaryWeightSpec.sampled(x, f)
    raise MalformedInput(f"unknown profile {text!r}")


def cmd_bwsim(args) -> tuple[int, str]:
    phi = load_map(args.path)
    spec = _profile(args.profile)
    if args.decay:
        A = bwsim.GBROperand(np.eye(phi.dim_in), bwsim.Indicator(args.t_fixed, 1.0),
                             bwsim.Indicator(args.t_fixed, 1.0))
        table = bwsim.normal_spine_decay(phi, spec, args.t_fixed, args.b_grid, A)
    else:
        table = bwsim.gbr_norm_bound(phi, spec, args.bw_grid)
    if args.format == "json":
        body = _report(args, {"map": _digest(args.path)},
                       result={"header": list(table.header), "rows": [list(r) for r in table.rows],
                               "unbounded": spec.unbounded()})
        return EXIT_OK, dumps(body)
    return EXIT_OK, table.to_tsv().rstrip("\n")


EXAMPLES = ("schur-counterexample", "phiu", "state-map", "basischange-corner", "identity-corner")


def _example_doc(args) -> dict:
    name = args.name
    if name == "schur-counterexample":
        return map_to_json(schur_map(SCHUR_COUNTEREXAMPLE), "schur")
    if name == "phiu":
        return map_to_json(phiu_map(args.lambdas), "schur")
    if name == "state-map":
        D = np.diag(args.diag) if args.diag else np.eye(2) / 2
        return state_to_json(D)
    if name == "basischange-corner":
        D = np.diag(args.diag) if args.diag else np.eye(2) / 2
        U = np.diag(np.exp(1j * np.pi / 2 * np.arange(D.shape[0])))
        phi = state_map(D)
        doc = map_to_json(block_corner_map(phi, corner.unitary_conjugation_corner(phi, U),
                                           conjugate_by_unitary(phi, U)))
        doc["block_split"] = D.shape[0]
        doc["unitary"] = encode_matrix(U)
        return doc
    if name == "identity-corner":
        lam = np.asarray(args.lambdas, dtype=float)
        doc = map_to_json(block_corner_map(phiu_map(lam), corner.flow_corner_to_identity(lam), identity(1)))
        doc["block_split"] = lam.size
        return doc
    raise MalformedInput(f"unknown example {name!r}")


def cmd_examples(args) -> tuple[int, str]:
    names = EXAMPLES if args.name == "all" else (args.name,)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        written = []
        for name in names:
            args.name = name
            path = os.path.join(args.out, f"{name}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(dumps(_example_doc(args)) + "\n")
            written.append(path)
        return EXIT_OK, "\n".join(written)
    if len(names) > 1:
        raise MalformedInput("--out is required for 'all'")
    return EXIT_OK, dumps(_example_doc(args))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=CP_TOL, help="CP tolerance on min Choi eigenvalue")
    common.add_argument("--t-grid", type=_t_grid, default=None,
                        help="resolvent grid: 'default', 'log:a:b:n' or comma list")
    common.add_argument("--eps-grid", type=_float_list, default=list(DEFAULT_EPS))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="append wall time (breaks byte-identical output)")

    p = argparse.ArgumentParser(prog="qposmaps", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="CP and q-positivity report for a map")
    a.add_argument("path")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("classify", parents=[common], help="q-pure classification")
    c.add_argument("path")
    c.set_defaults(func=cmd_classify)

    k = sub.add_parser("corner", parents=[common], help="corners, q-corners and hypermaximality")
    k.add_argument("left")
    k.add_argument("right", nargs="?")
    mode = k.add_mutually_exclusive_group()
    mode.add_argument("--contraction", metavar="JSON", help="coefficient matrix C (kraus inputs)")
    mode.add_argument("--unitary", metavar="JSON", help="corner A -> phi(A U^*) U")
    mode.add_argument("--identity-target", action="store_true", help="corner to the identity on M_1")
    mode.add_argument("--auto-max", action="store_true", help="largest corner norm for rank-one pairs")
    k.add_argument("--restarts", type=int, default=20)
    k.add_argument("--assert-hypermaximal", action="store_true")
    k.set_defaults(func=cmd_corner)

    b = sub.add_parser("bwsim", parents=[common], help="boundary weight tables (TSV)")
    b.add_argument("path")
    b.add_argument("--profile", default="indicator01", help="'indicator01' or 'sampled:FILE'")
    b.add_argument("--bw-grid", type=_float_list,
                   default=[0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0, 1.5])
    b.add_argument("--decay", action="store_true", help="normal-spine decay table instead of bounds")
    b.add_argument("--t-fixed", type=float, default=0.5)
    b.add_argument("--b-grid", type=_float_list, default=[0.3, 0.1, 0.03, 0.01])
    b.add_argument("--format", choices=("tsv", "json"), default="tsv")
    b.set_defaults(func=cmd_bwsim)

    e = sub.add_parser("examples", parents=[common], help="write named example maps as JSON")
    e.add_argument("name", choices=EXAMPLES + ("all",))
    e.add_argument("--lambdas", type=_float_list, default=[1.0, -1.0])
    e.add_argument("--diag", type=_float_list, default=None, help="diagonal of the density matrix")
    e.add_argument("--out", help="directory to write <name>.json into")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code, text = args.func(args)
    except QPosError as exc:
        kind = EXIT_NUMERIC if isinstance(exc, ArithmeticError) else EXIT_INPUT
        print(f"qposmaps: {type(exc).__name__}: {exc}", file=sys.stderr)
        return kind
    except (ValueError, KeyError, TypeError) as exc:
        print(f"qposmaps: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except np.linalg.LinAlgError as exc:
        print(f"qposmaps: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(text + "\n")
    if args.timing:
        sys.stdout.write(f"wall_time_s\t{time.perf_counter() - start:.3f}\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
