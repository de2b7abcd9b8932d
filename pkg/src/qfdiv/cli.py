"""Command-line front end.

Matrices travel as JSON documents with separate row-major real and imaginary
arrays (``{"dim": d, "re": [...], "im": [...]}``, plus ``"dims": [dA, dB]``
for factored states); channels as a list of Kraus blocks in the same style.
Numbers are printed with 12 significant digits and ``inf`` is printed as the
literal string ``inf``.  Exit codes: 0 success, 1 domain error or bad usage,
2 suite failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import rng
from .channels import KrausChannel, random_channel, random_density
from .condent import (
    BipartiteState,
    OptimizerOptions,
    conditional_entropy_optimize,
    conditional_entropy_tsallis_closed,
    conditional_entropy_vn_closed,
    thm2_bounds,
)
from .errors import ConvergenceError, DomainError
from .fdiv import make_tsallis_f, quantum_f_divergence, quantum_f_divergence_eps_sweep
from .linalg import DensityOperator


def format_number(x: float) -> str:
    """12 significant digits in positional notation, trailing zeros kept.

    Infinities print as the literal ``inf``.
    """
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0.00000000000"
    exponent = math.floor(math.log10(abs(x)))
    for _ in range(2):  # second pass when rounding crosses a power of ten
        decimals = max(0, 11 - exponent)
        text = f"{x:.{decimals}f}"
        rounded = float(text)
        if rounded == 0.0 or math.floor(math.log10(abs(rounded))) == exponent:
            break
        exponent += 1
    return text


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"cannot parse {path}: {exc}") from exc


def parse_matrix_file(path: str):
    """Load a matrix document as a DensityOperator, or a BipartiteState if it has dims."""
    doc = _load_json(path)
    try:
        dim = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"{path}: expected fields dim, re, im ({exc})") from exc
    if re.size != dim * dim or im.size != dim * dim:
        raise DomainError(f"{path}: re/im must hold dim^2 = {dim * dim} entries")
    matrix = (re + 1j * im).reshape(dim, dim)
    try:
        if "dims" in doc:
            return BipartiteState(matrix, [int(d) for d in doc["dims"]])
        return DensityOperator(matrix)
    except DomainError as exc:
        raise DomainError(f"{path}: {exc}") from exc


def write_matrix_file(path: str, matrix: np.ndarray, dims=None) -> None:
    doc = {
        "dim": int(matrix.shape[0]),
        "re": matrix.real.ravel().tolist(),
        "im": matrix.imag.ravel().tolist(),
    }
    if dims is not None:
        doc["dims"] = [int(d) for d in dims]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def write_channel_file(path: str, phi: KrausChannel) -> None:
    doc = {
        "d_in": phi.d_in,
        "d_out": phi.d_out,
        "kraus": [
            {"re": k.real.ravel().tolist(), "im": k.imag.ravel().tolist()}
            for k in phi.kraus_ops
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def _as_operator(x) -> np.ndarray:
    return x.entries if isinstance(x, (BipartiteState, DensityOperator)) else x


def _family_function(family: str, alpha: float | None):
    if family == "kl":
        return make_tsallis_f(1.0)
    if alpha is None:
        raise DomainError(f"--alpha is required for family {family!r}")
    return make_tsallis_f(alpha)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qfdiv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_div = sub.add_parser("divergence", help="divergence of two states")
    p_div.add_argument("--a", required=True, metavar="FILE")
    p_div.add_argument("--b", required=True, metavar="FILE")
    p_div.add_argument("--family", required=True, choices=("tsallis", "kl"))
    p_div.add_argument("--alpha", type=float)
    p_div.add_argument(
        "--eps-sweep",
        action="store_true",
        help="regularized sweep with extrapolation instead of the spectral form",
    )

    p_ce = sub.add_parser("condent", help="conditional entropy of a factored state")
    p_ce.add_argument("--state", required=True, metavar="FILE")
    p_ce.add_argument("--family", required=True, choices=("tsallis", "kl", "custom"))
    p_ce.add_argument("--alpha", type=float)
    p_ce.add_argument(
        "--method",
        choices=("optimize", "closed"),
        help="closed form (default for tsallis/kl) or direct optimization",
    )
    p_ce.add_argument("--starts", type=int, default=4)
    p_ce.add_argument("--seed", type=int, default=0)
    p_ce.add_argument("--value-tol", type=float, default=1e-6)
    p_ce.add_argument("--max-iters", type=int, default=500)
    p_ce.add_argument("--fd-step", type=float, default=1e-5)

    p_b = sub.add_parser("bounds", help="two-sided conditional entropy bounds")
    p_b.add_argument("--state", required=True, metavar="FILE")
    p_b.add_argument("--alpha", type=float, required=True)

    p_s = sub.add_parser("suite", help="run the property-test suite")
    p_s.add_argument("--filter", action="append", metavar="ID", help="run only these ids")
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--out", metavar="FILE", help="write the JSON report here")

    p_r = sub.add_parser("random", help="generate a seeded random object")
    p_r.add_argument("kind", choices=("state", "channel", "pure"))
    p_r.add_argument(
        "--dims",
        type=int,
        nargs="+",
        required=True,
        help="state: d or factors; channel: d_in d_out env; pure: d_A d_B",
    )
    p_r.add_argument("--rank", type=int, help="state rank (default: full)")
    p_r.add_argument("--seed", type=int, default=0)
    p_r.add_argument("--out", required=True, metavar="FILE")
    return parser


def _cmd_divergence(args) -> int:
    a = _as_operator(parse_matrix_file(args.a))
    b = _as_operator(parse_matrix_file(args.b))
    f = _family_function(args.family, args.alpha)
    if args.eps_sweep:
        _, value = quantum_f_divergence_eps_sweep(a, b, f)
    else:
        value = quantum_f_divergence(a, b, f)
    print(format_number(value))
    return 0


def _cmd_condent(args) -> int:
    state = parse_matrix_file(args.state)
    if not isinstance(state, BipartiteState):
        raise DomainError("condent needs a state file with a dims field")
    method = args.method
    if method is None:
        method = "optimize" if args.family == "custom" else "closed"
    if args.family == "custom" and method == "closed":
        raise DomainError("family custom has no closed form; use --method optimize")

    if method == "closed":
        if args.family == "kl":
            value = conditional_entropy_vn_closed(state)
        else:
            if args.alpha is None:
                raise DomainError("--alpha is required for family tsallis")
            value, _ = conditional_entropy_tsallis_closed(state, args.alpha)
    else:
        f = _family_function(args.family, args.alpha)
        opts = OptimizerOptions(
            starts=args.starts,
            value_tol=args.value_tol,
            max_iters=args.max_iters,
            fd_step=args.fd_step,
            seed=args.seed,
        )
        value = conditional_entropy_optimize(state, f, opts).value
    print(format_number(value))
    return 0


def _cmd_bounds(args) -> int:
    state = parse_matrix_file(args.state)
    if not isinstance(state, BipartiteState):
        raise DomainError("bounds needs a state file with a dims field")
    lower, upper = thm2_bounds(state, make_tsallis_f(args.alpha))
    print(f"{format_number(lower)} {format_number(upper)}")
    return 0


def _cmd_suite(args) -> int:
    from .propsuite import PropertyConfig, run_suite

    reports = run_suite(PropertyConfig(seed=args.seed), properties=args.filter)
    payload = json.dumps([r.to_dict() for r in reports], indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(
            f"{status} {r.property_id}: trials={r.trials} violations={r.violations} "
            f"worst_margin={r.worst_margin:.3e}",
            file=sys.stderr,
        )
    return 0 if all(r.passed for r in reports) else 2


def _cmd_random(args) -> int:
    dims = args.dims
    if args.kind == "state":
        if not 1 <= len(dims) <= 3:
            raise DomainError("random state needs 1 to 3 dims")
        d = int(np.prod(dims))
        rank = args.rank if args.rank is not None else d
        rho = random_density(d, rank, args.seed)
        write_matrix_file(args.out, rho.entries, dims=dims if len(dims) > 1 else None)
    elif args.kind == "channel":
        if len(dims) != 3:
            raise DomainError("random channel needs --dims d_in d_out env")
        phi = random_channel(dims[0], dims[1], dims[2], args.seed)
        write_channel_file(args.out, phi)
    else:  # pure
        if len(dims) != 2:
            raise DomainError("random pure needs --dims d_A d_B")
        gen = rng.generator(args.seed)
        psi = rng.complex_gaussian(gen, (dims[0] * dims[1],))
        psi /= np.linalg.norm(psi)
        write_matrix_file(args.out, np.outer(psi, psi.conj()), dims=dims)
    return 0


_COMMANDS = {
    "divergence": _cmd_divergence,
    "condent": _cmd_condent,
    "bounds": _cmd_bounds,
    "suite": _cmd_suite,
    "random": _cmd_random,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, ConvergenceError) as exc:
        print(f"qfdiv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
