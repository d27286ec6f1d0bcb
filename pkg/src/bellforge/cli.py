"""Command-line front end: construct, sweep, bench, entropy, decompose, sdp, certify.

Every command embeds the package version, the root seed, and the full
effective configuration in its output, so any run can be replayed bit for
bit.  All randomness flows from a single root seed (flag --seed, falling
back to the BELLFORGE_SEED environment variable, then 0) through a
documented hierarchical derivation: root -> per-n -> per-seed-index via
numpy SeedSequence entropy lists.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .classical import classical_value_exact, classical_value_local
from .construction import (
    build_bell,
    construct_report,
    gen_signs,
    rebuild_from_report,
)
from .entanglement import (
    delta_classify,
    dyadic_decompose,
    entropy_of_entanglement,
    f_alpha,
    iviol,
)
from .errors import BellforgeError, BudgetExceededError
from .model import functional_from_json
from .sdp import (
    build_op_gram,
    gram_to_json,
    omega_op,
    sign_vector_strategy,
    vector_certificate_value,
)
from .seesaw import SeesawConfig, max_entangled_value, seesaw, seesaw_magnitude
from .states import build_state

EXACT_AUTO_LIMIT = 10**8
SWEEP_COLUMNS = [
    "n",
    "seed",
    "K2",
    "classical_value",
    "classical_exact",
    "quantum_lb",
    "ratio",
    "ratio_over_sqrtn_logn",
    "omega_op",
    "wall_time_ms",
    "error",
]


def _root_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("BELLFORGE_SEED", "0"))


def derive_seed(root: int, *path: int) -> int:
    """Hierarchical child seed: stable across platforms and parallelism."""
    return int(np.random.SeedSequence([root, *path]).generate_state(1)[0])


def _envelope(command: str, seed: int, config: dict, result) -> str:
    return json.dumps(
        {
            "version": __version__,
            "command": command,
            "seed": seed,
            "config": config,
            "result": result,
        },
        sort_keys=True,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _fail(command: str, exc: Exception) -> int:
    print(
        json.dumps(
            {
                "version": __version__,
                "command": command,
                "error": type(exc).__name__,
                "message": str(exc),
            },
            sort_keys=True,
        ),
        file=sys.stderr,
    )
    return 1


# ---------------------------------------------------------------------------
# construct


def cmd_construct(args) -> int:
    seed = _root_seed(args)
    config = {
        "n": args.n,
        "alpha": args.alpha,
        "distribution": args.distribution,
        "budget": args.budget,
        "restarts": args.restarts,
    }
    try:
        report = construct_report(
            args.n,
            seed,
            alpha_top=args.alpha,
            distribution=args.distribution,
            classical_budget=args.budget,
            local_restarts=args.restarts,
        )
    except BellforgeError as exc:
        return _fail("construct", exc)
    _emit(_envelope("construct", seed, config, report.to_dict()), args.out)
    return 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_row(task) -> dict:
    n, seed_index, root, alpha, budget, restarts, with_omega = task
    seed = derive_seed(root, n, seed_index)
    row = {key: "" for key in SWEEP_COLUMNS}
    row["n"] = n
    row["seed"] = seed
    start = time.perf_counter()
    try:
        report = construct_report(
            n, seed, alpha_top=alpha, classical_budget=budget, local_restarts=restarts
        )
        row["K2"] = f"{report.k2:.12g}"
        row["classical_value"] = f"{report.classical.value:.12g}"
        row["classical_exact"] = str(report.classical.exact).lower()
        row["quantum_lb"] = f"{report.quantum_lb:.12g}"
        row["ratio"] = f"{report.ratio:.12g}"
        trend = np.sqrt(n) / np.log2(n) if n > 1 else float("nan")
        row["ratio_over_sqrtn_logn"] = f"{report.ratio / trend:.12g}"
        if with_omega:
            value, _ = omega_op(build_bell(gen_signs(n, seed)))
            row["omega_op"] = f"{value:.12g}"
    except BellforgeError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_time_ms"] = f"{(time.perf_counter() - start) * 1000.0:.3f}"
    return row


def cmd_sweep(args) -> int:
    root = _root_seed(args)
    n_list = [int(v) for v in args.n.split(",") if v.strip()]
    if not n_list:
        return _fail("sweep", ValueError("empty n list"))
    if args.seeds < 1:
        return _fail("sweep", ValueError("seeds per n must be positive"))
    config = {
        "n_list": n_list,
        "seeds": args.seeds,
        "alpha": args.alpha,
        "budget": args.budget,
        "restarts": args.restarts,
        "omega": args.omega,
        "jobs": args.jobs,
    }
    tasks = [
        (n, i, root, args.alpha, args.budget, args.restarts, args.omega)
        for n in n_list
        for i in range(args.seeds)
    ]
    handle = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        handle.write(f"# bellforge {__version__} sweep\n")
        handle.write(f"# seed {root} config {json.dumps(config, sort_keys=True)}\n")
        writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                # rows come back in submission order, so output stays sorted
                for row in pool.map(_sweep_row, tasks):
                    writer.writerow(row)
                    handle.flush()
        else:
            for task in tasks:
                writer.writerow(_sweep_row(task))
                handle.flush()
    finally:
        if args.out:
            handle.close()
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    seed = _root_seed(args)
    try:
        with open(args.file) as handle:
            functional = functional_from_json(handle.read())
    except (OSError, ValueError) as exc:
        return _fail("bench", exc)
    n, k = functional.scenario.n_inputs, functional.scenario.n_outputs
    dim = args.dim if args.dim else k
    dims = [int(v) for v in args.dims.split(",")] if args.dims else [min(dim, 2)]
    config = {
        "file": args.file,
        "dim": dim,
        "dims": dims,
        "restarts": args.restarts,
        "budget": args.budget,
        "tol": args.tol,
    }
    try:
        try:
            classical = classical_value_exact(functional, budget=args.budget)
        except BudgetExceededError:
            classical = classical_value_local(functional, restarts=args.restarts, seed=seed)
        cfg = SeesawConfig(dim=dim, restarts=args.restarts, seed=seed)
        quantum, _ = seesaw_magnitude(functional, cfg)
        best_k, fixed_value = max_entangled_value(
            functional, dims, restarts=args.restarts, seed=seed
        )
        omega, omega_sol = omega_op(functional, tol=args.tol)
    except BellforgeError as exc:
        return _fail("bench", exc)
    anomalies = []
    if classical.value > quantum + 1e-6:
        anomalies.append("classical exceeds see-saw value")
    if quantum > omega + 1e-4:
        anomalies.append("see-saw exceeds relaxation value")
    result = {
        "scenario": {"n_inputs": n, "n_outputs": k},
        "classical_value": classical.value,
        "classical_exact": classical.exact,
        "seesaw_value": quantum,
        "fixed_state_best_dim": best_k,
        "fixed_state_value": fixed_value,
        "omega_op": omega,
        "omega_converged": omega_sol.converged,
        "sandwich_ok": not anomalies,
        "anomalies": anomalies,
    }
    _emit(_envelope("bench", seed, config, result), args.out)
    return 0


# ---------------------------------------------------------------------------
# entropy / decompose


def _parse_alphas(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_entropy(args) -> int:
    seed = _root_seed(args)
    try:
        if args.alphas:
            state = build_state(alphas=_parse_alphas(args.alphas))
            config = {"alphas": args.alphas, "delta": args.delta}
        else:
            if args.alpha is None or args.n is None:
                raise ValueError("need either --alphas or both --alpha and --n")
            state = build_state(alpha_top=args.alpha, n=args.n)
            config = {"alpha": args.alpha, "n": args.n, "delta": args.delta}
        classified = delta_classify(state, args.delta)
        result = {
            "dim": state.dim,
            "entropy_bits": classified.entropy,
            "gap_to_max": classified.gap,
            "classification": classified.label,
            "iviol": iviol(state),
        }
        if args.alpha is not None and args.n is not None and not args.alphas:
            result["two_level_closed_form"] = f_alpha(args.n, args.alpha)
    except (BellforgeError, ValueError) as exc:
        return _fail("entropy", exc)
    _emit(_envelope("entropy", seed, config, result), args.out)
    return 0


def cmd_decompose(args) -> int:
    seed = _root_seed(args)
    try:
        coeffs = np.asarray(_parse_alphas(args.alphas))
        decomposition = dyadic_decompose(coeffs)
        recon = decomposition.reconstruct()
        result = decomposition.to_json_dict()
        result["beta_sum"] = decomposition.beta_sum()
        result["reconstruction_error"] = float(np.max(np.abs(recon - coeffs)))
    except (BellforgeError, ValueError) as exc:
        return _fail("decompose", exc)
    _emit(_envelope("decompose", seed, {"alphas": args.alphas}, result), args.out)
    return 0


# ---------------------------------------------------------------------------
# sdp / certify


def cmd_sdp(args) -> int:
    seed = _root_seed(args)
    try:
        with open(args.file) as handle:
            functional = functional_from_json(handle.read())
        value, solution = omega_op(functional, tol=args.tol, max_iter=args.max_iter)
        if args.emit_gram:
            with open(args.emit_gram, "w") as handle:
                handle.write(gram_to_json(build_op_gram(functional)))
    except (OSError, ValueError, BellforgeError) as exc:
        return _fail("sdp", exc)
    config = {"file": args.file, "tol": args.tol, "max_iter": args.max_iter}
    result = {
        "omega_op": value,
        "converged": solution.converged,
        "iterations": solution.iterations,
        "primal_residual": solution.primal_residual,
        "dual_residual": solution.dual_residual,
    }
    _emit(_envelope("sdp", seed, config, result), args.out)
    return 0


def cmd_certify(args) -> int:
    seed = _root_seed(args)
    config = {"n": args.n, "distribution": args.distribution, "budget": args.budget}
    try:
        signs = gen_signs(args.n, seed, args.distribution)
        functional = build_bell(signs)
        strategy = sign_vector_strategy(signs)
        value = vector_certificate_value(functional, strategy, budget=args.budget)
    except BellforgeError as exc:
        return _fail("certify", exc)
    result = {
        "certificate_value": value,
        "value_over_n": value / args.n,
        "digest": signs.digest,
    }
    _emit(_envelope("certify", seed, config, result), args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellforge",
        description="Bell inequality violation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="root seed (default: $BELLFORGE_SEED or 0)")
        p.add_argument("--out", default=None, help="write output to this path instead of stdout")

    p = sub.add_parser("construct", help="run one full construction report")
    add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None, help="top Schmidt coefficient (default 1/sqrt(2))")
    p.add_argument("--distribution", choices=["bernoulli", "gaussian"], default="bernoulli")
    p.add_argument("--budget", type=int, default=EXACT_AUTO_LIMIT)
    p.add_argument("--restarts", type=int, default=64)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sweep", help="construction reports over a grid of (n, seed)")
    add_common(p)
    p.add_argument("--n", required=True, help="comma-separated n values, e.g. 2,3,4,5")
    p.add_argument("--seeds", type=int, required=True, help="seeds per n")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--budget", type=int, default=EXACT_AUTO_LIMIT)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--omega", action="store_true", help="also solve the SDP relaxation per row")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="classical/see-saw/fixed-state/SDP comparison for a functional file")
    add_common(p)
    p.add_argument("--file", required=True, help="BellFunctional JSON")
    p.add_argument("--dim", type=int, default=None, help="see-saw Hilbert dimension (default: n_outputs)")
    p.add_argument("--dims", default=None, help="comma-separated dims for the fixed-state search")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--budget", type=int, default=EXACT_AUTO_LIMIT)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("entropy", help="entropy, iviol, and delta classification of a state")
    add_common(p)
    p.add_argument("--alphas", default=None, help="explicit comma-separated coefficients")
    p.add_argument("--alpha", type=float, default=None, help="two-level profile top coefficient")
    p.add_argument("--n", type=int, default=None, help="two-level profile tail size")
    p.add_argument("--delta", type=float, default=0.5)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("decompose", help="dyadic block decomposition of a sorted coefficient vector")
    add_common(p)
    p.add_argument("--alphas", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sdp", help="solve the Gram relaxation for a functional file")
    add_common(p)
    p.add_argument("--file", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=50000)
    p.add_argument("--emit-gram", default=None, help="also write the problem in sparse-triplet JSON")
    p.set_defaults(func=cmd_sdp)

    p = sub.add_parser("certify", help="explicit-vector certificate for a construction draw")
    add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--distribution", choices=["bernoulli", "gaussian"], default="bernoulli")
    p.add_argument("--budget", type=int, default=EXACT_AUTO_LIMIT)
    p.set_defaults(func=cmd_certify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
