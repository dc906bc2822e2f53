"""Command-line harness: make, reduce, force, search, verify.

JSON in, JSON out. All randomness flows from --seed, --tol rescales the
numeric policy, and -o writes to a file instead of stdout. The marginal
descriptor grammar shared by reduce/force/search:

    "star"       {1,K} for K = 2..N
    "chain"      {K,K+1} for K = 1..N-1
    "all-k:K"    every size-K subset
    "star-k:K"   every size-K subset containing qubit 1
    "i,j;k,l"    explicit semicolon-separated subsets
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone

import numpy as np

from qmarg import __version__, linalg
from qmarg.feasibility import (InfeasibleMarginalsError, search_witness,
                               sign_flipped_gg, verify_analytic_witness,
                               w_pair_mixture)
from qmarg.forcing import FULLY_FORCED, force, force_chain
from qmarg.marginals import DensityMatrix, marginal_set, partial_trace
from qmarg.policy import DEFAULT_POLICY, NumericPolicy, policy_with_tol
from qmarg.serialize import (marginal_set_from_json, marginal_set_to_json,
                             matrix_from_json, outcome_to_json,
                             state_from_json, state_to_json, witness_to_json)
from qmarg.states import (DickeCoefficients, GGCoefficients, GWCoefficients,
                          MIN_MODULUS, PureState, dicke42_invariant, fidelity,
                          g_to_ghz_operator, apply_local, make_dicke, make_g,
                          make_gg, make_gghz, make_gw, make_w,
                          random_dicke_coefficients, random_gg_coefficients,
                          random_gghz_amplitudes, random_gw_coefficients,
                          uniform_dicke_coefficients)

DESCRIPTOR_HELP = ('marginal descriptor: "star" | "chain" | "all-k:K" | '
                   '"star-k:K" | explicit "i,j;k,l"')


def _policy(args) -> NumericPolicy:
    return policy_with_tol(args.tol) if args.tol is not None else DEFAULT_POLICY


def _read(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise SystemExit(f"{path} is not valid JSON: {exc}")


def _emit(doc, path: str | None):
    text = json.dumps(doc, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise SystemExit(f"cannot write {path}: {exc}")


def _load_reference(doc: dict, path: str) -> DensityMatrix:
    """Accept a pure-state file or a raw density-matrix file."""
    if "amplitudes" in doc:
        return DensityMatrix.from_pure(state_from_json(doc))
    if "re" in doc:
        m = matrix_from_json(doc)
        n = m.shape[0].bit_length() - 1
        if (1 << n) != m.shape[0]:
            raise SystemExit(f"{path}: dimension {m.shape[0]} is not a "
                             f"power of two")
        return DensityMatrix(n, m)
    raise SystemExit(f"{path}: neither a state file nor a matrix file")


def _inline_coefficients(text: str, path_hint: str = "--coeffs") -> list[complex]:
    if text.startswith("@"):
        doc = _read(text[1:])
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SystemExit(f"{path_hint}: not valid JSON: {exc}")
    if not isinstance(doc, list):
        raise SystemExit(f"{path_hint}: expected a JSON array of [re, im] pairs")
    out = []
    for k, pair in enumerate(doc):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise SystemExit(f"{path_hint}: entry {k} is not an [re, im] pair")
        out.append(complex(float(pair[0]), float(pair[1])))
    return out


def _nonzero_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    """Normalized complex Gaussian vector with no small entry."""
    while True:
        v = rng.normal(size=size) + 1j * rng.normal(size=size)
        v /= np.linalg.norm(v)
        if np.min(np.abs(v)) >= MIN_MODULUS:
            return v


# ---------------------------------------------------------------------------
# subcommands

def cmd_make(args) -> int:
    rng = np.random.default_rng(args.seed)
    fam = args.family
    if fam in ("w", "g"):
        if args.coeffs != "random":
            raise SystemExit(f"family {fam} takes no coefficients")
        psi = make_w(args.n) if fam == "w" else make_g(args.n)
    elif fam == "gw":
        if args.coeffs == "random":
            coeffs = random_gw_coefficients(args.n, rng)
        else:
            coeffs = GWCoefficients(args.n, _inline_coefficients(args.coeffs))
        psi = make_gw(coeffs)
    elif fam == "gghz":
        if args.coeffs == "random":
            a, b = random_gghz_amplitudes(rng)
        else:
            vals = _inline_coefficients(args.coeffs)
            if len(vals) != 2:
                raise SystemExit("gghz needs exactly 2 coefficients")
            a, b = vals
        psi = make_gghz(args.n, a, b)
    elif fam == "dicke":
        if args.ell is None:
            raise SystemExit("dicke needs --ell")
        if args.coeffs == "random":
            coeffs = random_dicke_coefficients(args.n, args.ell, rng)
        elif args.coeffs == "uniform":
            coeffs = uniform_dicke_coefficients(args.n, args.ell)
        else:
            coeffs = DickeCoefficients(args.n, args.ell,
                                       _inline_coefficients(args.coeffs))
        psi = make_dicke(coeffs)
    else:
        if args.coeffs == "random":
            coeffs = random_gg_coefficients(args.n, rng)
        else:
            vals = _inline_coefficients(args.coeffs)
            if len(vals) != 2 * args.n:
                raise SystemExit(f"gg needs 2*{args.n} coefficients "
                                 f"(a_1..a_N then b_1..b_N)")
            coeffs = GGCoefficients(args.n, vals[:args.n], vals[args.n:])
        psi = make_gg(coeffs)
    _emit(state_to_json(psi), args.output)
    return 0


def cmd_reduce(args) -> int:
    ref = _load_reference(_read(args.input), args.input)
    ms = marginal_set(ref, args.marginals)
    _emit(marginal_set_to_json(ms), args.output)
    return 0


def cmd_force(args) -> int:
    doc = _read(args.input)
    if "subsets" in doc:
        if args.marginals is not None:
            raise SystemExit(f"{args.input} already carries subsets; "
                             f"--marginals not allowed")
        ms = marginal_set_from_json(doc)
    else:
        if args.marginals is None:
            raise SystemExit("--marginals is required for a state input")
        ms = marginal_set(_load_reference(doc, args.input), args.marginals)
    engine = force_chain if args.chain else force
    out = engine(ms, budget=args.budget, policy=_policy(args))
    _emit(outcome_to_json(out), args.output)
    return 0


def cmd_search(args) -> int:
    ref = _load_reference(_read(args.input), args.input)
    try:
        found = search_witness(ref, args.marginals, seeds=args.seeds,
                               max_iters=args.max_iters, epsilon=args.epsilon,
                               policy=_policy(args))
    except InfeasibleMarginalsError as exc:
        print(f"infeasible marginal set: {exc}", file=sys.stderr)
        return 1
    _emit([witness_to_json(w) for w in found], args.output)
    return 0


# ---------------------------------------------------------------------------
# verify

def _check_forced(out, truth: np.ndarray):
    """(passed, deviation, detail) for a forcing outcome against the truth."""
    if out.status != FULLY_FORCED:
        return False, None, f"status {out.status}"
    td = linalg.trace_distance(out.matrix.matrix, truth)
    return td <= 1e-8, td, None


def _verify_theorem_1(n, trials, seed, pol):
    checks = []
    for t in range(trials):
        def run(t=t):
            rng = np.random.default_rng([seed, t])
            ref = DensityMatrix.from_pure(make_gw(random_gw_coefficients(n, rng)))
            out = force(marginal_set(ref, "star"), policy=pol)
            return _check_forced(out, ref.matrix)
        checks.append((f"star-forced-{t}", run))

    def under():
        rng = np.random.default_rng([seed, trials])
        ref = DensityMatrix.from_pure(
            make_gw(GWCoefficients(4, np.concatenate([[0.0], _nonzero_unit(rng, 4)]))))
        out = force(marginal_set(ref, "1,2;1,3"), policy=pol)
        return out.status != FULLY_FORCED, None, f"status {out.status}"

    def witness():
        rng = np.random.default_rng([seed, trials])
        ref = DensityMatrix.from_pure(
            make_gw(GWCoefficients(4, np.concatenate([[0.0], _nonzero_unit(rng, 4)]))))
        found = search_witness(ref, "1,2;1,3", seeds=16, max_iters=1500,
                               policy=pol)
        best = max((w.trace_distance for w in found), default=0.0)
        return best >= 1e-4, best, f"{len(found)} witnesses"

    checks.append(("two-marginals-underdetermined", under))
    checks.append(("two-marginals-witness", witness))
    return checks


def _verify_theorem_2(n, trials, seed, pol):
    checks = []
    for t in range(trials):
        def run(t=t):
            rng = np.random.default_rng([seed, t])
            ref = DensityMatrix.from_pure(make_gw(random_gw_coefficients(n, rng)))
            out = force_chain(marginal_set(ref, "chain"), policy=pol)
            return _check_forced(out, ref.matrix)
        checks.append((f"chain-forced-{t}", run))
        if n <= 5:
            def agree(t=t):
                rng = np.random.default_rng([seed, t])
                ref = DensityMatrix.from_pure(
                    make_gw(random_gw_coefficients(n, rng)))
                ms = marginal_set(ref, "chain")
                a = force_chain(ms, policy=pol)
                b = force(ms, policy=pol)
                if a.status != b.status or a.status != FULLY_FORCED:
                    return False, None, f"{a.status} vs {b.status}"
                dev = float(np.max(np.abs(a.matrix.matrix - b.matrix.matrix)))
                return dev <= 1e-8, dev, None
            checks.append((f"chain-agrees-general-{t}", agree))
    return checks


def _verify_theorem_3(n, ell, trials, seed, pol):
    checks = []
    for t in range(trials):
        def run(t=t):
            rng = np.random.default_rng([seed, t])
            ref = DensityMatrix.from_pure(
                make_dicke(random_dicke_coefficients(n, ell, rng)))
            out = force(marginal_set(ref, f"star-k:{ell + 1}"), policy=pol)
            return _check_forced(out, ref.matrix)
        checks.append((f"dicke-star-forced-{t}", run))
    return checks


def _verify_theorem_4(n, trials, seed, pol):
    two_rdm = (",".join(str(q) for q in range(1, n - 1)) + ";"
               + ",".join(str(q) for q in range(3, n + 1)))
    checks = []
    for t in range(trials):
        def run(t=t):
            rng = np.random.default_rng([seed, t])
            ref = DensityMatrix.from_pure(make_gg(random_gg_coefficients(n, rng)))
            out = force(marginal_set(ref, two_rdm), policy=pol)
            return _check_forced(out, ref.matrix)
        checks.append((f"two-rdm-forced-{t}", run))

        def analytic(t=t, kind="flip"):
            rng = np.random.default_rng([seed, t])
            coeffs = random_gg_coefficients(n, rng)
            ref = DensityMatrix.from_pure(make_gg(coeffs))
            cand = (DensityMatrix.from_pure(sign_flipped_gg(coeffs))
                    if kind == "flip" else w_pair_mixture(coeffs))
            rep = verify_analytic_witness(ref, cand, f"all-k:{n - 3}",
                                          tol=1e-10, policy=pol)
            ok = rep.matches and rep.trace_distance > 1e-4
            return ok, rep.max_deviation, f"td {rep.trace_distance:.3f}"
        checks.append((f"flip-witness-{t}", lambda t=t: analytic(t, "flip")))
        checks.append((f"mixture-witness-{t}", lambda t=t: analytic(t, "mix")))
    return checks


def _verify_facts(pol):
    def spectrum(n):
        ref = DensityMatrix.from_pure(make_g(n))
        vals = linalg.eigvalsh(partial_trace(ref, (1, 2)).matrix)
        count = int(np.sum(vals > 1e-9))
        return count == 3, None, f"{count} eigenvalues above 1e-9"

    def pt_eig():
        ref = DensityMatrix.from_pure(make_g(3))
        pt = linalg.partial_transpose(partial_trace(ref, (1, 2)).matrix, (2,), 2)
        low = float(np.min(linalg.eigvalsh(pt)))
        return abs(low + 1.0 / 6.0) <= 1e-9, abs(low + 1.0 / 6.0), None

    def hadamard_identity():
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        minus = np.array([1.0, -1.0]) / np.sqrt(2)
        vec = (linalg.kron_all([plus] * 4) - linalg.kron_all([minus] * 4))
        vec = vec / np.linalg.norm(vec)
        fid = fidelity(make_g(4), PureState(4, vec))
        return fid >= 1 - 1e-12, 1 - fid, None

    def ghz_map():
        mapped, _ = apply_local(g_to_ghz_operator(), make_g(3))
        fid = fidelity(mapped, make_gghz(3, 2 ** -0.5, 2 ** -0.5))
        return fid >= 1 - 1e-9, 1 - fid, None

    def psd_pattern():
        grid = (0.8, 0.9, 1.0, 1.1)
        bad = 0
        for a in grid:
            for b in grid:
                for c in grid:
                    m = np.array([[1, 1, a, b], [1, 1, 1, c],
                                  [a, 1, 1, 1], [b, c, 1, 1]], dtype=complex)
                    if linalg.is_psd(m, policy=pol) != (a == b == c == 1.0):
                        bad += 1
        return bad == 0, None, f"{bad} grid disagreements"

    def invariant():
        val = abs(dicke42_invariant(uniform_dicke_coefficients(4, 2)))
        return val <= 1e-12, val, None

    checks = [(f"g{n}-bipartite-spectrum", lambda n=n: spectrum(n))
              for n in range(5, 9)]
    checks += [("g3-pt-min-eigenvalue", pt_eig),
               ("g4-hadamard-identity", hadamard_identity),
               ("g3-ghz-slocc-map", ghz_map),
               ("psd-pattern-lemma", psd_pattern),
               ("dicke42-invariant-standard", invariant)]
    return checks


_THEOREM_RANGES = {"1": (3, 8), "2": (3, 7), "3": (4, 7), "4": (6, 8)}
_THEOREM_DEFAULT_N = {"1": 5, "2": 5, "3": 6, "4": 6}


def cmd_verify(args) -> int:
    pol = _policy(args)
    theorem = args.theorem
    params = {"seed": args.seed, "tol": args.tol}
    if theorem == "facts":
        checks = _verify_facts(pol)
    else:
        n = args.n if args.n is not None else _THEOREM_DEFAULT_N[theorem]
        lo, hi = _THEOREM_RANGES[theorem]
        if not lo <= n <= hi:
            raise SystemExit(f"theorem {theorem} runs at {lo} <= n <= {hi}")
        params.update({"n": n, "trials": args.trials,
                       "coefficients": "random-complex-gaussian"})
        if theorem == "1":
            checks = _verify_theorem_1(n, args.trials, args.seed, pol)
        elif theorem == "2":
            checks = _verify_theorem_2(n, args.trials, args.seed, pol)
        elif theorem == "3":
            ell = args.ell if args.ell is not None else 2
            if not 1 <= ell <= n // 2:
                raise SystemExit(f"need 1 <= ell <= {n // 2}")
            params["ell"] = ell
            checks = _verify_theorem_3(n, ell, args.trials, args.seed, pol)
        else:
            checks = _verify_theorem_4(n, args.trials, args.seed, pol)

    results = []
    runtimes = {}
    for name, fn in checks:
        t0 = time.perf_counter()
        passed, deviation, detail = fn()
        runtimes[name] = round(time.perf_counter() - t0, 6)
        entry = {"name": name, "passed": bool(passed)}
        if deviation is not None:
            entry["deviation"] = float(deviation)
        if detail is not None:
            entry["detail"] = detail
        results.append(entry)

    doc = {
        "theorem": theorem,
        "parameters": params,
        "version": __version__,
        "checks": results,
        "passed": all(r["passed"] for r in results),
        "timing": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "runtimes": runtimes,
        },
    }
    _emit(doc, args.output)
    if not doc["passed"]:
        failed = ", ".join(r["name"] for r in results if not r["passed"])
        print(f"failed checks: {failed}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument wiring

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="qmarg",
        description="Build multiqubit states, reduce them to marginals, and "
                    "decide whether the marginals pin the state back down.",
        epilog=DESCRIPTOR_HELP)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--output", default=None, metavar="FILE",
                       help="write JSON here instead of stdout")
        p.add_argument("--tol", type=float, default=None,
                       help="override the numeric policy equality tolerance")

    p = sub.add_parser("make", help="build a named state family",
                       description="Build a pure state and emit it as JSON.")
    p.add_argument("--family", required=True,
                   choices=["w", "gw", "gghz", "dicke", "g", "gg"])
    p.add_argument("--n", type=int, required=True, help="number of qubits")
    p.add_argument("--ell", type=int, default=None,
                   help="excitation number (dicke only)")
    p.add_argument("--coeffs", default="random",
                   help='"random", "uniform" (dicke), an inline JSON array of '
                        '[re, im] pairs, or @file.json')
    p.add_argument("--seed", type=int, default=0,
                   help="seed for random coefficients")
    common(p)
    p.set_defaults(fn=cmd_make)

    p = sub.add_parser("reduce", help="compute a marginal set",
                       description="Reduce a state file onto a marginal set.",
                       epilog=DESCRIPTOR_HELP)
    p.add_argument("input", help="state or matrix JSON file")
    p.add_argument("--marginals", required=True, help=DESCRIPTOR_HELP)
    common(p)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("force", help="run the completion engine",
                       description="Decide what a marginal set forces.",
                       epilog=DESCRIPTOR_HELP)
    p.add_argument("input", help="state, matrix, or marginal-set JSON file")
    p.add_argument("--marginals", default=None, help=DESCRIPTOR_HELP)
    p.add_argument("--chain", action="store_true",
                   help="use the nearest-neighbor cascade engine")
    p.add_argument("--budget", type=int, default=500_000,
                   help="cap on forced entries before giving up")
    common(p)
    p.set_defaults(fn=cmd_force)

    p = sub.add_parser("search", help="look for a distinct state with the "
                                      "same marginals",
                       description="Seeded feasibility search for a witness.",
                       epilog=DESCRIPTOR_HELP)
    p.add_argument("input", help="state or matrix JSON file")
    p.add_argument("--marginals", required=True, help=DESCRIPTOR_HELP)
    p.add_argument("--seeds", type=int, default=64)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--epsilon", type=float, default=0.3,
                   help="scale of the seeded start perturbation")
    common(p)
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("verify", help="run a theorem-verification report",
                       description="Run seeded trials through the forcing "
                                   "engine and the witness constructions; "
                                   "exit 0 only if every check passes.")
    p.add_argument("--theorem", required=True,
                   choices=["1", "2", "3", "4", "facts"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(fn=cmd_verify)
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
