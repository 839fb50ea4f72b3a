"""Command-line front end.

Exit codes: 0 ok, 2 spec error, 3 cap exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from .arrangements import CapExceeded, caps
from .chainspec import Chain, ChainSpec, SpecError, build_chain, render_rational
from .induction import dynkin_check, induced_transition_by_lumping, pushforward_stationary
from .walks import (
    NonUniqueStationary,
    build_transition,
    exact_tv_curve,
    stationary,
    verify_spectrum_by_traces,
)

EXIT_OK, EXIT_SPEC, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4
DIGITS = 12


class VerificationFailure(RuntimeError):
    pass


def decimal(q, digits: int = DIGITS) -> str:
    """Rational (or float) to a decimal string with ``digits`` significant digits."""
    if isinstance(q, float):
        return format(q, f".{digits}g")
    q = Fraction(q)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(q.numerator) / Decimal(q.denominator)
    return format(d, f".{digits}g") if d else "0"


def render_state(s, kind: str = "tuple") -> str:
    if kind == "signs":
        return "".join({-1: "-", 0: "0", 1: "+"}[v] for v in s)
    if kind == "subset":
        return "{" + ",".join(map(str, s)) + "}"
    if kind == "permutation":
        return "(" + ",".join(map(str, s)) + ")"
    return str(s)


# --------------------------------------------------------------------------
# commands (each returns the text to emit)


def cmd_spectrum(chain: Chain) -> str:
    lines = ["lambda\tmultiplicity"]
    merged = chain.spectrum.merged()
    for lam, m in merged:
        lines.append(f"{render_rational(lam)}\t{m}")
    lines.append(f"# total\t{sum(m for _, m in merged)}\tstates\t{chain.K.size}")
    return "\n".join(lines) + "\n"


def cmd_stationary(chain: Chain) -> str:
    pi = chain.stationary()
    lines = ["state\tprobability\tdecimal"]
    for s, p in zip(pi.states, pi.probs):
        lines.append(f"{render_state(s, chain.state_kind)}\t{render_rational(p)}\t{decimal(p)}")
    return "\n".join(lines) + "\n"


def cmd_tv_curve(chain: Chain, L: int, trials: int, seed: int) -> str:
    if not chain.separating:
        raise SpecError("/", f"measure of {chain.name!r} is not separating; "
                             "the stationary distribution is not unique")
    tv = exact_tv_curve(chain.K, chain.start, L, chain.stationary())
    est, err = chain.coupling(L, trials, seed)
    lines = ["step,exact_tv,eigen_bound,coupling_est,coupling_stderr"]
    for l in range(L + 1):
        lines.append(",".join([str(l), decimal(tv[l]), decimal(chain.eigen_bound(l)),
                               decimal(float(est[l])), decimal(float(err[l]))]))
    return "\n".join(lines) + "\n"


def cmd_simulate(chain: Chain, steps: int, seed: int) -> str:
    traj = chain.simulate(steps, seed)
    lines = ["step\tstate"]
    lines += [f"{t}\t{render_state(s, chain.state_kind)}" for t, s in enumerate(traj)]
    return "\n".join(lines) + "\n"


def _matrix_tsv(K, kind) -> list[str]:
    head = "\t".join(["from\\to"] + [render_state(s, kind) for s in K.states])
    rows = [head]
    for s, r in zip(K.states, K.entries):
        rows.append("\t".join([render_state(s, kind)] + [render_rational(v) for v in r]))
    return rows


def cmd_induce(chain: Chain) -> str:
    """Induced matrix (both constructions), Dynkin check, spectrum, stationary."""
    if chain.pair is None:
        raise SpecError("/subarrangement", "induce needs a subarrangement (or an induced model)")
    pair = chain.pair
    K_A = build_transition(chain.measure)
    blocks = pair.blocks()
    dyn = dynkin_check(K_A, blocks)
    lumped = induced_transition_by_lumping(pair, K_A)
    direct = build_transition_from_chain(chain)
    same = lumped.entries == direct.entries
    traces = verify_spectrum_by_traces(direct, chain.spectrum)
    out = [f"# A\t{pair.A}", f"# B\t{pair.B}",
           f"# dynkin_check\t{'pass' if dyn else 'FAIL'}",
           f"# lumped_equals_induced_measure_walk\t{'pass' if same else 'FAIL'}",
           f"# trace_identity\t{'pass' if traces else 'FAIL'}"]
    if chain.separating:
        pi_push = pushforward_stationary(pair, stationary(K_A))
        pi_B = stationary(lumped)
        ok = pi_push.probs == pi_B.probs
        out.append(f"# pushforward_stationary\t{'pass' if ok else 'FAIL'}")
    out.append("## induced matrix")
    out += _matrix_tsv(chain.K, chain.state_kind)
    out.append("## spectrum")
    out += cmd_spectrum(chain).rstrip("\n").split("\n")
    text = "\n".join(out) + "\n"
    if not (dyn and same and traces):
        raise VerificationFailure(text)
    return text


def build_transition_from_chain(chain: Chain):
    from .induction import induced_measure
    return build_transition(induced_measure(chain.pair, chain.measure))


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chamber-walks",
                                description="Exact random walks on chambers of hyperplane arrangements.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "stationary", "tv-curve", "simulate", "induce", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--spec", help="JSON chain spec file")
        s.add_argument("--steps", type=int, help="number of steps L")
        s.add_argument("--trials", type=int, help="Monte-Carlo trials")
        s.add_argument("--seed", type=int, help="master seed")
        s.add_argument("--cap-faces", type=int)
        s.add_argument("--cap-chambers", type=int)
        s.add_argument("--out", help="write output to FILE instead of stdout")
        if name == "verify":
            s.add_argument("corpus", nargs="?", default="default",
                           help="built-in corpus selector (default, quick)")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        with caps(args.cap_faces, args.cap_chambers):
            if args.command == "verify":
                from .verify import run_corpus, verify_spec
                if args.spec:
                    results = verify_spec(ChainSpec.from_file(args.spec))
                else:
                    results = run_corpus(args.corpus)
                lines = [f"{'PASS' if ok else 'FAIL'}\t{name}\t{detail}" for name, ok, detail in results]
                failed = [r for r in results if not r[1]]
                if failed:
                    lines.append(f"# first counterexample: {failed[0][0]}: {failed[0][2]}")
                lines.append(f"# {len(results) - len(failed)}/{len(results)} checks passed")
                _emit("\n".join(lines) + "\n", args.out)
                return EXIT_VERIFY if failed else EXIT_OK
            if not args.spec:
                raise SpecError("/", "--spec FILE is required")
            spec = ChainSpec.from_file(args.spec)
            # command-line caps win over the chain spec's own caps
            cap_doc = dict(spec.get("caps", {}))
            if args.cap_faces is not None:
                cap_doc["faces"] = args.cap_faces
            if args.cap_chambers is not None:
                cap_doc["chambers"] = args.cap_chambers
            if cap_doc:
                spec.doc["caps"] = cap_doc
            chain = build_chain(spec)
            L = args.steps if args.steps is not None else spec.get("steps", 30)
            trials = args.trials if args.trials is not None else spec.get("trials", 10000)
            seed = args.seed if args.seed is not None else spec.get("seed", 0)
            if args.command == "spectrum":
                text = cmd_spectrum(chain)
            elif args.command == "stationary":
                text = cmd_stationary(chain)
            elif args.command == "tv-curve":
                text = cmd_tv_curve(chain, L, trials, seed)
            elif args.command == "simulate":
                text = cmd_simulate(chain, L, seed)
            else:
                text = cmd_induce(chain)
            _emit(text, args.out)
            return EXIT_OK
    except SpecError as e:
        print(f"spec error at {e.path}: {e.message}", file=sys.stderr)
        return EXIT_SPEC
    except NonUniqueStationary as e:
        print(f"spec error at /: {e}", file=sys.stderr)
        return EXIT_SPEC
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except VerificationFailure as e:
        sys.stdout.write(str(e))
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as e:
        print(f"spec error at /: cannot read spec: {e}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
