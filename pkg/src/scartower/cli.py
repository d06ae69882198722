"""Command-line front end.

Exit codes: 0 success, 2 usage error (unknown subcommand/model/flags),
3 size-guard refusal, 4 numerical-check failure.  Every report is a JSON
object with the envelope fields ``tool``, ``version``, ``command``,
``config``, ``seed`` and ``wall_time_s``; identical argv and seed give
identical reports apart from ``wall_time_s``.

State files use the statevector JSON schema
``{"site_dims": [...], "amplitudes": [[re, im], ...]}`` and chain files the
MPS schema ``{"boundary": ..., "tensors": [{"site": j, "data": nested [re,
im] pairs}], "left_vector": ..., "right_vector": ...}``.

The environment variable ``SCARTOWER_WORKERS`` caps the process count used
for seed fan-outs (default 1; reports are merged in seed order either way).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analytics import (
    fit_gaussian,
    gaussian_params_analytic,
    pn_analytic,
    pn_exact_smallL,
    tolerance_probability,
)
from .arovas import (
    oracle_diagnostics,
    prepare_arovas,
    repeat_until_success_ensemble,
    round_success_probability,
)
from .chargemeasure import (
    PEAConfig,
    default_offset,
    phase_estimate,
    recommended_ancillas,
)
from .models import (
    base_state,
    exact_tower,
    get_model,
    hamiltonian_residual,
    model_names,
)
from .mpu import (
    builtin_mpus,
    correction_table_to_json,
    mpu_correctable,
    mpu_from_json_dict,
    mpu_glueable,
)
from .statevector import SizeGuardError, StateVector, fidelity, make_rng
from .tensornet import build_resource_mps, contract_to_statevector
from .translate import controlled_translate, momentum_parity_measure, momentum_pea

RESIDUAL_GATE = 1e-8


class UsageError(ValueError):
    pass


class NumericalCheckError(RuntimeError):
    pass


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SCARTOWER_WORKERS", "1")))
    except ValueError:
        return 1


def _report(command: str, config: dict, seed, results: dict,
            started: float) -> dict:
    return {
        "tool": "scartower",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "wall_time_s": time.perf_counter() - started,
        "results": results,
    }


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _resource_state(model_name: str, L: int, w: float) -> StateVector:
    model = get_model(model_name)
    return contract_to_statevector(build_resource_mps(model, L, w)).normalize()


def _cmd_prepare(args, started):
    model = get_model(args.model)
    if args.state == "resource":
        state = _resource_state(args.model, args.L, args.w)
    elif args.state == "base":
        state = base_state(model, args.L)
    elif args.state == "tower":
        tower = exact_tower(model, args.L, args.n)
        if tower.annihilated:
            raise NumericalCheckError(
                f"tower member n={args.n} is annihilated at L={args.L}"
            )
        state = tower.state
    else:
        raise UsageError(f"unknown state kind {args.state!r}")
    payload = state.to_json_dict()
    with open(args.out, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    results = {"out": args.out, "norm": state.norm(), "dim": state.dim}
    return _report("prepare", vars(args) | {"func": None}, None, results, started)


def _cmd_distribution(args, started):
    model = get_model(args.model)
    sweep = [int(x) for x in args.sweep_L.split(",")] if args.sweep_L else None
    results: dict = {}
    if sweep is None:
        if args.method == "analytic":
            dist = pn_analytic(model, args.L, args.w)
        else:
            dist = pn_exact_smallL(model, args.L, args.w)
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write("n,p,log_p\n")
                for n, p, lp in dist.as_rows():
                    fh.write(f"{n},{p!r},{lp!r}\n")
            results["csv"] = args.csv
        results["L"] = args.L
        results["rows"] = [
            {"n": n, "p": p, "log_p": lp} for n, p, lp in dist.as_rows()
        ]
    else:
        entries = []
        for L in sweep:
            dist = pn_analytic(model, L, args.w)
            ana = gaussian_params_analytic(model, L, args.w)
            fit = fit_gaussian(dist)
            tol = tolerance_probability(dist, ana.n0, args.delta_rel)
            entries.append(
                {
                    "L": L,
                    "analytic": {"n0": ana.n0, "delta": ana.delta},
                    "fitted": {"n0": fit.n0, "delta": fit.delta},
                    "epsilon": tol.epsilon,
                }
            )
        results["sweep"] = entries
        results["delta_rel"] = args.delta_rel
    return _report("distribution", vars(args) | {"func": None}, None, results, started)


def _cmd_measure_charge(args, started):
    model = get_model(args.model)
    state = _resource_state(args.model, args.L, args.w)
    offset = default_offset(model, args.L, state)
    m = args.ancillas or recommended_ancillas(model, args.L, state)
    cfg = PEAConfig(m=m, charge_offset=offset, seed=args.seed)
    rng = make_rng(args.seed)
    outcomes = []
    freq: dict[int, int] = {}
    for _ in range(args.shots):
        out = phase_estimate(model, state, cfg, rng)
        outcomes.append(
            {"bits": list(out.bits), "charge_mod": out.charge_mod,
             "charge": out.charge_mod - offset}
        )
        freq[out.charge_mod] = freq.get(out.charge_mod, 0) + 1
    results = {
        "ancillas": m,
        "charge_offset": offset,
        "outcomes": outcomes,
        "frequencies": {str(k): v / args.shots for k, v in sorted(freq.items())},
    }
    return _report("measure-charge", vars(args) | {"func": None}, args.seed,
                   results, started)


def _cmd_measure_momentum(args, started):
    if args.state_file:
        with open(args.state_file) as fh:
            state = StateVector.from_json_dict(json.load(fh))
    else:
        state = _resource_state(args.model, args.L, args.w)
    rng = make_rng(args.seed)
    shots = []
    freq: dict[int, int] = {}
    for _ in range(args.shots):
        if args.mode == "parity":
            bit, _post = momentum_parity_measure(state, rng)
            key = bit
        else:
            m = args.ancillas or int(round(math.log2(state.n_wires)))
            out = momentum_pea(state, m, rng)
            key = out.charge_mod
        shots.append(key)
        freq[key] = freq.get(key, 0) + 1
    results = {
        "mode": args.mode,
        "outcomes": shots,
        "frequencies": {str(k): v / args.shots for k, v in sorted(freq.items())},
    }
    return _report("measure-momentum", vars(args) | {"func": None}, args.seed,
                   results, started)


def _cmd_translate(args, started):
    rng = make_rng(args.seed)
    d = args.d
    vec = rng.normal(size=d**args.L) + 1j * rng.normal(size=d**args.L)
    vec /= np.linalg.norm(vec)
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    state = StateVector((d,) * args.L + (2,), np.kron(vec, plus))
    direct = controlled_translate(state, "direct")
    results = {"L": args.L, "d": d, "mode": args.mode}
    if args.mode == "protocol":
        out = controlled_translate(state, "protocol", rng)
        results["fidelity_to_direct"] = fidelity(out, direct)
    else:
        results["norm"] = direct.norm()
    return _report("translate", vars(args) | {"func": None}, args.seed,
                   results, started)


def _cmd_mpu_check(args, started):
    if args.file:
        with open(args.file) as fh:
            mpu = mpu_from_json_dict(json.load(fh))
    else:
        registry = builtin_mpus(args.d)
        if args.builtin not in registry:
            raise UsageError(
                f"unknown builtin {args.builtin!r}; valid: {', '.join(sorted(registry))}"
            )
        mpu = registry[args.builtin]
    table = mpu_correctable(mpu)
    glue_ok, glue_residuals = mpu_glueable(mpu)
    results = correction_table_to_json(table)
    results["glueable"] = glue_ok
    results["glue_residuals"] = {
        f"({a},{b})": v for (a, b), v in sorted(glue_residuals.items())
    }
    return _report("mpu-check", vars(args) | {"func": None}, None, results, started)


def _cmd_verify(args, started):
    model = get_model(args.model)
    tower = exact_tower(model, args.L, args.n)
    if tower.annihilated:
        results = {"annihilated": True, "n": args.n}
        return _report("verify", vars(args) | {"func": None}, None, results, started)
    results = {
        "energy": tower.energy,
        "residual": tower.residual,
        "norm_sq_raw": tower.norm_sq_raw,
    }
    report = _report("verify", vars(args) | {"func": None}, None, results, started)
    if tower.residual > RESIDUAL_GATE:
        raise NumericalCheckError(
            json.dumps(report["results"]) + f" exceeds residual gate {RESIDUAL_GATE}"
        )
    return report


def _arovas_chunk(payload):
    L, alpha, n_seeds, max_rounds, seed = payload
    return repeat_until_success_ensemble(L, alpha, n_seeds, max_rounds, seed)


def _cmd_arovas(args, started):
    diag = oracle_diagnostics(args.L)
    diag["translation_expectation"] = [
        diag["translation_expectation"].real,
        diag["translation_expectation"].imag,
    ]
    if args.seeds <= 1:
        rep = prepare_arovas(args.L, args.alpha, args.max_rounds, make_rng(args.seed))
        results = {
            "oracle": diag,
            "rounds_used": rep.rounds_used,
            "succeeded": rep.succeeded,
            "error": rep.error,
        }
        return _report("arovas", vars(args) | {"func": None}, args.seed,
                       results, started)
    workers = _worker_count()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunk = (args.seeds + workers - 1) // workers
        jobs = []
        base = args.seed
        while base < args.seed + args.seeds:
            n = min(chunk, args.seed + args.seeds - base)
            jobs.append((args.L, args.alpha, n, args.max_rounds, base))
            base += n
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_arovas_chunk, jobs))
        rounds = [r for p in parts for r in p.rounds]
        errors = [e for p in parts for e in p.errors]
        succ = [e for e in errors if not math.isnan(e)]
        ens_mean_error = sum(succ) / len(succ) if succ else None
        first_p = parts[0].first_round_probability
        success_fraction = sum(
            p.success_fraction * p.n_seeds for p in parts
        ) / args.seeds
    else:
        ens = repeat_until_success_ensemble(
            args.L, args.alpha, args.seeds, args.max_rounds, args.seed
        )
        rounds = list(ens.rounds)
        errors = list(ens.errors)
        ens_mean_error = ens.mean_error
        first_p = ens.first_round_probability
        success_fraction = ens.success_fraction
    hist: dict[int, int] = {}
    for r in rounds:
        hist[r] = hist.get(r, 0) + 1
    results = {
        "oracle": diag,
        "seeds": args.seeds,
        "first_round_probability": first_p,
        "success_fraction": success_fraction,
        "mean_error": ens_mean_error,
        "rounds_histogram": {str(k): v for k, v in sorted(hist.items())},
    }
    return _report("arovas", vars(args) | {"func": None}, args.seed, results, started)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scartower", add_help=True)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("prepare", help="write a prepared state to a JSON file")
    p.add_argument("--model", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--w", type=float, default=0.5)
    p.add_argument("--state", choices=["resource", "base", "tower"],
                   default="resource")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("distribution", help="outcome distribution and sweeps")
    p.add_argument("--model", required=True)
    p.add_argument("--L", type=int, default=32)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--method", choices=["analytic", "brute"], default="analytic")
    p.add_argument("--csv")
    p.add_argument("--sweep-L", dest="sweep_L")
    p.add_argument("--delta-rel", dest="delta_rel", type=float, default=0.2)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_distribution)

    p = sub.add_parser("measure-charge", help="phase-estimation shots")
    p.add_argument("--model", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--w", type=float, default=0.5)
    p.add_argument("--ancillas", type=int, default=0)
    p.add_argument("--shots", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_measure_charge)

    p = sub.add_parser("measure-momentum", help="momentum parity / estimation shots")
    p.add_argument("--model", default="aklt")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--w", type=float, default=0.5)
    p.add_argument("--state-file", dest="state_file")
    p.add_argument("--mode", choices=["parity", "pea"], default="parity")
    p.add_argument("--ancillas", type=int, default=0)
    p.add_argument("--shots", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_measure_momentum)

    p = sub.add_parser("translate", help="controlled translation on a random state")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--mode", choices=["protocol", "direct"], default="protocol")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("mpu-check", help="operator-pushing correction table")
    p.add_argument("--builtin", default="translation")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--file")
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_mpu_check)

    p = sub.add_parser("verify", help="tower-member eigenstate check")
    p.add_argument("--model", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("arovas", help="repeat-until-success preparation report")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--max-rounds", dest="max_rounds", type=int, default=500)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_arovas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage()
        return 2
    try:
        report = args.func(args, started)
        cfg = report["config"]
        cfg.pop("func", None)
        cfg.pop("json_out", None)
        _emit(report, getattr(args, "json_out", None))
        return 0
    except UsageError as exc:
        _emit({"error": {"code": 2, "message": str(exc),
                         "valid_models": model_names()}}, None)
        return 2
    except ValueError as exc:
        # unknown models and malformed values are usage errors
        _emit({"error": {"code": 2, "message": str(exc),
                         "valid_models": model_names()}}, None)
        return 2
    except SizeGuardError as exc:
        _emit({"error": {"code": 3, "message": str(exc),
                         "hint": "reduce L or raise the amplitude cap"}}, None)
        return 3
    except NumericalCheckError as exc:
        _emit({"error": {"code": 4, "message": str(exc)}}, None)
        return 4


if __name__ == "__main__":
    sys.exit(main())
