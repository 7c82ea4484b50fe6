"""Command-line interface: ``gwbary <command> [options] inputs...``.

Exit codes: 0 on success, 2 on invalid input, 3 when a duality certificate
fails (the result is then withheld).
"""
from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass

from .barycenter import (CERT_TOL, BarycenterProblem, CertificateError,
                         consistency_harness, mass_range_at_optimum, solve_barycenter)
from .distance import gw_distance
from .duality import dual_certificate
from .io import csv_text, dumps, load_measure, load_metric, measure_to_dict
from .measure import GWParams, ValidationError, build_cost_matrix
from .oracle import GridSpec, OracleSizeError, oracle_barycenter, oracle_ec

COMMANDS = ("distance", "barycenter", "dual-check", "verify", "consistency")
EXIT_OK, EXIT_INVALID, EXIT_CERTIFICATE = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    a: float = 1.0
    b: float = 1.0
    p: float = 2.0
    weights: list | None = None
    metric: str = "euclidean"
    seed: int = 0
    output_path: str | None = None
    format: str = "json"
    noise: float = 0.5
    trials: int = 20
    grid_step: float = 1.0 / 64
    dump_tableau: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}", "command")
        if self.format not in ("json", "csv"):
            raise ValidationError(f"unknown format {self.format!r}", "format")
        if self.command in ("barycenter", "consistency") and self.p != 2:
            raise ValidationError("barycenters require p = 2", "p")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1", "trials")
        if self.noise < 0:
            raise ValidationError("noise must be >= 0", "noise")


class _CertificateFailure(Exception):
    pass


def _params(cfg):
    return GWParams(cfg.a, cfg.b, cfg.p)


def _need_inputs(inputs, n, exact=False):
    if len(inputs) < n or (exact and len(inputs) != n):
        want = f"exactly {n}" if exact else f"at least {n}"
        raise ValidationError(f"expected {want} input files, got {len(inputs)}", "inputs")


def _problem(cfg, measures):
    k = len(measures)
    weights = cfg.weights if cfg.weights is not None else [1.0 / k] * k
    return BarycenterProblem(tuple(measures), weights, _params(cfg), load_metric(cfg.metric))


def _dump_lp(path, lp, title):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {title}\n")
        fh.write(f"status {lp.status}\niterations {lp.iterations}\n")
        fh.write(f"objective {lp.objective!r}\ndual_objective {lp.dual_objective!r}\n")
        fh.write(f"primal_residual {lp.primal_residual!r}\n")
        fh.write(f"slackness_residual {lp.slackness_residual!r}\n")
        if lp.basis is not None:
            fh.write("basis " + " ".join(str(int(j)) for j in lp.basis) + "\n")
        for name, vec in (("primal", lp.primal), ("duals", lp.duals),
                          ("reduced_costs", lp.reduced_costs)):
            if vec is not None:
                fh.write(name + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def _cmd_distance(cfg, measures):
    _need_inputs(measures, 2, exact=True)
    mu1, mu2 = measures
    params = _params(cfg)
    res = gw_distance(mu1, mu2, load_metric(cfg.metric), params)
    pot, report = dual_certificate(res, mu1, mu2, params.a)
    if cfg.dump_tableau:
        _dump_lp(cfg.dump_tableau, res.lp, "extended transport problem")
    if not report.passed:
        raise _CertificateFailure(f"duality gap {report.gap!r} out of band")
    if cfg.format == "csv":
        rows = [(i, j, float(res.plan.entries[i, j]), float(res.cost[i, j]))
                for i in range(mu1.size) for j in range(mu2.size)]
        return csv_text(["i", "j", "flow", "cost"], rows)
    return dumps({
        "command": "distance",
        "params": {"a": params.a, "b": params.b, "p": params.p},
        "ec": res.ec_value,
        "distance": res.distance,
        "mu1_tilde": measure_to_dict(res.mu1_tilde),
        "mu2_tilde": measure_to_dict(res.mu2_tilde),
        "plan": res.plan.entries,
        "certificate": report.as_dict(),
    })


def _cmd_dual_check(cfg, measures):
    _need_inputs(measures, 2, exact=True)
    mu1, mu2 = measures
    params = _params(cfg)
    res = gw_distance(mu1, mu2, load_metric(cfg.metric), params)
    pot, report = dual_certificate(res, mu1, mu2, params.a)
    if cfg.dump_tableau:
        _dump_lp(cfg.dump_tableau, res.lp, "extended transport problem")
    out = report.as_dict()
    if cfg.format == "csv":
        text = csv_text(["primal", "dual", "gap", "pass"],
                        [(out["primal"], out["dual"], out["gap"], str(out["pass"]).lower())])
    else:
        out.update(phi1=pot.phi1, phi2=pot.phi2,
                   max_violation=pot.max_violation(res.cost))
        text = dumps(out)
    if not report.passed:
        return text, EXIT_CERTIFICATE
    return text


def _cmd_barycenter(cfg, measures):
    _need_inputs(measures, 2)
    prob = _problem(cfg, measures)
    try:
        sol = solve_barycenter(prob)
    except CertificateError as exc:
        raise _CertificateFailure(str(exc)) from None
    if cfg.dump_tableau:
        _dump_lp(cfg.dump_tableau, sol.lp, "joint barycenter LP")
    if not 0 <= sol.gap <= CERT_TOL * (1 + sol.primal_value) and abs(sol.gap) > 1e-12:
        raise _CertificateFailure(f"barycenter duality gap {sol.gap!r} out of band")
    lo, hi = mass_range_at_optimum(prob, sol)
    if cfg.format == "csv":
        dim = prob.support.shape[1]
        header = ["kind", "input", "k", "j"] + [f"x{d}" for d in range(dim)] + ["value"]
        rows = [["bary", "", q, ""] + list(map(float, prob.support[q])) + [float(m)]
                for q, m in enumerate(sol.bary.masses)]
        for i, plan in enumerate(sol.plans):
            for q, j in itertools.product(range(prob.n_support), range(plan.entries.shape[1])):
                rows.append(["flow", i, q, j] + list(map(float, prob.support[q]))
                            + [float(plan.entries[q, j])])
        return csv_text(header, rows)
    return dumps({
        "command": "barycenter",
        "params": {"a": cfg.a, "b": cfg.b, "p": cfg.p},
        "weights": prob.weights,
        "value": sol.primal_value,
        "bary": measure_to_dict(sol.bary),
        "mass_range": [lo, hi],
        "plans": [plan.entries for plan in sol.plans],
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "dual_fs": sol.dual_fs,
        "certificate": {"primal": sol.primal_value, "dual": sol.dual_value,
                        "gap": sol.gap, "pass": True},
    })


def _cmd_verify(cfg, measures):
    _need_inputs(measures, 2)
    params = _params(cfg)
    metric = load_metric(cfg.metric)
    grid = GridSpec(step=cfg.grid_step)
    cases = []
    for i, j in itertools.combinations(range(len(measures)), 2):
        mu1, mu2 = measures[i], measures[j]
        cost = build_cost_matrix(mu1, mu2, metric, params)
        solver = gw_distance(mu1, mu2, metric, params).ec_value
        oracle = oracle_ec(mu1, mu2, cost, params.a, grid)
        bound = 2 * params.a * grid.step * (mu1.size + mu2.size)
        cases.append({"case": f"ec[{i},{j}]", "solver": solver, "oracle": oracle,
                      "residual": abs(solver - oracle), "bound": bound})
    if cfg.weights is not None:
        prob = _problem(cfg, measures)
        sol = solve_barycenter(prob)
        oracle, _ = oracle_barycenter(prob, grid)
        cmax = max(float(c.max(initial=0.0)) for c in prob.input_costs)
        bound = (2 * params.a * prob.k + cmax) * grid.step
        cases.append({"case": "barycenter", "solver": sol.primal_value, "oracle": oracle,
                      "residual": abs(sol.primal_value - oracle), "bound": bound})
    for case in cases:
        case["pass"] = bool(case["residual"] <= case["bound"])
    ok = all(c["pass"] for c in cases)
    if cfg.format == "csv":
        text = csv_text(["case", "solver", "oracle", "residual", "bound", "pass"],
                        [[c["case"], c["solver"], c["oracle"], c["residual"], c["bound"],
                          str(c["pass"]).lower()] for c in cases])
    else:
        text = dumps({"command": "verify", "grid_step": grid.step, "cases": cases, "pass": ok})
    return text if ok else (text, EXIT_CERTIFICATE)


def _cmd_consistency(cfg, measures):
    _need_inputs(measures, 2)
    prob = _problem(cfg, measures)
    rep = consistency_harness(prob, cfg.noise, cfg.trials, cfg.seed)
    rows = [{"n": n + 1, "value": rep.values[n], "residual": rep.residuals[n],
             "bound": rep.bounds[n], "bary_distance": rep.bary_distances[n],
             "excess": rep.excess[n]} for n in range(len(rep.values))]
    if cfg.format == "csv":
        keys = ["n", "value", "residual", "bound", "bary_distance", "excess"]
        return csv_text(keys, [[r[k] for k in keys] for r in rows])
    return dumps({
        "command": "consistency",
        "noise": cfg.noise,
        "seed": cfg.seed,
        "base_value": rep.base_value,
        "trials": rows,
        "final_residual": rep.final_residual,
        "within_bounds": rep.within_bounds,
    })


_HANDLERS = {
    "distance": _cmd_distance,
    "barycenter": _cmd_barycenter,
    "dual-check": _cmd_dual_check,
    "verify": _cmd_verify,
    "consistency": _cmd_consistency,
}


def _emit(cfg, text):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(config, inputs):
    """Execute one command on the given input files and return the exit code."""
    try:
        measures = [load_measure(path) for path in inputs]
        out = _HANDLERS[config.command](config, measures)
    except (ValidationError, OracleSizeError) as exc:
        name = getattr(exc, "field", None)
        where = f" (field '{name}')" if name else ""
        print(f"gwbary: invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (_CertificateFailure, CertificateError) as exc:
        print(f"gwbary: certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    code = EXIT_OK
    if isinstance(out, tuple):
        out, code = out
    _emit(config, out)
    return code


def _weights(text):
    try:
        return [float(w) for w in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be comma-separated numbers") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gwbary",
        description="Generalized Wasserstein distances and barycenters with duality certificates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("inputs", nargs="+", help="measure JSON files")
        p.add_argument("--a", type=float, default=1.0, help="mass removal price (default 1)")
        p.add_argument("--b", type=float, default=1.0, help="length scale (default 1)")
        p.add_argument("--p", type=float, default=2.0, help="exponent (default 2)")
        p.add_argument("--weights", type=_weights, default=None,
                       help="comma-separated barycenter weights (default uniform)")
        p.add_argument("--metric", default="euclidean",
                       help="'euclidean' or a JSON file with an explicit distance matrix")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--noise", type=float, default=0.5,
                       help="relative mass noise for 'consistency'")
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--grid-step", type=float, default=1.0 / 64,
                       help="oracle mass grid for 'verify'")
        p.add_argument("--dump-tableau", default=None, metavar="FILE",
                       help="write the final simplex state to FILE")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, a=args.a, b=args.b, p=args.p,
                        weights=args.weights, metric=args.metric, seed=args.seed,
                        output_path=args.out, format=args.format, noise=args.noise,
                        trials=args.trials, grid_step=args.grid_step,
                        dump_tableau=args.dump_tableau)
    except ValidationError as exc:
        print(f"gwbary: invalid input (field '{exc.field}'): {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg, args.inputs)


if __name__ == "__main__":
    sys.exit(main())
