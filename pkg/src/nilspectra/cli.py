"""Command line front end: ``nilspectra <command> [<subcommand>] [options]``.

Every command prints one JSON document to stdout carrying a provenance
block (merged configuration, package version, configuration hash).  Flags
override keys of the optional ``--config`` JSON file.  Exit status is 0 on
success, 1 when a numerical check fails or an eigensolve does not converge,
and 2 on usage or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidParameter, NilspectraError, NotConverged
from .homogeneous import canonical_dilations, enumerate_df_weights, validate_weights
from .lie import build_algebra

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, default=_jsonable, indent=2, sort_keys=True)


def config_hash(config: dict) -> str:
    canon = json.dumps(config, default=_jsonable, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def provenance(config: dict) -> dict:
    return {"config": config, "version": __version__, "config_hash": config_hash(config)}


# ---------------------------------------------------------------- parsing helpers

def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"expected a comma separated list of integers, got {text!r}") from None


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"expected a comma separated list of numbers, got {text!r}") from None


def _window(text) -> tuple[int, int] | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        a, b = text
    else:
        a, _, b = str(text).partition(":")
    try:
        return int(a), int(b)
    except ValueError:
        raise InvalidParameter(f"window must look like a:b, got {text!r}") from None


def _family(cfg):
    alg = build_algebra(cfg["group"], cfg.get("n"))
    w = cfg.get("weights")
    D = validate_weights(alg, _int_list(w)) if w else canonical_dilations(alg)
    return alg, D


def _form(cfg, alg, D):
    from .oscillators.rockland import RocklandForm, classical_form, sublaplacian_form, validate_rockland_classical

    spec = cfg.get("form") or "sublaplacian"
    if isinstance(spec, dict):
        form = RocklandForm.from_json(alg, spec)
    elif spec == "sublaplacian":
        form = sublaplacian_form(alg)
    elif spec == "classical":
        form = classical_form(D, cfg.get("nu0"))
    elif str(spec).lstrip().startswith("{"):
        form = RocklandForm.from_json(alg, json.loads(spec))
    else:
        try:
            doc = json.loads(Path(spec).read_text())
        except OSError as exc:
            raise InvalidParameter(f"cannot read form file: {exc}") from None
        form = RocklandForm.from_json(alg, doc)
    return validate_rockland_classical(form, D)


# ---------------------------------------------------------------- commands

def cmd_algebra(cfg):
    alg, D = _family(cfg)
    if cfg["action"] == "export":
        doc = alg.to_json()
        doc["weights"] = list(D.weights)
        return doc, EXIT_OK
    return {
        "family": alg.family, "n": alg.n, "dim": alg.dim, "step": alg.step,
        "labels": list(alg.labels), "strata": list(alg.strata),
        "center": [alg.labels[i] for i in alg.central_indices()],
        "brackets": len(list(alg.nonzero_constants())),
        "dilations": D.to_json(),
    }, EXIT_OK


def cmd_weights(cfg):
    fams = enumerate_df_weights(int(cfg["n"]), int(cfg["max_weight"]))
    rows = [{"thetas": list(f.thetas), "weights": list(f.weights), "Q": f.Q, "Q_center": f.Q_center} for f in fams]
    return {"n": int(cfg["n"]), "max_weight": int(cfg["max_weight"]), "count": len(rows), "families": rows}, EXIT_OK


def cmd_orbit(cfg):
    from .orbits import ball_orbit_measure_closed, ball_orbit_measure_mc, flat_orbit

    alg, D = _family(cfg)
    rho = Fraction(str(cfg["rho"]))
    orbit = flat_orbit(alg, rho)
    lam = float(cfg["lambda"])
    m = ball_orbit_measure_closed(orbit, lam, D)
    out = m.to_json()
    out["formal_dimension"] = orbit.formal_dimension
    if cfg.get("mc"):
        est, err = ball_orbit_measure_mc(orbit, lam, D, int(cfg["samples"]), int(cfg["seed"]))
        out["mc_estimate"], out["mc_stderr"] = est, err
    return out, EXIT_OK


def cmd_verify(cfg):
    from . import verify

    n = int(cfg["n"])
    rhos = _float_list(cfg["rho"])
    rhos = [int(r) if r == int(r) else r for r in rhos]
    trials, seed = int(cfg["trials"]), int(cfg["seed"])
    runs = {
        "jacobi": lambda: [verify.jacobi_suite(max(4, n))],
        "dilations": lambda: [verify.dilation_suite(n)],
        "bch": lambda: [verify.bch_suite(n, 2 * trials, seed), verify.df_law_suite(n, 2 * trials, seed)],
        "commutators": lambda: [verify.commutator_suite(n, rhos)],
        "rep": lambda: [verify.rep_suite(n, rhos, trials, seed)],
    }
    which = list(runs) if cfg["action"] == "all" else [cfg["action"]]
    reports = [r for name in which for r in runs[name]()]
    ok = all(r["passed"] for r in reports)
    return {"suites": reports, "passed": ok}, EXIT_OK if ok else EXIT_NUMERIC


def cmd_form(cfg):
    alg, D = _family(cfg)
    form = _form(cfg, alg, D)
    return {"form": form.to_json(), "expression": form.describe(), "nu": form.nu, "nu0": form.nu0,
            "status": form.status, "weights": list(D.weights)}, EXIT_OK


def cmd_operator(cfg):
    from .oscillators.rockland import assemble_operator

    alg, D = _family(cfg)
    form = _form(cfg, alg, D)
    rho = Fraction(str(cfg["rho"]))
    op = assemble_operator(form, rho)
    return {"expression": form.describe(), "status": form.status, "nu": form.nu,
            "operator": repr(op), "terms": op.to_json()}, EXIT_OK


def cmd_count(cfg):
    from .spectral import predict_counting, predict_eigengrowth

    group = cfg["group"]
    D = None
    if group in ("df", "dynin-folland", "heisenberg", "hn") or cfg.get("weights"):
        _alg, D = _family(cfg)
    est = predict_counting(group, D, Fraction(str(cfg["nu"])), cfg.get("n"), cfg.get("Q"), cfg.get("Q_center"),
                           cfg.get("d_pi"))
    s_exp, s_rho = predict_eigengrowth(est)
    out = est.to_json()
    out["s_exponent"], out["s_rho_power"] = s_exp, s_rho
    return out, EXIT_OK


def cmd_multiplier(cfg):
    from .spectral import MultiplierQuery, multiplier_bounds

    q = multiplier_bounds(MultiplierQuery.make(cfg["p"], cfg["q"], cfg["Q"], cfg["nu"]))
    return q.to_json(), EXIT_OK


def read_eigenvalues(path) -> np.ndarray:
    """Eigenvalue column of a solver CSV, or a headerless one- or two-column file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParameter(f"cannot read input: {exc}") from None
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    if rows and "eigenvalue" in rows[0]:
        col = rows[0].index("eigenvalue")
        return np.array([float(r[col]) for r in rows[1:]])
    try:
        arr = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        raise InvalidParameter("input must be numeric CSV or solver output") from None
    return arr[:, 0] if arr.ndim == 2 and arr.shape[1] == 1 else arr


def cmd_fit(cfg):
    from .plotting import counting_columns, emit_plot_data, fit_metadata, render_loglog
    from .spectral import fit_exponent, fit_growth

    data = read_eigenvalues(cfg["input"])
    window = _window(cfg.get("window"))
    growth = cfg.get("mode") == "growth"
    if growth:
        if window is None:
            window = (1, len(data))
        fit = fit_growth(data, window)
    else:
        fit = fit_exponent(data, window)
    out = {"mode": cfg.get("mode", "counting"), **fit.to_json()}
    if cfg.get("plot_data") and data.ndim == 1:
        meta = {"config_hash": config_hash(cfg), **fit_metadata(fit)}
        if growth:
            lo, hi = fit.window
            lam = np.sort(data)
            x, y = np.log(np.arange(lo, hi + 1)), np.log(lam[lo - 1:hi])
            cols, labels = ("log_s", "log_lambda"), ("log s", "log lambda_s")
        else:
            x, y = counting_columns(data, fit.window)
            cols, labels = ("log_lambda", "log_N"), ("log lambda", "log N(lambda)")
        out["plot_data"] = str(emit_plot_data(cfg["plot_data"], x, y, meta, cols))
        fig = Path(cfg["plot_data"]).with_suffix(".png")
        out["figure"] = str(render_loglog(fig, x, y, fit, labels=labels))
    return out, EXIT_OK


def _prediction(problem, theta1, theta2):
    from .lie import build_dynin_folland
    from .spectral import anharmonic_r_exponents, predict_counting

    if problem == "hho-h1":
        return predict_counting("df", canonical_dilations(build_dynin_folland(1)), 2)
    return anharmonic_r_exponents(theta1, theta2)


def cmd_spectrum(cfg):
    from .eigensolve import (
        GridSpec,
        discretize_1d,
        discretize_hho_h1,
        grid_convergence,
        harmonic_reference,
        lowest_eigenvalues,
    )
    from .plotting import counting_columns, emit_plot_data, fit_metadata, render_loglog, render_spectrum
    from .spectral import default_window, fit_exponent

    problem = cfg["problem"]
    three = problem == "hho-h1"
    if problem not in ("euclid1d", "anharm1d", "hho-h1"):
        raise InvalidParameter(f"unknown problem {problem!r}")
    theta1, theta2 = (1, 1) if problem != "anharm1d" else (int(cfg["theta1"]), int(cfg["theta2"]))
    rho = float(cfg["rho"])
    Ns = _int_list(cfg["N"])
    L = _float_list(cfg["L"] if cfg.get("L") is not None else ("4,4,1.5" if three else "6"))
    if three and len(L) == 1:
        L = L * 3
    order = int(cfg["order"] if cfg.get("order") is not None else (6 if three else 2))
    k = int(cfg["k"])
    out_dir = Path(cfg["out_dir"])
    prefix = cfg.get("prefix") or problem
    out_dir.mkdir(parents=True, exist_ok=True)

    results = []
    files = []
    for N in Ns:
        grid = GridSpec(3 if three else 1, N, tuple(L))
        if three:
            op = discretize_hho_h1(rho, grid, order=order, scheme=cfg.get("scheme") or "direct")
        else:
            op = discretize_1d(theta1, theta2, rho, grid, order=order)
        res = lowest_eigenvalues(op, k, tol=float(cfg["tol"]), method=cfg["method"], seed=int(cfg["seed"]))
        results.append(res)
        path = out_dir / f"{prefix}_N{N}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "eigenvalue", "residual", "converged"])
            for i, v, r, c in res.to_rows():
                w.writerow([i, f"{v:.15g}", f"{r:.3e}", int(c)])
        files.append(str(path))

    finest = max(results, key=lambda r: r.provenance["grid"]["N"])
    summary = {
        "problem": problem, "rho": rho, "theta1": theta1, "theta2": theta2, "order": order,
        "half_width": L, "k": k, "csv": files,
        "runs": [{"N": r.provenance["grid"]["N"], "method": r.method, "converged": int(r.converged.sum()),
                  "max_residual": float(np.max(r.residuals)), "lowest": float(r.eigenvalues[0])} for r in results],
        "reference_values": "self-generated" if three else "exact",
    }
    converged = None
    if len(results) > 1:
        rep = grid_convergence(results)
        summary["convergence"] = rep.to_json()
        converged = rep.window
    summary["converged_window"] = converged
    pred = _prediction(problem, theta1, theta2)
    summary["predicted_counting_exponent"] = pred.lambda_exponent
    window = default_window(len(finest), converged)
    try:
        fit = fit_exponent(finest.eigenvalues, window)
        summary["fit"] = fit.to_json()
    except NilspectraError as exc:
        fit = None
        summary["fit"] = exc.to_dict()
    x, y = counting_columns(finest.eigenvalues, window if fit else None)
    meta = {"config_hash": config_hash(cfg), "problem": problem, "N": finest.provenance["grid"]["N"]}
    if fit:
        meta.update(fit_metadata(fit, pred.lambda_exponent))
    summary["plot_data"] = str(emit_plot_data(out_dir / f"{prefix}.dat", x, y, meta))
    render_loglog(out_dir / f"{prefix}_counting.png", x, y, fit, title=problem)
    ref = None if three or problem == "anharm1d" else harmonic_reference(k, rho)
    render_spectrum(out_dir / f"{prefix}_spectrum.png",
                    {r.provenance["grid"]["N"]: r.eigenvalues for r in results}, ref, title=problem)
    summary["figures"] = [str(out_dir / f"{prefix}_counting.png"), str(out_dir / f"{prefix}_spectrum.png")]
    ok = all(bool(r.converged.all()) for r in results)
    if not ok:
        summary["error"] = NotConverged("some eigenpairs did not reach the residual tolerance").to_dict()
    path = out_dir / f"{prefix}_summary.json"
    summary["summary"] = str(path)
    path.write_text(dumps({**summary, "provenance": provenance(cfg)}) + "\n")
    return summary, EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------- argument parser

def _common(p, defaults):
    p.add_argument("--config", help="JSON file with option values; flags take precedence")
    p.add_argument("--output", help="also write the JSON result to this file")
    p.set_defaults(_defaults=defaults)


def _group_opts(p, group_default="df"):
    p.add_argument("--group", help=f"df, heisenberg or engel (default {group_default})")
    p.add_argument("--n", type=int, help="rank parameter n (default 1)")
    p.add_argument("--weights", help="comma separated weights or DF thetas")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilspectra", description="Oscillators on graded nilpotent groups.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command")
    base = {"group": "df", "n": 1}

    alg = sub.add_parser("algebra", help="inspect or export a built-in algebra")
    alg.add_argument("action", choices=["info", "export"])
    _group_opts(alg)
    _common(alg, base)
    alg.set_defaults(_run=cmd_algebra)

    wts = sub.add_parser("weights", help="enumerate admissible dilation weights")
    wts.add_argument("action", choices=["enumerate"])
    wts.add_argument("--n", type=int)
    wts.add_argument("--max-weight", dest="max_weight", type=int)
    _common(wts, {"n": 1, "max_weight": 3})
    wts.set_defaults(_run=cmd_weights)

    orb = sub.add_parser("orbit", help="orbital ball measure")
    orb.add_argument("action", choices=["volume"])
    _group_opts(orb)
    orb.add_argument("--rho")
    orb.add_argument("--lambda", dest="lambda")
    orb.add_argument("--mc", action="store_true", default=None, help="add a Monte Carlo estimate")
    orb.add_argument("--samples", type=int)
    orb.add_argument("--seed", type=int)
    _common(orb, {**base, "rho": "1", "lambda": "2", "samples": 1_000_000, "seed": 42})
    orb.set_defaults(_run=cmd_orbit)

    ver = sub.add_parser("verify", help="run self-checks")
    ver.add_argument("action", choices=["jacobi", "dilations", "bch", "rep", "commutators", "all"])
    ver.add_argument("--n", type=int)
    ver.add_argument("--rho", help="comma separated list of central parameters")
    ver.add_argument("--trials", type=int)
    ver.add_argument("--seed", type=int)
    _common(ver, {"n": 1, "rho": "1,-2,0.5", "trials": 50, "seed": 7})
    ver.set_defaults(_run=cmd_verify)

    frm = sub.add_parser("form", help="classify a sum-of-powers form")
    frm.add_argument("action", choices=["validate"])
    _group_opts(frm)
    frm.add_argument("--form", help="sublaplacian, classical, a JSON string or a JSON file")
    frm.add_argument("--nu0", type=int)
    _common(frm, base)
    frm.set_defaults(_run=cmd_form)

    opr = sub.add_parser("operator", help="assemble the represented operator")
    opr.add_argument("action", choices=["assemble"])
    _group_opts(opr)
    opr.add_argument("--form")
    opr.add_argument("--nu0", type=int)
    opr.add_argument("--rho")
    _common(opr, {**base, "rho": "1"})
    opr.set_defaults(_run=cmd_operator)

    spc = sub.add_parser("spectrum", help="discretize and solve an oscillator")
    spc.add_argument("action", choices=["solve"])
    spc.add_argument("--problem", choices=["euclid1d", "anharm1d", "hho-h1"])
    spc.add_argument("--theta1", type=int)
    spc.add_argument("--theta2", type=int)
    spc.add_argument("--rho")
    spc.add_argument("--N", help="grid points per axis; a comma separated list runs a refinement study")
    spc.add_argument("--L", help="half-width of the box, one value or one per axis")
    spc.add_argument("-k", type=int, help="number of eigenvalues")
    spc.add_argument("--order", type=int, choices=[2, 4, 6])
    spc.add_argument("--scheme", choices=["direct", "vector-field"])
    spc.add_argument("--tol", type=float)
    spc.add_argument("--method", choices=["auto", "dense", "iterative"])
    spc.add_argument("--seed", type=int)
    spc.add_argument("--out-dir", dest="out_dir")
    spc.add_argument("--prefix")
    _common(spc, {"problem": "euclid1d", "theta1": 1, "theta2": 1, "rho": "1", "N": "1001", "k": 20,
                  "tol": 1e-8, "method": "auto", "seed": 0, "out_dir": "."})
    spc.set_defaults(_run=cmd_spectrum)

    fit = sub.add_parser("fit", help="log-log exponent fit")
    fit.add_argument("action", choices=["exponent"])
    fit.add_argument("--input")
    fit.add_argument("--window", help="1-based inclusive index range a:b")
    fit.add_argument("--mode", choices=["counting", "growth"])
    fit.add_argument("--plot-data", dest="plot_data", help="write plot columns here and a figure next to it")
    _common(fit, {"mode": "counting"})
    fit.set_defaults(_run=cmd_fit)

    cnt = sub.add_parser("count", help="predicted counting exponents")
    cnt.add_argument("action", choices=["predict"])
    _group_opts(cnt)
    cnt.add_argument("--nu")
    cnt.add_argument("--Q", type=int)
    cnt.add_argument("--Q-center", dest="Q_center", type=int)
    cnt.add_argument("--d-pi", dest="d_pi", type=float)
    _common(cnt, {**base, "nu": "2"})
    cnt.set_defaults(_run=cmd_count)

    mul = sub.add_parser("multiplier", help="heat and Bessel multiplier exponents")
    mul.add_argument("--Q", type=int)
    mul.add_argument("--nu", type=int)
    mul.add_argument("--p")
    mul.add_argument("--q")
    _common(mul, {"nu": 2, "p": "2", "q": "2"})
    mul.set_defaults(_run=cmd_multiplier)
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < flags."""
    cfg = dict(args._defaults)
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameter(f"cannot read config file: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidParameter("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in doc.items() if k != "command"})
    skip = {"command", "config", "output", "_defaults", "_run"}
    cfg.update({k: v for k, v in vars(args).items() if k not in skip and v is not None})
    cfg["command"] = args.command
    return cfg


def _emit(doc, output):
    text = dumps(doc)
    print(text)
    if output:
        Path(output).write_text(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        _emit({"error": "usage", "message": "no command given"}, None)
        return EXIT_USAGE
    try:
        cfg = resolve_config(args)
        missing = [key for key in {"orbit": ["rho", "lambda"], "fit": ["input"], "multiplier": ["Q"]}.get(args.command, [])
                   if cfg.get(key) is None]
        if missing:
            raise InvalidParameter("missing required options", options=missing)
        result, status = args._run(cfg)
    except NotConverged as exc:
        _emit({**exc.to_dict(), "provenance": provenance(vars_clean(args))}, args.output)
        return EXIT_NUMERIC
    except NilspectraError as exc:
        _emit({**exc.to_dict(), "provenance": provenance(vars_clean(args))}, args.output)
        return EXIT_USAGE
    _emit({**result, "provenance": provenance(cfg)}, args.output)
    return status


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if not k.startswith("_")}


if __name__ == "__main__":
    sys.exit(main())
