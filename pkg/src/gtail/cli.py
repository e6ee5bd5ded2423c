"""Command-line front end: ``gtail <command> [options]``.

Every command writes its data files into ``--out`` together with a
``manifest.json`` recording the resolved parameters, library versions,
timestamps and SHA-256 digests of the outputs. ``gtail replay MANIFEST``
re-runs a manifest into a fresh directory and checks the digests.

Option values are resolved as command-line flag, then environment variable
``GTAIL_<OPTION>`` (upper case, dashes as underscores), then ``key = value``
lines of the file given by ``--config``, then the built-in default.

Exit codes: 0 success, 2 validation failure, 3 convergence or accuracy
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy

from . import __version__, abm, constants, ginibre, predictor, special, tails, transfer, walks
from .errors import AccuracyError, ConvergenceError, DomainError

__all__ = ["main", "run", "replay", "EXIT_OK", "EXIT_VALIDATION", "EXIT_CONVERGENCE", "EXIT_USAGE"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 64

ENV_PREFIX = "GTAIL_"
SCHEMA_DIR = Path(__file__).parent / "schemas"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if ":" in str(text):
        lo, hi, num = str(text).split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in _floats(text)]


# option name -> (type, default, help); shared by every command that uses it
OPTIONS = {
    "seed": (int, 0, "run seed"),
    "workers": (int, 1, "maximum worker threads"),
    "cutoff": (int, 100_000, "series cutoff"),
    "tail": (str, "tail_corrected", "tail method: raw, tail_corrected or asymptotic"),
    "L": (_floats, [2.0], "barrier values, comma list or lo:hi:num"),
    "l-grid": (_floats, _floats("0:2:21"), "tail grid, comma list or lo:hi:num"),
    "samples": (int, 100_000, "Monte Carlo samples per estimate"),
    "horizon": (int, 100_000, "maximum walk length"),
    "bridge-n": (int, 0, "if positive, estimate a bridge functional at this n instead"),
    "functional": (str, "range_capped", "bridge functional name"),
    "spacing": (float, 0.0, "grid or lattice spacing (0: automatic)"),
    "tol": (float, 1e-12, "residual mass tolerance"),
    "n": (int, 256, "matrix size"),
    "count": (int, 2000, "number of samples"),
    "method": (str, "schur", "eigenvalue route: schur or edge"),
    "left-extent": (float, 12.0, "initial particles fill [-left-extent, 0]"),
    "dt": (float, 0.05, "largest time step"),
    "rel-step": (float, 0.02, "time step relative to elapsed time"),
    "t-final": (float, 1.0, "final time"),
    "z-max": (float, 3.0, "largest accepted |z| in lemma checks"),
    "ginibre-samples": (str, "", "CSV of Ginibre samples from mc-ginibre"),
    "abm-samples": (str, "", "CSV of ABM samples from mc-abm"),
}

COMMANDS = {
    "constants": ("cutoff", "tail"),
    "predict": ("L",),
    "verify-identities": (),
    "verify-lemmas": ("samples", "seed", "workers", "z-max"),
    "mc-walk": ("L", "samples", "seed", "workers", "horizon", "bridge-n", "functional"),
    "transfer-exit": ("L", "spacing", "tol"),
    "mc-ginibre": ("n", "count", "seed", "workers", "l-grid", "method"),
    "mc-abm": ("left-extent", "spacing", "dt", "rel-step", "t-final", "count", "seed", "workers", "l-grid"),
    "compare": ("ginibre-samples", "abm-samples", "l-grid"),
}


def _build_parser():
    p = _Parser(prog="gtail", description="Left tail of the largest real Ginibre eigenvalue.")
    sub = p.add_subparsers(dest="command")
    for name, opts in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--out", default=None, help="output directory (default: gtail-<command>)")
        sp.add_argument("--config", default=None, help="key = value defaults file")
        for opt in opts:
            sp.add_argument(f"--{opt}", dest=opt.replace("-", "_"), default=None, help=OPTIONS[opt][2])
    rp = sub.add_parser("replay")
    rp.add_argument("manifest")
    rp.add_argument("--out", default=None)
    return p


def _read_config(path):
    values = {}
    if not path:
        return values
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        k, v = line.split("=", 1)
        values[k.strip().replace("_", "-")] = v.strip()
    return values


def resolve(command: str, ns: argparse.Namespace, env=None) -> dict:
    """Resolve option values with flag > environment > config file > default precedence."""
    env = os.environ if env is None else env
    cfg = _read_config(ns.config)
    out = {}
    for opt in COMMANDS[command]:
        conv, default, _ = OPTIONS[opt]
        flag = getattr(ns, opt.replace("-", "_"))
        env_key = ENV_PREFIX + opt.replace("-", "_").upper()
        if flag is not None:
            raw = flag
        elif env_key in env:
            raw = env[env_key]
        elif opt in cfg:
            raw = cfg[opt]
        else:
            out[opt] = default
            continue
        try:
            out[opt] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for --{opt}: {raw!r}") from exc
    return out


def _write_csv(path: Path, rows: list[dict]):
    if not rows:
        raise DomainError(f"no rows for {path.name}")
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


# command implementations: each returns (list of (filename, kind, payload), valid)


def _cmd_constants(p):
    ce = constants.c_edge(p["cutoff"], p["tail"])
    cb = constants.c_bulk(p["cutoff"], p["tail"])
    obj = {"C_e": ce.value, "C_b": cb.value, "kappa": constants.kappa(), "exp_C_e": math.exp(ce.value),
           "tail_estimate": ce.tail_estimate, "cutoff": ce.cutoff, "tail": ce.method}
    return [("constants.json", "json", obj)], True


def _cmd_predict(p):
    rows = []
    for L in p["L"]:
        b = predictor.predict(L)
        rows.append({"L": b.L, "leading": b.leading, "constant": b.constant,
                     "predicted_log_prob": b.predicted_log_prob, "predicted_prob": b.predicted_prob,
                     "error_order": b.error_order})
    if len(rows) == 1:
        return [("predict.json", "json", rows[0])], True
    return [("predict.csv", "csv", rows)], True


MODULAR_GRID = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


def _cmd_verify_identities(p):
    rows = [{"check": f"modular t={t}", "residual": special.check_modular(t), "threshold": 1e-12}
            for t in MODULAR_GRID]
    ident = predictor.r_of_l_identity_check()
    rows.append({"check": "regime split collapses to log(2)/2", "residual": ident.residual, "threshold": 1e-6})
    ce, cb = constants.c_edge(2000, "asymptotic").value, constants.c_bulk(2000, "asymptotic").value
    rows.append({"check": "C_b - C_e - log(2)/2", "residual": cb - ce - 0.5 * math.log(2), "threshold": 1e-14})
    g = special.euler_mascheroni_theta().value
    rows.append({"check": "Euler gamma, theta integral", "residual": g - float(np.euler_gamma), "threshold": 1e-12})
    for r in rows:
        r["passed"] = abs(r["residual"]) < r["threshold"]
    ok = all(r["passed"] for r in rows)
    return [("identities.json", "json", {"passed": ok, "checks": rows})], ok


def _cmd_verify_lemmas(p):
    cfg = walks.WalkConfig(seed=p["seed"], workers=p["workers"])
    kcfg = walks.WalkConfig(increment_variance=1.0, seed=p["seed"], workers=p["workers"])
    zmax = p["z-max"]
    ns = p["samples"]
    rows = []

    def add(name, est, ref):
        z = est.z_score(ref)
        refv = ref.mean if isinstance(ref, walks.McEstimate) else float(ref)
        rows.append({"check": name, "estimate": est.mean, "stderr": est.stderr, "reference": refv,
                     "z": z, "passed": abs(z) < zmax})

    add("kac n=2 vs 1/(4 pi)", walks.kac_lhs(2, kcfg, ns), 1 / (4 * math.pi))
    for n in range(2, 11):
        add(f"kac n={n}", walks.kac_lhs(n, kcfg, ns), walks.kac_rhs(n))
    for n in range(2, 9):
        add(f"dyson n={n}", walks.dyson_rhs(n, kcfg, ns), walks.kac_lhs(n, kcfg, ns))
    for n in range(1, 6):
        for L in (0.5, 1.0, 2.0):
            add(f"cyclic n={n} L={L}", walks.p_n_direct(n, L, cfg, ns), walks.p_n_shifted(n, L, cfg, ns))
    from .mc import stream

    for n in (2, 3, 5):
        path = walks.walk_bridges(stream(p["seed"], f"shift-check:{n}", 0), 10_000, 2 * n, 0.5)
        hits = walks.cyclic_shift_hits(path).sum(axis=1)
        rows.append({"check": f"exactly one shift n={n}", "estimate": float(np.mean(hits == 1)), "stderr": 0.0,
                     "reference": 1.0, "z": 0.0, "passed": bool(np.all(hits == 1))})
    ok = all(r["passed"] for r in rows)
    return [("lemmas.json", "json", {"passed": ok, "checks": rows})], ok


def _cmd_mc_walk(p):
    cfg = walks.WalkConfig(horizon=p["horizon"], seed=p["seed"], workers=p["workers"])
    rows = []
    for L in p["L"]:
        if p["bridge-n"] > 0:
            est = walks.bridge_expectation(p["bridge-n"], p["functional"], cfg, L, p["samples"])
            row = {"quantity": f"bridge:{p['functional']}:n={p['bridge-n']}", "L": L}
        else:
            est = walks.exit_probability_mc(L, p["samples"], cfg)
            row = {"quantity": "exit_probability", "L": L}
        row.update(est.to_row())
        rows.append(row)
    return [("mc_walk.json", "json", rows)], True


def _cmd_transfer_exit(p):
    rows = []
    for L in p["L"]:
        r = transfer.transfer_exit_details(L, p["spacing"] or None, tol=p["tol"])
        rows.append({"L": L, "probability": r.probability, "scaled": math.sqrt(2) * L * r.probability,
                     "steps": r.steps, "spacing": r.spacing, "tail_extrapolation": r.tail_extrapolation})
    return [("transfer_exit.csv", "csv", rows)], True


def _tail_rows(curve, extra):
    rows = []
    for r in curve.rows():
        r = {"L": r["L"], "empirical_log_prob": _finite(r["empirical_log_prob"]) if r["count"] >= 25 else "",
             "stderr": _finite(r["stderr"]) if r["count"] >= 25 else "", "count": r["count"],
             "n_samples": r["n_samples"]}
        r.update(extra)
        rows.append(r)
    return rows


def _cmd_mc_ginibre(p):
    run_ = ginibre.sample_ginibre(p["n"], p["seed"], p["count"], p["method"], p["workers"])
    curve = tails.tail_curve(run_.lambda_max_shifted, p["l-grid"], min_samples=1)
    samples = [{"index": int(s.index), "lambda_max_shifted": s.lambda_max_shifted,
                "n_real": -1 if s.n_real is None else s.n_real} for s in run_.samples()]
    files = [(f"ginibre_tail_N{p['n']}.csv", "csv", _tail_rows(curve, {"N": p["n"]})),
             (f"ginibre_samples_N{p['n']}.csv", "csv", samples)]
    return files, not run_.failed


def _cmd_mc_abm(p):
    cfg = abm.AbmConfig(left_extent=p["left-extent"], init_spacing=p["spacing"] or 0.02, dt=p["dt"],
                        t_final=p["t-final"], seed=p["seed"], rel_step=p["rel-step"])
    batch = abm.simulate_many(cfg, p["count"], p["workers"])
    curve = tails.tail_curve(batch.rightmost_rescaled, p["l-grid"], min_samples=1)
    extra = {"dt": cfg.dt, "spacing": cfg.init_spacing}
    samples = [{"index": i, "rightmost_rescaled": float(r.rightmost_rescaled), "n_survivors": r.n_survivors,
                "annihilations": r.annihilations} for i, r in enumerate(batch.results())]
    return [("abm_tail.csv", "csv", _tail_rows(curve, extra)), ("abm_samples.csv", "csv", samples)], True


def _read_column(path, column):
    with open(path, newline="") as fh:
        return np.array([float(r[column]) for r in csv.DictReader(fh)])


def _cmd_compare(p):
    if not p["ginibre-samples"] or not p["abm-samples"]:
        raise UsageError("compare needs --ginibre-samples and --abm-samples")
    g = _read_column(p["ginibre-samples"], "lambda_max_shifted")
    a = _read_column(p["abm-samples"], "rightmost_rescaled")
    cg = tails.tail_curve(g, p["l-grid"], min_samples=1)
    ca = tails.tail_curve(a, p["l-grid"], min_samples=1)
    rows = []
    for i, L in enumerate(p["l-grid"]):
        pr = predictor.predict(L) if L >= 0 else None
        cell = lambda c, arr: _finite(arr[i]) if c.counts[i] >= 25 else ""
        rows.append({"L": L, "predicted_log_prob": pr.predicted_log_prob if pr else "",
                     "ginibre_log_prob": cell(cg, cg.empirical_log_prob), "ginibre_stderr": cell(cg, cg.stderr),
                     "abm_log_prob": cell(ca, ca.empirical_log_prob), "abm_stderr": cell(ca, ca.stderr)})
    stat, pval = tails.two_sample_ks(g, a)
    summary = {"ks_statistic": stat, "ks_p_value": pval, "n_ginibre": int(g.size), "n_abm": int(a.size)}
    return [("compare.csv", "csv", rows), ("compare.json", "json", summary)], True


HANDLERS = {
    "constants": _cmd_constants,
    "predict": _cmd_predict,
    "verify-identities": _cmd_verify_identities,
    "verify-lemmas": _cmd_verify_lemmas,
    "mc-walk": _cmd_mc_walk,
    "transfer-exit": _cmd_transfer_exit,
    "mc-ginibre": _cmd_mc_ginibre,
    "mc-abm": _cmd_mc_abm,
    "compare": _cmd_compare,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions():
    return {"gtail": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _execute(command: str, params: dict, out: Path, stdout) -> int:
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    files, valid = HANDLERS[command](params)
    outputs = []
    for name, kind, payload in files:
        path = out / name
        if kind == "csv":
            _write_csv(path, payload)
        else:
            _write_json(path, payload)
        outputs.append({"path": name, "sha256": _sha256(path)})
    manifest = {"command": command, "parameters": params, "seed": params.get("seed"),
                "worker_count": params.get("workers", 1), "versions": _versions(), "started": started,
                "finished": _now(), "outputs": outputs}
    _write_json(out / "manifest.json", manifest)
    for name, kind, payload in files:
        if kind == "json":
            print(json.dumps(payload, indent=2, default=_json_default), file=stdout)
        else:
            print(f"wrote {out / name} ({len(payload)} rows)", file=stdout)
    return EXIT_OK if valid else EXIT_VALIDATION


def replay(manifest_path, out=None, stdout=None) -> int:
    """Re-run a manifest and compare output digests; 0 if all match, 2 otherwise."""
    stdout = stdout or sys.stdout
    manifest = json.loads(Path(manifest_path).read_text())
    out = Path(out) if out else Path(tempfile.mkdtemp(prefix="gtail-replay-"))
    _execute(manifest["command"], manifest["parameters"], out, stdout)
    fresh = {o["path"]: o["sha256"] for o in json.loads((out / "manifest.json").read_text())["outputs"]}
    bad = [o["path"] for o in manifest["outputs"] if fresh.get(o["path"]) != o["sha256"]]
    for b in bad:
        print(f"mismatch: {b}", file=stdout)
    return EXIT_OK if not bad else EXIT_VALIDATION


def run(argv=None, env=None, stdout=None, stderr=None) -> int:
    """Parse ``argv`` and execute; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("missing command; choose from " + ", ".join([*COMMANDS, "replay"]))
        if ns.command == "replay":
            return replay(ns.manifest, ns.out, stdout)
        params = resolve(ns.command, ns, env)
        out = Path(ns.out or f"gtail-{ns.command}")
        return _execute(ns.command, params, out, stdout)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"invalid parameter: {exc}", file=stderr)
        return EXIT_USAGE
    except (ConvergenceError, AccuracyError) as exc:
        print(f"convergence failure: {exc}", file=stderr)
        return EXIT_CONVERGENCE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
