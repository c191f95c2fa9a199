"""Command-line front end: ``sympkit <command> --config PATH [--out PATH] [--format json|csv]``.

Exit codes: 0 when every check passes, 1 on an analysis-level failure or
violated check, 2 on usage or configuration errors.  ``SYMPKIT_THREADS``
caps the number of worker threads used across lambda samples.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import report
from .definiteness import (
    block_coefficients,
    check_block_sufficient_condition,
    gram_phi,
    is_definite,
    maximal_rank_interval,
    prefix_ranks,
)
from .errors import StructureError, SympkitError
from .relations import deficiency_consistency
from .system_model import (
    SymplecticSystem,
    ToleranceConfig,
    from_sturm_liouville,
    validate_hypotheses,
)
from .weyl_green import (
    approx_half_line_M,
    build_green_table,
    crossed_wronskian_residual,
    green_property_residuals,
    nevanlinna_eigenvalues,
    yhat,
    zhat,
)

COMMANDS = ("validate", "definiteness", "weyl", "green-solve", "deficiency")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def parse_complex_array(obj, ndim, name):
    """Array of complex numbers written as reals or ``[re, im]`` pairs.

    ``ndim`` is the rank of the intended complex array; a trailing axis of
    length 2 beyond it holds real and imaginary parts.
    """
    try:
        a = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: not a numeric array") from exc
    if a.ndim == ndim:
        return a.astype(complex)
    if a.ndim == ndim + 1 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    raise ConfigError(f"{name}: expected a {ndim}-dimensional array of reals or [re, im] pairs")


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing required key '{key}'")
    return cfg[key]


def build_system(cfg):
    """Construct the system described by a configuration dictionary."""
    desc = _require(cfg, "system")
    if not isinstance(desc, dict):
        raise ConfigError("'system' must be an object")
    tol = ToleranceConfig(**cfg.get("tolerances", {}))
    kind = _require(desc, "kind")
    horizon = cfg.get("horizon")
    if kind == "sturm_liouville":
        if horizon is None:
            raise ConfigError("sturm_liouville systems need 'horizon'")
        p, q, w = (desc.get(key, default) for key, default in (("p", 1.0), ("q", 0.0), ("w", 1.0)))
        return from_sturm_liouville(p, q, w, horizon=int(horizon), tolerances=tol)
    if kind == "constant":
        if horizon is None:
            raise ConfigError("constant systems need 'horizon'")
        S = parse_complex_array(_require(desc, "S"), 2, "S")
        Psi = parse_complex_array(_require(desc, "Psi"), 2, "Psi")
        return SymplecticSystem.constant(S, Psi, int(horizon), tol)
    if kind == "explicit":
        S = parse_complex_array(_require(desc, "S"), 3, "S")
        Psi = parse_complex_array(_require(desc, "Psi"), 3, "Psi")
        if horizon is not None and S.shape[0] != int(horizon) + 1:
            raise ConfigError(f"S has {S.shape[0]} entries, expected horizon + 1 = {int(horizon) + 1}")
        return SymplecticSystem.from_arrays(S, Psi, tol)
    raise ConfigError(f"unknown system kind '{kind}'")


def _lambdas(cfg, nonreal=False):
    raw = cfg.get("lambdas")
    if not raw:
        raise ConfigError("'lambdas' must be a nonempty list of [re, im] pairs")
    lams = [complex(x) for x in parse_complex_array(raw, 1, "lambdas")]
    if nonreal and any(lam.imag == 0 for lam in lams):
        raise ConfigError("this command requires nonreal lambda values")
    return lams


def _optional_matrix(cfg, key, n):
    if cfg.get(key) is None:
        return None
    a = parse_complex_array(cfg[key], 2, key)
    if a.shape != (n, 2 * n):
        raise ConfigError(f"'{key}' must be {n} x {2 * n}")
    return a


def _forcing(cfg, sys):
    desc = cfg.get("f", {"seed": 0})
    shape = (sys.horizon + 1, 2 * sys.n, 1)
    if "values" in desc:
        f = parse_complex_array(desc["values"], 2, "f.values")
        if f.shape != shape[:2]:
            raise ConfigError(f"f.values must have shape {shape[:2]}")
        return f[:, :, None]
    if "constant" in desc:
        v = parse_complex_array(desc["constant"], 1, "f.constant")
        if v.shape != (2 * sys.n,):
            raise ConfigError(f"f.constant must have length {2 * sys.n}")
        return np.broadcast_to(v[None, :, None], shape).copy()
    if "seed" in desc:
        rng = np.random.default_rng(int(desc["seed"]))
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    raise ConfigError("'f' must contain 'values', 'constant' or 'seed'")


def _threads():
    try:
        return max(1, int(os.environ.get("SYMPKIT_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    threads = min(_threads(), len(items))
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _tagged(checks, lam):
    tag = f"[{lam.real:g}{lam.imag:+g}i]"
    return [dict(c, name=f"{c['name']}{tag}") for c in checks]


def cmd_validate(cfg, sys):
    rep = validate_hypotheses(sys)
    res = rep.max_residuals()
    names = {"symplectic": "symplectic", "hermitian": "hermitian", "isotropic": "isotropic",
             "semidefinite": "min_eig", "roundtrip": "roundtrip"}
    checks = [report.check(name, name not in rep.violations, res[key]) for name, key in names.items()]
    payload = {
        "violations": list(rep.violations),
        "failing_indices": np.flatnonzero(~rep.passed_by_k).tolist(),
        "per_k": {
            "symplectic": rep.symplectic,
            "hermitian": rep.hermitian,
            "isotropic": rep.isotropic,
            "min_eig": rep.min_eig,
            "roundtrip": rep.roundtrip,
        },
    }
    return checks, payload


def cmd_definiteness(cfg, sys):
    probe_lam = parse_complex_array(cfg.get("lambda_probe", 0.0), 0, "lambda_probe")
    lam = complex(probe_lam)
    ranks = prefix_ranks(sys, lam)
    interval, rank = maximal_rank_interval(sys, lam=lam)
    probe = tuple(cfg.get("interval", (0, sys.horizon)))
    cert = is_definite(sys, probe, lam)
    gram = gram_phi(sys, lam, probe)
    checks = [report.check("prefix_rank_monotone", bool(np.all(np.diff(ranks) >= 0)))]
    payload = {
        "lambda": lam,
        "prefix_ranks": ranks,
        "maximal_rank_interval": list(interval),
        "maximal_rank": rank,
        "interval": list(probe),
        "definite": cert.definite,
        "rank": cert.rank,
        "gram_eigenvalues": gram.eigenvalues,
        "gram_condition": gram.condition,
    }
    if not cert.definite:
        payload["kernel_vector"] = cert.kernel_vector
        payload["kernel_vector_weighted_norm"] = cert.kernel_norm
    try:
        block_coefficients(sys)
    except StructureError:
        payload["block_condition"] = {"detectable": False}
    else:
        fired = [l for l in range(1, sys.horizon + 1) if check_block_sufficient_condition(sys, l)]
        consistent = all(is_definite(sys, (l - 1, l), lam).definite for l in fired)
        payload["block_condition"] = {"detectable": True, "first_l": fired[0] if fired else None,
                                      "count": len(fired)}
        checks.append(report.check("block_condition_implies_definite", consistent))
    return checks, payload


def _N_list(cfg):
    N_list = cfg.get("N_list")
    return None if N_list is None else [int(x) for x in N_list]


def cmd_weyl(cfg, sys):
    lams = _lambdas(cfg, nonreal=True)
    alpha = _optional_matrix(cfg, "alpha", sys.n)
    beta = _optional_matrix(cfg, "beta", sys.n)
    drift_tol = float(cfg.get("drift_tol", 1e-6))
    tol = sys.tolerances

    def one(lam):
        up = approx_half_line_M(sys, lam, _N_list(cfg), beta, alpha)
        dn = approx_half_line_M(sys, np.conj(lam), _N_list(cfg), beta, alpha)
        sym = float(np.linalg.norm(up.M_plus.conj().T - dn.M_plus))
        nev = nevanlinna_eigenvalues(up.M_plus, lam)
        ok = [t for t in up.trace if t["ok"]]
        E_max = max(t["E_N_max"] for t in ok)
        scale = max(1.0, float(np.linalg.norm(up.M_plus)))
        drift = up.last_drift
        checks = [
            report.check("symmetry", sym <= 1e-8 * scale, sym),
            report.check("boundary_disk", E_max <= tol.psd_tol * scale ** 2 * 1e2, E_max),
            report.check("nevanlinna", float(nev.min()) >= -tol.psd_tol * scale, float(nev.min())),
            report.check("drift", drift is not None and drift <= drift_tol,
                         float("nan") if drift is None else drift),
        ]
        trace = [{k: v for k, v in t.items()} for t in up.trace]
        result = {"lambda": lam, "M_plus": up.M_plus, "trace": trace,
                  "symmetry_residual": sym, "nevanlinna_eigenvalues": nev}
        return _tagged(checks, lam), result

    out = _map(one, lams)
    checks = [c for cs, _ in out for c in cs]
    return checks, {"results": [r for _, r in out]}


def cmd_green_solve(cfg, sys):
    lams = _lambdas(cfg, nonreal=True)
    alpha = _optional_matrix(cfg, "alpha", sys.n)
    beta = _optional_matrix(cfg, "beta", sys.n)
    f = _forcing(cfg, sys)
    v = parse_complex_array(cfg.get("v", [1.0] * sys.n), 1, "v")
    if v.shape != (sys.n,):
        raise ConfigError(f"'v' must have length {sys.n}")
    grid = int(cfg.get("green_grid", 10))

    def one(lam):
        table = build_green_table(sys, lam, alpha, _N_list(cfg), beta)
        g = min(grid, table.stop + 1)
        props = green_property_residuals(table, range(g), range(g))
        crossed = max(crossed_wronskian_residual(table, k) for k in range(table.stop + 1))
        z = zhat(table, f)
        y = yhat(table, v, f)
        checks = [
            report.check("green_adjoint_offdiag", props["adjoint_offdiag"] <= 1e-6, props["adjoint_offdiag"]),
            report.check("green_adjoint_diag", props["adjoint_diag"] <= 1e-6, props["adjoint_diag"]),
            report.check("green_jump", props["jump"] <= 1e-6, props["jump"]),
            report.check("green_recursion", props["recursion"] <= 1e-6, props["recursion"]),
            report.check("zhat_recursion", z.max_recursion_residual <= 1e-8, z.max_recursion_residual),
            report.check("zhat_initial", z.initial_residual <= 1e-10, z.initial_residual),
            report.check("zhat_bound", z.bound_holds, z.margin),
            report.check("yhat_initial", y.initial_residual <= 1e-10, y.initial_residual),
            report.check("yhat_bound", y.bound_holds, y.margin),
        ]
        entries = [{"k": k, "l": l, "G": table.entry(k, l)} for k in range(g) for l in range(g)]
        result = {
            "lambda": lam,
            "table_stop": table.stop,
            "M_plus": table.M_plus,
            "M_plus_conj": table.M_plus_conj,
            "drift": table.drift,
            "crossed_wronskian_max": crossed,
            "green_properties": props,
            "zhat": {"values": z.z.values[:, :, 0], "norm": z.norm, "bound": z.bound,
                     "recursion_residual": z.recursion_residual},
            "yhat": {"values": y.z.values[:, :, 0], "norm": y.norm, "bound": y.bound,
                     "recursion_residual": y.recursion_residual},
            "green_entries": entries,
        }
        return _tagged(checks, lam), result

    out = _map(one, lams)
    checks = [c for cs, _ in out for c in cs]
    return checks, {"results": [r for _, r in out]}


def cmd_deficiency(cfg, sys):
    lams = _lambdas(cfg)
    interval = cfg.get("interval")
    count_N = cfg.get("count_N_list")
    rep = deficiency_consistency(sys, lams, interval, count_N,
                                 float(cfg.get("growth_ratio_threshold", 1 + 1e-6)),
                                 max_workers=_threads())
    checks = [report.check(name, ok) for name, ok in rep.checks.items()]
    payload = {
        "lambda_samples": rep.lambda_samples,
        "d_lambda": rep.d_lambda,
        "d_tilde": rep.d_tilde,
        "rank_phi": rep.rank_phi,
        "rank_phi_samples": rep.rank_phi_samples,
        "interval": list(rep.interval),
        "n": rep.n,
        "warnings": rep.warnings,
        "growth_ratios": [c.ratios for c in rep.counts],
        "basis": [c.basis for c in rep.counts],
    }
    return checks, payload


HANDLERS = {
    "validate": cmd_validate,
    "definiteness": cmd_definiteness,
    "weyl": cmd_weyl,
    "green-solve": cmd_green_solve,
    "deficiency": cmd_deficiency,
}


def run(command, cfg):
    """Run ``command`` on a parsed configuration; returns ``(exit_code, document)``."""
    sys_ = build_system(cfg)
    checks, payload = HANDLERS[command](cfg, sys_)
    if command != "validate":
        # the analyses presuppose a valid system; record violations as a failed check
        violations = validate_hypotheses(sys_).violations
        detail = ", ".join(violations) if violations else None
        checks = [report.check("hypotheses", not violations, detail=detail)] + checks
    passed = all(c["status"] == "pass" for c in checks)
    doc = {
        "command": command,
        "config": cfg,
        "status": "pass" if passed else "fail",
        "checks": checks,
        "payload": payload,
    }
    return (0 if passed else 1), doc


def make_parser():
    parser = argparse.ArgumentParser(prog="sympkit", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output file (default: standard output)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("configuration must be a JSON object")
        code, doc = run(args.command, cfg)
    except (OSError, ConfigError, TypeError, KeyError, ValueError, IndexError) as exc:
        # includes malformed JSON and invalid system data
        print(f"sympkit: configuration error: {exc}", file=sys.stderr)
        return 2
    except SympkitError as exc:
        print(f"sympkit: analysis failed: {exc}", file=sys.stderr)
        return 1
    text = report.dumps(doc) if args.format == "json" else report.to_csv(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
