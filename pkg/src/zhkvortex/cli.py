"""Command-line interface.

Subcommands:
  beta-scan         Abrikosov beta(tau) over shapes, CSV + figure
  branch            solution branch b_s, theta_s over amplitudes, CSV + figure
  energy-landscape  E(tau) scan with argmin/Hessian report, CSV + JSON + figure
  verify            named invariant checks, report JSON, exit 1 on failure

Precedence for every option: explicit flag > --config JSON > built-in default.
The resolved configuration is echoed to <out>/resolved_config.json so runs are
reproducible from their artifacts; all delimited output is deterministic
(fixed field order, '%.12g' floats, '\\n' line endings).

Exit codes: 0 success; 1 failed invariant / convergence failure; 2 invalid
parameters or model conditions violated; 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .bifurcation import (ModelParams, basis_size_for, branch_at_b,
                          check_corrections, leading_coeffs, solve_branch)
from .energy import energy_per_cell, landscape_scan
from .errors import InvalidParameterError, ModelConditionError, ZhkError
from .fields import SpectralGrid
from .landau import LadderBasis, beta as beta_fn
from .lattice import make_lattice
from .verify import run_verify

HEX_TAU = complex(0.5, 0.5 * math.sqrt(3.0))
_FLOAT = "%.12g"


# ---------------------------------------------------------------------------
# small helpers

def _parse_tau(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise InvalidParameterError("tau must be 're,im', got %r" % text)


def _parse_range(text: str) -> tuple[float, float, int]:
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise InvalidParameterError("range must be 'start:stop:count', got %r" % text)


def _parse_slist(text: str) -> list[float]:
    if ":" in text:
        a, b, n = _parse_range(text)
        return [float(v) for v in np.linspace(a, b, n)]
    return [float(v) for v in text.split(",")]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InvalidParameterError("config root must be a JSON object")
    return cfg


def _pick(flag, cfg: dict, key: str, default):
    """flag (if given) > config entry > default."""
    if flag is not None:
        return flag
    if key in cfg:
        return cfg[key]
    return default


def _outdir(args, default_name: str) -> str:
    out = args.out or default_name
    os.makedirs(out, exist_ok=True)
    return out


def _fmt_cell(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else _FLOAT % v
    return v


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt_cell(v) for v in row])


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _echo_config(out: str, resolved: dict) -> None:
    _write_json(os.path.join(out, "resolved_config.json"), resolved)


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# ---------------------------------------------------------------------------
# beta-scan

def cmd_beta_scan(args) -> int:
    cfg = _load_config(args.config)
    N = int(_pick(args.N, cfg, "N", 64))
    taus: list[complex]
    if args.tau:
        taus = [_parse_tau(t) for t in args.tau]
    elif args.tau_grid:
        (r0, r1, rn), (i0, i1, im) = (_parse_range(p) for p in args.tau_grid.split(","))
        taus = [complex(re, imv) for imv in np.linspace(i0, i1, im)
                for re in np.linspace(r0, r1, rn)]
    elif "taus" in cfg:
        taus = [complex(t[0], t[1]) for t in cfg["taus"]]
    else:
        taus = [1j, HEX_TAU, complex(0.3, 1.1)]
    out = _outdir(args, "out-beta-scan")
    N2 = int(math.ceil(1.5 * N / 2) * 2)
    rows = []
    for tau in sorted(taus, key=lambda t: (t.imag, t.real)):
        b1 = beta_fn(tau, N=N, check=False)
        b2 = beta_fn(tau, N=N2, check=False)
        rows.append([tau.real, tau.imag, b1, N, abs(b1 - b2)])
    _write_csv(os.path.join(out, "beta_scan.csv"),
               ["tau_re", "tau_im", "beta", "grid_N", "residual"], rows)
    _echo_config(out, {
        "command": "beta-scan", "N": N,
        "taus": [[t.real, t.imag] for t in sorted(taus, key=lambda t: (t.imag, t.real))],
    })
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    re = [r[0] for r in rows]
    im = [r[1] for r in rows]
    bb = [r[2] for r in rows]
    sc = ax.scatter(re, im, c=bb, cmap="viridis", s=60)
    fig.colorbar(sc, ax=ax, label="beta")
    ax.set_xlabel("Re tau")
    ax.set_ylabel("Im tau")
    ax.set_title("Abrikosov beta over lattice shapes")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "beta_scan.png"), dpi=150)
    plt.close(fig)
    print("beta-scan: %d shapes -> %s" % (len(rows), out))
    return 0


# ---------------------------------------------------------------------------
# branch

def cmd_branch(args) -> int:
    cfg = _load_config(args.config)
    tau = _parse_tau(args.tau) if args.tau else complex(*cfg.get("tau", (0.0, 1.0)))
    chi = float(_pick(args.chi, cfg, "chi", 1.0))
    g = float(_pick(args.g, cfg, "g", 2.0))
    if g == 1.0 and not args.self_dual:
        raise ModelConditionError(
            "g = 1 is the self-dual case (b_s = chi + O(s^4)); "
            "pass --self-dual to continue anyway"
        )
    N = int(_pick(args.N, cfg, "N", 64))
    b_target = _pick(args.b, cfg, "b", None)
    s_list = _parse_slist(args.s) if args.s else cfg.get("s", None)
    if s_list is None:
        s_list = [float(v) for v in np.linspace(0.01, 0.10, 10)]
    out = _outdir(args, "out-branch")
    L = make_lattice(tau, 1)
    grid = SpectralGrid(L, N)
    M = ModelParams(chi=chi, g=g)
    if b_target is not None:
        # single point at the amplitude matching the applied field; the sign
        # condition sign(chi - b) = sign(g - 1) is enforced inside
        mu = M.mu(float(b_target))
        if mu > 0:
            s_est = math.sqrt(mu / (chi * beta_fn(tau, N=N)))
            M_max = int(_pick(args.M_max, cfg, "M_max",
                              basis_size_for(1.25 * s_est)))
        else:
            M_max = 40  # branch_at_b will refuse before the basis matters
        basis = LadderBasis(L, grid, M_max=M_max)
        s_b, point = branch_at_b(L, M, basis, grid, b=float(b_target))
        s_list = [s_b]
        points = [point]
    else:
        M_max = _pick(args.M_max, cfg, "M_max", None)
        if M_max is None:
            M_max = basis_size_for(max(s_list))
        M_max = int(M_max)
        basis = LadderBasis(L, grid, M_max=M_max)
        points = solve_branch(L, M, s_list, basis, grid)
    coeffs = leading_coeffs(L, M, basis, grid)
    header = ["s", "b_s", "theta_s", "residual", "divJ_norm", "energy"]
    if args.verify:
        header += ["dpsi", "dalpha", "da0", "dtheta", "db"]
    rows = []
    for p in points:
        Mb = replace(M, b=p.b)
        e = energy_per_cell(p.state, Mb, basis, grid)
        row = [p.s, p.b, p.theta, p.residual, p.div_J, e]
        if args.verify:
            d = check_corrections(p, coeffs, basis, chi)
            row += [d["dpsi"], d["dalpha"], d["da0"], d["dtheta"], d["db"]]
        rows.append(row)
    _write_csv(os.path.join(out, "branch.csv"), header, rows)
    _echo_config(out, {
        "command": "branch", "tau": [tau.real, tau.imag], "chi": chi, "g": g,
        "N": N, "M_max": M_max, "s": s_list, "verify": bool(args.verify),
        "b": (None if b_target is None else float(b_target)),
        "bprime": coeffs.bprime, "beta": coeffs.beta, "theta1": coeffs.theta1,
    })
    plt = _figure()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    ss = np.array([p.s for p in points])
    bs = np.array([p.b for p in points])
    axes[0].plot(ss, bs, "o-", label="b_s")
    axes[0].plot(ss, chi + coeffs.bprime * ss**2, "--",
                 label="chi + b' s^2")
    axes[0].set_xlabel("s")
    axes[0].set_ylabel("b")
    axes[0].legend()
    axes[0].set_title("branch field vs amplitude")
    axes[1].semilogy(ss, [max(p.residual, 1e-17) for p in points], "o-")
    axes[1].set_xlabel("s")
    axes[1].set_ylabel("||F||")
    axes[1].set_title("full-grid residual")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "branch.png"), dpi=150)
    plt.close(fig)
    if args.verify:
        _print_correction_ratios(points, coeffs, basis, chi)
    print("branch: %d points (tau = %g+%gi) -> %s" % (len(points), tau.real, tau.imag, out))
    return 0


def _print_correction_ratios(points, coeffs, basis, chi) -> None:
    ds = [check_corrections(p, coeffs, basis, chi) for p in points]
    by_s = {round(d["s"], 12): d for d in ds}
    print("s-doubling ratios (expect ~{8,16,16,16,16}):")
    for d in ds:
        s2 = round(2 * d["s"], 12)
        if s2 in by_s:
            e = by_s[s2]
            print("  s=%.3f->%.3f  dpsi x%.2f  dalpha x%.2f  da0 x%.2f  dtheta x%.2f  db x%.2f"
                  % (d["s"], 2 * d["s"],
                     e["dpsi"] / d["dpsi"], e["dalpha"] / d["dalpha"],
                     e["da0"] / d["da0"], e["dtheta"] / d["dtheta"],
                     e["db"] / d["db"]))


# ---------------------------------------------------------------------------
# energy-landscape

def cmd_energy_landscape(args) -> int:
    cfg = _load_config(args.config)
    chi = float(_pick(args.chi, cfg, "chi", 1.0))
    g = float(_pick(args.g, cfg, "g", 2.0))
    mu = float(_pick(args.mu, cfg, "mu", 0.01))
    N = int(_pick(args.N, cfg, "N", 64))
    rr = _parse_range(args.re_range) if args.re_range else tuple(cfg.get("re_range", (-0.5, 0.5, 41)))
    ir = _parse_range(args.im_range) if args.im_range else tuple(cfg.get("im_range", (0.85, 1.3, 41)))
    spots: list[complex] = []
    if args.spots:
        spots = [_parse_tau(p) for p in args.spots.split(";")]
    elif "spots" in cfg:
        spots = [complex(t[0], t[1]) for t in cfg["spots"]]
    out = _outdir(args, "out-energy-landscape")
    M = ModelParams(chi=chi, g=g)
    scan = landscape_scan(M, mu, re_range=rr[:2], re_count=int(rr[2]),
                          im_range=ir[:2], im_count=int(ir[2]), N=N,
                          branch_spots=tuple(spots))
    rows = [[r["tau_re"], r["tau_im"], r.get("beta", math.nan), r.get("E_asymp", math.nan),
             r.get("E_direct", math.nan), r["mu"], r["status"]] for r in scan["rows"]]
    _write_csv(os.path.join(out, "landscape.csv"),
               ["tau_re", "tau_im", "beta", "E_asymp", "E_direct", "mu", "status"], rows)
    _write_json(os.path.join(out, "argmin.json"), {
        "argmin": scan["argmin"], "hessian_square": scan["hessian_square"],
    })
    _echo_config(out, {
        "command": "energy-landscape", "chi": chi, "g": g, "mu": mu, "N": N,
        "re_range": list(rr), "im_range": list(ir),
        "spots": [[t.real, t.imag] for t in spots],
    })
    plt = _figure()
    res = sorted({r["tau_re"] for r in scan["rows"] if r["status"] in ("ok", "spot")})
    ims = sorted({r["tau_im"] for r in scan["rows"] if r["status"] in ("ok", "spot")})
    grid_vals = np.full((len(ims), len(res)), np.nan)
    ri = {v: k for k, v in enumerate(res)}
    ii = {v: k for k, v in enumerate(ims)}
    for r in scan["rows"]:
        if r["status"] in ("ok", "spot") and r["tau_re"] in ri and r["tau_im"] in ii:
            grid_vals[ii[r["tau_im"]], ri[r["tau_re"]]] = r["E_asymp"]
    fig, ax = plt.subplots(figsize=(7, 5))
    pm = ax.pcolormesh(res, ims, grid_vals, shading="nearest", cmap="magma")
    fig.colorbar(pm, ax=ax, label="E_asymptotic")
    am = scan["argmin"]
    ax.plot([am["tau_re"]], [am["tau_im"]], "c*", markersize=14, label="argmin")
    ax.plot([0.0], [1.0], "ws", markersize=6, label="square (saddle)")
    ax.set_xlabel("Re tau")
    ax.set_ylabel("Im tau")
    ax.set_title("energy per cell over lattice shapes (mu = %g)" % mu)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "landscape.png"), dpi=150)
    plt.close(fig)
    print("energy-landscape: argmin tau = %.4f + %.4fi (E = %.9g) -> %s"
          % (am["tau_re"], am["tau_im"], am["E_asymp"], out))
    return 0


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    out = _outdir(args, "out-verify")
    results = run_verify(quick=bool(args.quick), seed=int(args.seed),
                         corrupt_cocycle=bool(args.corrupt_cocycle))
    for r in results:
        print(r.line())
    _write_json(os.path.join(out, "verify_report.json"), [
        {"name": r.name, "ok": r.ok, "value": (None if math.isnan(r.value) else r.value),
         "tol": (None if math.isnan(r.tol) else r.tol), "detail": r.detail,
         "seconds": round(r.seconds, 3)}
        for r in results
    ])
    _echo_config(out, {"command": "verify", "quick": bool(args.quick),
                       "seed": int(args.seed),
                       "corrupt_cocycle": bool(args.corrupt_cocycle)})
    failures = [r.name for r in results if not r.ok]
    if failures:
        print("FAILED: %s" % ", ".join(failures), file=sys.stderr)
        return 1
    print("all %d checks passed" % len(results))
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zhkvortex",
                                description="vortex lattices of the ZHK Chern-Simons model")
    sub = p.add_subparsers(dest="command", required=True)

    bs = sub.add_parser("beta-scan", help="Abrikosov beta over lattice shapes")
    bs.add_argument("--tau", action="append", metavar="RE,IM",
                    help="shape(s); repeatable")
    bs.add_argument("--tau-grid", metavar="R0:R1:NR,I0:I1:NI",
                    help="rectangular grid of shapes")
    bs.add_argument("--N", type=int, help="quadrature grid (default 64)")
    _common(bs)
    bs.set_defaults(func=cmd_beta_scan)

    br = sub.add_parser("branch", help="bifurcation branch over amplitudes")
    br.add_argument("--tau", metavar="RE,IM", help="lattice shape (default 0,1)")
    br.add_argument("--chi", type=float, help="-V'(0) (default 1)")
    br.add_argument("--g", type=float, help="V''(0) (default 2)")
    br.add_argument("--s", metavar="A:B:N|LIST", help="amplitudes (default 0.01:0.10:10)")
    br.add_argument("--b", type=float,
                    help="applied field; solves the single amplitude with b_s = b")
    br.add_argument("--N", type=int, help="grid (default 64)")
    br.add_argument("--M-max", dest="M_max", type=int, help="ladder cutoff (default: sized from the largest s)")
    br.add_argument("--verify", action="store_true",
                    help="append correction-scaling diagnostics")
    br.add_argument("--self-dual", dest="self_dual", action="store_true",
                    help="allow the degenerate g = 1 branch")
    _common(br)
    br.set_defaults(func=cmd_branch)

    el = sub.add_parser("energy-landscape", help="energy over lattice shapes")
    el.add_argument("--mu", type=float, help="(chi-b)/(g-1) (default 0.01)")
    el.add_argument("--chi", type=float, help="-V'(0) (default 1)")
    el.add_argument("--g", type=float, help="V''(0) (default 2)")
    el.add_argument("--re-range", metavar="A:B:N", help="Re tau range (default -0.5:0.5:41)")
    el.add_argument("--im-range", metavar="A:B:N", help="Im tau range (default 0.85:1.3:41)")
    el.add_argument("--N", type=int, help="beta quadrature grid (default 64)")
    el.add_argument("--spots", metavar="RE,IM;RE,IM",
                    help="shapes for direct branch-energy checks")
    _common(el)
    el.set_defaults(func=cmd_energy_landscape)

    vf = sub.add_parser("verify", help="run the invariant checks")
    vf.add_argument("--quick", action="store_true", help="reduced sizes, < 30 s")
    vf.add_argument("--seed", type=int, default=2026)
    vf.add_argument("--corrupt-cocycle", action="store_true", help=argparse.SUPPRESS)
    _common(vf)
    vf.set_defaults(func=cmd_verify)
    return p


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with defaults for this subcommand")
    sp.add_argument("--out", help="output directory (default out-<command>)")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ZhkError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print("io error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
