"""``gyro-ua`` command line: single runs and the convergence, τ-resolution,
energy and limit studies.  CSV files are the contract; SVG plots are optional
and need matplotlib."""

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from gyroua import diagnostics as dg
from gyroua import driver as dr
from gyroua.config import ConfigError, ExperimentConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
LIMIT_ANCHOR = 1e-4


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    return [int(v) for v in _floats(text)]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; flags override its values")
    common.add_argument("--eps", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--tf", type=float, dest="t_f")
    common.add_argument("--ntau", type=int, dest="n_tau")
    common.add_argument("--scheme")
    common.add_argument("--prep", type=int, choices=(1, 2, 3), dest="prep_order")
    common.add_argument("--mode", choices=("external", "poisson"))
    common.add_argument("--np", type=int, dest="n_particles")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="parallel sweep points")
    common.add_argument("--plot", action="store_true", help="also write an SVG (needs matplotlib)")

    p = argparse.ArgumentParser(prog="gyro-ua", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one simulation")
    c = sub.add_parser("convergence", parents=[common], help="error against Δt for several ε")
    c.add_argument("--eps-list", type=_floats, default=[1.0, 1e-1, 1e-2, 1e-3])
    c.add_argument("--dt-list", type=_floats, default=[1e-2, 5e-3, 2.5e-3, 1.25e-3])
    c.add_argument("--dt-ref", type=float, default=None, help="RK4 step for the external reference")
    t = sub.add_parser("tau-scan", parents=[common], help="error against N_tau")
    t.add_argument("--ntau-list", type=_ints, default=[4, 8, 16, 32, 64])
    e = sub.add_parser("energy", parents=[common], help="Vlasov-Poisson energy history")
    e.add_argument("--eps-list", type=_floats, default=None)
    lm = sub.add_parser("limit", parents=[common], help="distance to the ε = 1e-4 solution")
    lm.add_argument("--eps-list", type=_floats, default=[1e-1, 3e-2, 1e-2])
    return p


def resolve_config(args, **forced):
    base = load_config(args.config) if args.config else ExperimentConfig()
    keys = ("eps", "dt", "t_f", "n_tau", "scheme", "prep_order", "mode", "n_particles", "seed", "jobs")
    over = {k: getattr(args, k, None) for k in keys}
    over.update(forced)
    return base.with_overrides(**over)


# -- writers ------------------------------------------------------------------------------------


def write_moments_csv(path, record):
    """Grid layout of the field dumps with an extra ``rho_v`` column."""
    grid = record.grid
    nodes = grid.nodes()
    e = record.extras.get("e_field", np.zeros((2, grid.nx1, grid.nx2)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "rho", "rho_v", "E1", "E2"])
        for j in range(grid.nx2):
            for i in range(grid.nx1):
                vals = (nodes[0, i, j], nodes[1, i, j], record.rho[i, j], record.rho_v[i, j], e[0, i, j], e[1, i, j])
                w.writerow([repr(float(v)) for v in vals])


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r])


def loglog_svg(path, series, xlabel, ylabel):
    """``series`` maps a label to (x, y).  Silently skipped without matplotlib."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping plot", file=sys.stderr)
        return False
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, (x, y) in series.items():
        ax.loglog(x, y, "o-", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


def _pool_map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# -- commands ----------------------------------------------------------------------------------


def cmd_run(cfg, out):
    tic = time.perf_counter()
    rec = dr.run(cfg)
    write_moments_csv(out / "moments_tf.csv", rec)
    rec.write_csv(out / "record.csv")
    cfg.write(out / "config_echo.ini")
    (out / "timing.txt").write_text(f"total_s {time.perf_counter() - tic:.3f}\nsteps {len(rec.wall_times)}\n")
    return rec


def _external_eps_point(job):
    cfg, dts, dt_ref = job
    ens = dr.init_particles(cfg.n_particles, cfg.seed, cfg.eta, cfg.k)
    refr = dr.run_reference(cfg, ens, dt_ref=dt_ref)
    errs = []
    for h in dts:
        r = dr.run_external(cfg.with_overrides(dt=h), ens)
        errs.append((dg.relative_linf_error(r.rho, refr.rho), dg.relative_linf_error(r.rho_v, refr.rho_v)))
    return errs


def _poisson_eps_point(job):
    cfg, dts, _ = job
    ens = dr.init_particles(cfg.n_particles, cfg.seed, cfg.eta, cfg.k)
    finest = min(dts)
    refr = dr.run_vlasov_poisson(cfg.with_overrides(dt=finest), ens)
    errs = []
    for h in dts:
        if h == finest:
            continue
        r = dr.run_vlasov_poisson(cfg.with_overrides(dt=h), ens)
        errs.append((dg.relative_linf_error(r.rho, refr.rho), dg.relative_linf_error(r.rho_v, refr.rho_v)))
    return errs


def convergence_table(cfg, eps_list, dt_list, dt_ref=None, jobs=1):
    """Rows keyed by the diagnostics CSV header; one slope (ρ^ε) per ε.

    External mode compares against RK4 on the same particles; poisson mode
    against its own finest Δt, which is then left out of the table."""
    dts = sorted(dt_list, reverse=True)
    point = _external_eps_point if cfg.mode == "external" else _poisson_eps_point
    jobs_in = [(cfg.with_overrides(eps=e, dt=dts[0]), dts, dt_ref) for e in eps_list]
    results = _pool_map(point, jobs_in, jobs)
    rows, slopes = [], {}
    for eps, errs in zip(eps_list, results):
        used = dts[: len(errs)]
        slope = dg.fit_order([e[0] for e in errs], used) if len(errs) >= 2 else float("nan")
        slope_v = dg.fit_order([e[1] for e in errs], used) if len(errs) >= 2 else float("nan")
        slopes[eps] = (slope, slope_v)
        for h, (er, ev) in zip(used, errs):
            rows.append(
                dict(dt=h, epsilon=eps, scheme=cfg.scheme, prep_order=cfg.prep_order, err_rho=er, err_rho_over_eps=er / eps, err_rhov=ev, slope=slope)
            )
    return rows, slopes


def cmd_convergence(cfg, out, eps_list, dt_list, dt_ref=None, plot=False):
    rows, slopes = convergence_table(cfg, eps_list, dt_list, dt_ref, cfg.jobs)
    dg.write_convergence_csv(out / "convergence.csv", rows)
    lines = [f"eps={e:g} slope_rho={s:.3f} slope_rhov={sv:.3f}" for e, (s, sv) in slopes.items()]
    (out / "slopes.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if plot:
        series = {}
        for e in eps_list:
            pts = [(r["dt"], r["err_rho"]) for r in rows if r["epsilon"] == e]
            series[f"eps={e:g}"] = tuple(np.array(pts).T)
        loglog_svg(out / "convergence.svg", series, "dt", "relative L-inf error of rho")
    return rows, slopes


def tau_scan(cfg, ntau_list, n_ref=64):
    """Final-time moment errors against the ``n_ref`` run at the same Δt."""
    ens = dr.init_particles(cfg.n_particles, cfg.seed, cfg.eta, cfg.k)
    refr = dr.run(cfg.with_overrides(n_tau=n_ref), ensemble=ens)
    rows = []
    for n in ntau_list:
        r = refr if n == n_ref else dr.run(cfg.with_overrides(n_tau=n), ensemble=ens)
        rows.append((n, dg.relative_linf_error(r.rho, refr.rho), dg.relative_linf_error(r.rho_v, refr.rho_v)))
    return rows


def cmd_tau_scan(cfg, out, ntau_list, plot=False):
    rows = tau_scan(cfg, ntau_list)
    write_table(out / "tau_scan.csv", ["n_tau", "err_rho", "err_rhov"], rows)
    for n, er, ev in rows:
        print(f"n_tau={n} err_rho={er:.3e} err_rhov={ev:.3e}")
    if plot:
        pos = [r for r in rows if r[1] > 0]
        if pos:
            loglog_svg(out / "tau_scan.svg", {"rho": ([r[0] for r in pos], [r[1] for r in pos])}, "N_tau", "relative error")
    return rows


def energy_history(cfg):
    rec = dr.run_vlasov_poisson(cfg.with_overrides(mode="poisson"))
    t, H = rec.series("H")
    _, rel = rec.series("rel_err")
    return list(zip(t, H, rel))


def cmd_energy(cfg, out, eps_list=None):
    eps_list = eps_list or [cfg.eps]
    cfgs = [cfg.with_overrides(eps=e, mode="poisson") for e in eps_list]
    histories = _pool_map(energy_history, cfgs, cfg.jobs)
    for e, hist in zip(eps_list, histories):
        name = "energy.csv" if len(eps_list) == 1 else f"energy_eps{e:g}.csv"
        write_table(out / name, ["t", "H", "rel_err"], hist)
        print(f"eps={e:g} max_rel_err={max(r[2] for r in hist):.3e}")
    return dict(zip(eps_list, histories))


def limit_study(cfg, eps_list, anchor=LIMIT_ANCHOR):
    ens = dr.init_particles(cfg.n_particles, cfg.seed, cfg.eta, cfg.k)
    a = dr.run(cfg.with_overrides(eps=anchor), ensemble=ens)
    rows = [(anchor, 0.0, 0.0)]
    for e in eps_list:
        r = dr.run(cfg.with_overrides(eps=e), ensemble=ens)
        rows.append((e, dg.relative_linf_error(r.rho, a.rho), dg.relative_linf_error(r.rho_v, a.rho_v)))
    body = rows[1:]
    slopes = (
        dg.fit_order([r[1] for r in body], [r[0] for r in body]),
        dg.fit_order([r[2] for r in body], [r[0] for r in body]),
    )
    return rows, slopes


def cmd_limit(cfg, out, eps_list, plot=False):
    rows, (s, sv) = limit_study(cfg, eps_list)
    write_table(out / "limit.csv", ["epsilon", "err_rho", "err_rhov"], rows)
    msg = f"slope_rho={s:.3f} slope_rhov={sv:.3f}"
    (out / "slopes.txt").write_text(msg + "\n")
    print(msg)
    if plot:
        body = rows[1:]
        loglog_svg(out / "limit.svg", {"rho": ([r[0] for r in body], [r[1] for r in body])}, "epsilon", "distance to limit")
    return rows, (s, sv)


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        forced = {"mode": "poisson"} if args.command == "energy" else {}
        cfg = resolve_config(args, **forced)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            cmd_run(cfg, out)
        elif args.command == "convergence":
            cmd_convergence(cfg, out, args.eps_list, args.dt_list, args.dt_ref, args.plot)
        elif args.command == "tau-scan":
            cmd_tau_scan(cfg, out, args.ntau_list, args.plot)
        elif args.command == "energy":
            cmd_energy(cfg, out, args.eps_list)
        else:
            cmd_limit(cfg, out, args.eps_list, args.plot)
        if args.command != "run":
            cfg.write(out / "config_echo.ini")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (dr.NumericalError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
