"""Command-line experiment runner.

Verbs
-----
policy        one policy curve over a signed M grid
sweep         effective capacity of several policies over the theta grid
distribution  density/CDF table with a Monte Carlo histogram
validate      self-check report; non-zero exit if any check fails
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .channel import instantaneous_rate, transmit_power
from .config import ConfigError, ExperimentConfig, default_config, load_config, with_seed
from .errors import ConvergenceError, InvalidParameterError, NoRootError
from .policy import (
    QoSParams,
    channel_inversion_policy,
    constant_current_policy,
    optimal_policy,
    water_filling_policy,
)
from .qos import effective_capacity
from .validation import format_report, ks_statistic, run_checks

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 3
EXIT_SOLVER = 4
EXIT_IO = 5

POLICY_NAMES = ("optimal", "wf", "wfwc", "channel_inversion", "constant_current")
POLICY_HEADER = ("m_henries", "xi_amp2", "current_amps", "rate_bps_hz", "power_watts", "pdf")


def _canonical(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in POLICY_NAMES:
        raise ConfigError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
    return key


def _fmt(x) -> str:
    # shortest round-trip representation
    return repr(float(x))


def write_csv(path: str | Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def build_policy(name: str, cfg: ExperimentConfig, budget, dist, theta: float | None = None):
    """Construct a named policy; ``theta`` sets the QoS exponent where relevant."""
    name = _canonical(name)
    cons, quad, root = cfg.constraints, cfg.quadrature, cfg.root
    qos = None if theta is None else QoSParams(theta)
    if name == "optimal":
        return optimal_policy(budget, dist, cons, qos or QoSParams(0.0), quad, root)
    if name in ("wf", "wfwc"):
        return water_filling_policy(budget, dist, cons, quad, root, capped=name == "wfwc", qos=qos)
    if name == "channel_inversion":
        return channel_inversion_policy(budget, dist, cons, quad, root, qos=qos)
    return constant_current_policy(budget, dist, cons, quad, root, qos=qos)


def policy_table(cfg: ExperimentConfig, theta: float, kind: str):
    budget, dist = cfg.link()
    pol = build_policy(kind, cfg, budget, dist, theta)
    m = np.linspace(-budget.m_max, budget.m_max, cfg.m_grid_points)
    xi = pol(m)
    rows = zip(m, xi, np.sqrt(xi), instantaneous_rate(xi, m, budget),
               transmit_power(xi, m, budget, cfg.circuit), dist.pdf(m))
    return pol, list(rows)


def _sweep_row(cfg: ExperimentConfig, theta: float, names: tuple[str, ...], baselines=None):
    if baselines is None:
        budget, dist = cfg.link()
        baselines = {n: build_policy(n, cfg, budget, dist) for n in names if n != "optimal"}
    else:
        budget, dist = baselines.pop("__link__")
    q = QoSParams(theta)
    ec = {}
    for n in names:
        if n == "optimal":
            ec[n] = build_policy(n, cfg, budget, dist, theta).solution.effective_capacity
        else:
            ec[n] = effective_capacity(baselines[n], dist, q, cfg.quadrature)
    r_max = cfg.constraints.r_max
    return [theta, *(ec[n] for n in names), *(ec[n] / r_max for n in names)]


def sweep_table(cfg: ExperimentConfig, names=POLICY_NAMES, workers: int = 1):
    """Rows of ``theta, ec_<policy>..., ec_<policy>_normalized...`` in theta order."""
    names = tuple(n for n in POLICY_NAMES if n in {_canonical(x) for x in names})
    if not cfg.theta_grid:
        raise ConfigError("theta_grid is empty")
    header = ["theta", *(f"ec_{n}" for n in names), *(f"ec_{n}_normalized" for n in names)]
    thetas = sorted(cfg.theta_grid)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, [cfg] * len(thetas), thetas, [names] * len(thetas)))
    else:
        budget, dist = cfg.link()
        shared = {n: build_policy(n, cfg, budget, dist) for n in names if n != "optimal"}
        rows = [_sweep_row(cfg, t, names, {**shared, "__link__": (budget, dist)}) for t in thetas]
    return header, rows


def distribution_table(cfg: ExperimentConfig, n_samples: int):
    budget, dist = cfg.link()
    rng = np.random.default_rng(cfg.rng_seed)
    samples = np.sort(dist.sample(rng, n_samples))
    m = np.linspace(-budget.m_max, budget.m_max, cfg.m_grid_points)
    counts = np.diff(np.searchsorted(samples, m, side="left"))
    counts[-1] += n_samples - np.searchsorted(samples, m[-1], side="left")
    width = m[1] - m[0]
    hist = np.append(counts / (n_samples * width), 0.0)
    ecdf = np.searchsorted(samples, m, side="right") / n_samples
    rows = list(zip(m, dist.pdf(m), dist.cdf(m), hist, ecdf))
    return dist, ks_statistic(samples, dist), rows


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: bundled reference link)")
    common.add_argument("--seed", type=int, help="override rng_seed from the config")

    p = argparse.ArgumentParser(prog="miqos", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("policy", parents=[common], help="emit one policy curve")
    sp.add_argument("--out", required=True)
    sp.add_argument("--theta", type=float, default=0.0,
                    help="QoS exponent; 0 means the ergodic limit (default)")
    sp.add_argument("--kind", default="optimal",
                    help="optimal | wf | wfwc | channel-inversion | constant-current")

    sw = sub.add_parser("sweep", parents=[common], help="effective capacity over theta")
    sw.add_argument("--out", required=True)
    sw.add_argument("--policies", default=",".join(POLICY_NAMES))
    sw.add_argument("--workers", type=int, default=1)

    sd = sub.add_parser("distribution", parents=[common], help="density diagnostics")
    sd.add_argument("--out", required=True)
    sd.add_argument("--samples", type=int, default=10 ** 6)

    sv = sub.add_parser("validate", parents=[common], help="run self-checks")
    sv.add_argument("--out", help="also write the report to this file")
    sv.add_argument("--samples", type=int, default=10 ** 6)
    return p


def _run(args) -> int:
    cfg = with_seed(load_config(args.config) if args.config else default_config(), args.seed)

    if args.verb == "policy":
        if not (math.isfinite(args.theta) and args.theta >= 0):
            raise ConfigError("--theta must be finite and >= 0")
        pol, rows = policy_table(cfg, args.theta, args.kind)
        write_csv(args.out, POLICY_HEADER, rows)
        s = pol.solution
        print(f"kind={s.kind.value} lambda0={s.lambda0} m1={s.m1!r} m2={s.m2!r} "
              f"power_w={s.power_used!r} outage={s.outage_probability!r} "
              f"ec_bps_hz={s.effective_capacity!r}")
    elif args.verb == "sweep":
        names = [x for x in args.policies.split(",") if x.strip()]
        if not names:
            raise ConfigError("--policies is empty")
        header, rows = sweep_table(cfg, names, max(1, args.workers))
        write_csv(args.out, header, rows)
    elif args.verb == "distribution":
        if args.samples < 1:
            raise ConfigError("--samples must be >= 1")
        dist, ks, rows = distribution_table(cfg, args.samples)
        write_csv(args.out, ("m_henries", "pdf", "cdf", "hist_density", "hist_cdf"), rows)
        print(f"normalization={dist.normalization!r} reading={dist.convention}")
        print(f"ks_statistic={ks!r} samples={args.samples}")
    else:
        report = format_report(run_checks(cfg, args.samples))
        print(report)
        if args.out:
            Path(args.out).write_text(report + "\n")
        if " 0 failed" not in report.splitlines()[-1]:
            return EXIT_CHECKS_FAILED
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NoRootError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InvalidParameterError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
