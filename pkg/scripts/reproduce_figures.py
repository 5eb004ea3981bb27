#!/usr/bin/env python3
"""Write the CSV tables behind the four comparison figures.

fig2_water_filling.csv    uncapped vs capped water-filling current over M
fig3_optimal_policy.csv   QoS-optimal current over M for several theta
fig4_large_rmax.csv       optimal current with a loose rate cap, several distances
fig5_effective_capacity.csv  effective capacity of every policy over theta

Usage: python scripts/reproduce_figures.py [--config PATH] [--outdir DIR]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from miqos.cli import POLICY_NAMES, build_policy, sweep_table, write_csv
from miqos.config import default_config, load_config

FIG3_THETAS = (0.001, 0.1, 1.0, 10.0)
FIG4_THETAS = (0.01, 1.0)
FIG4_DISTANCES = (2.5, 3.0, 3.5)
FIG4_RMAX = 5.0


def _curves(cfg, specs):
    """``m`` grid plus one xi column per ``(label, kind, theta)``."""
    budget, dist = cfg.link()
    m = np.linspace(-budget.m_max, budget.m_max, cfg.m_grid_points)
    cols, header = [m], ["m_henries"]
    for label, kind, theta in specs:
        pol = build_policy(kind, cfg, budget, dist, theta)
        cols.append(pol(m))
        header.append(label)
        s = pol.solution
        print(f"  {label}: M1/m_max={s.m1 / budget.m_max:.4f} M2/m_max={s.m2 / budget.m_max:.4f} "
              f"outage={s.outage_probability:.4f}")
    return header, list(zip(*cols))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config")
    p.add_argument("--outdir", default="figures")
    args = p.parse_args(argv)
    cfg = load_config(args.config) if args.config else default_config()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    print("fig2")
    header, rows = _curves(cfg, [("xi_wf", "wf", None), ("xi_wfwc", "wfwc", None)])
    write_csv(out / "fig2_water_filling.csv", header, rows)

    print("fig3")
    header, rows = _curves(cfg, [(f"xi_theta_{t:g}", "optimal", t) for t in FIG3_THETAS])
    write_csv(out / "fig3_optimal_policy.csv", header, rows)

    # distances change m_max, so each column is on its own normalized grid
    print("fig4")
    u = np.linspace(-1.0, 1.0, cfg.m_grid_points)
    header, cols = ["m_over_m_max"], [u]
    for d in FIG4_DISTANCES:
        sub = cfg.with_overrides(distance_m=d, r_max_bps_hz=FIG4_RMAX)
        budget, dist = sub.link()
        for t in FIG4_THETAS:
            pol = build_policy("optimal", sub, budget, dist, t)
            header.append(f"xi_d_{d:g}_theta_{t:g}")
            cols.append(pol(u * budget.m_max))
    write_csv(out / "fig4_large_rmax.csv", header, list(zip(*cols)))

    print("fig5")
    header, rows = sweep_table(cfg, POLICY_NAMES)
    write_csv(out / "fig5_effective_capacity.csv", header, rows)
    print(f"wrote CSVs to {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
