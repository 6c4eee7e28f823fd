#!/usr/bin/env python3
"""Regenerates the CSV fixtures used by the CLI tests.

Run from this directory:  python3 gen_fixtures.py
"""
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_call(spot: float, strike: float, vol: float, maturity: float) -> float:
    """Zero-rate Black-Scholes call."""
    s = vol * math.sqrt(maturity)
    d1 = (math.log(spot / strike) + 0.5 * s * s) / s
    return spot * norm_cdf(d1) - strike * norm_cdf(d1 - s)


def write_call_surface() -> None:
    lines = ["strike,price"]
    for k in range(40, 221):
        lines.append(f"{float(k):.17g},{bs_call(100.0, float(k), 0.2, 1.0):.17g}")
    (HERE / "surface_call_1d.csv").write_text("\n".join(lines) + "\n")


def write_pareto_samples() -> None:
    # Deterministic Pareto(alpha = 1.5) quantile grid: infinite third moment,
    # so a cubic payoff must be rejected by the integrability probe.
    n = 2000
    lines = ["x1"]
    for i in range(n):
        u = (i + 0.5) / n
        lines.append(f"{(1.0 - u) ** (-1.0 / 1.5):.17g}")
    (HERE / "pareto_samples.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_call_surface()
    write_pareto_samples()
    print("wrote", HERE / "surface_call_1d.csv")
    print("wrote", HERE / "pareto_samples.csv")
