"""Command-line interface.

Counts come out as JSON records, walks and traces as JSONL (one object
per line with integer or [re, im] coordinate arrays), estimates as JSON
with the prediction attached where one exists.
"""
from __future__ import annotations

import json
import math
import sys
from fractions import Fraction

import click
import numpy as np

from . import brownian, harness, lattice, mc_saw, sle
from .conformal import RadialRestrictionMap, SlitMap, schwarzian


def _emit(obj):
    click.echo(json.dumps(obj, sort_keys=True, default=str))


@click.group()
def main():
    """Numerical laboratory for self-avoiding walks, SLE, and Brownian frontiers."""


@main.command("enumerate")
@click.option("--n", type=int, required=True, help="walk or polygon length")
@click.option("--half", is_flag=True, help="half-space walk count")
@click.option("--bridges", is_flag=True, help="irreducible bridge count")
@click.option("--saps", is_flag=True, help="rooted/class polygon counts")
def enumerate_cmd(n, half, bridges, saps):
    """Exact lattice counts."""
    if saps:
        rooted, classes = lattice.count_saps(n)
        _emit({"n": n, "rooted": rooted, "classes": classes})
    elif bridges:
        _emit({"n": n, "count": lattice.count_irreducible_bridges(n)})
    elif half:
        _emit({"n": n, "count": lattice.count_half_space(n)})
    else:
        _emit({"n": n, "count": lattice.count_saws(n)})


@main.command()
@click.option("--k", "K", type=int, required=True)
@click.option("--beta", type=float, default=None, help="evaluate the partial sum here")
def kesten(K, beta):
    """Kesten partial sums and the truncated connective-constant root."""
    table = lattice.BridgeTable.build(K)
    out = {"K": K, "beta_K": lattice.kesten_beta(table)}
    if beta is not None:
        out["partial_sum"] = lattice.kesten_partial_sum(table, beta)
        out["beta"] = beta
    _emit(out)


@main.command("sample-saw")
@click.option("--steps", type=int, required=True)
@click.option("--k", "K", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--count", type=int, default=1)
def sample_saw(steps, K, seed, count):
    """Half-space SAWs from the irreducible-bridge sampler, JSONL."""
    rng = np.random.default_rng(seed)
    sampler = lattice.HalfSpaceSampler.build(K)
    for _ in range(count):
        walk = lattice.sample_half_space_saw(steps, sampler, rng)
        click.echo(json.dumps([list(p) for p in walk.points]))


@main.command()
@click.option("--exponent", type=click.Choice(["nu", "rho", "gamma-pair"]), required=True)
@click.option("--lengths", default="100,200,400", help="comma-separated grid")
@click.option("--samples", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--family", type=click.Choice(["saw", "random-walk"]), default="saw")
def estimate(exponent, lengths, samples, seed, family):
    """Monte Carlo exponent estimates (gamma-pair is experimental)."""
    rng = np.random.default_rng(seed)
    grid = [int(x) for x in lengths.split(",")]
    if exponent == "nu":
        est = mc_saw.estimate_nu(grid, samples, rng, family=family)
    elif exponent == "rho":
        est = mc_saw.estimate_rho(grid, samples, rng, family=family)
    else:
        est = mc_saw.estimate_gamma_pair(grid, samples, rng)
    _emit({"exponent": exponent, "value": est.value, "std_error": est.std_error,
           "window": est.window})


@main.command()
@click.option("--nu", default="3/4")
@click.option("--gamma", default="43/32")
@click.option("--rho", default="25/64")
def exponents(nu, gamma, rho):
    """Exact scaling-exponent algebra."""
    es = mc_saw.exponent_algebra(Fraction(nu), Fraction(gamma), Fraction(rho))
    _emit({k: str(v) for k, v in
           [("a", es.a), ("b", es.b), ("a_prime", es.a_prime),
            ("b_prime", es.b_prime), ("alpha", es.alpha)]})


@main.command("map")
@click.option("--slit", default=None, help="x0,h vertical slit")
@click.option("--disk", default=None, help="x,rho boundary half disk")
@click.option("--radial", default=None, help="theta,delta radial obstacle")
@click.option("--eval", "eval_at", default=None, help="re,im point to map")
@click.option("--schwarzian0", is_flag=True, help="Schwarzian at 0")
@click.option("--factors", is_flag=True, help="radial restriction factors")
def map_cmd(slit, disk, radial, eval_at, schwarzian0, factors):
    """Closed-form conformal maps and their derivative data."""
    if radial:
        theta, delta = (float(x) for x in radial.split(","))
        rmap = RadialRestrictionMap(theta, delta)
        if factors:
            f1, f0, p = rmap.factors()
            _emit({"psi_prime_1": f1, "psi_prime_0": f0, "predicted": p})
            return
        if eval_at:
            re, im = (float(x) for x in eval_at.split(","))
            w = rmap.eval(complex(re, im))
            _emit({"value": [w.real, w.imag]})
            return
        raise click.UsageError("--radial needs --factors or --eval")
    if slit:
        x0, h = (float(x) for x in slit.split(","))
        m = SlitMap.vertical_slit(x0, h)
    elif disk:
        x, rho = (float(v) for v in disk.split(","))
        m = SlitMap.half_disk(x, rho)
    else:
        raise click.UsageError("need --slit, --disk, or --radial")
    if schwarzian0:
        s = schwarzian(m, 0.0)
        _emit({"schwarzian0": [s.real, s.imag],
               "derivative0": m.derivative_at_zero()})
    elif eval_at:
        re, im = (float(x) for x in eval_at.split(","))
        w = m.eval(complex(re, im))
        _emit({"value": [w.real, w.imag]})
    else:
        _emit({"derivative0": m.derivative_at_zero()})


@main.command("sle-trace")
@click.option("--mode", type=click.Choice(["chordal", "radial", "fullplane"]), default="chordal")
@click.option("--kappa", default="8/3")
@click.option("--t", "T", type=float, default=1.0)
@click.option("--n", "N", type=int, default=10000)
@click.option("--count", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--points", type=int, default=1024)
def sle_trace(mode, kappa, T, N, count, seed, points):
    """Discretized SLE traces as JSONL arrays of [re, im]."""
    kap = float(Fraction(kappa))
    rng = np.random.default_rng(seed)
    for _ in range(count):
        if mode == "chordal":
            cur = sle.chordal_trace(kap, T, N, rng, n_points=points)
        elif mode == "radial":
            cur = sle.radial_trace(kap, T, N, rng, n_points=points)
        else:
            cur = sle.full_plane_trace(kap, (-5.0, T), N, rng, n_points=points)
        click.echo(json.dumps([[p.real, p.imag] for p in cur.points]))


@main.command("restriction-test")
@click.option("--slit", default="-1,1")
@click.option("--count", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--kappa", default="8/3")
def restriction_test(slit, count, seed, kappa):
    """Monte Carlo chordal avoidance versus the closed form."""
    x0, h = (float(x) for x in slit.split(","))
    m = SlitMap.vertical_slit(x0, h)
    rng = np.random.default_rng(seed)
    est = sle.chordal_slit_avoidance(m, count, rng, kappa=float(Fraction(kappa)))
    _emit({"p_hat": est.value, "se": est.std_error,
           "prediction": m.derivative_at_zero() ** (5.0 / 8.0),
           "details": est.details})


@main.command()
@click.option("--count", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--t", "T", type=float, default=1.0)
@click.option("--n", "N", type=int, default=10000)
def excursion(count, seed, T, N):
    """Half-plane Brownian excursions as JSONL."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        cur = brownian.excursion(T, N, rng)
        click.echo(json.dumps([[p.real, p.imag] for p in cur.points[:: max(N // 2048, 1)]]))


@main.command()
@click.option("--duration", type=float, default=1.0)
@click.option("--count", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--n", "N", type=int, default=10000)
def loop(duration, count, seed, N):
    """Rooted Brownian loops as JSONL."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        cur = brownian.rooted_loop(duration, N, rng)
        click.echo(json.dumps([[p.real, p.imag] for p in cur.points[:: max(N // 2048, 1)]]))


@main.command("frontier-dim")
@click.option("--source", type=click.Choice(["loop", "sle", "segment"]), default="loop")
@click.option("--scales", type=int, default=7)
@click.option("--seed", type=int, default=0)
def frontier_dim(source, scales, seed):
    """Box-counting dimension of a loop frontier, SLE trace, or segment."""
    rng = np.random.default_rng(seed)
    if source == "segment":
        pts = np.linspace(0, 1, 8001) + 0j
    elif source == "sle":
        pts = sle.chordal_trace(8 / 3, 1.0, 32768, rng, n_points=8192, arclength=True).points
    else:
        lp = brownian.rooted_loop(1.0, 400000, rng)
        reg = brownian.hull_fill(lp, lp.diameter / 1024)
        pts = brownian.frontier(reg).points
    est = brownian.box_dimension(pts, n_scales=scales, coarsest_div=4)
    _emit({"source": source, "dimension": est.value, "std_error": est.std_error,
           "window": est.window})


@main.command()
@click.option("--eps", type=float, default=0.1)
@click.option("--target-accepts", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--max-trials", type=int, default=20000)
def nondisconnect(eps, target_accepts, seed, max_trials):
    """Sample non-disconnecting Brownian pairs; report the acceptance rate."""
    rng = np.random.default_rng(seed)
    pair, est = brownian.non_disconnecting_pair(
        eps, rng, max_trials=max_trials, target_accepts=target_accepts
    )
    _emit({"eps": eps, "acceptance": est.value, "se": est.std_error,
           "window": est.window, "sampled": pair is not None})


@main.command()
@click.option("--experiment", "experiment", required=True,
              type=click.Choice(sorted(harness.EXPERIMENTS)))
@click.option("--config", "config_path", default=None, help="JSON file with params")
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None, help="artifact directory")
def run(experiment, config_path, seed, out):
    """Run a registered cross-validation experiment."""
    params = {}
    if config_path:
        with open(config_path) as fh:
            params = json.load(fh)
    config = harness.ExperimentConfig(experiment, seed, params, out)
    report = harness.run_experiment(config)
    _emit({"experiment": experiment, "passed": report.passed,
           "statistics": report.statistics, "comparisons": report.comparisons,
           "notes": report.notes})
    if not report.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
