"""Command-line experiment harness.

Subcommands cover the full pipeline: ``seeds`` identifies influential nodes
and their values, ``solve`` computes the equilibrium of the budget game,
``br`` answers a stored mixed strategy, ``simulate`` runs cascade
tournaments between strategies, and ``eval-payoff`` measures the accuracy
of the value-based payoff estimate. Every output embeds the resolved
configuration, the master seed and the tool version; re-running a command
with identical inputs reproduces the payload byte for byte (timing fields
aside).
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import click
import numpy as np

from . import __version__
from .game import Allocation, GameSpec, MixedStrategy
from .graph import Graph, assign_probabilities, load_edge_list
from .nash import double_oracle
from .rng import substream
from .rrsets import (
    InfluenceValues,
    build_index,
    estimate_spread,
    estimate_values,
    load_cache,
    save_cache,
    select_seeds,
)
from .diffusion import payoff_error_experiment, run_competition
from .strategies import gen_oneeach, parse_strategy


def _fail(message: str):
    raise click.ClickException(message)


def _load_config_file(path):
    if path is None:
        return {}
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise click.ClickException(f"{path}: config file must hold a JSON object")
    return payload


def _pick(flag_value, config, key, default=None):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _parse_prob_scheme(text: str):
    if text == "indegree":
        return "indegree", {}
    if text.startswith("const:"):
        return "constant", {"p": float(text.split(":", 1)[1])}
    if text == "file":
        return "file", {}
    _fail(f"unknown probability scheme {text!r} (use indegree, const:P or file)")


def _parse_packages(text, k: int) -> tuple[int, ...]:
    if text is None or text.strip() in ("1..k", ""):
        return tuple(range(1, k + 1))
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(sorted(int(tok) for tok in text.split(",") if tok.strip()))


def _load_graph(graph_path, undirected, prob_text) -> Graph:
    scheme, kwargs = _parse_prob_scheme(prob_text)
    g = load_edge_list(graph_path, directed=not undirected)
    if scheme != "indegree":
        g = assign_probabilities(g, scheme, **kwargs)
    return g


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _append_csv_row(path: Path, fieldnames, row: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        if fresh:
            writer.writeheader()
        writer.writerow(row)


def _out_dir(out_flag, stem: str) -> Path:
    return Path(out_flag) if out_flag else Path("results") / stem


def _index_for(g, theta, seed, out_dir: Path, cache: bool, workers: int):
    cache_path = out_dir / "rrindex.bin"
    if cache and cache_path.exists():
        idx = load_cache(cache_path, g, theta, seed)
        if idx is not None:
            return idx
    idx = build_index(g, theta, seed, workers=workers)
    if cache:
        out_dir.mkdir(parents=True, exist_ok=True)
        save_cache(idx, cache_path)
    return idx


def _seed_values(g, theta, n, seed, out_dir, cache, workers):
    idx = _index_for(g, theta, seed, out_dir, cache, workers)
    top = select_seeds(idx, n)
    return idx, estimate_values(idx, top)


def _load_values_file(path):
    with open(path) as fh:
        payload = json.load(fh)
    records = payload["nodes"]
    ext_ids = [rec["node_id"] for rec in records]
    vals = [rec["value"] for rec in records]
    return payload, ext_ids, vals


def graph_options(f):
    f = click.option("--graph", "graph_path", type=click.Path(dir_okay=False), default=None,
                     help="Edge-list file (SNAP format).")(f)
    f = click.option("--undirected", is_flag=True, default=False,
                     help="Treat input edges as undirected (expand both directions).")(f)
    f = click.option("--prob", "prob_text", default=None,
                     help="Edge probabilities: indegree | const:P | file.  [default: indegree]")(f)
    return f


def common_options(f):
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON config file; explicit flags override it.")(f)
    f = click.option("--seed", type=int, default=None, help="Master RNG seed.  [default: 1]")(f)
    f = click.option("--out", "out_flag", default=None,
                     help="Output directory.  [default: results/<auto>]")(f)
    f = click.option("--workers", type=int, default=None,
                     help="Worker threads for sampling/simulation.  [default: 1]")(f)
    return f


@click.group()
@click.version_option(version=__version__, prog_name="cimgame")
def main():
    """Competitive influence-maximization budget games."""


@main.command()
@graph_options
@common_options
@click.option("--theta", type=int, default=None, help="RR sets to sample.  [default: 100*N]")
@click.option("--n", "n_nodes", type=int, default=None, help="Influential nodes to select.")
@click.option("--cache/--no-cache", default=True, show_default=True,
              help="Reuse/store the RR index next to the outputs.")
def seeds(graph_path, undirected, prob_text, config_path, seed, out_flag, workers,
          theta, n_nodes, cache):
    """Identify influential nodes and estimate their values."""
    cfg = _load_config_file(config_path)
    graph_path = _pick(graph_path, cfg, "graph")
    undirected = undirected or cfg.get("undirected", False)
    prob_text = _pick(prob_text, cfg, "prob", "indegree")
    seed = _pick(seed, cfg, "seed", 1)
    theta = _pick(theta, cfg, "theta")
    n_nodes = _pick(n_nodes, cfg, "n")
    workers = _pick(workers, cfg, "workers", 1)
    out_flag = _pick(out_flag, cfg, "out")
    if graph_path is None or n_nodes is None:
        _fail("seeds requires --graph and --n")

    try:
        g = _load_graph(graph_path, undirected, prob_text)
        theta = theta if theta is not None else 100 * g.n_nodes
        out_dir = _out_dir(out_flag, f"{Path(graph_path).stem}-n{n_nodes}-seed{seed}")
        idx, values = _seed_values(g, theta, n_nodes, seed, out_dir, cache, workers)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc))

    config = {
        "graph": str(graph_path), "undirected": bool(undirected), "prob": prob_text,
        "theta": theta, "n": n_nodes, "seed": seed, "workers": workers,
        "out": str(out_dir), "cache": bool(cache),
    }
    payload = {
        "version": __version__,
        "config": config,
        "seed": seed,
        "graph_hash": idx.graph_hash,
        "theta": theta,
        "nodes": values.to_records(g),
        "spread_of_set": estimate_spread(idx, values.nodes),
    }
    _write_json(out_dir / "values.json", payload)
    click.echo(f"wrote {out_dir / 'values.json'} ({n_nodes} nodes)")


def _budget_options(f):
    f = click.option("--k", type=int, default=None, help="Budget for both players.")(f)
    f = click.option("--k1", type=int, default=None, help="Player 1 budget (overrides --k).")(f)
    f = click.option("--k2", type=int, default=None, help="Player 2 budget (overrides --k).")(f)
    f = click.option("--d", "d_text", default=None,
                     help='Package set, e.g. "1..k" or "1,2,5".  [default: 1..k]')(f)
    f = click.option("--d1", "d1_text", default=None, help="Player 1 packages (overrides --d).")(f)
    f = click.option("--d2", "d2_text", default=None, help="Player 2 packages (overrides --d).")(f)
    return f


def _resolve_budgets(cfg, k, k1, k2, d_text, d1_text, d2_text):
    k = _pick(k, cfg, "k")
    k1 = _pick(k1, cfg, "k1", k)
    k2 = _pick(k2, cfg, "k2", k)
    if k1 is None or k2 is None:
        _fail("budget required: pass --k or both --k1 and --k2")
    d_text = _pick(d_text, cfg, "d")
    d1 = _parse_packages(_pick(d1_text, cfg, "d1", d_text), k1)
    d2 = _parse_packages(_pick(d2_text, cfg, "d2", d_text), k2)
    return int(k1), int(k2), d1, d2


def _game_from_inputs(cfg, graph_path, undirected, prob_text, values_path, theta,
                      n_nodes, seed, out_dir_hint, cache, workers, k1, k2, d1, d2):
    """GameSpec plus external node ids, from a values file or a fresh pipeline."""
    if values_path is not None:
        _, ext_ids, vals = _load_values_file(values_path)
        if n_nodes is not None:
            if n_nodes > len(ext_ids):
                _fail(f"values file holds {len(ext_ids)} nodes, need n={n_nodes}")
            ext_ids, vals = ext_ids[:n_nodes], vals[:n_nodes]
        graph = None
        if graph_path is not None:
            graph = _load_graph(graph_path, undirected, prob_text)
            index = graph.index_of()
            nodes = [index[e] for e in ext_ids]
        else:
            nodes = list(range(len(ext_ids)))
        values = InfluenceValues(nodes=nodes, values=vals)
        theta_used = None
    else:
        if graph_path is None:
            _fail("pass --graph (or --values with precomputed values)")
        if n_nodes is None:
            n_nodes = max(k1, k2) + 5
        graph = _load_graph(graph_path, undirected, prob_text)
        theta_used = theta if theta is not None else 100 * graph.n_nodes
        _, values = _seed_values(graph, theta_used, n_nodes, seed, out_dir_hint,
                                 cache, workers)
        ext_ids = [int(graph.node_ids[v]) for v in values.nodes]
    spec = GameSpec(values=values, k1=k1, k2=k2, d1=d1, d2=d2)
    if spec.n < max(k1, k2):
        click.echo(
            f"warning: n={spec.n} is below the larger budget {max(k1, k2)}; "
            "the game cannot spread the whole budget one unit per node",
            err=True,
        )
    return graph, spec, ext_ids, theta_used


@main.command()
@graph_options
@common_options
@_budget_options
@click.option("--values", "values_path", type=click.Path(dir_okay=False), default=None,
              help="values.json from `seeds`; skips graph work.")
@click.option("--theta", type=int, default=None, help="RR sets when computing values.")
@click.option("--n", "n_nodes", type=int, default=None,
              help="Influential nodes.  [default: max(k1,k2)+5]")
@click.option("--epsilon", type=float, default=None,
              help="Stop once the best-response gap drops below this.  [default: 0 = exact]")
@click.option("--max-iters", type=int, default=None, help="Iteration cap.  [default: 1000]")
@click.option("--init1", type=click.Path(dir_okay=False), default=None,
              help="Allocation JSON initializing player 1 (default oneeach).")
@click.option("--init2", type=click.Path(dir_okay=False), default=None,
              help="Allocation JSON initializing player 2 (default oneeach).")
@click.option("--cache/--no-cache", default=True, show_default=True)
def solve(graph_path, undirected, prob_text, config_path, seed, out_flag, workers,
          k, k1, k2, d_text, d1_text, d2_text, values_path, theta, n_nodes,
          epsilon, max_iters, init1, init2, cache):
    """Compute the equilibrium of the budget-allocation game."""
    cfg = _load_config_file(config_path)
    graph_path = _pick(graph_path, cfg, "graph")
    undirected = undirected or cfg.get("undirected", False)
    prob_text = _pick(prob_text, cfg, "prob", "indegree")
    seed = _pick(seed, cfg, "seed", 1)
    values_path = _pick(values_path, cfg, "values")
    theta = _pick(theta, cfg, "theta")
    n_nodes = _pick(n_nodes, cfg, "n")
    epsilon = _pick(epsilon, cfg, "epsilon", 0.0)
    max_iters = _pick(max_iters, cfg, "max_iters", 1000)
    workers = _pick(workers, cfg, "workers", 1)
    out_flag = _pick(out_flag, cfg, "out")
    k1v, k2v, d1, d2 = _resolve_budgets(cfg, k, k1, k2, d_text, d1_text, d2_text)

    stem = Path(graph_path or values_path or "game").stem
    out_dir = _out_dir(out_flag, f"{stem}-k{max(k1v, k2v)}-n{n_nodes or 'auto'}-seed{seed}")
    try:
        graph, spec, ext_ids, theta_used = _game_from_inputs(
            cfg, graph_path, undirected, prob_text, values_path, theta, n_nodes,
            seed, out_dir, cache, workers, k1v, k2v, d1, d2,
        )
        a1 = (Allocation.from_json_obj(json.load(open(init1)))
              if init1 else gen_oneeach(spec, 1))
        a2 = (Allocation.from_json_obj(json.load(open(init2)))
              if init2 else gen_oneeach(spec, 2))
        result = double_oracle(spec, a1, a2, epsilon=epsilon, max_iters=max_iters)
    except click.ClickException:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc))

    config = {
        "graph": None if graph_path is None else str(graph_path),
        "undirected": bool(undirected), "prob": prob_text,
        "values": None if values_path is None else str(values_path),
        "theta": theta_used, "n": spec.n, "k1": k1v, "k2": k2v,
        "d1": list(d1), "d2": list(d2), "epsilon": epsilon,
        "max_iters": max_iters, "seed": seed, "workers": workers,
        "out": str(out_dir),
    }
    payload = {
        "version": __version__,
        "config": config,
        "seed": seed,
        "game": {
            "k1": k1v, "k2": k2v, "d1": list(d1), "d2": list(d2), "n": spec.n,
            "nodes": [int(e) for e in ext_ids],
            "values": [float(v) for v in spec.values.values],
        },
        "game_value": result.game_value,
        "gap": result.gap,
        "iterations": result.iterations,
        "termination": result.termination,
        "wall_time_s": result.wall_time,
        "nash1": result.nash1.to_json_obj(),
        "nash2": result.nash2.to_json_obj(),
    }
    _write_json(out_dir / "equilibrium.json", payload)
    trace_fields = ["iteration", "value", "v1", "v2", "gap", "rows", "cols",
                    "support1", "support2"]
    trace_path = out_dir / "trace.csv"
    if trace_path.exists():
        trace_path.unlink()
    for row in result.trace_rows():
        _append_csv_row(trace_path, trace_fields, {f: row[f] for f in trace_fields})
    if result.termination == "max_iters":
        click.echo(f"warning: stopped at max_iters={max_iters} without converging",
                   err=True)
    click.echo(
        f"wrote {out_dir / 'equilibrium.json'} "
        f"(value={result.game_value:.6g}, gap={result.gap:.3g}, "
        f"iters={result.iterations}, {result.termination})"
    )


@main.command()
@common_options
@click.option("--strategy", "strategy_path", required=True, type=click.Path(dir_okay=False),
              help="Opponent MixedStrategy JSON.")
@click.option("--values", "values_path", required=True, type=click.Path(dir_okay=False),
              help="values.json from `seeds`.")
@click.option("--k", type=int, required=True, help="Responding player's budget.")
@click.option("--d", "d_text", default=None, help="Responding player's packages.")
@click.option("--player", type=click.Choice(["1", "2"]), default="1", show_default=True,
              help="Which side is responding.")
def br(config_path, seed, out_flag, workers, strategy_path, values_path, k, d_text, player):
    """Best response to a stored mixed strategy."""
    from .best_response import best_response

    cfg = _load_config_file(config_path)
    seed = _pick(seed, cfg, "seed", 1)
    player_num = int(player)
    try:
        with open(strategy_path) as fh:
            q = MixedStrategy.from_json_obj(json.load(fh))
        _, ext_ids, vals = _load_values_file(values_path)
        values = InfluenceValues(nodes=list(range(len(ext_ids))), values=vals)
        d_mine = _parse_packages(d_text, k)
        # the stored opponent support defines what the opponent can play
        opp_k = max(max(a.total for a in q.support), 1)
        opp_d = sorted({x for a in q.support for x in a.amounts if x > 0}) or [1]
        if player_num == 1:
            spec = GameSpec(values=values, k1=k, k2=opp_k, d1=d_mine, d2=tuple(opp_d))
        else:
            spec = GameSpec(values=values, k1=opp_k, k2=k, d1=tuple(opp_d), d2=d_mine)
        action, payoff = best_response(q, spec, player_num)
    except click.ClickException:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc))

    payload = {
        "version": __version__,
        "config": {
            "strategy": str(strategy_path), "values": str(values_path),
            "k": k, "d": list(d_mine), "player": player_num, "seed": seed,
        },
        "seed": seed,
        "amounts": list(action.amounts),
        "node_ids": [int(e) for e in ext_ids],
        "payoff": payoff,
    }
    if out_flag:
        out_path = Path(out_flag)
        if out_path.suffix != ".json":
            out_path = out_path / "best_response.json"
        _write_json(out_path, payload)
        click.echo(f"wrote {out_path} (payoff={payoff:.6g})")
    else:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))


@main.command()
@graph_options
@common_options
@_budget_options
@click.option("--strat1", required=True, help="Player 1 strategy, e.g. oneeach, random:3, "
                                              "nash:eq.json, br:oneeach:1000.")
@click.option("--strat2", required=True, help="Player 2 strategy.")
@click.option("--values", "values_path", type=click.Path(dir_okay=False), default=None)
@click.option("--equilibrium", "equilibrium_path", type=click.Path(dir_okay=False), default=None,
              help="Equilibrium JSON for nash strategies.")
@click.option("--theta", type=int, default=None)
@click.option("--n", "n_nodes", type=int, default=None)
@click.option("--rounds", type=int, default=None, help="Tournament rounds.  [default: 1000]")
@click.option("--samples", type=int, default=None,
              help="Draws when best-responding to a stochastic target.  [default: 1000]")
@click.option("--cache/--no-cache", default=True, show_default=True)
def simulate(graph_path, undirected, prob_text, config_path, seed, out_flag, workers,
             k, k1, k2, d_text, d1_text, d2_text, strat1, strat2, values_path,
             equilibrium_path, theta, n_nodes, rounds, samples, cache):
    """Tournament of repeated cascades between two strategies."""
    cfg = _load_config_file(config_path)
    graph_path = _pick(graph_path, cfg, "graph")
    undirected = undirected or cfg.get("undirected", False)
    prob_text = _pick(prob_text, cfg, "prob", "indegree")
    seed = _pick(seed, cfg, "seed", 1)
    values_path = _pick(values_path, cfg, "values")
    equilibrium_path = _pick(equilibrium_path, cfg, "equilibrium")
    theta = _pick(theta, cfg, "theta")
    n_nodes = _pick(n_nodes, cfg, "n")
    rounds = _pick(rounds, cfg, "rounds", 1000)
    samples = _pick(samples, cfg, "samples", 1000)
    workers = _pick(workers, cfg, "workers", 1)
    out_flag = _pick(out_flag, cfg, "out")
    k1v, k2v, d1, d2 = _resolve_budgets(cfg, k, k1, k2, d_text, d1_text, d2_text)
    if graph_path is None:
        _fail("simulate requires --graph for the cascade")

    stem = Path(graph_path).stem
    out_dir = _out_dir(out_flag, f"{stem}-k{max(k1v, k2v)}-n{n_nodes or 'auto'}-seed{seed}")
    try:
        graph, spec, _, theta_used = _game_from_inputs(
            cfg, graph_path, undirected, prob_text, values_path, theta, n_nodes,
            seed, out_dir, cache, workers, k1v, k2v, d1, d2,
        )
        setup_rng = substream(seed, "strategy-setup")
        s1 = parse_strategy(strat1, spec, 1, setup_rng, equilibrium_path, samples)
        s2 = parse_strategy(strat2, spec, 2, setup_rng, equilibrium_path, samples)
        stats = run_competition(
            graph, spec, s1, s2, rounds, substream(seed, "tournament"),
            seed=seed, workers=workers,
        )
    except click.ClickException:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc))

    fields = ["strat1", "strat2", "k1", "k2", "n", "rounds", "win_pct", "draw_pct",
              "avg", "std", "seed"]
    row = {"strat1": s1.name, "strat2": s2.name, "k1": k1v, "k2": k2v, "n": spec.n}
    row.update(stats.to_csv_fields())
    _append_csv_row(out_dir / "stats.csv", fields, row)
    click.echo(
        f"{s1.name} vs {s2.name}: win%={stats.win_pct:.1f} draw%={stats.draw_pct:.1f} "
        f"avg={stats.avg:.2f} std={stats.std:.2f} -> {out_dir / 'stats.csv'}"
    )


@main.command("eval-payoff")
@graph_options
@common_options
@click.option("--theta", type=int, default=None, help="RR sets to sample.  [default: 100*N]")
@click.option("--n", "n_nodes", type=int, default=None, help="Influential nodes.  [default: 50]")
@click.option("--trials", type=int, default=None, help="Random assignments.  [default: 20]")
@click.option("--mc-rounds", type=int, default=None,
              help="Cascades per ground-truth estimate.  [default: 5000]")
@click.option("--cache/--no-cache", default=True, show_default=True)
def eval_payoff(graph_path, undirected, prob_text, config_path, seed, out_flag, workers,
                theta, n_nodes, trials, mc_rounds, cache):
    """Mean absolute error of the payoff-estimation methods."""
    cfg = _load_config_file(config_path)
    graph_path = _pick(graph_path, cfg, "graph")
    undirected = undirected or cfg.get("undirected", False)
    prob_text = _pick(prob_text, cfg, "prob", "indegree")
    seed = _pick(seed, cfg, "seed", 1)
    theta = _pick(theta, cfg, "theta")
    n_nodes = _pick(n_nodes, cfg, "n", 50)
    trials = _pick(trials, cfg, "trials", 20)
    mc_rounds = _pick(mc_rounds, cfg, "mc_rounds", 5000)
    workers = _pick(workers, cfg, "workers", 1)
    out_flag = _pick(out_flag, cfg, "out")
    if graph_path is None:
        _fail("eval-payoff requires --graph")

    try:
        g = _load_graph(graph_path, undirected, prob_text)
        theta_used = theta if theta is not None else 100 * g.n_nodes
        out_dir = _out_dir(out_flag, f"{Path(graph_path).stem}-n{n_nodes}-seed{seed}")
        idx = _index_for(g, theta_used, seed, out_dir, cache, workers)
        errors = payoff_error_experiment(
            g, idx, n_nodes, trials, mc_rounds,
            substream(seed, "payoff-error"), workers=workers,
        )
    except click.ClickException:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _fail(str(exc))

    fields = ["method", "mae", "graph", "n", "trials", "mc_rounds", "theta", "seed"]
    out_path = out_dir / "payoff_error.csv"
    for method in ("weighted", "simple", "degree"):
        _append_csv_row(out_path, fields, {
            "method": method, "mae": f"{errors[method]:.17g}", "graph": str(graph_path),
            "n": n_nodes, "trials": trials, "mc_rounds": mc_rounds,
            "theta": theta_used, "seed": seed,
        })
    click.echo(
        "mean absolute error: "
        + ", ".join(f"{m}={errors[m]:.2f}" for m in ("weighted", "simple", "degree"))
        + f" -> {out_path}"
    )


if __name__ == "__main__":
    main()
