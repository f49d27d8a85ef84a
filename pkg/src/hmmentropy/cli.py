"""Command-line interface.

Data files are auto-detected as chain or tree input where both make sense.
Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
failure (impossible observation), 4 budget exceeded.
"""

import math
import sys
from pathlib import Path

import click
import numpy as np

from .chain import smooth_chain, viterbi_chain
from .chain_entropy import entropy_future, entropy_past_hernando
from .criteria import CriterionInput, bic, free_parameter_count, icl_bic, nec
from .errors import (BudgetExceededError, DataFormatError,
                     ImpossibleObservationError, ValidationError)
from .fileio import (ProfileTable, detect_data_kind, parse_model,
                     parse_sequence, parse_tree, serialize_sequence,
                     serialize_tree, write_profile)
from .model import (ObservedTree, TreeTopology, simulate_chain, simulate_tree,
                    validate_model)
from .numutil import entr
from .oracle import enumerate_chain, enumerate_tree
from .tree import smooth_tree, viterbi_profiles, viterbi_tree
from .tree_entropy import (DEFAULT_OP_BUDGET, children_conditional_profile,
                           entropy_summary, parent_conditional_profile,
                           subtree_entropies_approach1, tree_entropy_profile)

_model_opt = click.option("--model", "model_file", required=True,
                          type=click.Path(exists=True, dir_okay=False),
                          help="Model JSON file.")
_data_opt = click.option("--data", "data_file", required=True,
                         type=click.Path(exists=True, dir_okay=False),
                         help="Sequence or tree data file.")
_out_opt = click.option("--out", "out_file", type=click.Path(dir_okay=False),
                        default=None, help="Write output here instead of stdout.")
_base_opt = click.option("--log-base", type=click.Choice(["e", "2"]),
                         default="e", show_default=True,
                         help="Output base for entropy values.")
_budget_opt = click.option("--budget", type=int, default=None,
                           help="Operation/configuration budget override.")


@click.group()
def cli():
    """State restoration and entropy profiles for hidden Markov models."""


def _emit(text: str, out_file):
    if out_file:
        Path(out_file).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _load_model(model_file):
    return parse_model(Path(model_file).read_text(encoding="utf-8"))


def _load_data(data_file):
    """Returns ('tree', ObservedTree) or ('chain', [ObservedSequence, ...])."""
    text = Path(data_file).read_text(encoding="utf-8")
    if detect_data_kind(text) == "tree":
        return "tree", parse_tree(text)
    return "chain", parse_sequence(text)


def _scalar_table(pairs, entropy_keys=(), log_base="e"):
    scale = 1.0 / math.log(2.0) if log_base == "2" else 1.0
    lines = []
    for key, value in pairs:
        if key in entropy_keys:
            value = value * scale
        if isinstance(value, float):
            lines.append(f"{key}\t{format(value, '.12g')}")
        else:
            lines.append(f"{key}\t{value}")
    return "\n".join(lines) + "\n"


def _obs_columns(table, values):
    for k in range(values.shape[1]):
        table.add(f"obs_{k}", values[:, k])


def _path_tree(seq):
    parent = np.arange(-1, seq.length - 1, dtype=np.int64)
    return ObservedTree(TreeTopology(parent), seq.values)


@cli.command()
@_model_opt
def validate(model_file):
    """Check a model file against all invariants."""
    text = Path(model_file).read_text(encoding="utf-8")
    model = parse_model(text, check=False)
    report = validate_model(model)
    if report.ok:
        click.echo("ok")
        return
    for violation in report.violations:
        click.echo(violation)
    raise ValidationError(f"{len(report.violations)} violation(s)")


@cli.command()
@_model_opt
@_data_opt
@_out_opt
@_base_opt
def smooth(model_file, data_file, out_file, log_base):
    """Smoothed state probabilities (chain or tree, auto-detected)."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    if kind == "tree":
        post = smooth_tree(model, data)
        table = ProfileTable("tree")
        table.add("vertex", np.arange(data.num_vertices))
        table.add("parent", data.topology.parent)
        _obs_columns(table, data.values)
        for j in range(model.num_states):
            table.add(f"smoothed_{j}", post.smoothed[:, j])
    else:
        table = ProfileTable("chain")
        rows_seq, rows_idx, cols = [], [], []
        for s, seq in enumerate(data):
            post = smooth_chain(model, seq)
            rows_seq.append(np.full(seq.length, s))
            rows_idx.append(np.arange(seq.length))
            cols.append((seq.values, post.smoothed))
        table.add("sequence", np.concatenate(rows_seq))
        table.add("index", np.concatenate(rows_idx))
        values = np.concatenate([v for v, _ in cols])
        _obs_columns(table, values)
        smoothed = np.concatenate([s for _, s in cols])
        for j in range(model.num_states):
            table.add(f"smoothed_{j}", smoothed[:, j])
    _emit(write_profile(table, log_base), out_file)


@cli.command()
@_model_opt
@_data_opt
@_out_opt
def viterbi(model_file, data_file, out_file):
    """Most likely state restoration; log joint probabilities on stderr."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    table = ProfileTable(kind)
    if kind == "tree":
        states, log_joint = viterbi_tree(model, data)
        table.add("vertex", np.arange(data.num_vertices))
        table.add("parent", data.topology.parent)
        _obs_columns(table, data.values)
        table.add("viterbi_state", states)
        click.echo(f"log_joint\t{format(log_joint, '.12g')}", err=True)
    else:
        seq_col, idx_col, obs, states_col = [], [], [], []
        for s, seq in enumerate(data):
            states, log_joint = viterbi_chain(model, seq)
            seq_col.append(np.full(seq.length, s))
            idx_col.append(np.arange(seq.length))
            obs.append(seq.values)
            states_col.append(states)
            click.echo(f"log_joint[{s}]\t{format(log_joint, '.12g')}", err=True)
        table.add("sequence", np.concatenate(seq_col))
        table.add("index", np.concatenate(idx_col))
        _obs_columns(table, np.concatenate(obs))
        table.add("viterbi_state", np.concatenate(states_col))
    _emit(write_profile(table), out_file)


@cli.command("viterbi-profiles")
@_model_opt
@_data_opt
@_out_opt
def viterbi_profiles_cmd(model_file, data_file, out_file):
    """Per vertex and state, the best posterior configuration probability."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    if kind != "tree":
        raise DataFormatError("viterbi-profiles requires tree input")
    states, _ = viterbi_tree(model, data)
    prof = viterbi_profiles(model, data)
    table = ProfileTable("tree")
    table.add("vertex", np.arange(data.num_vertices))
    table.add("parent", data.topology.parent)
    _obs_columns(table, data.values)
    table.add("viterbi_state", states)
    for j in range(model.num_states):
        table.add(f"vprofile_{j}", prof[:, j])
    _emit(write_profile(table), out_file)


@cli.command()
@_model_opt
@_data_opt
@_out_opt
@_base_opt
@_budget_opt
@click.option("--cond", type=click.Choice(["past", "future", "parent",
                                           "children", "both"]),
              default=None, help="Conditioning direction: past|future for "
                                 "chains, parent|children|both for trees.")
def entropy(model_file, data_file, out_file, log_base, budget, cond):
    """Marginal/conditional/partial entropy profiles."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    if kind == "tree":
        cond = cond or "parent"
        if cond in ("past", "future"):
            raise click.UsageError("tree input takes --cond parent|children|both")
        post = smooth_tree(model, data)
        op_budget = budget if budget is not None else DEFAULT_OP_BUDGET
        table = ProfileTable("tree")
        table.add("vertex", np.arange(data.num_vertices))
        table.add("parent", data.topology.parent)
        _obs_columns(table, data.values)
        for j in range(model.num_states):
            table.add(f"smoothed_{j}", post.smoothed[:, j])
        if cond == "children":
            table.add("marginal_entropy", entr(post.smoothed).sum(axis=1),
                      entropy=True)
            table.add("cond_entropy_children",
                      children_conditional_profile(model, data, post, op_budget),
                      entropy=True)
        elif cond == "parent":
            marginal = entr(post.smoothed).sum(axis=1)
            pc, _ = parent_conditional_profile(model, data, post)
            _, partial_subtree, complement, _ = subtree_entropies_approach1(
                model, data, post, pc)
            table.add("marginal_entropy", marginal, entropy=True)
            table.add("cond_entropy_parent", pc, entropy=True)
            table.add("partial_subtree_entropy", partial_subtree, entropy=True)
            table.add("partial_complement_entropy", complement, entropy=True)
        else:
            prof = tree_entropy_profile(model, data, post, op_budget)
            table.add("marginal_entropy", prof.marginal, entropy=True)
            table.add("cond_entropy_parent", prof.parent_conditional,
                      entropy=True)
            table.add("cond_entropy_children", prof.children_conditional,
                      entropy=True)
            table.add("partial_subtree_entropy", prof.partial_subtree,
                      entropy=True)
            table.add("partial_complement_entropy", prof.partial_complement,
                      entropy=True)
    else:
        cond = cond or "past"
        if cond not in ("past", "future"):
            raise click.UsageError("chain input takes --cond past|future")
        table = ProfileTable("chain")
        seq_col, idx_col, obs, smooth_col, profs = [], [], [], [], []
        for s, seq in enumerate(data):
            post = smooth_chain(model, seq)
            prof = entropy_past_hernando(model, seq, post) if cond == "past" \
                else entropy_future(model, seq, post)
            seq_col.append(np.full(seq.length, s))
            idx_col.append(np.arange(seq.length))
            obs.append(seq.values)
            smooth_col.append(post.smoothed)
            profs.append(prof)
        table.add("sequence", np.concatenate(seq_col))
        table.add("index", np.concatenate(idx_col))
        _obs_columns(table, np.concatenate(obs))
        smoothed = np.concatenate(smooth_col)
        for j in range(model.num_states):
            table.add(f"smoothed_{j}", smoothed[:, j])
        table.add("marginal_entropy",
                  np.concatenate([p.marginal for p in profs]), entropy=True)
        table.add(f"cond_entropy_{cond}",
                  np.concatenate([p.conditional for p in profs]), entropy=True)
        table.add(f"partial_entropy_{cond}",
                  np.concatenate([p.partial for p in profs]), entropy=True)
    _emit(write_profile(table, log_base), out_file)


@cli.command()
@_model_opt
@_out_opt
@click.option("--length", type=int, default=None, help="Simulate a chain of this length.")
@click.option("--topology", "topology_file", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Simulate over the tree topology of this data file.")
@click.option("--seed", type=int, required=True)
def simulate(model_file, out_file, length, topology_file, seed):
    """Draw observations from a model, over a chain or a tree topology."""
    model = _load_model(model_file)
    if (length is None) == (topology_file is None):
        raise click.UsageError("exactly one of --length and --topology is required")
    if length is not None:
        _, seq = simulate_chain(model, length, seed)
        _emit(serialize_sequence([seq]), out_file)
    else:
        tree = parse_tree(Path(topology_file).read_text(encoding="utf-8"))
        _, sim = simulate_tree(model, tree.topology, seed)
        _emit(serialize_tree(sim), out_file)


@cli.command()
@_model_opt
@_data_opt
@_out_opt
@click.option("--baseline-loglik", type=float, default=None,
              help="Log-likelihood of a 1-state baseline (enables NEC).")
def criteria(model_file, data_file, out_file, baseline_loglik):
    """BIC / ICL-BIC (and NEC given a baseline) over the whole dataset."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    if kind == "tree":
        post = smooth_tree(model, data)
        pc, _ = parent_conditional_profile(model, data, post)
        _, _, _, h = subtree_entropies_approach1(model, data, post, pc)
        log_likelihood = post.log_likelihood
        sample_size = data.num_vertices
    else:
        log_likelihood = 0.0
        h = 0.0
        sample_size = 0
        for seq in data:
            post = smooth_chain(model, seq)
            prof = entropy_past_hernando(model, seq, post)
            log_likelihood += post.log_likelihood
            h += prof.global_entropy
            sample_size += seq.length
    inp = CriterionInput(log_likelihood=log_likelihood, global_entropy=h,
                         free_params=free_parameter_count(model),
                         sample_size=sample_size,
                         log_likelihood_1=baseline_loglik)
    pairs = [("log_likelihood", log_likelihood),
             ("global_entropy", h),
             ("free_params", inp.free_params),
             ("sample_size", sample_size),
             ("bic", bic(inp)),
             ("icl_bic", icl_bic(inp))]
    if baseline_loglik is not None:
        pairs.append(("nec", nec(inp)))
    _emit(_scalar_table(pairs), out_file)


@cli.command()
@_model_opt
@_data_opt
@_out_opt
@_base_opt
@_budget_opt
def oracle(model_file, data_file, out_file, log_base, budget):
    """Exact enumeration summary of a small instance."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    config_budget = budget if budget is not None else 10 ** 7
    if kind == "tree":
        results = [enumerate_tree(model, data, config_budget)]
    else:
        results = [enumerate_chain(model, seq, config_budget) for seq in data]
    pairs = []
    for s, res in enumerate(results):
        tag = f"[{s}]" if len(results) > 1 else ""
        pairs += [(f"num_configurations{tag}", res.configurations.shape[0]),
                  (f"evidence{tag}", res.evidence),
                  (f"log_evidence{tag}", math.log(res.evidence)),
                  (f"global_entropy{tag}", res.global_entropy())]
    entropy_keys = {k for k, _ in pairs if k.startswith("global_entropy")}
    _emit(_scalar_table(pairs, entropy_keys, log_base), out_file)


@cli.command()
@_model_opt
@_data_opt
@_out_opt
@_base_opt
@_budget_opt
def summary(model_file, data_file, out_file, log_base, budget):
    """G/C/M entropy sums and their relative gaps (chains run as path trees)."""
    model = _load_model(model_file)
    kind, data = _load_data(data_file)
    trees = [data] if kind == "tree" else [_path_tree(seq) for seq in data]
    op_budget = budget if budget is not None else DEFAULT_OP_BUDGET
    g = c = m = 0.0
    for tree in trees:
        post = smooth_tree(model, tree)
        prof = tree_entropy_profile(model, tree, post, op_budget)
        s = entropy_summary(prof)
        g, c, m = g + s.g, c + s.c, m + s.m
    ratio_cg = (c - g) / g if g > 0 else float("nan")
    ratio_mg = (m - g) / g if g > 0 else float("nan")
    pairs = [("global_entropy", g), ("g_parent_conditional_sum", g),
             ("c_children_conditional_sum", c), ("m_marginal_sum", m),
             ("ratio_cg", ratio_cg), ("ratio_mg", ratio_mg)]
    _emit(_scalar_table(pairs, {"global_entropy", "g_parent_conditional_sum",
                                "c_children_conditional_sum", "m_marginal_sum"},
                        log_base), out_file)


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, prog_name="hmmentropy", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (DataFormatError, ValidationError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except (ImpossibleObservationError, FloatingPointError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    except BudgetExceededError as exc:
        click.echo(f"budget error: {exc}", err=True)
        return 4
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
