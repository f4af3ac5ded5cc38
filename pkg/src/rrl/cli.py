"""Command-line interface.

Exit codes: 0 success, 1 runtime failure (including soundness violations in a
run), 2 configuration or usage error.  ``RRL_LOG`` sets the log level.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from .core import LabeledDataset, RRLError, read_points_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("rrl")


class _ConfigProblem(click.ClickException):
    exit_code = EXIT_CONFIG


class _RuntimeProblem(click.ClickException):
    exit_code = EXIT_FAIL


def _setup_logging():
    level = os.environ.get("RRL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _json_arg(value, what):
    """Inline JSON text or a path to a JSON file."""
    if value is None:
        return None
    try:
        text = value if value.lstrip()[:1] in ("{", "[") else Path(value).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as e:
        raise _ConfigProblem(f"cannot read {what}: {e}") from e


def _dataset(path, what):
    try:
        return LabeledDataset.from_csv(path)
    except (OSError, ValueError) as e:
        raise _ConfigProblem(f"cannot read {what}: {e}") from e


def _points(path, what):
    try:
        return read_points_csv(path)
    except (OSError, ValueError) as e:
        raise _ConfigProblem(f"cannot read {what}: {e}") from e


def _class(desc):
    from .classes import class_from_descriptor

    try:
        return class_from_descriptor(_json_arg(desc, "class descriptor"))
    except (ValueError, TypeError, KeyError) as e:
        raise _ConfigProblem(f"bad class descriptor: {e}") from e


def _hyp(cls, desc):
    from .classes import hypothesis_from_descriptor

    try:
        return hypothesis_from_descriptor(cls, _json_arg(desc, "hypothesis descriptor"))
    except (ValueError, TypeError, KeyError) as e:
        raise _ConfigProblem(f"bad hypothesis descriptor: {e}") from e


def _dist(desc):
    from .regions import DistributionSpec

    try:
        return DistributionSpec.from_dict(_json_arg(desc, "distribution"))
    except (ValueError, TypeError) as e:
        raise _ConfigProblem(f"bad distribution: {e}") from e


def _emit(ctx, name, text):
    """Write ``text`` to ``--out/name`` when an output directory is set, else stdout."""
    out = ctx.obj["out"]
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    from .experiment import atomic_write

    atomic_write(Path(out) / name, text)
    click.echo(str(Path(out) / name))


def _predictions_csv(Q, preds):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(Q.shape[1])] + ["label", "eta"])
    for q, p in zip(Q, preds):
        w.writerow([repr(float(v)) for v in q] + [p.label_str(), str(p.eta)])
    return buf.getvalue()


def _fraction(value):
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"not a rational number: {value}") from e


def _seed_option(fn):
    return click.option("--seed", "cmd_seed", type=int, default=None,
                        help="Overrides the global --seed.")(fn)


def _seed(ctx, cmd_seed):
    return ctx.obj["seed"] if cmd_seed is None else cmd_seed


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except RRLError as e:
            raise _RuntimeProblem(f"{type(e).__name__}: {e}") from e


@click.group(cls=_Group)
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True, help="Parallel trials.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@click.pass_context
def main(ctx, seed, workers, out):
    """Robustly-reliable learning simulator."""
    _setup_logging()
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, workers=workers, out=out)


@main.command()
@click.option("--class", "cls_desc", required=True, help="Class descriptor (JSON or file).")
@click.option("--train", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--points", "--test", "test", required=True, type=click.Path(exists=True, dir_okay=False),
              help="CSV of test points (header x1..xd).")
@click.option("--nu", default="0", show_default=True, help="Agnostic tolerance.")
@click.pass_context
def predict(ctx, cls_desc, train, test, nu):
    """Certified predictions (label, eta) for every test point."""
    from .learner import rr_predict_batch

    cls = _class(cls_desc)
    S = _dataset(train, "training set")
    Q = _points(test, "test points")
    preds = rr_predict_batch(cls, S, Q, _fraction(nu))
    _emit(ctx, "predictions.csv", _predictions_csv(Q, preds))


@main.command()
@click.option("--class", "cls_desc", required=True)
@click.option("--train", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Target hypothesis descriptor.")
@click.option("--spec", "spec_json", default=None,
              help="Attack spec JSON {family, strategy, eta, seed, params}.")
@click.option("--eta", type=float, default=None)
@click.option("--family", type=click.Choice(["nasty", "malicious"]), default=None)
@click.option("--strategy", default=None,
              type=click.Choice(["random_flip", "half_relabel_targeted", "adversarial_labels", "band_stuffing"]))
@click.option("--x", "x_point", default=None, help="Targeted test point, comma separated.")
@click.option("--dist", default=None, help="Distribution (for filler points).")
@click.option("--params", default=None, help="Strategy parameters as JSON.")
@click.option("--out", "out_file", default=None, type=click.Path(dir_okay=False),
              help="Write the attacked CSV here.")
@_seed_option
@click.pass_context
def attack(ctx, cls_desc, train, target, spec_json, eta, family, strategy, x_point, dist, params,
           out_file, cmd_seed):
    """Corrupt a training set and write the result as CSV."""
    from .adversaries import AttackSpec
    from .config import AttackConfig
    from .experiment import apply_attack, atomic_write

    seed = _seed(ctx, cmd_seed)
    extra = _json_arg(params, "params") or {}
    if spec_json is not None:
        spec_d = _json_arg(spec_json, "attack spec")
        family = spec_d.get("family", family)
        strategy = spec_d.get("strategy", strategy)
        eta = spec_d.get("eta", eta)
        seed = spec_d.get("seed", seed)
        extra = {**spec_d.get("params", {}), **extra}
    if family is None or strategy is None or eta is None:
        raise _ConfigProblem("attack needs family, strategy and eta (flags or --spec)")
    try:
        AttackSpec(family, strategy, float(eta), int(seed), extra)
    except ValueError as e:
        raise _ConfigProblem(str(e)) from e
    cls = _class(cls_desc)
    h = _hyp(cls, target)
    S = _dataset(train, "training set")
    x = None
    if x_point is not None:
        x = np.array([float(v) for v in x_point.split(",")])
    elif strategy in ("half_relabel_targeted", "adversarial_labels"):
        raise _ConfigProblem(f"strategy {strategy} needs --x")
    spec = _dist(dist) if dist is not None else None
    if strategy == "adversarial_labels" and spec is None:
        raise _ConfigProblem("adversarial_labels needs --dist for the filler point")
    cfg = AttackConfig(family=family, strategy=strategy, params=extra)
    S2 = apply_attack(cls, S, h, cfg, float(eta), int(seed), spec, x)
    if out_file is not None:
        atomic_write(Path(out_file), S2.to_csv())
        click.echo(out_file)
    else:
        _emit(ctx, "attacked.csv", S2.to_csv())


@main.command("region-mass")
@click.option("--class", "cls_desc", required=True)
@click.option("--train", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True)
@click.option("--eta", required=True, type=float)
@click.option("--dist", required=True)
@click.option("--n", "n_samples", type=click.IntRange(1), default=100000, show_default=True)
@_seed_option
@click.pass_context
def region_mass(ctx, cls_desc, train, target, eta, dist, n_samples, cmd_seed):
    """Monte Carlo mass of the robustly-reliable region."""
    from .regions import robc_estimate

    cls = _class(cls_desc)
    est = robc_estimate(cls, _dataset(train, "training set"), _hyp(cls, target), eta, _dist(dist),
                        n_samples, _seed(ctx, cmd_seed))
    _emit(ctx, "region_mass.json", json.dumps(est.to_dict(), indent=2, sort_keys=True) + "\n")


@main.command()
@click.option("--class", "cls_desc", required=True)
@click.option("--target", required=True)
@click.option("--dist", required=True)
@click.option("--epsilon", type=float, default=1e-3, show_default=True)
@click.option("--n", "n_samples", type=click.IntRange(1), default=20000, show_default=True)
@_seed_option
@click.pass_context
def theta(ctx, cls_desc, target, dist, epsilon, n_samples, cmd_seed):
    """Estimate the disagreement coefficient of the target."""
    from .regions import disagreement_coefficient_estimate

    cls = _class(cls_desc)
    est = disagreement_coefficient_estimate(cls, _hyp(cls, target), _dist(dist), n=n_samples,
                                            seed=_seed(ctx, cmd_seed), epsilon=epsilon)
    _emit(ctx, "theta.json", json.dumps(est.to_dict(), indent=2, sort_keys=True) + "\n")


@main.command()
@click.option("--class", "cls_desc", required=True)
@click.option("--pool", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--eta", required=True, type=float)
@click.option("--mode", "method", type=click.Choice(["strong", "dhm"]), default="strong",
              show_default=True, help="Strong sequential learner or the DHM reduction.")
@click.option("--epsilon", type=float, default=0.02, show_default=True)
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--points", "--test", "test", default=None, type=click.Path(exists=True, dir_okay=False))
@_seed_option
@click.pass_context
def active(ctx, cls_desc, pool, eta, method, epsilon, delta, test, cmd_seed):
    """Label-efficient learning on a metered pool."""
    from .active import MeteredPool, active_rr_learn, dhm_active_learn, dhm_rr_predict

    cls = _class(cls_desc)
    S = _dataset(pool, "pool")
    mp = MeteredPool.from_dataset(S)
    if method == "strong":
        pred, rep = active_rr_learn(cls, mp, eta)
        predict_one = pred.predict
    else:
        h_hat, rep = dhm_active_learn(cls, mp, eta, epsilon, delta, _seed(ctx, cmd_seed))

        def predict_one(x):
            return dhm_rr_predict(cls, S.X, h_hat, epsilon, x)

    _emit(ctx, "active.json", json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    if test is not None:
        Q = _points(test, "test points")
        _emit(ctx, "predictions.csv", _predictions_csv(Q, [predict_one(q) for q in Q]))


@main.command()
@click.option("--pool", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--eta", required=True, type=float)
@click.option("--dist", required=True)
@click.option("--schedule", default=None, help="Schedule JSON; defaults to the shipped profile.")
@click.option("--certify", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=None)
@click.option("--epsilon", type=float, default=None)
@_seed_option
@click.pass_context
def abl(ctx, pool, eta, dist, schedule, certify, alpha, epsilon, cmd_seed):
    """Margin-based halfspace learning under malicious noise, with band certificates."""
    from .abl import AblSchedule, abl_certify, abl_learn, load_profile
    from .abl.certify import default_alpha

    spec = _dist(dist)
    if not spec.isotropic_logconcave:
        raise _ConfigProblem("abl needs an isotropic log-concave distribution")
    S = _dataset(pool, "pool")
    if S.d != spec.d:
        raise _ConfigProblem(f"pool has dimension {S.d}, distribution {spec.d}")
    if schedule is None:
        sched = load_profile(S.d, epsilon)
    else:
        try:
            sched = AblSchedule.from_dict(_json_arg(schedule, "schedule"))
        except (ValueError, TypeError) as e:
            raise _ConfigProblem(f"bad schedule: {e}") from e
    res = abl_learn(S, epsilon=epsilon if schedule is None else None, schedule=sched,
                    seed=_seed(ctx, cmd_seed))
    a = alpha if alpha is not None else default_alpha(S.d, eta if eta > 0 else 1e-3)
    summary = {"w": [float(v) for v in res.w], "alpha": a, "C1": sched.C1, "eta": eta,
               "rounds": len(res.rounds), "profile": sched.profile}
    _emit(ctx, "abl.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if certify is not None:
        Q = _points(certify, "certification points")
        preds = [abl_certify(res.w, eta, a, sched.C1, q) for q in Q]
        _emit(ctx, "certificates.csv", _predictions_csv(Q, preds))


@main.command()
@click.option("--class", "cls_desc", default='{"kind": "threshold"}', show_default=True)
@click.option("--target", default='{"kind": "threshold", "t": 0.5}', show_default=True)
@click.option("--dist", default='{"kind": "uniform_interval"}', show_default=True)
@click.option("--m", type=click.IntRange(1), default=200, show_default=True)
@click.option("--eta", type=float, default=0.05, show_default=True)
@click.option("--trials", type=click.IntRange(1), default=5, show_default=True)
@click.option("--n-test", type=click.IntRange(1), default=50, show_default=True)
@click.pass_context
def bench(ctx, cls_desc, target, dist, m, eta, trials, n_test):
    """Targeted half-relabel gadget: plain ERM against the certified learner."""
    desc = {
        "mode": "bench", "hypothesis_class": _json_arg(cls_desc, "class"),
        "distribution": _json_arg(dist, "distribution"), "target": _json_arg(target, "target"),
        "m": m, "eta": eta, "trials": trials, "n_test": n_test, "seed": ctx.obj["seed"],
    }
    ctx.exit(_run_config(ctx, desc))


@main.command()
@click.option("--config", "config_path", required=True, help="Experiment config (JSON or file).")
@click.pass_context
def run(ctx, config_path):
    """Run an experiment config; exit 1 on any soundness violation or failure."""
    ctx.exit(_run_config(ctx, config_path))


def _run_config(ctx, source) -> int:
    from .config import ConfigError, load_config
    from .experiment import run_experiment, write_report

    try:
        cfg = load_config(source)
    except ConfigError as e:
        raise _ConfigProblem(f"bad config: {e}") from e
    report = run_experiment(cfg, workers=ctx.obj["workers"])
    out = ctx.obj["out"] or cfg.out
    if out is not None:
        click.echo(str(write_report(report, out)))
    else:
        click.echo(report.to_json(), nl=False)
    click.echo(
        f"soundness_violations={report.soundness_violations} failures={report.failures}", err=True
    )
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    main()
