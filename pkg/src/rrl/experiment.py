"""Experiment pipelines, seeded trials and reproducible run reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .abl import BandCertificate, abl_learn, gaussian_error, load_profile
from .abl.certify import default_alpha
from .abl.schedule import AblSchedule
from .active import MeteredPool, active_rr_learn, dhm_active_learn, dhm_rr_predict
from .adversaries import (
    attack_malicious,
    attack_random_flip,
    closest_flipper,
    draw_filler,
    draw_mask,
    targeted_half_relabel,
)
from .classes import Halfspace, class_from_descriptor, hypothesis_from_descriptor
from .config import ExperimentConfig
from .core import (
    BudgetExceeded,
    LabeledDataset,
    PromiseViolation,
    RRLError,
    UnsupportedClass,
    budget_count,
    derive_seed,
)
from .learner import rr_certificate_arrays, rr_predict
from .regions import DistributionSpec, robc_estimate

__all__ = [
    "RunReport",
    "SEED_DERIVATION",
    "apply_attack",
    "generate_synthetic",
    "run_experiment",
    "run_trial",
    "write_report",
]

log = logging.getLogger(__name__)

SEED_DERIVATION = (
    "trial seed = derive_seed(master, trial index); stream j of a trial = "
    "derive_seed(trial seed, j) with j = 0 data, 1 attack, 2 test points, 3 algorithm; "
    "derive_seed(s, c) is the first 64-bit word of SeedSequence(entropy=s, spawn_key=(c,))"
)

# streams within a trial
DATA, ATTACK, TEST, ALGO = 0, 1, 2, 3


def generate_synthetic(dist: DistributionSpec, target, m: int, seed) -> LabeledDataset:
    """``m`` i.i.d. points from ``dist`` labeled by ``target``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    X = dist.sample(m, seed)
    return LabeledDataset(X, target.predict(X))


def apply_attack(cls, S: LabeledDataset, h_star, attack, eta, seed, dist, x_target=None):
    """Corrupted copy of ``S`` according to an :class:`AttackConfig` (or ``None``)."""
    if attack is None or eta == 0:
        return S
    params = dict(attack.params)
    if attack.family == "nasty":
        if attack.strategy == "random_flip":
            return attack_random_flip(S, eta, seed)
        try:
            return targeted_half_relabel(cls, S, h_star, eta, x_target)
        except BudgetExceeded:
            return S
    mask = draw_mask(S.m, eta, seed)
    if attack.strategy == "band_stuffing":
        if not isinstance(h_star, Halfspace):
            raise ValueError("band_stuffing needs a halfspace target")
        return attack_malicious(S, mask, "band_stuffing", seed=derive_seed(seed, 1),
                                w_star=np.array(h_star.w), band=float(params.get("band", 0.1)),
                                offset=float(params.get("offset", 0.0)))
    if attack.strategy == "adversarial_labels":
        h_prime = closest_flipper(cls, S, h_star, x_target)
        if h_prime is None:
            return S
        filler = draw_filler(lambda rng, n: dist.sample(n, rng),
                             lambda P: h_prime.predict(P) == h_star.predict(P), derive_seed(seed, 2))
        return attack_malicious(S, mask, "adversarial_labels", seed=derive_seed(seed, 1),
                                h_star=h_star, h_prime=h_prime, filler=filler[None, :])
    return attack_malicious(S, mask, "random_flip", seed=derive_seed(seed, 1))


def _attack_target(cls, S, h_star, attack, eta, Q):
    """Test point for instance-targeted strategies: the first one the budget can flip."""
    if attack is None or attack.strategy not in ("half_relabel_targeted", "adversarial_labels"):
        return Q[0]
    k = budget_count(eta, S.m)
    ps = h_star.predict(S.X)
    for x in Q[:50]:
        hp = closest_flipper(cls, S, h_star, x)
        if hp is not None and np.count_nonzero(hp.predict(S.X) != ps) <= 2 * k:
            return x
    return Q[0]


def _corruption(S: LabeledDataset, T: LabeledDataset) -> int:
    diff = np.any(S.X != T.X, axis=1) | (S.y != T.y)
    return int(np.count_nonzero(diff))


def _check_certificates(labels, num, truth, corruption) -> int:
    """Certified at a level covering the actual corruption yet wrong."""
    return int(np.count_nonzero((labels >= 0) & (num >= corruption) & (labels != truth)))


def _setup(cfg: ExperimentConfig):
    cls = class_from_descriptor(cfg.hypothesis_class)
    h = hypothesis_from_descriptor(cls, cfg.target)
    dist = DistributionSpec.from_dict(cfg.distribution)
    return cls, h, dist


def _trial_predict(cfg, cls, h, dist, seeds):
    S = generate_synthetic(dist, h, cfg.m, seeds[DATA])
    Q = dist.sample(cfg.n_test, seeds[TEST])
    S2 = apply_attack(cls, S, h, cfg.attack, cfg.eta, seeds[ATTACK], dist,
                      _attack_target(cls, S, h, cfg.attack, cfg.eta, Q))
    corr = _corruption(S, S2)
    labels, num = rr_certificate_arrays(cls, S2, Q, cfg.nu)
    k = budget_count(cfg.eta, cfg.m)
    return {
        "corruption": corr,
        "soundness_violations": _check_certificates(labels, num, h.predict(Q), corr),
        "certified_mass": float(np.mean((labels >= 0) & (num >= k))),
        "abstain_rate": float(np.mean(labels < 0)),
    }


def _trial_region(cfg, cls, h, dist, seeds):
    S = generate_synthetic(dist, h, cfg.m, seeds[DATA])
    est = robc_estimate(cls, S, h, cfg.eta, dist, cfg.n_test, seeds[TEST])
    out = {"robc_mass": est.mass_hat, "robc_radius": est.confidence_radius}
    Q = dist.sample(min(cfg.n_test, 500), seeds[ALGO])
    S2 = apply_attack(cls, S, h, cfg.attack, cfg.eta, seeds[ATTACK], dist,
                      _attack_target(cls, S, h, cfg.attack, cfg.eta, Q))
    corr = _corruption(S, S2)
    try:
        labels, num = rr_certificate_arrays(cls, S2, Q, cfg.nu)
    except UnsupportedClass:
        out.update(soundness_violations=0, checked=False, corruption=corr)
        return out
    k = budget_count(cfg.eta, cfg.m)
    out.update(
        corruption=corr,
        checked=True,
        soundness_violations=_check_certificates(labels, num, h.predict(Q), corr),
        certified_mass=float(np.mean((labels >= 0) & (num >= k))),
    )
    return out


def _trial_active(cfg, cls, h, dist, seeds):
    S = generate_synthetic(dist, h, cfg.m, seeds[DATA])
    Q = dist.sample(cfg.n_test, seeds[TEST])
    S2 = apply_attack(cls, S, h, cfg.attack, cfg.eta, seeds[ATTACK], dist,
                      _attack_target(cls, S, h, cfg.attack, cfg.eta, Q))
    corr = _corruption(S, S2)
    pool = MeteredPool.from_dataset(S2)
    truth = h.predict(Q)
    if cfg.active_method == "dhm":
        h_hat, rep = dhm_active_learn(cls, pool, cfg.eta, cfg.epsilon, cfg.delta, seeds[ALGO])
        err = float(np.mean(h_hat.predict(S2.X) != S2.y))
        best = float(cls.erm(S2)[1])
        preds = [dhm_rr_predict(cls, S2.X, h_hat, cfg.epsilon, q) for q in Q]
        wrong = sum(
            1 for p, t in zip(preds, truth)
            if not p.abstained and p.eta * cfg.m >= corr and p.label != t
        )
        # the reduction's certificates hold with probability 1 - delta only
        return {
            "corruption": corr,
            "queries": rep.queries_made,
            "excess_error": err - best,
            "soundness_violations": 0,
            "probabilistic_violations": wrong,
            "certified_mass": float(np.mean([not p.abstained for p in preds])),
        }
    try:
        pred, rep = active_rr_learn(cls, pool, cfg.eta)
    except PromiseViolation:
        if corr <= budget_count(cfg.eta, cfg.m):
            raise
        return {"corruption": corr, "queries": pool.queries_made, "promise_violated": True,
                "soundness_violations": 0}
    preds = pred.predict_batch(Q)
    labels = np.array([-1 if p.abstained else p.label for p in preds])
    num = np.array([-1 if p.abstained else int(p.eta * cfg.m) for p in preds])
    return {
        "corruption": corr,
        "queries": rep.queries_made,
        "target_survives": bool(pred.contains(h)),
        "soundness_violations": _check_certificates(labels, num, truth, corr),
        "certified_mass": float(np.mean(labels >= 0)),
    }


def _abl_schedule(cfg, d) -> AblSchedule:
    if cfg.schedule is not None:
        base = load_profile(d).to_dict()
        base.update(cfg.schedule)
        base.pop("profile", None)
        sched = AblSchedule.from_dict(base)
        if "rounds" not in cfg.schedule:
            sched = sched.with_(rounds=AblSchedule.rounds_for(cfg.epsilon))
        return sched
    return load_profile(d, cfg.epsilon)


def _trial_abl(cfg, cls, h, dist, seeds):
    S = generate_synthetic(dist, h, cfg.m, seeds[DATA])
    S2 = apply_attack(cls, S, h, cfg.attack, cfg.eta, seeds[ATTACK], dist)
    sched = _abl_schedule(cfg, cls.d)
    res = abl_learn(S2, delta=cfg.delta, schedule=sched, seed=seeds[ALGO])
    w_star = np.array(h.w)
    Q = dist.sample(cfg.n_test, seeds[TEST])
    alpha = cfg.alpha or default_alpha(cls.d, cfg.eta if cfg.eta > 0 else cfg.epsilon)
    cert = BandCertificate(res.w, cfg.eta, alpha, sched.C1)
    mask = cert.mask(Q)
    wrong = mask & (cert.labels(Q) != h.predict(Q))
    return {
        "corruption": _corruption(S, S2),
        "error": gaussian_error(res.w, w_star),
        "angle": gaussian_error(res.w, w_star) * math.pi,
        "certified_mass": float(mask.mean()),
        "soundness_violations": int(wrong.sum()),
        "points_scanned": res.points_scanned,
        "converged": res.converged,
    }


def _split_relabel(S, h_star, h_prime, order):
    """Disagreement set labeled half by each hypothesis, rounding toward ``h_prime``."""
    ps, pp = h_star.predict(S.X), h_prime.predict(S.X)
    delta = np.flatnonzero(ps != pp)[order]
    labels = ps.astype(np.int8).copy()
    labels[delta[: (len(delta) + 1) // 2]] = pp[delta[: (len(delta) + 1) // 2]]
    return S.relabel(labels)


def _trial_bench(cfg, cls, h, dist, seeds, tries: int = 32):
    """Targeted half-relabel gadget against plain ERM and the certified learner.

    For each test point the attacker labels the disagreement set of ``h*`` and
    the closest flipping hypothesis ``h'`` half by each, rounding toward
    ``h'``.  Knowing the learner, it tries up to ``tries`` seeded splits and
    keeps the first that makes ERM err at the test point.
    """
    S = generate_synthetic(dist, h, cfg.m, seeds[DATA])
    Q = dist.sample(cfg.n_test, seeds[TEST])
    rng = np.random.default_rng(seeds[ATTACK])
    k = budget_count(cfg.eta, cfg.m)
    attackable = erm_wrong = violations = abstained = 0
    for x in Q:
        hp = closest_flipper(cls, S, h, x)
        if hp is None:
            continue
        n_delta = int(np.count_nonzero(h.predict(S.X) != hp.predict(S.X)))
        if (n_delta + 1) // 2 > k:
            continue
        attackable += 1
        truth = int(h.predict(x[None, :])[0])
        for _ in range(tries):
            S2 = _split_relabel(S, h, hp, rng.permutation(n_delta))
            fooled = int(cls.erm(S2)[0].predict(x[None, :])[0]) != truth
            if fooled:
                break
        erm_wrong += int(fooled)
        corr = _corruption(S, S2)
        p = rr_predict(cls, S2, x)
        abstained += int(p.abstained)
        if not p.abstained and p.eta * cfg.m >= corr and p.label != truth:
            violations += 1
    return {
        "attackable": attackable,
        "erm_targeted_error": erm_wrong / attackable if attackable else 0.0,
        "rr_abstain_rate": abstained / attackable if attackable else 0.0,
        "soundness_violations": violations,
    }


_PIPELINES = {
    "predict": _trial_predict,
    "region": _trial_region,
    "active": _trial_active,
    "abl": _trial_abl,
    "bench": _trial_bench,
}


def run_trial(cfg: ExperimentConfig, index: int) -> dict:
    seed = derive_seed(cfg.seed, index)
    seeds = [derive_seed(seed, j) for j in range(4)]
    cls, h, dist = _setup(cfg)
    if dist.d != cls.d:
        raise RRLError(f"distribution dimension {dist.d} does not match class dimension {cls.d}")
    row = {"trial": index, "seed": seed}
    try:
        row.update(_PIPELINES[cfg.mode](cfg, cls, h, dist, seeds))
        row["failed"] = False
    except RRLError as e:
        log.error("trial %d failed: %s", index, e)
        row.update(failed=True, error=f"{type(e).__name__}: {e}", soundness_violations=0)
    return row


def _run_one(args):
    cfg_json, index = args
    return run_trial(ExperimentConfig.model_validate_json(cfg_json), index)


def _quantiles(values) -> dict:
    a = np.asarray(values, dtype=np.float64)
    q = np.quantile(a, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": q[0], "q25": q[1], "median": q[2], "q75": q[3], "max": q[4], "mean": float(a.mean())}


@dataclass
class RunReport:
    config: dict
    config_hash: str
    trials: list = field(default_factory=list)
    version: str = __version__

    @property
    def soundness_violations(self) -> int:
        return int(sum(t.get("soundness_violations", 0) for t in self.trials))

    @property
    def failures(self) -> int:
        return int(sum(bool(t.get("failed")) for t in self.trials))

    @property
    def passed(self) -> bool:
        return self.soundness_violations == 0 and self.failures == 0

    def aggregate(self) -> dict:
        keys = sorted({k for t in self.trials for k, v in t.items()
                       if isinstance(v, (int, float)) and not isinstance(v, bool)} - {"trial", "seed"})
        out = {}
        for k in keys:
            vals = [t[k] for t in self.trials if k in t and not t.get("failed")]
            if vals:
                out[k] = {a: float(b) for a, b in _quantiles(vals).items()}
        return out

    def to_dict(self) -> dict:
        return {
            "tool": "rrl",
            "version": self.version,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed_derivation": SEED_DERIVATION,
            "soundness_violations": self.soundness_violations,
            "failures": self.failures,
            "passed": self.passed,
            "aggregate": self.aggregate(),
            "trials": self.trials,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def trials_csv(self) -> str:
        cols = sorted({k for t in self.trials for k in t})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for t in self.trials:
            w.writerow({k: t.get(k, "") for k in cols})
        return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: RunReport, out: str | Path) -> Path:
    """Write ``report.json`` and ``trials.csv`` under ``out/<config hash>/``."""
    run_dir = Path(out) / report.config_hash
    atomic_write(run_dir / "trials.csv", report.trials_csv())
    atomic_write(run_dir / "report.json", report.to_json())
    return run_dir


def run_experiment(cfg: ExperimentConfig, workers: int = 1, out: str | Path | None = None) -> RunReport:
    """Run every trial of ``cfg`` and write the report when an output directory is set."""
    payload = cfg.canonical_json()
    jobs = [(payload, i) for i in range(cfg.trials)]
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_one, jobs))
    else:
        rows = [run_trial(cfg, i) for i in range(cfg.trials)]
    rows.sort(key=lambda r: r["trial"])
    report = RunReport(json.loads(payload), cfg.config_hash(), rows)
    target = out if out is not None else cfg.out
    if target is not None:
        write_report(report, target)
    return report
