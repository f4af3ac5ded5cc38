import json

import numpy as np
import pytest

from rrl import Halfspace, HalfspaceClass, Threshold
from rrl.config import ConfigError, ExperimentConfig, load_config
from rrl.core import DimensionMismatch
from rrl.experiment import RunReport, generate_synthetic, run_experiment, run_trial, write_report
from rrl.regions import DistributionSpec

BASE = {
    "mode": "predict",
    "hypothesis_class": {"kind": "threshold"},
    "distribution": {"kind": "uniform_interval"},
    "target": {"kind": "threshold", "t": 0.5},
    "m": 60,
    "trials": 3,
    "n_test": 40,
}


def cfg(**kw):
    return load_config({**BASE, **kw})


class TestSynthetic:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            generate_synthetic(DistributionSpec("uniform_interval"), Threshold(0.5), 0, 0)

    def test_reproducible_csv(self):
        a = generate_synthetic(DistributionSpec("uniform_interval"), Threshold(0.5), 10, 7).to_csv()
        b = generate_synthetic(DistributionSpec("uniform_interval"), Threshold(0.5), 10, 7).to_csv()
        assert a == b

    def test_halfspace_labels(self):
        w = (1.0, -2.0, 0.5)
        S = generate_synthetic(DistributionSpec("gaussian_isotropic", d=3), Halfspace(w), 500, 1)
        assert np.array_equal(S.y, (S.X @ np.array(w) >= 0).astype(np.int8))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            generate_synthetic(DistributionSpec("gaussian_isotropic", d=3), Halfspace((1.0, 0.0)), 5, 0)


class TestConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            load_config({**BASE, "bogus": 1})

    def test_invalid_values(self):
        for bad in ({"m": 0}, {"eta": 1.5}, {"mode": "train"}, {"target": {"t": 0.5}}):
            with pytest.raises(ConfigError):
                load_config({**BASE, **bad})

    def test_attack_validation(self):
        with pytest.raises(ConfigError):
            cfg(attack={"family": "nasty", "strategy": "band_stuffing"})
        with pytest.raises(ConfigError):
            cfg(mode="abl")
        with pytest.raises(ConfigError):
            cfg(mode="bench", attack={"family": "nasty", "strategy": "random_flip"})

    def test_sources(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(BASE))
        assert load_config(p) == load_config(json.dumps(BASE)) == load_config(BASE)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        with pytest.raises(ConfigError):
            load_config("{not json")

    def test_hash_ignores_out(self):
        assert cfg(out="a").config_hash() == cfg(out="b").config_hash() != cfg(m=61).config_hash()


class TestRun:
    def test_clean_predict_is_version_space(self):
        rep = run_experiment(cfg(trials=2))
        assert rep.passed and rep.soundness_violations == 0
        c = ExperimentConfig.model_validate({**BASE, "trials": 2})
        for row in rep.trials:
            # eta = 0: certified mass is the version-space agreement mass on the test points
            assert row["corruption"] == 0
            assert row["certified_mass"] == pytest.approx(1 - row["abstain_rate"])
        assert run_trial(c, 0) == rep.trials[0]

    @pytest.mark.parametrize("attack", [
        {"family": "nasty", "strategy": "random_flip"},
        {"family": "nasty", "strategy": "half_relabel_targeted"},
        {"family": "malicious", "strategy": "random_flip"},
        {"family": "malicious", "strategy": "adversarial_labels"},
    ])
    def test_attacked_predict_sound(self, attack):
        rep = run_experiment(cfg(eta=0.1, attack=attack, trials=4))
        assert rep.soundness_violations == 0 and rep.failures == 0

    def test_region_and_interval(self):
        rep = run_experiment(cfg(mode="region", hypothesis_class={"kind": "interval"},
                                 target={"kind": "interval", "a": 0.2, "b": 0.6}, eta=0.05, n_test=500,
                                 attack={"family": "nasty", "strategy": "random_flip"}))
        assert rep.passed and all(t["checked"] for t in rep.trials)
        assert all(0.3 < t["robc_mass"] <= t["certified_mass"] + 0.1 for t in rep.trials)

    def test_active_modes(self):
        for method in ("rr", "dhm"):
            rep = run_experiment(cfg(mode="active", m=300, eta=0.02, active_method=method, epsilon=0.1, trials=2,
                                     attack={"family": "nasty", "strategy": "random_flip"}))
            assert rep.passed

    def test_abl_mode(self):
        rep = run_experiment(cfg(mode="abl", hypothesis_class={"kind": "halfspace", "d": 2},
                                 distribution={"kind": "gaussian_isotropic", "d": 2},
                                 target={"kind": "halfspace", "w": [1.0, 1.0]}, m=12000, eta=0.02,
                                 epsilon=0.25, trials=1, n_test=2000,
                                 attack={"family": "malicious", "strategy": "band_stuffing",
                                         "params": {"band": 0.05}}))
        assert rep.passed and rep.trials[0]["error"] <= 0.1

    def test_bench_gadget(self):
        rep = run_experiment(cfg(mode="bench", m=200, eta=0.05, trials=3, n_test=30))
        agg = rep.aggregate()
        assert agg["erm_targeted_error"]["mean"] > 0
        assert rep.soundness_violations == 0

    def test_failure_rows(self):
        rep = run_experiment(cfg(mode="abl", hypothesis_class={"kind": "halfspace", "d": 2},
                                 distribution={"kind": "gaussian_isotropic", "d": 2},
                                 target={"kind": "halfspace", "w": [1.0, 0.0]}, m=500, trials=1))
        assert rep.failures == 1 and not rep.passed and "PoolExhausted" in rep.trials[0]["error"]

    def test_byte_identical(self, tmp_path):
        c = cfg(eta=0.1, attack={"family": "nasty", "strategy": "random_flip"})
        a = write_report(run_experiment(c), tmp_path / "a")
        b = write_report(run_experiment(c, workers=2), tmp_path / "b")
        for name in ("report.json", "trials.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        doc = json.loads((a / "report.json").read_text())
        assert doc["soundness_violations"] == 0 and doc["config_hash"] == c.config_hash()
        assert "seed_derivation" in doc and len(doc["trials"]) == 3

    def test_report_aggregate(self):
        r = RunReport({}, "x", [{"trial": 0, "seed": 1, "v": 1.0}, {"trial": 1, "seed": 2, "v": 3.0}])
        assert r.aggregate()["v"]["median"] == 2.0 and r.passed
