import json
import math

import numpy as np
import pytest

from oimsim import (
    OimParams,
    SimConfig,
    config_to_index,
    ising_energy,
    ks_campaign,
    largest_lyapunov,
    run_trials,
    stable_set_report,
    write_report,
)
from oimsim.experiments import (
    build_metadata,
    read_report,
    trial_rng,
    write_trials_csv,
)

from conftest import random_coupling

FAST_SIM = SimConfig(dt=0.01, t_max=40.0)


class TestRunTrials:
    def test_triangle_biased_free_regime(self, triangle_w):
        # at ks = 0.8 only the ground states are stable
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 50, master_seed=42)
        assert res.histogram == ((-1.0, 50),)
        assert res.n_nonbinarized == 0
        assert res.success_rate == 1.0
        assert res.h_min_reference == -1.0
        assert res.success_reference == "exact-enumeration"

    def test_single_edge_deterministic(self, edge_w):
        p = OimParams(k=1.0, ks=0.5, kn=0.0)
        res = run_trials(edge_w, p, SimConfig(t_max=100.0), 10, master_seed=3)
        assert res.n_nonbinarized == 0
        assert all(t.binarized and t.converged for t in res.trials)
        assert all(t.h in (-1.0, 1.0) for t in res.trials)
        assert 0.0 <= res.success_rate <= 1.0

    def test_repeatable(self, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        a = run_trials(triangle_w, p, FAST_SIM, 8, master_seed=11)
        b = run_trials(triangle_w, p, FAST_SIM, 8, master_seed=11)
        assert a.histogram == b.histogram
        assert a.success_rate == b.success_rate
        for ta, tb in zip(a.trials, b.trials):
            assert ta.h == tb.h and ta.steps == tb.steps
            assert ta.lambda_l == tb.lambda_l

    def test_threads_do_not_change_results(self, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        a = run_trials(triangle_w, p, FAST_SIM, 6, master_seed=5, threads=1)
        b = run_trials(triangle_w, p, FAST_SIM, 6, master_seed=5, threads=3)
        assert a.histogram == b.histogram
        for ta, tb in zip(a.trials, b.trials):
            assert ta.h == tb.h and ta.steps == tb.steps

    def test_trial_consistency_invariants(self, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 12, master_seed=9)
        mass = sum(c for _, c in res.histogram)
        assert mass + res.n_nonbinarized == res.n_trials
        for t in res.trials:
            assert (t.h is None) == (not t.binarized)
            assert (t.lambda_l is None) == (not t.binarized)
            if t.binarized:
                assert t.h == ising_energy(triangle_w, t.spins)
                assert t.lambda_l == largest_lyapunov(triangle_w, p, t.spins)

    def test_nonbinarized_regime(self, triangle_w):
        # ks = 0.1 leaves no stable binarized configuration
        p = OimParams(k=1.0, ks=0.1, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 10, master_seed=4)
        assert res.n_nonbinarized == 10
        assert res.histogram == ()
        assert res.success_rate == 0.0

    def test_n_trials_validation(self, triangle_w):
        with pytest.raises(ValueError):
            run_trials(triangle_w, OimParams(), FAST_SIM, 0, master_seed=1)


class TestKsCampaign:
    def test_pairing_of_initial_conditions(self):
        a = trial_rng(42, 3).uniform(0, 2 * math.pi, 5)
        b = trial_rng(42, 3).uniform(0, 2 * math.pi, 5)
        assert np.array_equal(a, b)

    def test_triangle_two_regimes(self, triangle_w):
        results = ks_campaign(
            triangle_w, 1.0, [0.1, 0.8], 0.005, FAST_SIM, 10, master_seed=7
        )
        low, high = results
        assert low.n_nonbinarized == 10
        assert high.histogram == ((-1.0, 10),)
        assert high.success_rate == 1.0

    def test_campaign_matches_standalone(self, triangle_w):
        (res,) = ks_campaign(
            triangle_w, 1.0, [0.8], 0.005, FAST_SIM, 6, master_seed=13
        )
        alone = run_trials(
            triangle_w, OimParams(1.0, 0.8, 0.005), FAST_SIM, 6, master_seed=13
        )
        assert res.histogram == alone.histogram
        assert [t.h for t in res.trials] == [t.h for t in alone.trials]

    def test_empty_ks_list(self, triangle_w):
        with pytest.raises(ValueError):
            ks_campaign(triangle_w, 1.0, [], 0.005, FAST_SIM, 5, master_seed=1)


class TestStableSetReport:
    def test_triangle_ground_only(self, triangle_w):
        rep = stable_set_report(triangle_w, 1.0, 0.8, cap=100)
        assert rep.total_stable == 3
        assert not rep.truncated
        assert [r.config for r in rep.records] == [1, 2, 3]
        assert all(r.h == -1.0 and r.stable for r in rep.records)

    def test_triangle_all_stable_at_high_ks(self, triangle_w):
        rep = stable_set_report(triangle_w, 1.0, 1.6, cap=100)
        assert rep.total_stable == 4
        # sorted by (H, config): ground level first, uniform state last
        assert [r.config for r in rep.records] == [1, 2, 3, 0]

    def test_cap_truncation_is_reported(self, triangle_w):
        rep = stable_set_report(triangle_w, 1.0, 1.6, cap=2)
        assert rep.truncated
        assert rep.total_stable == 4
        assert len(rep.records) == 2

    def test_everything_stable_above_max_critical(self):
        from oimsim import critical_ks, index_to_config
        from oimsim.enumeration import num_configs
        from oimsim.stability import base_beta1_all

        w = random_coupling(9, 18, seed=6)
        _, beta = base_beta1_all(w, threads=1)
        ks = float(beta.max()) / 2.0 + 0.01
        rep = stable_set_report(w, 1.0, ks, cap=10)
        assert rep.total_stable == num_configs(9)

    def test_lambda_values_match_direct(self, triangle_w):
        rep = stable_set_report(triangle_w, 1.0, 0.8, cap=10)
        from oimsim.enumeration import index_to_config

        for r in rep.records:
            s = index_to_config(r.config, 3)
            assert r.lambda_l == pytest.approx(
                largest_lyapunov(triangle_w, OimParams(1.0, 0.8), s), abs=1e-9
            )


class TestReports:
    def test_write_and_read_round_trip(self, tmp_path, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 10, master_seed=2)
        out = tmp_path / "campaign"
        write_report(res, out, metadata=build_metadata({"source": "test"}))
        doc = read_report(out)
        assert doc["success_rate"] == res.success_rate
        assert doc["n_nonbinarized"] == res.n_nonbinarized
        assert [tuple(x) for x in doc["histogram"]] == list(res.histogram)
        assert doc["params"]["master_seed"] == 2
        assert doc["metadata"]["prng"] == "numpy-pcg64"
        assert doc["metadata"]["timestamp"] is None

    def test_trials_csv_schema(self, tmp_path, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 3, master_seed=2)
        path = tmp_path / "trials.csv"
        write_trials_csv(res, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "trial,seed,converged,binarized,H,lambda_L,steps"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "0" and first[3] == "true" and first[4] == "-1"

    def test_empty_histogram_campaign(self, tmp_path, triangle_w):
        # no stable binarized configuration at ks = 0.1
        p = OimParams(k=1.0, ks=0.1, kn=0.005)
        res = run_trials(triangle_w, p, FAST_SIM, 4, master_seed=8)
        out = tmp_path / "empty"
        write_report(res, out)
        doc = read_report(out)
        assert doc["histogram"] == []
        assert doc["n_nonbinarized"] == 4
        lines = (out / "trials.csv").read_text().splitlines()
        assert lines[1].split(",")[4] == ""  # empty H for non-binarized

    def test_report_bytes_deterministic(self, tmp_path, triangle_w):
        p = OimParams(k=1.0, ks=0.8, kn=0.005)
        meta = build_metadata({"source": "test"})
        for name in ("a", "b"):
            res = run_trials(triangle_w, p, FAST_SIM, 5, master_seed=3)
            write_report(res, tmp_path / name, metadata=meta)
        assert (tmp_path / "a" / "report.json").read_bytes() == (
            tmp_path / "b" / "report.json"
        ).read_bytes()
        assert (tmp_path / "a" / "trials.csv").read_bytes() == (
            tmp_path / "b" / "trials.csv"
        ).read_bytes()
