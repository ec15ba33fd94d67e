import json

import pytest

from ramlab import oracle as O


def test_config_validation():
    with pytest.raises(ValueError):
        O.TrialConfig(p=3, N=8, trials=1, seed=0)
    with pytest.raises(ValueError):
        O.TrialConfig(p=2, N=8, trials=0, seed=0)
    with pytest.raises(ValueError):
        O.TrialConfig(p=2, N=8, trials=1, seed=-1)


def test_known_series():
    assert O.known_series_check(32) == [1, 3, 15]


def test_small_suite_passes_and_is_deterministic():
    cfg = O.TrialConfig(p=2, N=64, trials=30, seed=42)
    a = O.run_suite(cfg)
    b = O.run_suite(cfg)
    assert a.ok
    assert a.to_jsonl() == b.to_jsonl()
    counts = a.counts()
    assert set(counts) == set(O.INVARIANTS)
    assert all(c == {"passed": 30, "failed": 0} for c in counts.values())


def test_f9_and_pinned_suites():
    assert O.run_suite(O.TrialConfig(p=3, m=2, N=27, trials=10, seed=7)).ok
    rep = O.run_suite(O.TrialConfig(p=3, N=81, trials=10, seed=3, pin_i0=5))
    assert rep.ok and all(t.i[0] == 5 for t in rep.trials)


def test_sharded_merge_matches_serial():
    cfg = O.TrialConfig(p=2, N=32, trials=12, seed=11)
    assert O.run_suite(cfg, jobs=3).to_jsonl() == O.run_suite(cfg).to_jsonl()


def test_replay():
    cfg = O.TrialConfig(p=3, N=27, trials=5, seed=99)
    rep = O.run_suite(cfg)
    again = O.replay_trial(cfg, 3)
    assert again.to_json() == rep.trials[3].to_json()


def test_jsonl_layout():
    rep = O.run_suite(O.TrialConfig(p=2, N=16, trials=3, seed=5))
    lines = [json.loads(x) for x in rep.to_jsonl().splitlines()]
    assert [x["trial"] for x in lines[:-1]] == [0, 1, 2]
    assert lines[-1]["summary"] and lines[-1]["config"]["seed"] == 5
    assert all(isinstance(v, str) for v in lines[0]["i"])


def test_failure_carries_series(monkeypatch):
    import ramlab.oracle as mod

    real = mod.ram_sequence

    def broken(f, n_max):  # keep only i_0 so the conjugate prefix disagrees
        seq = real(f, n_max)
        return seq[:1]

    monkeypatch.setattr(mod, "ram_sequence", broken)
    t = mod.run_trial(O.TrialConfig(p=2, N=64, trials=1, seed=1), 0)
    assert not t.ok and t.series is not None and "f" in t.series


@pytest.mark.parametrize("name", list(O.EXPECTED))
def test_height_oracle(name):
    rep = O.height_oracle(name)
    assert rep["ok"], rep["rows"]


def test_height_oracle_aliases_and_errors():
    assert O.height_oracle("h_gt2", {"p": 3, "h": 3})["ok"]
    assert O.height_oracle("ex_2not1", {"p": 3})["ok"]
    with pytest.raises(ValueError):
        O.height_oracle("bogus")
