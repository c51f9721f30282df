import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctf_attribution.deception import annotate, summarize
from ctf_attribution.exceptions import InvalidConfigError
from ctf_attribution.synth import SynthConfig, generate, read_truth, team_names, write_truth


def test_deterministic_per_seed():
    a = generate(SynthConfig(seed=3, n_teams=5, events_target=800))
    b = generate(SynthConfig(seed=3, n_teams=5, events_target=800))
    c = generate(SynthConfig(seed=4, n_teams=5, events_target=800))
    assert a.events == b.events and a.truth == b.truth
    assert a.events != c.events


@pytest.mark.parametrize("patch", [
    {"n_teams": 2}, {"events_target": 0}, {"p_deceive": 1.5}, {"wave_p": 0.0},
    {"deceiver_count_max": 25, "wave_max": 25}, {"payload_len_range": (10, 5)},
    {"copy_delay_min": 0.0}, {"horizon_hours": 0.0},
])
def test_invalid_configs(patch):
    with pytest.raises(InvalidConfigError):
        generate(SynthConfig(**patch))


def test_config_dict_round_trip():
    cfg = SynthConfig(seed=9, payload_len_range=(8, 16))
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidConfigError):
        SynthConfig.from_dict({"n_teamz": 4})


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(1, 1500), st.floats(0.0, 1.0))
def test_corpus_invariants(seed, n_teams, target, p_deceive):
    cfg = SynthConfig(seed=seed, n_teams=n_teams, events_target=target, p_deceive=p_deceive)
    corpus = generate(cfg)
    n = len(corpus.events)
    assert target <= n <= target + cfg.deceiver_count_max
    assert [ann.role for _, ann in annotate(corpus.events)] == corpus.truth
    times = [ev.time for ev in corpus.events]
    assert all(a < b for a, b in zip(times, times[1:]))
    assert all(t.microsecond == 0 for t in times)
    assert corpus.teams == team_names(n_teams)
    assert {ev.from_team for ev in corpus.events} <= set(corpus.teams)
    assert all(ev.svc in corpus.services for ev in corpus.events)
    horizon = cfg.horizon_hours * 3600
    assert all((t - times[0]).total_seconds() <= horizon + n for t in times)


def test_no_deception_when_disabled():
    corpus = generate(SynthConfig(seed=1, n_teams=4, events_target=600, p_deceive=0.0))
    totals = summarize(annotate(corpus.events)).totals()
    assert totals.deceptive_duplicates == 0 and totals.unique_deceptive_payloads == 0


def test_default_corpus_is_deception_heavy():
    corpus = generate(SynthConfig(seed=1, events_target=10_000))
    totals = summarize(annotate(corpus.events)).totals()
    assert 0.8 < totals.deceptive_duplicate_share < 0.97
    assert 0.2 < totals.deceptive_unique_share < 0.5


def test_truth_file_round_trip():
    corpus = generate(SynthConfig(seed=2, n_teams=4, events_target=200))
    out = io.StringIO()
    write_truth(corpus.truth, out)
    assert read_truth(out.getvalue().splitlines()) == corpus.truth
    with pytest.raises(ValueError):
        read_truth(['{"index": 1, "role": "Original"}'])
