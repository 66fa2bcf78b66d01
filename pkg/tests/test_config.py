import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reslevy.config import SEED_ENV, Grid, RunConfig, parse_config
from reslevy.errors import ConfigurationError

SAMPLE = """
# lifetime study
command = lifetime
family = stable-subordinator
alpha = 0.5
starts = 0.5, 1, 2
n_paths = 10000
seed = 42
horizon = none
plots = false
"""


class TestParse:
    def test_typed_values(self):
        cfg = parse_config(SAMPLE, env={})
        assert cfg.command == "lifetime" and cfg.params == {"alpha": 0.5}
        assert cfg.starts == (0.5, 1.0, 2.0) and cfg.n_paths == 10_000 and cfg.seed == 42
        assert cfg.horizon is None and cfg.plots is False

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="colour"):
            parse_config("command = classify\ncolour = red\n", env={})

    def test_bad_value_names_key(self):
        with pytest.raises(ConfigurationError, match="n_paths"):
            parse_config("command = lifetime\nn_paths = many\n", env={})

    def test_missing_command(self):
        with pytest.raises(ConfigurationError, match="command"):
            parse_config("family = stable\n", env={})

    def test_duplicate(self):
        with pytest.raises(ConfigurationError):
            parse_config("command = classify\ncommand = verify\n", env={})

    def test_unknown_check(self):
        with pytest.raises(ConfigurationError, match="checks"):
            parse_config("command = verify\nchecks = exponential_law, magic\n", env={})

    def test_seed_override(self):
        cfg = parse_config(SAMPLE, env={SEED_ENV: "7"})
        assert cfg.seed == 7

    def test_seed_range(self):
        with pytest.raises(ConfigurationError):
            parse_config("command = classify\nseed = -1\n", env={})


class TestGrid:
    def test_inclusive(self):
        g = Grid.parse("0.1:2.0:0.1")
        v = g.values()
        assert v.size == 20 and v[0] == 0.1 and v[-1] == 2.0
        assert np.all(np.diff(v) > 0)

    @pytest.mark.parametrize("text", ["1:2", "2:1:0.1", "0:1:0"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            Grid.parse(text)


class TestRoundTrip:
    def test_idempotent(self):
        cfg = parse_config(SAMPLE + "alpha_grid = 0.1:2.0:0.1\n", env={})
        text = cfg.serialize()
        assert parse_config(text, env={}) == cfg
        assert parse_config(text, env={}).serialize() == text

    @given(
        seed=st.integers(0, 2**64 - 1),
        starts=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=4),
        dt=st.floats(1e-6, 1.0),
        horizon=st.one_of(st.none(), st.floats(1e-3, 1e6)),
        checks=st.lists(st.sampled_from(["feynman_kac", "kernel_law", "overshoot"]), max_size=3),
    )
    @settings(max_examples=100, deadline=None)
    def test_property(self, seed, starts, dt, horizon, checks):
        cfg = RunConfig(
            command="verify", family="stable", params={"alpha": 1.5, "rhobar": 0.5}, seed=seed,
            starts=tuple(starts), grid_dt=dt, horizon=horizon, checks=tuple(checks),
        )
        assert parse_config(cfg.serialize(), env={}) == cfg
