import os

import pytest

from classes.config_loader import ConfigError, ConfigLoader, train_config_from_echo


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigLoader:

    def test_defaults_without_file(self):
        run = ConfigLoader().load("check")
        assert run.seed == 1
        assert run.decode_mode == "mst"
        assert run.train.hidden_size == 128
        assert run.train.channels == ("auto",)

    def test_file_values_are_cast(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "# toy run",
            "seed = 7",
            "paths.train = train.conll",
            "paths.model_out = model.bin",
            "train.hidden_size = 32",
            "train.learning_rate = 0.002",
            "train.use_pos = false",
            "train.channels = form,lemma",
            "train.directions = l2r",
            "decode.single_root = yes",
        ]) + "\n")
        run = ConfigLoader(path).load("train")
        assert run.seed == 7 and run.train.seed == 7
        assert run.train.hidden_size == 32
        assert run.train.learning_rate == pytest.approx(0.002)
        assert run.train.use_pos is False
        assert run.train.channels == ("form", "lemma")
        assert run.train.directions == "l2r"
        assert run.single_root is True
        assert run.paths["train"] == "train.conll"

    def test_overrides_beat_file(self, tmp_path):
        path = write_config(tmp_path, "train.hidden_size = 32\nseed = 3\n")
        run = ConfigLoader(path).load("check", {"train.hidden_size": 8, "seed": "5"})
        assert run.train.hidden_size == 8
        assert run.seed == 5

    def test_unknown_keys_rejected(self, tmp_path):
        path = write_config(tmp_path, "train.hiden_size = 32\ntrain.dropout = 0.5\n")
        with pytest.raises(ConfigError, match="train.dropout, train.hiden_size"):
            ConfigLoader(path).load("check")

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError):
            ConfigLoader().load("check", {"paths.nowhere": "x"})

    def test_missing_required_paths(self):
        with pytest.raises(ConfigError, match="paths.train, paths.model_out"):
            ConfigLoader().load("train")

    def test_invalid_value(self, tmp_path):
        path = write_config(tmp_path, "train.hidden_size = big\n")
        with pytest.raises(ConfigError, match="train.hidden_size"):
            ConfigLoader(path).load("check")

    def test_invalid_boolean(self, tmp_path):
        path = write_config(tmp_path, "train.use_pos = maybe\n")
        with pytest.raises(ConfigError, match="train.use_pos"):
            ConfigLoader(path).load("check")

    def test_string_boolean_override(self):
        run = ConfigLoader().load("check", {"train.feed_soft_head": "off", "decode.single_root": True})
        assert run.train.feed_soft_head is False
        assert run.single_root is True

    def test_environment_does_not_shadow_file(self, tmp_path, monkeypatch):
        monkeypatch.setenv("seed", "99")
        path = write_config(tmp_path, "seed = 4\n")
        assert ConfigLoader(path).load("check").seed == 4
        assert ConfigLoader().load("check").seed == 1

    def test_invalid_training_value(self, tmp_path):
        path = write_config(tmp_path, "train.hidden_size = 0\n")
        with pytest.raises(ConfigError):
            ConfigLoader(path).load("check")

    def test_bad_decode_mode(self, tmp_path):
        path = write_config(tmp_path, "decode.mode = beam\n")
        with pytest.raises(ConfigError):
            ConfigLoader(path).load("check")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigLoader(str(tmp_path / "absent.cfg"))

    def test_echo_round_trip(self, tmp_path):
        path = write_config(tmp_path, "train.hidden_size = 12\ntrain.directions = r2l\ntrain.feed_soft_head = off\n")
        run = ConfigLoader(path).load("check")
        rebuilt = train_config_from_echo(run.to_dict())
        assert rebuilt.hidden_size == 12
        assert rebuilt.directions == "r2l"
        assert rebuilt.feed_soft_head is False
        assert rebuilt.channels == ("auto",)

    @pytest.mark.parametrize("language, hidden_size, embedding_dim", [
        ("english", 368, 300),
        ("chinese", 114, 192),
    ])
    def test_language_preset_loads(self, language, hidden_size, embedding_dim):
        run = ConfigLoader(os.path.join(os.path.dirname(__file__), "..", "configs", f"{language}.cfg")).load("check")
        assert run.train.hidden_size == hidden_size
        assert run.train.embedding_dim == embedding_dim
        assert run.train.pretrained_init is True
        assert run.train.lr_grid()[:2] == [0.0002, 0.0004]
