import pytest

from aesanet.run_config import RunConfig, load_run_config, parse_config_lines
from aesanet.utils.errors import ConfigError


def test_parse_lines_with_comments():
    text = "# header\nalpha = 0.3\n\nmax_epochs=7  # inline\n"
    assert parse_config_lines(text) == {"alpha": "0.3", "max_epochs": "7"}


@pytest.mark.parametrize("text, line", [
    ("alpha 0.3\n", 1),
    ("alpha = 1\n = 2\n", 2),
    ("alpha = 1\nmargin = 2\nalpha = 3\n", 3),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config_lines(text)
    assert info.value.line == line


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("alpha = 0.2\nlstm_layers = 3\n")
    with pytest.raises(ConfigError, match="lstm_layers"):
        load_run_config(path)


def test_invalid_value_rejected(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("epsilon = 1.5\n")
    with pytest.raises(ConfigError, match="epsilon"):
        load_run_config(path)


def test_defaults_and_overrides(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("alpha = 0\nmanifest = a.csv\n")
    config = load_run_config(path, {"manifest": "b.csv", "features_dir": None})
    assert config.alpha == 0.0
    assert str(config.manifest) == "b.csv"
    assert config.features_dir is None
    assert config.patience == 10 and config.buffer_capacity == 256

    train = config.to_train_config(seed=9)
    assert train.seed == 9 and train.alpha == 0.0
    model = config.to_model_config(input_dim=768, num_layers=13)
    assert (model.input_dim, model.num_layers, model.shared_dim) == (768, 13, 128)


def test_no_file_uses_defaults():
    assert load_run_config(None) == RunConfig()
