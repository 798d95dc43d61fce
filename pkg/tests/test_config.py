import pytest

from opencavity import config
from opencavity.config import ConfigError


def test_defaults_cover_schema():
    cfg = config.load(env={})
    assert cfg.get("geometry", "n1") == 1.25
    assert [k for k, _ in cfg.echo()][0] == "geometry.n1"
    assert len(cfg.echo()) == sum(len(v) for v in config.SCHEMA.values())


def test_ini_text_parsed_case_sensitively():
    cfg = config.load(text="[geometry]\nN = 7\nn1 = 2.0  # high index\n[atom]\nd = 0.5,-0.25\nx_A = antinode\n",
                      env={})
    assert cfg.get("geometry", "N") == 7
    assert cfg.get("geometry", "n1") == 2.0
    assert cfg.get("atom", "d") == complex(0.5, -0.25)
    assert cfg.get("atom", "x_A") == "antinode"


@pytest.mark.parametrize("text", [
    "[geometry]\nN = 2.5\n",
    "[geometry]\nbogus = 1\n",
    "[nowhere]\nx = 1\n",
    "[fit]\nselect = best\n",
    "[dynamics]\ncounter_rotating = perhaps\n",
    "no section header\n",
])
def test_bad_config_rejected(text):
    with pytest.raises(ConfigError):
        config.load(text=text, env={})


def test_env_overrides_file():
    cfg = config.load(text="[geometry]\nN = 7\n", env={"CAVITY_GEOMETRY_N": "3", "UNRELATED": "x"})
    assert cfg.get("geometry", "N") == 3
    assert cfg.sources[-1] == "env:CAVITY_GEOMETRY_N"


def test_env_names_are_case_insensitive():
    cfg = config.load(env={"cavity_scan_omega_min": "0.7"})
    assert cfg.get("scan", "omega_min") == 0.7


def test_scan_values():
    cfg = config.load(text="[scan]\nell_c_min = 0.5\nell_c_max = 1.0\nell_c_steps = 6\nN_values = 2 3\n", env={})
    assert cfg.ell_c_scan_values() == pytest.approx([0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    assert cfg.N_scan_values() == [2, 3]
    cfg = config.load(text="[scan]\nell_c_min = 0.5\n", env={})
    with pytest.raises(ConfigError):
        cfg.ell_c_scan_values()


def test_invalid_geometry_is_config_error():
    cfg = config.load(text="[geometry]\nell_c = -1\n", env={})
    with pytest.raises(ConfigError):
        config.geometry_from(cfg)
