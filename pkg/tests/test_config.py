import pytest

from hbfsm.config import PRESETS, ConfigError, ExperimentConfig, load_study, parse_study, preset_path

BASIC = """
kind = "ber"
seed = 3
[link]
n_a = 4
[sweep]
snr_db = [0, 10]
[[curves]]
label = "a"
"""


def test_presets_validate():
    for name in PRESETS:
        study = load_study(preset_path(name))
        assert study.curves
    fig3 = load_study(preset_path("fig3"))
    c = fig3.curves[0]
    assert (c.k, c.n_a, c.n_t, c.n_r, c.order) == (2, 4, 8, 1, 4)
    assert [x.bits for x in fig3.curves] == [None, 6, 9]
    fig4 = load_study(preset_path("fig4"))
    assert len({c.bits_per_use for c in fig4.curves}) == 1
    with pytest.raises(ConfigError):
        preset_path("fig9")


def test_defaults_and_overrides():
    s = parse_study(BASIC, {"seed": 7, "snr_db": [1, 2, 3]})
    assert s.seed == 7 and s.curves[0].seed == 7
    assert s.curves[0].snr_db == (1.0, 2.0, 3.0)
    assert s.curves[0].trials == 200_000 and s.curves[0].frame_length == 100
    with pytest.raises(ConfigError) as e:
        parse_study(BASIC, {"n_a": 2})
    assert e.value.key == "n_a"


@pytest.mark.parametrize("text,key", [
    (BASIC.replace("n_a = 4", "n_a = 3"), "link.n_a"),
    (BASIC.replace("n_a = 4", "n_a = 4\nfoo = 1"), "link.foo"),
    (BASIC + "bits = 4\nbogus = 1\n", "curves[0].bogus"),
    (BASIC.replace('kind = "ber"', 'kind = "ber"\nextra = 1'), "extra"),
    (BASIC.replace("[0, 10]", "[10, 0]"), "sweep.snr_db"),
    (BASIC.replace("[0, 10]", '"x"'), "sweep.snr_db"),
    (BASIC.replace('kind = "ber"', 'kind = "nope"'), "kind"),
    (BASIC.replace("n_a = 4", "n_a = 4.5"), "link.n_a"),
    (BASIC + 'codebook = "beamsteering"\n', "curves[0].bits"),
    ("kind = [", "<file>"),
])
def test_validation_names_key(text, key):
    with pytest.raises(ConfigError) as e:
        parse_study(text)
    assert e.value.key == key
    assert key in str(e.value)


def test_compare_requires_equal_bits():
    text = """
kind = "compare"
[[curves]]
label = "ref"
scheme = "classical_sm"
n_t = 8
[[curves]]
label = "hbf"
n_a = 4
"""
    with pytest.raises(ConfigError) as e:
        parse_study(text)
    assert "bits/use" in str(e.value)


def test_rate_and_quantization_sections():
    s = parse_study('kind = "rate"\n[rate]\nrealizations = 3\n')
    assert s.rate == {"realizations": 3, "user": 0, "grid": 256, "mc_samples": 100000}
    with pytest.raises(ConfigError):
        parse_study('kind = "rate"\n[rate]\ngrid = 10\n')
    q = parse_study('kind = "quantization"\n[quantization]\nbits = [2, 3]\n')
    assert q.quantization["bits"] == [2, 3]
    with pytest.raises(ConfigError):
        parse_study('kind = "quantization"\n[quantization]\nbits = [0]\n')


def test_trials_at_and_digest():
    c = ExperimentConfig(snr_db=(0, 1, 2, 3), trials=10, trials_high_snr=99)
    assert [c.trials_at(i) for i in range(4)] == [10, 10, 99, 99]
    assert c.digest() == c.replace().digest() != c.replace(seed=2).digest()
    with pytest.raises(ConfigError):
        ExperimentConfig(k=0)
