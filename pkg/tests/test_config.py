"""Configuration parsing, validation, and derived-constant tests."""

import dataclasses
import math

import numpy as np
import pytest

from bubblewave.config import (
    ConfigError,
    PhysicalParams,
    SimulationConfig,
    apply_overrides,
    config_keys,
    config_snapshot,
    derive,
    format_probes,
    load_config,
    parse_probes,
    parse_quantity,
    require_valid,
    resolved_xi,
    validate,
)


# --------------------------------------------------------------------------
# quantity parsing


@pytest.mark.parametrize(
    "text,expected",
    [
        ("1.5", 1.5),
        ("2e-6", 2e-6),
        ("-3.25", -3.25),
        ("15MPa", 1.5e7),
        ("0.5MHz", 5.0e5),
        ("20us", 2.0e-5),
        ("20 us", 2.0e-5),
        ("1.2ms", 1.2e-3),
        ("3mm", 3.0e-3),
        ("2um", 2.0e-6),
        ("15kHz", 1.5e4),
        ("100kPa", 1.0e5),
        ("1ns", 1.0e-9),
        ("1500 m", 1500.0),
    ],
)
def test_parse_quantity_values(text, expected):
    assert parse_quantity(text) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("text", ["12 furlongs", "fast", "", "1.2.3", "MPa"])
def test_parse_quantity_rejects_garbage(text):
    with pytest.raises(ConfigError):
        parse_quantity(text)


def test_parse_probes_1d_and_2d():
    assert parse_probes("0.5") == ((0.5,),)
    assert parse_probes("0.03,0.3;0.25,0.3") == ((0.03, 0.3), (0.25, 0.3))


def test_probes_round_trip():
    probes = ((0.03, 0.3), (0.25, 0.3))
    assert parse_probes(format_probes(probes)) == probes


# --------------------------------------------------------------------------
# derived constants (hand-computed from the default material values)


def test_derived_pressures():
    d = derive(PhysicalParams())
    # p_v - p_stat = 2330 - 1e5
    assert d.p_b == -97670.0
    # 2*0.0728/2e-6 - p_b = 72800 + 97670
    assert d.p_pgn_uncoated == 170470.0
    # sigma0 = 0 for the default shell: -p_b alone
    assert d.p_pgn_coated == 97670.0


def test_derived_resonance_frequency():
    d = derive(PhysicalParams())
    # sqrt(3*1.4*1e5 / (1000 * (2e-6)^2)) = sqrt(1.05e14)
    assert d.omega0 == pytest.approx(math.sqrt(1.05e14), rel=1e-15)
    assert d.omega0 / (2.0 * math.pi) == pytest.approx(1.6308528660e6, rel=1e-10)


def test_derived_volume_and_source_strength():
    d = derive(PhysicalParams())
    assert d.v0 == pytest.approx(4.0 / 3.0 * math.pi * 8e-18, rel=1e-15)
    assert d.eta == 1e17
    # (4/3)*pi*1500^2*1e17
    assert d.xi == pytest.approx(9.424777960769379e23, rel=1e-15)


def test_resolved_xi_override_and_default():
    cfg = SimulationConfig()
    assert resolved_xi(cfg) == pytest.approx(9.424777960769379e23, rel=1e-15)
    assert resolved_xi(dataclasses.replace(cfg, xi=5e20)) == 5e20
    assert resolved_xi(dataclasses.replace(cfg, xi=0.0)) == 0.0


# --------------------------------------------------------------------------
# overrides


def test_apply_overrides_routes_units():
    cfg = apply_overrides(SimulationConfig(), {"A": "15MPa", "f": "0.5MHz", "T": "20us"})
    assert cfg.A == 1.5e7
    assert cfg.f == 5e5
    assert cfg.T == pytest.approx(2e-5, rel=1e-15)


def test_apply_overrides_param_vs_run_keys():
    cfg = apply_overrides(SimulationConfig(), {"mu": "0.89e-3", "nx": "201"})
    assert cfg.params.mu == 0.89e-3
    assert cfg.nx == 201
    # untouched fields keep their defaults
    assert cfg.params.rho == 1000.0
    assert cfg.ny == SimulationConfig().ny


def test_apply_overrides_unknown_key():
    with pytest.raises(ConfigError, match="no_such_key"):
        apply_overrides(SimulationConfig(), {"no_such_key": "1"})


def test_apply_overrides_bad_value_names_key():
    with pytest.raises(ConfigError, match="'f'"):
        apply_overrides(SimulationConfig(), {"f": "not-a-number"})


def test_apply_overrides_int_rejects_fraction():
    with pytest.raises(ConfigError):
        apply_overrides(SimulationConfig(), {"nx": "100.5"})


def test_apply_overrides_bool_and_choice():
    cfg = apply_overrides(SimulationConfig(), {"damping": "fractional", "boundary": "dirichlet"})
    assert cfg.damping == "fractional"
    assert cfg.boundary == "dirichlet"


# --------------------------------------------------------------------------
# snapshot / load round trip


def test_snapshot_load_round_trip(tmp_path):
    base = apply_overrides(
        SimulationConfig(),
        {
            "model": "rp_radiation",
            "A": "0.15MPa",
            "f": "150kHz",
            "mu": "0.89e-3",
            "lambda": "1.9",
            "probes": "0.03,0.3;0.25,0.3",
            "dim": "2",
            "damping": "fractional",
            "alpha": "0.7",
            "xi": "5e20",
        },
    )
    path = tmp_path / "run.cfg"
    path.write_text(config_snapshot(base), encoding="utf-8")
    restored = load_config(str(path))
    assert restored == base


def test_load_config_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("rho = 1000\nwhatever = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=r"bad\.cfg:2"):
        load_config(str(path))


def test_load_config_rejects_malformed_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just some words\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="key = value"):
        load_config(str(path))


def test_load_config_comments_and_blanks(tmp_path):
    path = tmp_path / "ok.cfg"
    path.write_text("# comment\n\nf = 1MHz  # inline comment\n", encoding="utf-8")
    assert load_config(str(path)).f == 1e6


def test_config_keys_cover_snapshot():
    text = config_snapshot(SimulationConfig())
    keys = {line.split("=")[0].strip() for line in text.strip().splitlines()}
    assert keys == set(config_keys())


# --------------------------------------------------------------------------
# validation


def test_default_config_is_valid():
    assert validate(SimulationConfig()) == []


@pytest.mark.parametrize(
    "overrides,field",
    [
        ({"kappa": "0.5"}, "kappa"),
        ({"rho": "-1"}, "rho"),
        ({"T": "-1e-6"}, "T"),
        ({"nx": "2"}, "nx"),
        ({"cfl": "1.5"}, "cfl"),
        ({"alpha": "0"}, "alpha"),
        ({"dt_min": "1e-8", "dt_max": "1e-9"}, "dt_max"),
        ({"r_floor": "1"}, "r_floor"),
        ({"excite_lo": "0.9", "excite_hi": "0.1"}, "excite_lo"),
        ({"gamma_floor": "0"}, "gamma_floor"),
    ],
)
def test_validate_names_offending_field(overrides, field):
    cfg = apply_overrides(SimulationConfig(), overrides)
    problems = validate(cfg)
    assert problems, f"expected a violation for {overrides}"
    assert any(field in p for p in problems)
    assert all("violates" in p for p in problems)


def test_require_valid_passes_through():
    cfg = SimulationConfig()
    assert require_valid(cfg) is cfg


def test_require_valid_raises_with_all_problems():
    cfg = apply_overrides(SimulationConfig(), {"rho": "-1", "f": "-2"})
    with pytest.raises(ConfigError) as err:
        require_valid(cfg)
    assert "rho" in str(err.value) and "f" in str(err.value)


def test_validate_probe_arity():
    cfg = apply_overrides(SimulationConfig(), {"dim": "1", "probes": "0.1,0.2"})
    assert any("probes" in p for p in validate(cfg))
    cfg = apply_overrides(SimulationConfig(), {"dim": "2", "probes": "0.1"})
    assert any("probes" in p for p in validate(cfg))


def test_validate_random_positive_configs_stay_valid():
    # Random perturbations inside the documented ranges never trip validation.
    rng = np.random.default_rng(2024)
    for _ in range(50):
        overrides = {
            "rho": f"{rng.uniform(500, 2000):.6g}",
            "mu": f"{rng.uniform(0.0, 0.05):.6g}",
            "kappa": f"{rng.uniform(1.0, 1.67):.6g}",
            "R0": f"{rng.uniform(0.5e-6, 10e-6):.6g}",
            "f": f"{rng.uniform(1e4, 1e7):.6g}",
            "A": f"{rng.uniform(0.0, 2e7):.6g}",
            "cfl": f"{rng.uniform(0.05, 0.9):.6g}",
            "alpha": f"{rng.uniform(0.01, 1.0):.6g}",
            "lambda": f"{rng.uniform(0.5, 2.5):.6g}",
        }
        cfg = apply_overrides(SimulationConfig(), overrides)
        assert validate(cfg) == [], overrides


def test_validate_random_sign_flips_are_caught():
    # Flipping any strictly-positive scalar negative must produce a complaint
    # that names that field.
    fields = ["rho", "c", "p_stat", "R0", "rho0", "tau", "f", "T", "dt_min",
              "Lx", "Ly", "T_wave", "f_p", "newmark_tol"]
    rng = np.random.default_rng(7)
    for _ in range(30):
        field = fields[rng.integers(len(fields))]
        cfg = apply_overrides(SimulationConfig(), {field: f"{-rng.uniform(0.1, 5.0):.6g}"})
        problems = validate(cfg)
        assert any(field in p for p in problems), field
