import json

import numpy as np
import pytest

from ionjc.cli import main
from ionjc.config import (
    AMU_SI,
    HBAR_SI,
    ConfigError,
    parse_config,
    serialize_config,
)
from ionjc.experiments import Table, run_evolve, run_modes, run_resonance, run_sweep_rabi, write_table
from ionjc.fock import NumericalValidationError


def minimal_modes_config(**over):
    cfg = {
        "experiment": "modes",
        "chain": {"N": 2},
        "drives": [{"ion": 1, "Omega_R": 0.25, "delta": 0.5, "k_L": 0.1},
                   {"ion": 2, "Omega_R": 0.25, "delta": 0.5, "k_L": 0.1}],
    }
    cfg.update(over)
    return cfg


def evolve_config(**evolve_over):
    evolve = {
        "t_stop": 5.0,
        "steps": 6,
        "method": "rwa_jc",
        "resonant_drive": 1,
        "resonant_mode": 1,
        "initial_state": {"fock": [1], "spins": ["g"]},
    }
    evolve.update(evolve_over)
    return {
        "experiment": "evolve",
        "chain": {"N": 1},
        "hilbert": {"n_max": 24, "guard": 6},
        "drives": [{"ion": 1, "Omega_R": 0.25, "delta": 0.8660254037844386, "k_L": 0.1}],
        "evolve": evolve,
    }


def test_parse_defaults_single_ion():
    cfg = parse_config({
        "experiment": "modes",
        "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.05}],
    })
    assert cfg.model.config.n_max == 40 and cfg.model.config.guard == 10
    assert cfg.model.chain.mu == 0.5 and cfg.model.chain.nu1 == 1.0
    assert cfg.model.drives[0].detuning == pytest.approx(1.0)
    assert cfg.out_format == "csv" and cfg.out_path is None


def test_parse_defaults_two_ion():
    cfg = parse_config(minimal_modes_config())
    assert cfg.model.config.n_max == 12 and cfg.model.config.guard == 4


def test_roundtrip_identity():
    raw = {
        "experiment": "sweep-rabi",
        "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.05}],
        "sweep": {"points": 5, "start": 0.01, "stop": 2.0},
    }
    cfg = parse_config(raw)
    text = serialize_config(cfg)
    again = parse_config(json.loads(text))
    assert again.normalized == cfg.normalized
    assert serialize_config(again) == text


def test_parse_errors_are_anchored(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text('{\n  "experiment": "modes",\n  oops\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert ":3:" in str(err.value)  # line number of the syntax error

    with pytest.raises(ConfigError, match=r"\$\.experiment"):
        parse_config({"experiment": "bogus", "chain": {"N": 1}, "drives": []})
    with pytest.raises(ConfigError, match="N exceeds supported range"):
        parse_config(minimal_modes_config(chain={"N": 11}))
    with pytest.raises(ConfigError, match="delta or omega_L"):
        parse_config({
            "experiment": "modes", "chain": {"N": 1},
            "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "omega_L": 0.5, "k_L": 0.1}],
        })
    with pytest.raises(ConfigError, match=r"\$\.drives\[0\]"):
        parse_config({
            "experiment": "modes", "chain": {"N": 1},
            "drives": [{"ion": 1, "Omega_R": -0.1, "delta": 1.0, "k_L": 0.1}],
        })
    with pytest.raises(ConfigError, match="grid"):
        parse_config({
            "experiment": "sweep-rabi", "chain": {"N": 1},
            "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.1}],
            "sweep": {"grid": [0.5]},
        })
    with pytest.raises(ConfigError, match="points"):
        parse_config({
            "experiment": "sweep-rabi", "chain": {"N": 1},
            "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.1}],
            "sweep": {"points": 1},
        })


def test_si_units_conversion():
    # 40 amu, nu1 = 2 pi MHz, 729 nm beam: eta = k sqrt(hbar / (2 m nu1)) ~ 0.097
    nu1 = 2 * np.pi * 1.0e6
    k_l = 2 * np.pi / 729e-9
    cfg = parse_config({
        "experiment": "modes",
        "units": "si",
        "chain": {"N": 1, "mu": 40.0, "nu1": nu1},
        "drives": [{"ion": 1, "Omega_R": 0.1 * nu1, "delta": 1.0 * nu1, "k_L": k_l}],
    })
    eta = cfg.model.eta_matrix()[0, 0]
    expected = k_l * np.sqrt(HBAR_SI / (2.0 * 40.0 * AMU_SI * nu1))
    assert eta == pytest.approx(expected, rel=1e-12)
    assert cfg.model.drives[0].Omega_R == pytest.approx(0.1)
    assert cfg.model.drives[0].detuning == pytest.approx(1.0)


def test_modes_table_values():
    table = run_modes(parse_config(minimal_modes_config()))
    assert table.columns[:2] == ["mode", "nu_over_nu1"]
    assert [row[0] for row in table.rows] == [1, 2]
    assert table.rows[0][1] == pytest.approx(1.0)
    assert table.rows[1][1] == pytest.approx(np.sqrt(3.0))
    # eta columns: prefactor 0.1 over the COM mode gives 0.1 / sqrt(2)
    assert abs(table.rows[0][4]) == pytest.approx(0.1 / np.sqrt(2.0))


def test_single_ion_modes_table():
    table = run_modes(parse_config({
        "experiment": "modes", "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.1}],
    }))
    assert len(table.rows) == 1
    assert table.rows[0][2] == pytest.approx(1.0)  # M = [[1]]


def test_resonance_table_values():
    cfg = parse_config({
        "experiment": "resonance", "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.25, "delta": 0.5, "k_L": 0.1}],
    })
    table = run_resonance(cfg)
    row = table.rows[0]
    assert row[5] == pytest.approx(np.sqrt(0.75))

    unreachable = parse_config({
        "experiment": "resonance", "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.6, "delta": 0.5, "k_L": 0.1}],
    })
    assert run_resonance(unreachable).rows[0][5] == "unreachable"

    weak = parse_config({
        "experiment": "resonance", "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 1e-8, "delta": 0.5, "k_L": 0.1}],
    })
    assert run_resonance(weak).rows[0][5] == pytest.approx(1.0, abs=1e-12)


def sweep_config(points=7, start=0.01, stop=10.0):
    return {
        "experiment": "sweep-rabi",
        "chain": {"N": 1},
        "drives": [{"ion": 1, "Omega_R": 0.1, "delta": 1.0, "k_L": 0.05}],
        "sweep": {"points": points, "start": start, "stop": stop},
    }


def test_sweep_rabi_weak_field_row():
    # at Omega = 1e-2 both approximations are comparably accurate
    cfg = parse_config(sweep_config(points=2, start=0.01, stop=0.02))
    table = run_sweep_rabi(cfg)
    row = dict(zip(table.columns, table.rows[0]))
    assert row["reachable"] is True
    assert row["infidelity_balanced_rwa"] <= 0.05
    assert row["infidelity_standard_rwa"] <= 0.05
    ratio = row["infidelity_standard_rwa"] / row["infidelity_balanced_rwa"]
    assert 0.1 <= ratio <= 10.0


def test_sweep_rabi_strong_field_ordering_and_flags():
    cfg = parse_config(sweep_config(points=3, start=1.8, stop=2.6))
    table = run_sweep_rabi(cfg, threads=2)
    for row in map(lambda r: dict(zip(table.columns, r)), table.rows):
        assert row["reachable"] is False  # 2 Omega > nu everywhere here
        assert row["delta"] == 0.0
        assert row["infidelity_standard_rwa"] > row["infidelity_balanced_rwa"]


def test_sweep_threading_matches_serial():
    cfg = parse_config(sweep_config(points=5, start=0.05, stop=0.4))
    serial = run_sweep_rabi(cfg, threads=1)
    threaded = run_sweep_rabi(cfg, threads=4)
    assert serial.rows == threaded.rows


def test_evolve_stationary_ground_state():
    cfg = parse_config(evolve_config(initial_state={"fock": [0], "spins": ["g"]}))
    table = run_evolve(cfg)
    cols = table.columns
    assert cols == ["t", "pop_e_ion1", "nbar_mode1", "overlap_initial"]
    for row in table.rows:
        assert row[1] == pytest.approx(0.0, abs=1e-12)
        assert row[2] == pytest.approx(0.0, abs=1e-12)
        assert row[3] == pytest.approx(1.0, abs=1e-12)


def test_evolve_single_quantum_oscillation():
    cfg = parse_config(evolve_config())
    table = run_evolve(cfg)
    model = cfg.model
    from ionjc.propagators import jc_coupling

    g = jc_coupling(model, 1, 1)
    for row in table.rows:
        t, pop_e = row[0], row[1]
        assert pop_e == pytest.approx(np.sin(g * t) ** 2, abs=1e-9)


def test_evolve_coherent_state_bounded_populations():
    cfg = parse_config(evolve_config(
        method="pipeline_exact",
        initial_state={"coherent": [2.0], "spins": ["g"]},
    ))
    table = run_evolve(cfg)
    for row in table.rows:
        assert -1e-12 <= row[1] <= 1.0 + 1e-12


def test_evolve_rejects_leaky_coherent_state():
    cfg_dict = evolve_config(initial_state={"coherent": [3.5], "spins": ["g"]})
    cfg = parse_config(cfg_dict)
    with pytest.raises(ConfigError, match="guard"):
        run_evolve(cfg)


def test_write_table_formats(tmp_path):
    table = Table(columns=["a", "b"], rows=[(1, 0.5), (2, None)], comments=["note"])
    csv_path = tmp_path / "t.csv"
    with open(csv_path, "w") as fh:
        write_table(table, fh, "csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# generated:")
    assert lines[1] == "# note"
    assert lines[2] == "a,b"
    assert lines[3] == "1,0.5"
    assert lines[4] == "2,"
    with open(tmp_path / "t.json", "w") as fh:
        write_table(table, fh, "json")
    doc = json.loads((tmp_path / "t.json").read_text())
    assert doc["columns"] == ["a", "b"]
    assert doc["rows"][1] == [2, None]


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_cli_modes_roundtrip(tmp_path, capsys):
    path = write_config(tmp_path, minimal_modes_config())
    out = tmp_path / "modes.csv"
    assert main(["modes", "--config", path, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# generated:")
    header = lines[2].split(",")
    assert header[:2] == ["mode", "nu_over_nu1"]
    assert float(lines[4].split(",")[1]) == pytest.approx(np.sqrt(3.0))


def test_cli_stdout_and_json(tmp_path, capsys):
    path = write_config(tmp_path, minimal_modes_config())
    assert main(["modes", "--config", path, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][0] == "mode"


def test_cli_exit_code_config_error(tmp_path, capsys):
    path = write_config(tmp_path, minimal_modes_config(chain={"N": 11}))
    assert main(["modes", "--config", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_exit_code_experiment_mismatch(tmp_path, capsys):
    path = write_config(tmp_path, minimal_modes_config())
    assert main(["resonance", "--config", path]) == 2


def test_cli_exit_code_numerical_failure(tmp_path, capsys, monkeypatch):
    def boom(cfg, threads=1):
        raise NumericalValidationError("hermiticity check failed")

    monkeypatch.setattr("ionjc.cli.run_experiment", boom)
    path = write_config(tmp_path, minimal_modes_config())
    assert main(["modes", "--config", path]) == 3
    assert "numerical validation" in capsys.readouterr().err


def test_cli_thread_env_override(tmp_path, monkeypatch):
    path = write_config(tmp_path, sweep_config(points=2, start=0.05, stop=0.1))
    monkeypatch.setenv("IONJC_THREADS", "2")
    out = tmp_path / "sweep.csv"
    assert main(["sweep-rabi", "--config", path, "--out", str(out)]) == 0
    monkeypatch.setenv("IONJC_THREADS", "zero")
    assert main(["sweep-rabi", "--config", path]) == 2


def strip_timestamp(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


def test_cli_byte_determinism(tmp_path):
    path = write_config(tmp_path, sweep_config(points=4, start=0.05, stop=0.8))
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep-rabi", "--config", path, "--out", str(out1)]) == 0
    assert main(["sweep-rabi", "--config", path, "--out", str(out2)]) == 0
    assert strip_timestamp(out1.read_text()) == strip_timestamp(out2.read_text())
    assert out1.read_text() != ""
