"""
Tests pour l'interface en ligne de commande et les scénarios JSON
"""
import json
import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import pandas as pd
import pytest

from src.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    ScenarioError,
    build_fc,
    design_and_measure,
    ini_sweep_frame,
    load_scenario,
    main,
    parse_scenario,
    resolve_l_tbw,
    scenario_to_dict,
    sweep,
)

SCENARIOS = Path(__file__).parent.parent / "data" / "scenarios"

SMALL_NUMEROLOGY = {
    "fs_mhz": 7.68,
    "n_long": 128,
    "overlap": "1/2",
    "subbands": [{"n_prb": 1, "scs_khz": 15, "l_ofdm": 128, "l_cp": 9}],
}


def _write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _summary(path):
    items = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        key, value = line.split(" = ", 1)
        items[key] = value
    return items


def test_bundled_scenarios_parse():
    """Test 1: Tous les scénarios fournis se chargent et se relisent à l'identique"""
    print("\n🧪 Test 1: Scénarios fournis")
    paths = sorted(SCENARIOS.glob("*.json"))
    assert len(paths) >= 15, "❌ scénarios manquants"
    for path in paths:
        scenario = load_scenario(path)
        assert scenario.name == path.stem, f"❌ nom de {path.name}"
        assert parse_scenario(scenario_to_dict(scenario)) == scenario, f"❌ {path.name}"
    print(f"✅ {len(paths)} scénarios valides")


def test_unknown_key_names_field():
    """Test 2: Une clé inconnue est nommée dans l'erreur"""
    print("\n🧪 Test 2: Clé inconnue")
    numerology = dict(SMALL_NUMEROLOGY, subbands=[{"n_prb": 1, "bogus": 3}])
    with pytest.raises(ScenarioError) as e:
        parse_scenario({"name": "x", "numerology": numerology})
    assert e.value.field == "numerology.subbands[0].bogus", f"❌ {e.value.field}"
    with pytest.raises(ScenarioError) as e:
        parse_scenario({"name": "x", "numerology": SMALL_NUMEROLOGY, "windows": {"mode": "hann"}})
    assert e.value.field == "windows.mode", "❌ mode"
    with pytest.raises(ScenarioError) as e:
        parse_scenario({"name": "x"})
    assert e.value.field == "numerology", "❌ numérologie obligatoire"
    print("✅ Champs nommés")


def test_malformed_config_exit_code(tmp_path):
    """Test 3: Code de sortie 1 sur configuration invalide"""
    print("\n🧪 Test 3: Code de sortie 1")
    bad_key = _write(tmp_path, {"name": "x", "numerology": SMALL_NUMEROLOGY, "extra": 1})
    assert main(["run", str(bad_key), "--out-dir", str(tmp_path / "a")]) == EXIT_CONFIG, \
        "❌ clé inconnue"

    bad_lambda = _write(tmp_path, {"name": "x",
                                   "numerology": dict(SMALL_NUMEROLOGY, overlap="3/10")},
                        "lambda.json")
    assert main(["run", str(bad_lambda), "--out-dir", str(tmp_path / "b")]) == EXIT_CONFIG, \
        "❌ λ·L non entier"

    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["run", str(broken)]) == EXIT_CONFIG, "❌ JSON invalide"
    assert main(["run", str(tmp_path / "missing.json")]) == EXIT_CONFIG, "❌ fichier absent"
    print("✅ Configurations invalides refusées")


def test_center_must_be_on_fc_bin_grid():
    """Test 4: Centre hors de la grille des bins FC"""
    print("\n🧪 Test 4: Centre")
    numerology = dict(SMALL_NUMEROLOGY, subbands=[{"n_prb": 1, "center_khz": 45}])
    scenario = parse_scenario({"name": "x", "numerology": numerology})
    with pytest.raises(ScenarioError):
        build_fc(scenario.numerology)
    numerology = dict(SMALL_NUMEROLOGY, subbands=[{"n_prb": 1, "center_khz": 120}])
    fc = build_fc(parse_scenario({"name": "x", "numerology": numerology}).numerology)
    assert fc.subbands[0].center_bin == 2 and fc.subbands[0].l_cp == 9, "❌ dérivation"
    print("✅ Centre validé")


def test_l_tbw_clipped_to_room():
    """Test 5: L_TBW ramené à la place disponible"""
    print("\n🧪 Test 5: L_TBW")
    fc = build_fc(parse_scenario({"name": "x", "numerology": SMALL_NUMEROLOGY}).numerology)
    assert resolve_l_tbw(fc, [4]) == (4,), "❌ L_TBW conservé"
    assert resolve_l_tbw(fc, [40]) == (14,), "❌ L_TBW ramené"
    assert resolve_l_tbw(fc, []) == (0,), "❌ défaut"
    with pytest.raises(ScenarioError):
        resolve_l_tbw(fc, [1, 2, 3])
    print("✅ L_TBW OK")


def test_fft_counts_table(tmp_path):
    """Test 6: Table des coûts FFT via la CLI"""
    print("\n🧪 Test 6: counts fft")
    code = main(["counts", str(SCENARIOS / "table3_fftcounts.json"), "--out-dir", str(tmp_path)])
    assert code == EXIT_OK, "❌ code de sortie"
    frame = pd.read_csv(tmp_path / "opcounts.csv")
    assert len(frame) == 12, "❌ douze longueurs"
    assert frame.set_index("n").loc[2048, "real_mults"] == 16388, "❌ N=2048"
    print("✅ Table FFT écrite")


def test_complexity_table_default_out_dir(tmp_path, monkeypatch):
    """Test 7: Répertoire de sortie par variable d'environnement"""
    print("\n🧪 Test 7: FCOFDM_OUT_DIR")
    monkeypatch.setenv("FCOFDM_OUT_DIR", str(tmp_path))
    assert main(["counts", str(SCENARIOS / "table7_complexity.json")]) == EXIT_OK, "❌ code"
    frame = pd.read_csv(tmp_path / "table7_complexity" / "opcounts.csv")
    rows = frame[frame["scheme"] == "fc-generalized"]
    assert rows["real_mults"].tolist() == [35276, 32163, 32033], "❌ comptes FC"
    print("✅ Table de complexité écrite")


def test_transparency_run(tmp_path):
    """Test 8: Exécution OLS transparente"""
    print("\n🧪 Test 8: run transparence")
    out = tmp_path / "run"
    assert main(["run", str(SCENARIOS / "transparency_ols.json"), "--out-dir", str(out)]) == EXIT_OK
    for name in ("summary.txt", "subcarriers.csv", "windows.txt"):
        assert (out / name).exists(), f"❌ {name} absent"
    items = _summary(out / "summary.txt")
    # N = 144 sort des familles de FFT modélisées
    assert not (out / "opcounts.csv").exists(), "❌ comptes inattendus"
    assert float(items["subband0.mse_avg_db"]) <= -250.0, "❌ chaîne non transparente"
    assert "subband0.scr_left_db" not in items, "❌ aucun côté mesurable attendu"
    assert float(items["subband0.evm_margin_pct"]) == pytest.approx(17.5, abs=1e-3), "❌ marge EVM"
    print("✅ Transparence vérifiée")


def test_artifacts_deterministic(tmp_path):
    """Test 9: Deux exécutions à graine égale produisent des CSV identiques"""
    print("\n🧪 Test 9: Déterminisme des artefacts")
    path = str(SCENARIOS / "transparency_ols.json")
    for name in ("a", "b"):
        assert main(["run", path, "--seed", "7", "--out-dir", str(tmp_path / name)]) == EXIT_OK
    for name in ("subcarriers.csv", "windows.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), \
            f"❌ {name} diffère"
    print("✅ Artefacts identiques")


def test_windows_export_import(tmp_path):
    """Test 10: Export puis import d'un jeu de fenêtres"""
    print("\n🧪 Test 10: windows export/import")
    path = str(SCENARIOS / "transparency_ols.json")
    windows_file = tmp_path / "w.txt"
    assert main(["windows", "export", path, "--file", str(windows_file)]) == EXIT_OK, "❌ export"
    assert windows_file.exists(), "❌ fichier de fenêtres absent"
    assert main(["windows", "import", str(windows_file), path,
                 "--out-dir", str(tmp_path / "imported")]) == EXIT_OK, "❌ import"
    assert main(["run", path, "--out-dir", str(tmp_path / "direct")]) == EXIT_OK
    imported = (tmp_path / "imported" / "subcarriers.csv").read_bytes()
    direct = (tmp_path / "direct" / "subcarriers.csv").read_bytes()
    assert imported == direct, "❌ mesures différentes après import"
    print("✅ Import cohérent")


def test_prb_sweep(tmp_path):
    """Test 11: Balayage du nombre de PRB en OLS"""
    print("\n🧪 Test 11: Balayage PRB")
    scenario = parse_scenario({
        "name": "prb",
        "numerology": SMALL_NUMEROLOGY,
        "windows": {"mode": "ols", "l_tbw": [4]},
        "measurement": {"n_symbols": 30},
        "sweep": {"axis": "n_prb", "values": [1, 2]},
    })
    frame = sweep(scenario, tmp_path)
    assert frame["n_prb"].tolist() == [1, 2], "❌ points"
    assert (tmp_path / "sweep.csv").exists(), "❌ sweep.csv absent"
    assert (tmp_path / "point_001" / "summary.txt").exists(), "❌ répertoire de point"
    assert "subband0.scr_right_db" in frame.columns, "❌ SCR mesuré"
    print("✅ Balayage OK")


def test_empty_sweep_axis(tmp_path):
    """Test 12: Axe de balayage vide"""
    print("\n🧪 Test 12: Axe vide")
    data = {"name": "empty", "numerology": SMALL_NUMEROLOGY, "windows": {"mode": "ols"},
            "sweep": {"axis": "n_prb", "values": []}}
    with pytest.raises(ScenarioError) as e:
        sweep(parse_scenario(data), tmp_path)
    assert e.value.field == "sweep.values", "❌ champ"
    assert main(["sweep", str(_write(tmp_path, data)), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    print("✅ Axe vide refusé")


def test_infeasible_exit_code(tmp_path):
    """Test 13: Code de sortie 2 quand la contrainte est inatteignable"""
    print("\n🧪 Test 13: Code de sortie 2")
    data = json.loads((SCENARIOS / "example1_caseI.json").read_text(encoding="utf-8"))
    data["optimization"]["a_des_db"] = -200
    data["measurement"]["n_symbols"] = 30
    out = tmp_path / "out"
    code = main(["run", str(_write(tmp_path, data)), "--max-iters", "1", "--out-dir", str(out)])
    assert code == EXIT_INFEASIBLE, f"❌ code {code}"
    items = _summary(out / "summary.txt")
    assert items["feasible"] == "False", "❌ résumé"
    assert (out / "history.csv").exists(), "❌ historique absent"
    print("✅ Infaisabilité signalée")


EXAMPLE2_NUMEROLOGY = {
    "fs_mhz": 30.72,
    "n_long": 2048,
    "overlap": "1/2",
    "subbands": [{"n_prb": 4, "scs_khz": 30, "l_ofdm": 128, "l_cp": 9, "center_khz": 0}],
}


def test_fofdm_mse_anchor():
    """Test 14: MSE du f-OFDM de référence sur la numérologie à 30,72 MHz"""
    print("\n🧪 Test 14: Ancre MSE f-OFDM")
    scenario = parse_scenario({
        "name": "fofdm_anchor",
        "numerology": EXAMPLE2_NUMEROLOGY,
        "windows": {"mode": "f-ofdm"},
        "measurement": {"n_symbols": 56, "guard_khz": 180, "order": 4},
    })
    outcome = design_and_measure(scenario, build_fc(scenario.numerology))
    mse = outcome.items["subband0.mse_avg_db"]
    print(f"   MSE f-OFDM : {mse:.2f} dB")
    assert mse == pytest.approx(-37.0, abs=2.0), f"❌ MSE f-OFDM {mse:.2f} dB"
    print("✅ Ancre f-OFDM OK")


@pytest.mark.slow
def test_ini_ordering_over_guards():
    """Test 15: INI FC < f-OFDM < CP-OFDM à 90 kHz, décroissante avec la garde"""
    print("\n🧪 Test 15: Ordre des INI")
    frame = ini_sweep_frame(load_scenario(SCENARIOS / "example2_ini_guard_sweep.json"))
    cp_rx = frame[frame["rx"] == "cp-ofdm"]
    at_90 = cp_rx[cp_rx["ini_guard_khz"] == 90].set_index("tx")["ini_db"]
    print(f"   INI à 90 kHz : {at_90.to_dict()}")
    assert at_90["fc"] < at_90["f-ofdm"] < at_90["plain"], "❌ ordre FC < f-OFDM < CP-OFDM"
    for tx, rows in cp_rx.groupby("tx"):
        values = rows.sort_values("ini_guard_khz")["ini_db"].tolist()
        assert all(b <= a for a, b in zip(values, values[1:])), f"❌ INI croissante pour {tx}"
    print("✅ Ordre des INI vérifié")


@pytest.mark.slow
def test_generalized_beats_original_numerology():
    """Test 16: La numérologie généralisée améliore la MSE des numérologies d'origine"""
    print("\n🧪 Test 16: Numérologie généralisée vs origine")
    mse = {}
    for name in ("generalized_1024", "original_1024", "original_512"):
        scenario = load_scenario(SCENARIOS / f"example3_{name}.json")
        outcome = design_and_measure(scenario, build_fc(scenario.numerology))
        mse[name] = outcome.items["subband0.mse_avg_db"]
    print(f"   MSE : {mse}")
    assert mse["generalized_1024"] <= mse["original_1024"] - 3, "❌ gain >= 3 dB attendu"
    assert mse["generalized_1024"] <= mse["original_512"] - 5, "❌ gain >= 5 dB attendu"
    print("✅ Numérologie généralisée meilleure")


if __name__ == "__main__":
    test_bundled_scenarios_parse()
    test_unknown_key_names_field()
    test_center_must_be_on_fc_bin_grid()
    test_l_tbw_clipped_to_room()
    test_fofdm_mse_anchor()
