"""
Tests pour la chaîne CP-OFDM (modulation, démodulation, ZF, QAM)
"""
import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
import pytest

from src.numerology import SubbandConfig
from src.ofdm import (
    ComplexSignal,
    EqualizationError,
    SignalLengthError,
    active_bins,
    cp_ofdm_demod_decimated,
    cp_ofdm_demod_highrate,
    cp_ofdm_modulate,
    derotate,
    evm_limit_pct,
    qam_symbols,
    random_grid,
    zf_equalize,
)


SB = SubbandConfig(index=0, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9, n_symbols=3)


def test_qam_unit_power():
    """Test 1: Constellations QAM de puissance unitaire"""
    print("\n🧪 Test 1: Puissance QAM")
    rng = np.random.default_rng(1)
    for order in (4, 16, 64, 256):
        points = qam_symbols(order, 20000, rng)
        power = np.mean(np.abs(points) ** 2)
        assert abs(power - 1) < 0.05, f"❌ ordre {order}: puissance {power:.3f}"
    qpsk = qam_symbols(4, 100, rng)
    assert np.allclose(np.abs(qpsk), 1), "❌ QPSK hors cercle unité"
    with pytest.raises(ValueError):
        qam_symbols(8, 10, rng)
    print("✅ Puissance unitaire")


def test_random_grid_deterministic():
    """Test 2: Grille aléatoire reproductible"""
    print("\n🧪 Test 2: Graine")
    a = random_grid(SB, 16, seed=7)
    b = random_grid(SB, 16, seed=7)
    c = random_grid(SB, 16, seed=8)
    assert a.shape == (24, 3), f"❌ forme {a.shape}"
    assert np.array_equal(a, b), "❌ même graine, grilles différentes"
    assert not np.array_equal(a, c), "❌ graines différentes, grilles égales"
    print("✅ Reproductible")


def test_active_bins_centered():
    """Test 3: Bins actifs centrés sur le DC"""
    print("\n🧪 Test 3: Bins actifs")
    bins = active_bins(4, 16)
    assert bins.tolist() == [14, 15, 0, 1], f"❌ {bins.tolist()}"
    print("✅ Bins OK")


def test_modulate_demodulate_roundtrip():
    """Test 4: Modulation puis démodulation sans canal"""
    print("\n🧪 Test 4: Aller-retour OFDM")
    grid = random_grid(SB, 4, seed=3)
    signal = cp_ofdm_modulate(grid, SB.l_ofdm, SB.l_cp, rate_hz=1.92e6)
    assert len(signal) == SB.t_len, f"❌ longueur {len(signal)}"
    # IDFT unitaire : hors CP, l'énergie temporelle égale celle de la grille
    frames = signal.samples.reshape(SB.n_symbols, SB.symbol_length)[:, SB.l_cp:]
    assert np.isclose(np.sum(np.abs(frames) ** 2), np.sum(np.abs(grid) ** 2)), "❌ énergie"
    rx = cp_ofdm_demod_highrate(signal, SB.l_ofdm, SB.l_cp, SB)
    assert np.allclose(rx, grid), "❌ symboles non retrouvés"
    print("✅ Aller-retour exact")


def test_highrate_demod_with_offset():
    """Test 5: Démodulation haut débit d'une sous-bande décalée"""
    print("\n🧪 Test 5: Démodulation décalée")
    interp = 4
    grid = random_grid(SB, 4, seed=4)
    spectrum_len = interp * SB.l_ofdm
    center_bins = 40
    spectrum = np.zeros((spectrum_len, SB.n_symbols), dtype=complex)
    spectrum[np.mod(active_bins(SB.l_act, spectrum_len) + center_bins, spectrum_len), :] = grid
    symbols = np.fft.ifft(spectrum, axis=0) * np.sqrt(spectrum_len)
    n_cp = interp * SB.l_cp
    burst = np.concatenate([symbols[-n_cp:, :], symbols], axis=0).T.reshape(-1)
    rate = 7.68e6
    center_hz = center_bins * rate / spectrum_len
    rx = cp_ofdm_demod_highrate(ComplexSignal(burst, rate), spectrum_len, n_cp, SB, center_hz)
    assert np.allclose(rx, grid), "❌ dérotation incorrecte"
    print("✅ Sous-bande décalée retrouvée")


def test_decimated_demod():
    """Test 6: Démodulation décimée d'un signal suréchantillonné idéal"""
    print("\n🧪 Test 6: Démodulation décimée")
    interp = 2
    grid = random_grid(SB, 4, seed=5)
    n = interp * SB.l_ofdm
    spectrum = np.zeros((n, SB.n_symbols), dtype=complex)
    spectrum[active_bins(SB.l_act, n), :] = grid
    symbols = np.fft.ifft(spectrum, axis=0) * np.sqrt(n)
    burst = np.concatenate([symbols[-interp * SB.l_cp:, :], symbols], axis=0).T.reshape(-1)
    rx = cp_ofdm_demod_decimated(ComplexSignal(burst, 3.84e6), SB.l_ofdm, SB.l_cp, interp, SB)
    assert np.allclose(rx, grid), "❌ décimation incorrecte"
    with pytest.raises(SignalLengthError):
        cp_ofdm_demod_decimated(ComplexSignal(burst[:-1], 3.84e6), SB.l_ofdm, SB.l_cp, interp, SB)
    print("✅ Décimation OK")


def test_zf_equalize():
    """Test 7: Égalisation ZF d'un gain complexe par sous-porteuse"""
    print("\n🧪 Test 7: ZF")
    tx = random_grid(SB, 16, seed=6)
    gains = np.exp(1j * np.linspace(0, 2, SB.l_act)) * np.linspace(0.5, 2, SB.l_act)
    rx = tx * gains[:, None]
    assert np.allclose(zf_equalize(rx, tx), tx), "❌ ZF inexacte"
    silent = tx.copy()
    silent[3, :] = 0
    with pytest.raises(EqualizationError):
        zf_equalize(rx, silent)
    print("✅ ZF OK")


def test_derotate_exact_phase():
    """Test 8: Dérotation à phase exacte"""
    print("\n🧪 Test 8: Dérotation")
    n = np.arange(1000)
    tone = np.exp(2j * np.pi * 0.125 * n)
    flat = derotate(tone, 1, 8)
    assert np.allclose(flat, 1), "❌ ton non ramené au DC"
    assert derotate(tone, 0, 8) is tone, "❌ décalage nul devrait être l'identité"
    print("✅ Dérotation OK")


def test_signal_validation():
    """Test 9: Signaux invalides"""
    print("\n🧪 Test 9: Validation")
    with pytest.raises(ValueError):
        ComplexSignal(np.array([1.0, np.nan]))
    with pytest.raises(SignalLengthError):
        cp_ofdm_modulate(np.ones((24, 1)), 16, 4)
    assert evm_limit_pct(4) == 17.5 and evm_limit_pct(256) == 3.5, "❌ limites EVM"
    assert evm_limit_pct(8) is None, "❌ ordre inconnu"
    print("✅ Validation OK")

def test_timing_advance_in_cp():
    """Test 10: Fenêtre DFT avancée dans le CP (phase compensée, pré-écho absorbé)"""
    print("\n🧪 Test 10: Avance de la fenêtre DFT")
    grid = random_grid(SB, 4, seed=11)
    signal = cp_ofdm_modulate(grid, SB.l_ofdm, SB.l_cp, rate_hz=1.92e6)
    for advance in range(SB.l_cp + 1):
        rx = cp_ofdm_demod_highrate(signal, SB.l_ofdm, SB.l_cp, SB, timing_advance=advance)
        assert np.allclose(rx, grid), f"❌ avance {advance}"
    with pytest.raises(SignalLengthError):
        cp_ofdm_demod_highrate(signal, SB.l_ofdm, SB.l_cp, SB, timing_advance=SB.l_cp + 1)

    # pré-écho d'un échantillon : ISI sans avance, gain par sous-porteuse avec
    echo = signal.samples + 0.5 * np.concatenate([signal.samples[1:], [0]])
    echoed = ComplexSignal(echo, signal.rate_hz)
    late = zf_equalize(cp_ofdm_demod_highrate(echoed, SB.l_ofdm, SB.l_cp, SB), grid)
    early = zf_equalize(cp_ofdm_demod_highrate(echoed, SB.l_ofdm, SB.l_cp, SB,
                                               timing_advance=SB.l_cp // 2), grid)
    assert np.allclose(early, grid), "❌ pré-écho non absorbé"
    assert not np.allclose(late, grid), "❌ ISI attendue sans avance"

    interp = 2
    up = np.zeros((interp * SB.l_ofdm, SB.n_symbols), dtype=complex)
    up[active_bins(SB.l_act, interp * SB.l_ofdm), :] = grid
    symbols = np.fft.ifft(up, axis=0) * np.sqrt(interp * SB.l_ofdm)
    burst = np.concatenate([symbols[-interp * SB.l_cp:, :], symbols], axis=0).T.reshape(-1)
    rx = cp_ofdm_demod_decimated(ComplexSignal(burst, 3.84e6), SB.l_ofdm, SB.l_cp, interp, SB,
                                 timing_advance=4)
    assert np.allclose(rx, grid), "❌ avance après décimation"
    print("✅ Avance compensée")



if __name__ == "__main__":
    test_qam_unit_power()
    test_random_grid_deterministic()
    test_active_bins_centered()
    test_modulate_demodulate_roundtrip()
    test_highrate_demod_with_offset()
    test_decimated_demod()
    test_zf_equalize()
    test_derotate_exact_phase()
    test_signal_validation()
    test_timing_advance_in_cp()
