"""
Tests pour la numérologie FC-F-OFDM
"""
import sys
from fractions import Fraction
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import pytest

from src.numerology import (
    ConfigurationError,
    SubbandConfig,
    derive_fc_params,
    derive_ofdm_ifft_length,
    describe,
    frequency_to_bin,
    nr_numerology,
    reference_allocations,
    to_fraction,
    validate_mixed_numerology,
)


def _example1(overlap="1/2", n_symbols=1):
    sb = SubbandConfig(index=0, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9, n_symbols=n_symbols)
    return derive_fc_params([sb], 128, overlap, 7.68e6)


def test_ofdm_ifft_length():
    """Test 1: Longueur minimale de l'IFFT OFDM"""
    print("\n🧪 Test 1: Longueur de l'IFFT OFDM")
    assert derive_ofdm_ifft_length(1) == 128, "❌ 1 PRB → 128"
    assert derive_ofdm_ifft_length(10) == 128, "❌ 10 PRB → 128"
    assert derive_ofdm_ifft_length(11) == 256, "❌ 11 PRB → 256"
    assert derive_ofdm_ifft_length(25) == 512, "❌ 25 PRB → 512"
    assert derive_ofdm_ifft_length(106) == 2048, "❌ 106 PRB → 2048"
    with pytest.raises(ConfigurationError):
        derive_ofdm_ifft_length(0)
    print("✅ Longueurs OK")


def test_to_fraction_exact():
    """Test 2: Conversion exacte des fréquences"""
    print("\n🧪 Test 2: Conversion exacte")
    assert to_fraction(30.72e6) == Fraction(30720000), "❌ 30.72 MHz inexact"
    assert to_fraction(7.68e6) == Fraction(7680000), "❌ 7.68 MHz inexact"
    assert to_fraction("1/4") == Fraction(1, 4), "❌ λ=1/4"
    print("✅ Conversions exactes")


def test_example1_geometry():
    """Test 3: Géométrie de l'exemple à 2 PRB (L=32, N=128)"""
    print("\n🧪 Test 3: Géométrie L=32, N=128")
    fc = _example1()
    assert fc.l_short == (32,), f"❌ L={fc.l_short}"
    assert fc.interp == (4,), f"❌ I={fc.interp}"
    assert fc.l_s == (16,) and fc.s_f == (16,), "❌ L_S / S_F"
    assert fc.n_s == 64 and fc.n_o == 64, "❌ N_S / N_O"
    assert fc.fc_bin_spacing_hz == Fraction(60000), "❌ f_BS = 4·f_SCS"
    assert fc.subband_rate_hz(0) == Fraction(1920000), "❌ f_s,m"
    assert fc.recomputed_scs_hz(0) == Fraction(15000), "❌ SCS recalculé"
    print(f"✅ {describe(fc)}")


def test_block_count_small_config():
    """Test 4: Nombre de blocs FC (L=32, N=64, λ=1/2, L_OFDM=32, L_CP=4)"""
    print("\n🧪 Test 4: Nombre de blocs R")
    sb = SubbandConfig(index=0, n_prb=1, scs_hz=15000, l_ofdm=32, l_cp=4, n_symbols=1)
    fc = derive_fc_params([sb], 64, Fraction(1, 2), 960000)
    assert fc.l_short == (32,), "❌ L"
    assert fc.r_blocks == (4,), f"❌ R={fc.r_blocks}, attendu 4"
    print("✅ R = 4")


def test_block_count_grows_with_symbols():
    """Test 5: R croît avec la longueur de la rafale"""
    print("\n🧪 Test 5: R(B)")
    r_values = [_example1(n_symbols=b).r_blocks[0] for b in (1, 7, 14)]
    assert r_values == sorted(r_values) and r_values[0] < r_values[-1], f"❌ {r_values}"
    fc = _example1(n_symbols=14)
    # la sortie couvre les échantillons utiles plus le recouvrement de tête
    assert fc.output_length() >= fc.n_o + fc.interp[0] * fc.t_len(0), "❌ sortie trop courte"
    print(f"✅ R = {r_values}")


def test_integrality_errors():
    """Test 6: Contraintes d'intégralité nommées"""
    print("\n🧪 Test 6: Erreurs de configuration")
    sb = SubbandConfig(index=0, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9)
    with pytest.raises(ConfigurationError) as e:
        derive_fc_params([sb], 128, Fraction(3, 10), 7.68e6)
    assert e.value.constraint == "lambda*L_m integer", f"❌ {e.value.constraint}"

    with pytest.raises(ConfigurationError) as e:
        derive_fc_params([sb], 128, Fraction(1, 2), 7.0e6)
    assert "integer" in e.value.constraint, "❌ L_m non entier non détecté"

    with pytest.raises(ConfigurationError):
        derive_fc_params([sb], 128, Fraction(1, 2), 7.68e6, l_short=[16])
    print("✅ Contraintes nommées")


def test_subband_invariants():
    """Test 7: Invariants d'une sous-bande"""
    print("\n🧪 Test 7: Invariants SubbandConfig")
    with pytest.raises(ConfigurationError):
        SubbandConfig(index=0, n_prb=11, scs_hz=15000, l_ofdm=128, l_cp=9)
    with pytest.raises(ConfigurationError):
        SubbandConfig(index=0, n_prb=1, scs_hz=15000, l_ofdm=128, l_cp=128)
    with pytest.raises(ConfigurationError):
        SubbandConfig(index=0, n_prb=1, scs_hz=15000, l_ofdm=127, l_cp=9)
    sb = SubbandConfig(index=0, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9, n_symbols=3)
    assert sb.l_act == 24 and sb.t_len == 3 * 137, "❌ L_ACT / T"
    print("✅ Invariants OK")


def test_table_iv_narrow():
    """Test 8: Paramétrisation étroite 15/30/60 kHz"""
    print("\n🧪 Test 8: Bloc étroit")
    [fc] = reference_allocations("narrow")
    assert fc.l_short == (16, 32, 64), f"❌ L={fc.l_short}"
    assert fc.interp == (16, 8, 4), f"❌ I={fc.interp}"
    assert fc.fc_bin_spacing_hz == Fraction(120000), "❌ f_BS"
    assert [fc.subband_rate_hz(m) for m in range(3)] == [Fraction(1920000), Fraction(3840000),
                                                         Fraction(7680000)], "❌ débits"
    diag = validate_mixed_numerology(fc)
    assert len(diag.messages) == 3, "❌ diagnostics"
    print("✅ Bloc étroit valide")


def test_table_iv_wide():
    """Test 9: Paramétrisation large 106/51/24 PRB"""
    print("\n🧪 Test 9: Bloc large")
    configs = reference_allocations("wide")
    assert len(configs) == 3, "❌ trois configurations"
    for fc, l_ofdm in zip(configs, (2048, 1024, 512)):
        assert fc.subbands[0].l_ofdm == l_ofdm, "❌ L_OFDM"
        assert fc.l_short == (2048,) and fc.interp == (1,), f"❌ L=N attendu, {fc.l_short}"
        assert fc.fs_hz == Fraction(30720000), "❌ f_s"
        validate_mixed_numerology(fc)
    print("✅ Bloc large valide")


def test_nr_numerology():
    """Test 10: Numérologie NR"""
    print("\n🧪 Test 10: NR η")
    assert nr_numerology(0) == (Fraction(15000), 2048, 144), "❌ η=0"
    assert nr_numerology(1) == (Fraction(30000), 1024, 72), "❌ η=1"
    assert nr_numerology(2, 7.68e6) == (Fraction(60000), 128, 9), "❌ η=2 à 7.68 MHz"
    print("✅ NR OK")


def test_overlap_detection():
    """Test 11: Sous-bandes superposées"""
    print("\n🧪 Test 11: Recouvrement")
    a = SubbandConfig(index=0, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9, center_bin=0)
    b = SubbandConfig(index=1, n_prb=2, scs_hz=15000, l_ofdm=128, l_cp=9, center_bin=0)
    fc = derive_fc_params([a, b], 128, Fraction(1, 2), 7.68e6)
    with pytest.raises(ConfigurationError) as e:
        validate_mixed_numerology(fc)
    assert e.value.constraint == "non-overlapping allocations", "❌ contrainte"

    other = derive_fc_params([a], 256, Fraction(1, 2), 15.36e6)
    with pytest.raises(ConfigurationError):
        validate_mixed_numerology([_example1(), other])
    print("✅ Recouvrements détectés")


def test_frequency_to_bin():
    """Test 12: Fréquence centrale → bin FC"""
    print("\n🧪 Test 12: frequency_to_bin")
    fc = _example1()
    assert frequency_to_bin(600000, fc) == (10, Fraction(0)), "❌ 600 kHz = 10 bins"
    c, residual = frequency_to_bin(-605000, fc)
    assert c == -10 and residual == Fraction(-5000), f"❌ {c}, {residual}"
    print("✅ Bins OK")


if __name__ == "__main__":
    test_ofdm_ifft_length()
    test_to_fraction_exact()
    test_example1_geometry()
    test_block_count_small_config()
    test_block_count_grows_with_symbols()
    test_integrality_errors()
    test_subband_invariants()
    test_table_iv_narrow()
    test_table_iv_wide()
    test_nr_numerology()
    test_overlap_detection()
    test_frequency_to_bin()
