"""
Modulation CP-OFDM (TX), démodulation transparente haut débit et décimée (RX),
égalisation ZF et génération de constellations QAM
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from src.constants import EVM_LIMITS_PCT
from src.numerology import SubbandConfig, to_fraction

logger = logging.getLogger(__name__)

# Grille de symboles : tableau complexe (L_ACT, B), une colonne par symbole OFDM
SymbolGrid = np.ndarray


class SignalLengthError(ValueError):
    """Longueur de signal incohérente avec la numérologie"""


class EqualizationError(ValueError):
    """Sous-porteuse sans énergie de référence pour l'égalisation ZF"""


@dataclass
class ComplexSignal:
    """
    Signal complexe en bande de base

    Args:
        samples: Échantillons complexes
        rate_hz: Fréquence d'échantillonnage (Hz)
    """
    samples: np.ndarray
    rate_hz: Fraction = Fraction(1)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.rate_hz = to_fraction(self.rate_hz)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("ComplexSignal: valeurs non finies")

    def __len__(self) -> int:
        return self.samples.size

    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)


# ==================== PLACEMENT DES SOUS-PORTEUSES ====================

def active_bins(l_act: int, n_fft: int) -> np.ndarray:
    """
    Indices DFT des sous-porteuses actives, centrées sur le DC

    Les bins occupent -L_ACT/2 … L_ACT/2-1 (pas de DC réservé).
    """
    offsets = np.arange(l_act) - l_act // 2
    return np.mod(offsets, n_fft)


def derotate(samples: np.ndarray, center_hz: Union[Fraction, float, int],
             rate_hz: Union[Fraction, float, int]) -> np.ndarray:
    """Ramène en bande de base un signal centré sur center_hz (phase exacte)"""
    ratio = to_fraction(center_hz) / to_fraction(rate_hz)
    if ratio == 0:
        return samples
    n = np.arange(samples.size, dtype=np.int64)
    # Phase réduite modulo 1 en arithmétique entière
    cycles = np.mod(ratio.numerator * n, ratio.denominator) / ratio.denominator
    return samples * np.exp(-2j * np.pi * cycles)


# ==================== TX ====================

def cp_ofdm_modulate(grid: SymbolGrid, l_ofdm: int, l_cp: int,
                     rate_hz: Union[Fraction, float, int] = 1) -> ComplexSignal:
    """
    Modulation CP-OFDM d'une grille de symboles

    Args:
        grid: Grille (L_ACT, B)
        l_ofdm: Longueur de l'IDFT
        l_cp: Longueur du préfixe cyclique
        rate_hz: Fréquence d'échantillonnage du signal produit

    Returns:
        Rafale de B·(L_OFDM+L_CP) échantillons
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if l_cp >= l_ofdm:
        raise SignalLengthError(f"l_cp={l_cp} >= l_ofdm={l_ofdm}")
    l_act, n_sym = grid.shape
    if l_act > l_ofdm:
        raise SignalLengthError(f"L_ACT={l_act} > L_OFDM={l_ofdm}")

    spectrum = np.zeros((l_ofdm, n_sym), dtype=complex)
    spectrum[active_bins(l_act, l_ofdm), :] = grid
    symbols = np.fft.ifft(spectrum, axis=0) * np.sqrt(l_ofdm)
    with_cp = np.concatenate([symbols[l_ofdm - l_cp:, :], symbols], axis=0)
    return ComplexSignal(with_cp.T.reshape(-1), rate_hz)


# ==================== RX ====================

def _demodulate(samples: np.ndarray, n_ofdm: int, n_cp: int, n_symbols: int,
                l_act: int, timing_advance: int = 0) -> SymbolGrid:
    expected = n_symbols * (n_ofdm + n_cp)
    if samples.size != expected:
        raise SignalLengthError(
            f"longueur {samples.size} != B·(N_OFDM+N_CP) = {expected}")
    if not 0 <= timing_advance <= n_cp:
        raise SignalLengthError(f"avance {timing_advance} hors de [0, {n_cp}]")
    start = n_cp - timing_advance
    frames = samples.reshape(n_symbols, n_ofdm + n_cp)[:, start:start + n_ofdm]
    bins = active_bins(l_act, n_ofdm)
    spectrum = np.fft.fft(frames, axis=1)[:, bins] / np.sqrt(n_ofdm)
    if timing_advance:
        # Rotation de phase de la fenêtre avancée dans le CP
        spectrum = spectrum * np.exp(2j * np.pi * bins * timing_advance / n_ofdm)
    return spectrum.T


def cp_ofdm_demod_highrate(signal: ComplexSignal, n_ofdm: int, n_cp: int,
                           subband: SubbandConfig,
                           center_hz: Union[Fraction, float, int] = 0,
                           timing_advance: int = 0) -> SymbolGrid:
    """
    Démodulation CP-OFDM au débit de sortie du banc FC

    Args:
        signal: Signal haut débit (sans zéro-padding)
        n_ofdm: Longueur DFT haut débit (I_m·L_OFDM)
        n_cp: Longueur CP haut débit (I_m·L_CP)
        subband: Sous-bande à extraire
        center_hz: Centre de la sous-bande (c_m·f_BS)
        timing_advance: Début de la fenêtre DFT avancé de ce nombre d'échantillons
            dans le CP (0 : CP retiré entièrement) ; la phase est compensée

    Returns:
        Grille (L_ACT, B)
    """
    samples = derotate(signal.samples, center_hz, signal.rate_hz)
    return _demodulate(samples, n_ofdm, n_cp, subband.n_symbols, subband.l_act,
                       timing_advance)


def cp_ofdm_demod_decimated(signal: ComplexSignal, l_ofdm: int, l_cp: int,
                            interp: int, subband: SubbandConfig,
                            center_hz: Union[Fraction, float, int] = 0,
                            timing_advance: int = 0) -> SymbolGrid:
    """
    Démodulation après décimation par I_m (prise d'un échantillon sur I_m, phase 0)

    Le gain √I_m conserve l'énergie du signal décimé. timing_advance est
    exprimé au débit décimé.
    """
    if int(interp) != interp or interp < 1:
        raise SignalLengthError(f"facteur de décimation non entier : {interp}")
    interp = int(interp)
    expected = subband.n_symbols * interp * (l_ofdm + l_cp)
    if signal.samples.size != expected:
        raise SignalLengthError(
            f"longueur {signal.samples.size} != B·I·(L_OFDM+L_CP) = {expected}")
    samples = derotate(signal.samples, center_hz, signal.rate_hz)
    decimated = samples[::interp] * np.sqrt(interp)
    return _demodulate(decimated, l_ofdm, l_cp, subband.n_symbols, subband.l_act,
                       timing_advance)


def zf_equalize(rx: SymbolGrid, tx_ref: SymbolGrid) -> SymbolGrid:
    """
    Égalisation ZF assistée par les données, un gain complexe par sous-porteuse

    g_ℓ = Σ_s rx·conj(tx) / Σ_s |tx|²
    """
    rx = np.asarray(rx, dtype=complex)
    tx_ref = np.asarray(tx_ref, dtype=complex)
    if rx.shape != tx_ref.shape:
        raise SignalLengthError(f"dimensions {rx.shape} != {tx_ref.shape}")
    ref_energy = np.sum(np.abs(tx_ref) ** 2, axis=1)
    if np.any(ref_energy == 0):
        raise EqualizationError(
            f"sous-porteuse(s) {np.flatnonzero(ref_energy == 0).tolist()} sans énergie")
    gains = np.sum(rx * np.conj(tx_ref), axis=1) / ref_energy
    if np.any(gains == 0):
        raise EqualizationError("gain ZF nul")
    return rx / gains[:, None]


# ==================== CONSTELLATIONS ====================

def _gray_to_binary(values: np.ndarray) -> np.ndarray:
    result = values.copy()
    shift = values >> 1
    while np.any(shift):
        result ^= shift
        shift >>= 1
    return result


def qam_symbols(order: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """
    Symboles QAM carrés à mapping de Gray, puissance moyenne unitaire

    Args:
        order: 4 (QPSK), 16, 64 ou 256
        count: Nombre de symboles
        rng: Générateur numpy
    """
    bits_per_axis = int(np.log2(order)) // 2
    if order not in EVM_LIMITS_PCT or 4 ** bits_per_axis != order:
        raise ValueError(f"ordre de modulation non supporté : {order}")
    levels = 1 << bits_per_axis
    labels = rng.integers(0, order, size=count)
    i_label = labels >> bits_per_axis
    q_label = labels & (levels - 1)
    amp_i = 2 * _gray_to_binary(i_label) - (levels - 1)
    amp_q = 2 * _gray_to_binary(q_label) - (levels - 1)
    norm = np.sqrt(2 * (order - 1) / 3)
    return (amp_i + 1j * amp_q) / norm


def random_grid(subband: SubbandConfig, order: int = 4, seed: int = 0) -> SymbolGrid:
    """Grille aléatoire (L_ACT, B) pour une sous-bande, graine fixée"""
    rng = np.random.default_rng(seed)
    data = qam_symbols(order, subband.l_act * subband.n_symbols, rng)
    return data.reshape(subband.n_symbols, subband.l_act).T


def evm_limit_pct(order: int) -> Optional[float]:
    """Limite EVM NR (%) pour un ordre de modulation"""
    return EVM_LIMITS_PCT.get(order)
