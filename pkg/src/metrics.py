"""
Métriques de qualité : filtre de mesure, rapport de confinement spectral (SCR),
MSE/EVM par sous-porteuse, MSE moyenne et de bord, interférence
inter-numérologie (INI), et émission CSV / résumé.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import signal as sps

from src.baselines import WolaConfig, wola_rx
from src.constants import (
    DB_CEILING,
    DB_FLOOR,
    MEASUREMENT_HALF_BANDWIDTH_HZ,
    MEASUREMENT_STOPBAND_DB,
    MEASUREMENT_TRANSITION_HZ,
    N_EDGE_SUBCARRIERS,
    SCR_GUARD_HZ,
    evm_timing_advance,
)
from src.numerology import ConfigurationError, SubbandConfig, occupied_band_hz, to_fraction
from src.ofdm import ComplexSignal, SignalLengthError, SymbolGrid, cp_ofdm_demod_highrate

logger = logging.getLogger(__name__)

INI_RECEIVERS = ("cp-ofdm", "wola")

# Marge de conception Kaiser au-dessus du gabarit de 100 dB
DESIGN_ATTENUATION_DB = 105.0
# Fréquence du second étage ≈ 5.6 fois le bord de bande coupée
STAGE2_RATE_FACTOR = 5.6


class MaskError(ValueError):
    """Gabarit du filtre de mesure irréalisable"""


def to_db(value: float) -> float:
    """10·log10 borné à [DB_FLOOR, DB_CEILING]"""
    value = float(value)
    if value <= 0:
        return DB_FLOOR
    return float(np.clip(10 * np.log10(value), DB_FLOOR, DB_CEILING))


# ==================== FILTRE DE MESURE ====================

@dataclass(frozen=True)
class MeasurementFilter:
    """
    Filtre passe-bas de mesure à deux étages H1(z)·H2(z^K)

    Args:
        h1: Premier étage à f_s (rejet des images de H2)
        h2: Second étage conçu à f_s/K (fixe la transition de 7.5 kHz)
        decim: Facteur K
        fs_hz: Fréquence d'échantillonnage
    """
    h1: np.ndarray
    h2: np.ndarray
    decim: int
    fs_hz: float
    passband_hz: float = MEASUREMENT_HALF_BANDWIDTH_HZ
    transition_hz: float = MEASUREMENT_TRANSITION_HZ

    @property
    def orders(self) -> Tuple[int, int]:
        return self.h1.size - 1, self.h2.size - 1

    @property
    def equivalent_length(self) -> int:
        """Longueur de la réponse impulsionnelle équivalente à un étage"""
        return self.h1.size + (self.h2.size - 1) * self.decim

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients du filtre équivalent à un étage"""
        upsampled = np.zeros((self.h2.size - 1) * self.decim + 1)
        upsampled[::self.decim] = self.h2
        return np.convolve(self.h1, upsampled)

    def min_steady_samples(self) -> int:
        """Nombre minimal d'échantillons en régime établi pour une mesure"""
        return 10 * max(self.h1.size, self.h2.size)

    def response(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Réponse complexe H1(e^{jω})·H2(e^{jωK}) aux fréquences données"""
        freqs_hz = np.asarray(freqs_hz, dtype=float)
        _, r1 = sps.freqz(self.h1, worN=freqs_hz, fs=self.fs_hz)
        _, r2 = sps.freqz(self.h2, worN=freqs_hz, fs=self.fs_hz / self.decim)
        return r1 * r2


def _kaiser_lowpass(pass_hz: float, stop_hz: float, rate_hz: float) -> np.ndarray:
    width = (stop_hz - pass_hz) / (rate_hz / 2)
    numtaps, beta = sps.kaiserord(DESIGN_ATTENUATION_DB, width)
    numtaps |= 1  # type I, nombre de coefficients impair
    return sps.firwin(numtaps, (pass_hz + stop_hz) / 2, window=("kaiser", beta), fs=rate_hz)


@lru_cache(maxsize=16)
def design_measurement_filter(fs_hz: float) -> MeasurementFilter:
    """
    Conçoit le filtre de mesure (bande passante ±90 kHz, transition 7.5 kHz, ≥ 100 dB)

    Args:
        fs_hz: Fréquence d'échantillonnage

    Returns:
        Filtre à deux étages

    Raises:
        MaskError: f_s < 2·(90 + 7.5) kHz
    """
    fs_hz = float(fs_hz)
    f_pass = MEASUREMENT_HALF_BANDWIDTH_HZ
    f_stop = f_pass + MEASUREMENT_TRANSITION_HZ
    if fs_hz < 2 * f_stop:
        raise MaskError(f"f_s={fs_hz / 1e3:g} kHz < {2 * f_stop / 1e3:g} kHz")

    decim = max(1, int(fs_hz // (STAGE2_RATE_FACTOR * f_stop)))
    h2 = _kaiser_lowpass(f_pass, f_stop, fs_hz / decim)
    if decim > 1:
        h1 = _kaiser_lowpass(f_stop, fs_hz / decim - f_stop, fs_hz)
    else:
        h1 = np.ones(1)
    filt = MeasurementFilter(h1=h1, h2=h2, decim=decim, fs_hz=fs_hz)
    logger.info(f"✅ Filtre de mesure : f_s={fs_hz / 1e6:g} MHz, K={decim}, "
                f"ordres={filt.orders}")
    return filt


def check_measurement_mask(filt: MeasurementFilter, n_points: int = 10_000) -> Dict[str, float]:
    """
    Évalue le gabarit sur une grille dense

    Returns:
        {'passband_ripple_db', 'stopband_attenuation_db', 'dc_gain_db'}
    """
    f_pass = filt.passband_hz
    f_stop = f_pass + filt.transition_hz
    passband = np.linspace(0.0, f_pass, n_points)
    stopband = np.linspace(f_stop, filt.fs_hz / 2, n_points)
    pass_db = 20 * np.log10(np.abs(filt.response(passband)))
    stop_db = 20 * np.log10(np.maximum(np.abs(filt.response(stopband)), 1e-300))
    return {
        "passband_ripple_db": float(pass_db.max() - pass_db.min()),
        "stopband_attenuation_db": float(-stop_db.max()),
        "dc_gain_db": float(pass_db[0]),
    }


def apply_measurement_filter(samples: np.ndarray, filt: MeasurementFilter,
                             center_hz: float) -> np.ndarray:
    """
    Ramène center_hz en bande de base puis filtre ; renvoie le régime établi

    Le second étage H2(z^K) est appliqué en polyphase : K sous-suites
    filtrées indépendamment (convolution FFT le long de l'axe 0).
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.size
    transient = filt.equivalent_length - 1
    if n - transient < filt.min_steady_samples():
        raise SignalLengthError(
            f"signal de {n} échantillons trop court pour la mesure "
            f"(transitoire {transient}, régime établi requis {filt.min_steady_samples()})")

    shifted = samples * np.exp(-2j * np.pi * center_hz / filt.fs_hz * np.arange(n))
    stage1 = sps.fftconvolve(shifted, filt.h1)[:n]
    k = filt.decim
    rows = -(-n // k)
    padded = np.zeros(rows * k, dtype=complex)
    padded[:n] = stage1
    stage2 = sps.fftconvolve(padded.reshape(rows, k), filt.h2[:, None], axes=0)[:rows]
    stage2 = stage2.reshape(-1)[:n]
    return stage2[transient:]


def subband_edges_hz(subband: SubbandConfig, center_hz: Union[Fraction, float]) -> Tuple[float, float]:
    """Bords gauche/droit de l'allocation (en Hz absolus)"""
    center = to_fraction(center_hz)
    half = Fraction(subband.l_act, 2)
    left = center - (half + Fraction(1, 2)) * subband.scs_hz
    right = center + (half - Fraction(1, 2)) * subband.scs_hz
    return float(left), float(right)


def measure_scr(signal: ComplexSignal, subband: SubbandConfig, side: str,
                center_hz: Union[Fraction, float] = 0,
                guard_hz: float = SCR_GUARD_HZ,
                filt: Optional[MeasurementFilter] = None) -> float:
    """
    Rapport de confinement spectral d'un côté de la sous-bande

    P_s : puissance du PRB de bord (filtre centré à 90 kHz à l'intérieur du bord),
    P_i : puissance à guard + 90 kHz à l'extérieur du bord.

    Args:
        signal: Signal émis
        subband: Sous-bande mesurée
        side: 'left' ou 'right'
        center_hz: Centre de la sous-bande
        guard_hz: Bande de garde entre le bord et la bande d'observation
        filt: Filtre de mesure (conçu pour signal.rate_hz si absent)

    Returns:
        10·log10(P_i/P_s) en dB, plafonné à +200 dB
    """
    if side not in ("left", "right"):
        raise ValueError(f"côté inconnu : {side}")
    filt = filt or design_measurement_filter(float(signal.rate_hz))
    left, right = subband_edges_hz(subband, center_hz)
    half = filt.passband_hz
    if side == "right":
        f_s, f_i = right - half, right + guard_hz + half
    else:
        f_s, f_i = left + half, left - guard_hz - half

    p_s = float(np.mean(np.abs(apply_measurement_filter(signal.samples, filt, f_s)) ** 2))
    p_i = float(np.mean(np.abs(apply_measurement_filter(signal.samples, filt, f_i)) ** 2))
    if p_s == 0.0:
        return DB_CEILING if p_i > 0 else DB_FLOOR
    return to_db(p_i / p_s)


# ==================== MSE / EVM ====================

@dataclass
class SubbandMetrics:
    """Métriques d'une sous-bande"""
    index: int
    mse: np.ndarray
    mse_avg_db: float
    mse_max_db: float
    scr_left_db: Optional[float] = None
    scr_right_db: Optional[float] = None

    @property
    def mse_db(self) -> np.ndarray:
        return np.array([to_db(v) for v in self.mse])

    @property
    def evm_pct(self) -> np.ndarray:
        return 100.0 * np.sqrt(self.mse)

    @property
    def scr_db(self) -> Optional[float]:
        """SCR du pire côté"""
        sides = [v for v in (self.scr_left_db, self.scr_right_db) if v is not None]
        return max(sides) if sides else None


@dataclass
class MetricsReport:
    """Rapport de métriques, une entrée par sous-bande"""
    subbands: List[SubbandMetrics] = field(default_factory=list)

    @property
    def worst_mse_avg_db(self) -> float:
        return max(sb.mse_avg_db for sb in self.subbands)

    @property
    def worst_scr_db(self) -> Optional[float]:
        values = [sb.scr_db for sb in self.subbands if sb.scr_db is not None]
        return max(values) if values else None


def edge_subcarriers(l_act: int, n_edge: int = N_EDGE_SUBCARRIERS) -> np.ndarray:
    """Indices distincts E_L ∪ E_R des n_edge sous-porteuses de chaque bord"""
    left = np.arange(min(n_edge, l_act))
    right = np.arange(max(l_act - n_edge, 0), l_act)
    return np.union1d(left, right)


def compute_mse(tx_grid: SymbolGrid, rx_grid: SymbolGrid,
                index: int = 0) -> SubbandMetrics:
    """
    MSE par sous-porteuse (moyenne sur les symboles), MSE moyenne et de bord

    Args:
        tx_grid: Grille émise normalisée (L_ACT, B)
        rx_grid: Grille reçue égalisée
        index: Indice de sous-bande pour le rapport
    """
    tx_grid = np.asarray(tx_grid, dtype=complex)
    rx_grid = np.asarray(rx_grid, dtype=complex)
    if tx_grid.shape != rx_grid.shape:
        raise SignalLengthError(f"dimensions {tx_grid.shape} != {rx_grid.shape}")
    mse = np.mean(np.abs(tx_grid - rx_grid) ** 2, axis=1)
    edges = edge_subcarriers(mse.size)
    return SubbandMetrics(index=index, mse=mse, mse_avg_db=to_db(np.mean(mse)),
                          mse_max_db=to_db(np.mean(mse[edges])))


def mse_impulse_oracle(chain: Callable[[SymbolGrid], SymbolGrid],
                       shape: Tuple[int, int]) -> np.ndarray:
    """
    MSE par sous-porteuse attendue pour des symboles i.i.d. de puissance unité

    La chaîne linéaire est sondée par impulsions unitaires :
    MSE(ℓ) = moyenne_s Σ_{ℓ',s'} |T[(ℓ,s),(ℓ',s')] - δ|².
    """
    l_act, n_sym = shape
    total = np.zeros((l_act, n_sym))
    for lp in range(l_act):
        for sp in range(n_sym):
            impulse = np.zeros(shape, dtype=complex)
            impulse[lp, sp] = 1.0
            response = np.asarray(chain(impulse), dtype=complex) - impulse
            total += np.abs(response) ** 2
    return total.mean(axis=1)


# ==================== INTERFÉRENCE INTER-NUMÉROLOGIE ====================

def measure_ini(victim: SubbandConfig, rx_signal: ComplexSignal,
                victim_center_hz: Union[Fraction, float] = 0,
                interferers: Sequence[Tuple[SubbandConfig, Union[Fraction, float]]] = (),
                receiver: str = "cp-ofdm") -> float:
    """
    Puissance d'interférence sur l'allocation (non active) de la victime

    Le signal est démodulé par le RX de la victime au débit de rx_signal ;
    la puissance moyenne est rapportée à la puissance unité des données.

    Args:
        receiver: 'cp-ofdm' (fenêtre DFT centrée dans le CP) ou 'wola'
            (repliement WOLA puis CP retiré en entier)

    Raises:
        ConfigurationError: allocations victime / interféreur recouvrantes, récepteur inconnu
    """
    if receiver not in INI_RECEIVERS:
        raise ConfigurationError("receiver", f"récepteur inconnu : {receiver}")
    v_low, v_high = occupied_band_hz(victim, Fraction(0))
    v_low += to_fraction(victim_center_hz)
    v_high += to_fraction(victim_center_hz)
    for sb, center in interferers:
        i_low, i_high = occupied_band_hz(sb, Fraction(0))
        i_low += to_fraction(center)
        i_high += to_fraction(center)
        if min(v_high, i_high) > max(v_low, i_low):
            raise ConfigurationError("non-overlapping allocations",
                                     "victime et interféreur se recouvrent")

    ratio = rx_signal.rate_hz / victim.low_rate_hz
    if ratio.denominator != 1:
        raise ConfigurationError("victim rate", f"f_s/f_s,victime={ratio} non entier")
    interp = int(ratio)
    n_ofdm, n_cp = interp * victim.l_ofdm, interp * victim.l_cp
    n_sym = rx_signal.samples.size // (n_ofdm + n_cp)
    if n_sym < 1:
        raise SignalLengthError("signal plus court qu'un symbole de la victime")
    cropped = ComplexSignal(rx_signal.samples[:n_sym * (n_ofdm + n_cp)], rx_signal.rate_hz)
    advance = evm_timing_advance(n_cp)
    if receiver == "wola":
        cropped = wola_rx(cropped, WolaConfig(n_ofdm, n_cp))
        advance = 0
    grid = cp_ofdm_demod_highrate(cropped, n_ofdm, n_cp, victim.with_symbols(n_sym),
                                  victim_center_hz, timing_advance=advance)
    return to_db(np.mean(np.abs(grid) ** 2))


# ==================== ÉMISSION ====================

def report_to_frame(report: MetricsReport) -> pd.DataFrame:
    """Une ligne par (sous-bande, sous-porteuse)"""
    rows = []
    for sb in report.subbands:
        for ell, (mse_db, evm) in enumerate(zip(sb.mse_db, sb.evm_pct)):
            rows.append({"subband": sb.index, "subcarrier": ell,
                         "mse_db": mse_db, "evm_pct": evm})
    return pd.DataFrame(rows, columns=["subband", "subcarrier", "mse_db", "evm_pct"])


def write_report_csv(report: MetricsReport, path: Union[str, Path]) -> Path:
    """Écrit le CSV par sous-porteuse (12 chiffres significatifs)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_to_frame(report).to_csv(path, index=False, float_format="%.12g")
    return path


def summary_items(report: MetricsReport) -> Dict[str, object]:
    """Paires clé/valeur du bloc résumé"""
    items: Dict[str, object] = {}
    for sb in report.subbands:
        prefix = f"subband{sb.index}"
        items[f"{prefix}.mse_avg_db"] = round(sb.mse_avg_db, 3)
        items[f"{prefix}.mse_max_db"] = round(sb.mse_max_db, 3)
        items[f"{prefix}.evm_avg_pct"] = round(float(100 * np.sqrt(np.mean(sb.mse))), 5)
        if sb.scr_left_db is not None:
            items[f"{prefix}.scr_left_db"] = round(sb.scr_left_db, 3)
        if sb.scr_right_db is not None:
            items[f"{prefix}.scr_right_db"] = round(sb.scr_right_db, 3)
    return items


def format_summary(items: Dict[str, object]) -> str:
    """Bloc texte 'clé = valeur', une paire par ligne"""
    return "\n".join(f"{key} = {value}" for key, value in items.items()) + "\n"
