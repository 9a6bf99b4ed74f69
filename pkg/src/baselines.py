"""
Formes d'onde de référence pour les comparaisons de fuite :
CP-OFDM non filtré, WOLA (émission et réception) et f-OFDM à convolution temporelle
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import signal as sps

from src.constants import wola_slope
from src.numerology import ConfigurationError, SubbandConfig, to_fraction
from src.ofdm import ComplexSignal, SignalLengthError, SymbolGrid, cp_ofdm_modulate, derotate

logger = logging.getLogger(__name__)


# ==================== CP-OFDM NON FILTRÉ ====================

def upsampling_factor(subband: SubbandConfig, fs_hz: Union[Fraction, float]) -> int:
    """I = f_s / (f_SCS·L_OFDM), entier"""
    ratio = to_fraction(fs_hz) / subband.low_rate_hz
    if ratio.denominator != 1:
        raise ConfigurationError("f_s multiple of f_SCS*L_OFDM", f"rapport {ratio}")
    return int(ratio)


def plain_tx(grid: SymbolGrid, subband: SubbandConfig, fs_hz: Union[Fraction, float],
             center_hz: Union[Fraction, float] = 0) -> ComplexSignal:
    """
    CP-OFDM non filtré généré directement à f_s et centré sur center_hz

    L'IDFT de longueur I·L_OFDM réalise l'interpolation idéale de chaque symbole.
    """
    interp = upsampling_factor(subband, fs_hz)
    sig = cp_ofdm_modulate(grid, interp * subband.l_ofdm, interp * subband.l_cp, fs_hz)
    return ComplexSignal(derotate(sig.samples, -to_fraction(center_hz), fs_hz), fs_hz)


# ==================== WOLA ====================

def raised_cosine_slope(slope: int) -> np.ndarray:
    """Pente montante en cosinus surélevé, échantillonnée en (k+0.5)/slope"""
    return .5 * (1 - np.sin(np.pi * np.arange(slope - 1, -slope, -2) / (2 * slope)))


@dataclass
class WolaConfig:
    """
    Fenêtrage WOLA

    Args:
        l_ofdm: Longueur utile du symbole
        l_cp: Longueur du CP
        slope: Longueur de pente (défaut wola_slope(L_CP))
    """
    l_ofdm: int
    l_cp: int
    slope: Optional[int] = None

    def __post_init__(self):
        if self.slope is None:
            self.slope = wola_slope(self.l_cp)
        if not 0 <= self.slope <= self.l_cp:
            raise ConfigurationError("slope <= l_cp", f"slope={self.slope}, l_cp={self.l_cp}")

    @property
    def symbol_length(self) -> int:
        return self.l_ofdm + self.l_cp


def _frames(signal: ComplexSignal, cfg: WolaConfig) -> np.ndarray:
    t = cfg.symbol_length
    if signal.samples.size % t:
        raise SignalLengthError(f"longueur {signal.samples.size} non multiple de {t}")
    return signal.samples.reshape(-1, t)


def wola_tx(signal: ComplexSignal, cfg: WolaConfig) -> ComplexSignal:
    """
    WOLA à l'émission

    La pente montante porte sur les premiers échantillons du CP, la queue
    descendante (suite cyclique du symbole) se superpose au début du symbole
    suivant ; la queue du dernier symbole prolonge la rafale de `slope` échantillons.
    """
    w = cfg.slope
    if w == 0:
        return ComplexSignal(signal.samples.copy(), signal.rate_hz)
    frames = _frames(signal, cfg)
    rise = raised_cosine_slope(w)
    fall = rise[::-1]
    head = frames.copy()
    head[:, :w] *= rise
    out = np.concatenate([head.reshape(-1), np.zeros(w, dtype=complex)])
    tails = frames[:, cfg.l_cp:cfg.l_cp + w] * fall
    t = cfg.symbol_length
    starts = t * np.arange(1, frames.shape[0] + 1)
    out[(starts[:, None] + np.arange(w)).reshape(-1)] += tails.reshape(-1)
    return ComplexSignal(out, signal.rate_hz)


def wola_rx(signal: ComplexSignal, cfg: WolaConfig) -> ComplexSignal:
    """
    WOLA à la réception : fenêtrage des bords étendus du symbole puis repliement

    Les `slope` échantillons précédant la partie utile (fin du CP) sont pondérés
    par la pente montante et ajoutés à la fin de la partie utile pondérée par la
    pente descendante ; une démodulation CP-OFDM standard (CP retiré en entier)
    s'applique ensuite. Les échantillons au-delà du dernier symbole complet sont écartés.
    """
    t = cfg.symbol_length
    whole = signal.samples[:signal.samples.size // t * t]
    w = cfg.slope
    if w == 0:
        return ComplexSignal(whole.copy(), signal.rate_hz)
    frames = whole.reshape(-1, t)
    rise = raised_cosine_slope(w)
    fall = rise[::-1]
    out = frames.copy()
    out[:, t - w:] = frames[:, t - w:] * fall + frames[:, cfg.l_cp - w:cfg.l_cp] * rise
    return ComplexSignal(out.reshape(-1), signal.rate_hz)


# ==================== f-OFDM ====================

@dataclass
class FofdmConfig:
    """
    Filtre f-OFDM

    Args:
        n_filt: Ordre N_FILT (N_FILT+1 coefficients, symétriques)
        coeffs: Coefficients passe-bas du prototype
        center_hz: Translation du prototype vers le centre de la sous-bande
    """
    n_filt: int
    coeffs: np.ndarray
    center_hz: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.size != self.n_filt + 1:
            raise ConfigurationError("|coeffs| = N_FILT+1",
                                     f"{self.coeffs.size} != {self.n_filt + 1}")
        if not np.allclose(self.coeffs, self.coeffs[::-1]):
            raise ConfigurationError("symmetric prototype", "coefficients non symétriques")


def design_fofdm_prototype(subband: SubbandConfig, fs_hz: Union[Fraction, float],
                           n_filt: Optional[int] = None,
                           center_hz: Union[Fraction, float] = 0,
                           transition_tones: float = 5.0) -> FofdmConfig:
    """
    Sinus cardinal fenêtré (Hann) de coupure bord d'allocation + demi-transition

    Args:
        subband: Sous-bande filtrée
        fs_hz: Fréquence d'échantillonnage du filtrage
        n_filt: Ordre (défaut N_OFDM/2 à f_s)
        center_hz: Centre de la sous-bande
        transition_tones: Largeur de transition en sous-porteuses
    """
    interp = upsampling_factor(subband, fs_hz)
    n_filt = interp * subband.l_ofdm // 2 if n_filt is None else n_filt
    edge = subband.l_act / 2 * float(subband.scs_hz)
    cutoff = edge + transition_tones / 2 * float(subband.scs_hz)
    coeffs = sps.firwin(n_filt + 1, cutoff, window="hann", fs=float(fs_hz))
    logger.debug(f"✅ Prototype f-OFDM : {n_filt + 1} coefficients, coupure {cutoff / 1e3:.1f} kHz")
    return FofdmConfig(n_filt=n_filt, coeffs=coeffs, center_hz=to_fraction(center_hz))


def fofdm_tx(signal: ComplexSignal, cfg: FofdmConfig) -> ComplexSignal:
    """
    Convolution linéaire de la rafale par le prototype translaté,
    retard de groupe N_FILT/2 compensé par troncature
    """
    taps = derotate(cfg.coeffs.astype(complex), -cfg.center_hz, signal.rate_hz)
    # phase de la translation référencée au centre du filtre
    taps *= np.exp(-2j * np.pi * float(cfg.center_hz / signal.rate_hz) * (cfg.n_filt // 2))
    full = sps.fftconvolve(signal.samples, taps)
    delay = cfg.n_filt // 2
    return ComplexSignal(full[delay:delay + signal.samples.size], signal.rate_hz)
