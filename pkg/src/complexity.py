"""
Modèle analytique du nombre d'opérations réelles : FFT, fenêtrages,
chaîne FC-F-OFDM complète et références (CP-OFDM, WOLA, f-OFDM)
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import pandas as pd

from src.constants import REFERENCE_FS_HZ, wola_slope
from src.numerology import FcConfig, SubbandConfig, derive_fc_params

logger = logging.getLogger(__name__)

TABLE_III_LENGTHS = (16, 24, 32, 48, 64, 128, 256, 384, 512, 768, 1024, 2048)


class UnsupportedLengthError(ValueError):
    """Longueur de FFT hors des familles 2^k et 3·2^k"""


@dataclass(frozen=True)
class OpCount:
    """Multiplications et additions réelles"""
    real_mults: int
    real_adds: int

    def __post_init__(self):
        if self.real_mults < 0 or self.real_adds < 0:
            raise ValueError("OpCount négatif")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(self.real_mults + other.real_mults, self.real_adds + other.real_adds)


@dataclass(frozen=True)
class WindowFlags:
    """Étages de fenêtrage comptés (FD, analyse TD, synthèse TD)"""
    fdw: bool = True
    tdaw: bool = True
    tdsw: bool = True


def _round_half_up(value: Fraction) -> int:
    return math.floor(value + Fraction(1, 2))


def _log2_exact(n: int) -> Optional[int]:
    if n > 0 and n & (n - 1) == 0:
        return n.bit_length() - 1
    return None


def fft_op_count(n: int) -> OpCount:
    """
    Opérations réelles d'une FFT/IFFT de longueur n = 2^k ou 3·2^k (k ≥ 2)

    Raises:
        UnsupportedLengthError: autre longueur
    """
    k = _log2_exact(n)
    if k is not None and k >= 2:
        return OpCount(n * (k - 3) + 4, n * (3 * k - 3) + 4)
    if n % 3 == 0:
        k = _log2_exact(n // 3)
        if k is not None and k >= 2:
            base = n // 3
            return OpCount(base * (3 * k - 7) + 12, base * (9 * k + 3) + 12)
    raise UnsupportedLengthError(f"longueur de FFT non supportée : {n}")


def _per_subband_terms(fc: FcConfig, m: int, flags: WindowFlags,
                       l_tbw: int) -> Fraction:
    sb = fc.subbands[m]
    per_block = fft_op_count(fc.l_short[m]).real_mults
    if flags.fdw:
        # deux transitions de L_TBW bins, poids réel × échantillon complexe
        per_block += 2 * 2 * l_tbw
    total = Fraction(fc.r_blocks[m] * per_block, sb.n_symbols)
    total += fft_op_count(sb.l_ofdm).real_mults
    if flags.tdaw:
        # prototype synchronisé au CP : appliqué une fois par symbole avant l'insertion du CP
        total += 2 * sb.l_ofdm
    return total


def _per_subband_adds(fc: FcConfig, m: int) -> Fraction:
    sb = fc.subbands[m]
    total = Fraction(fc.r_blocks[m] * fft_op_count(fc.l_short[m]).real_adds, sb.n_symbols)
    return total + fft_op_count(sb.l_ofdm).real_adds


def chain_op_count(fc: FcConfig, flags: WindowFlags = WindowFlags(),
                   l_tbw: Union[int, Sequence[int]] = 0) -> OpCount:
    """
    Opérations par symbole CP-OFDM de la chaîne FC-F-OFDM

    C = R·(C_IFFT(N) + C_TDSW)/B + Σ_m [R_m·(C_FFT(L_m) + C_FDW)/B_m + C_TDAW + C_IFFT(L_OFDM,m)]

    C_TDAW est compté par symbole, 2·L_OFDM,m multiplications : le prototype
    d'analyse aligné sur le CP s'applique au symbole OFDM avant l'insertion du CP,
    et non bloc par bloc (R_m·2·L_m/B_m). Les tables de référence (35276 pour la
    chaîne complète à B = 1) suivent cette convention.

    Args:
        fc: Configuration FC (B_m = n_symbols des sous-bandes)
        flags: Étages de fenêtrage comptés
        l_tbw: L_TBW par sous-bande (ou commun)

    Returns:
        OpCount arrondi à l'entier le plus proche
    """
    if isinstance(l_tbw, int):
        l_tbw = [l_tbw] * fc.n_subbands
    ref_symbols = fc.subbands[0].n_symbols

    shared = fft_op_count(fc.n_long).real_mults
    if flags.tdsw:
        shared += 2 * fc.n_long
    mults = Fraction(fc.r_max * shared, ref_symbols)
    for m in range(fc.n_subbands):
        mults += _per_subband_terms(fc, m, flags, l_tbw[m])

    # overlap-add des N_O échantillons recouvrants (inutile en OLS pur)
    shared_adds = fft_op_count(fc.n_long).real_adds
    if flags.tdsw:
        shared_adds += 2 * fc.n_o
    adds = Fraction(fc.r_max * shared_adds, ref_symbols)
    for m in range(fc.n_subbands):
        adds += _per_subband_adds(fc, m)
    return OpCount(_round_half_up(mults), _round_half_up(adds))


def fc_original_op_count(fc: FcConfig, l_tbw: Union[int, Sequence[int]] = 0) -> OpCount:
    """Schéma FC d'origine : fenêtre FD seule"""
    return chain_op_count(fc, WindowFlags(fdw=True, tdaw=False, tdsw=False), l_tbw)


def baseline_op_count(kind: str, n_ofdm: int, n_cp: int,
                      slope: Optional[int] = None,
                      n_filt: Optional[int] = None,
                      interp: int = 1) -> OpCount:
    """
    Opérations par symbole des formes d'onde de référence

    Args:
        kind: 'cp-ofdm', 'wola' ou 'f-ofdm'
        n_ofdm: Longueur de l'IFFT OFDM
        n_cp: Longueur du CP
        slope: Pente WOLA (défaut wola_slope(N_CP))
        n_filt: Ordre du filtre f-OFDM (défaut N_OFDM/2)
        interp: I_0 > 1 pour la variante interpolante de f-OFDM
    """
    ifft = fft_op_count(n_ofdm)
    if kind == "cp-ofdm":
        return ifft
    if kind == "wola":
        slope = wola_slope(n_cp) if slope is None else slope
        return OpCount(ifft.real_mults + 2 * 2 * slope, ifft.real_adds + 2 * slope)
    if kind == "f-ofdm":
        n_filt = n_ofdm // 2 if n_filt is None else n_filt
        span = n_ofdm + n_cp
        if interp > 1:
            # filtrage polyphase à bas débit, coefficients non symétrisés
            return OpCount(_round_half_up(Fraction(2 * n_filt * span, interp)),
                           _round_half_up(Fraction(2 * n_filt * span, interp)))
        return OpCount(n_filt * span + ifft.real_mults, 2 * n_filt * span + ifft.real_adds)
    raise ValueError(f"forme d'onde inconnue : {kind}")


# ==================== TABLES ====================

def fft_table_frame(lengths: Iterable[int] = TABLE_III_LENGTHS) -> pd.DataFrame:
    """Table des coûts FFT (n, multiplications, additions)"""
    rows = [{"n": n, **vars(fft_op_count(n))} for n in lengths]
    return pd.DataFrame(rows, columns=["n", "real_mults", "real_adds"])


def complexity_rows(fc_by_symbols: Sequence[FcConfig], n_ofdm: int = 2048, n_cp: int = 144,
                    l_tbw: int = 0, interp: int = 16) -> pd.DataFrame:
    """
    Lignes de comparaison de complexité (références puis chaîne FC par taille de rafale)

    Args:
        fc_by_symbols: Même géométrie FC pour plusieurs B
        n_ofdm, n_cp: Numérologie des références à 30.72 MHz
        l_tbw: Transition FD comptée pour la chaîne FC
        interp: I_0 de la variante f-OFDM interpolante
    """
    rows: List[dict] = [
        {"scheme": "cp-ofdm", "n_symbols": 1, **vars(baseline_op_count("cp-ofdm", n_ofdm, n_cp))},
        {"scheme": "wola", "n_symbols": 1, **vars(baseline_op_count("wola", n_ofdm, n_cp))},
        {"scheme": "f-ofdm", "n_symbols": 1, **vars(baseline_op_count("f-ofdm", n_ofdm, n_cp))},
        {"scheme": "f-ofdm-interp", "n_symbols": 1,
         **vars(baseline_op_count("f-ofdm", n_ofdm, n_cp, interp=interp))},
    ]
    for fc in fc_by_symbols:
        b = fc.subbands[0].n_symbols
        rows.append({"scheme": "fc-original", "n_symbols": b,
                     **vars(fc_original_op_count(fc, l_tbw))})
        rows.append({"scheme": "fc-generalized", "n_symbols": b,
                     **vars(chain_op_count(fc, WindowFlags(), l_tbw))})
    return pd.DataFrame(rows, columns=["scheme", "n_symbols", "real_mults", "real_adds"])


def scheme_comparison_frame(symbols: Sequence[int] = (1, 7, 14), l_tbw: int = 0,
                            n_prb: int = 10) -> pd.DataFrame:
    """
    Comparaison de complexité de la configuration de référence
    (15 kHz, L_OFDM=128, CP=9, L=16, N=256, f_s=30.72 MHz, λ=1/2) pour plusieurs B
    """
    configs = []
    for b in symbols:
        sb = SubbandConfig(index=0, n_prb=n_prb, scs_hz=Fraction(15000), l_ofdm=128, l_cp=9,
                           n_symbols=b)
        configs.append(derive_fc_params([sb], 256, Fraction(1, 2), REFERENCE_FS_HZ))
    return complexity_rows(configs, l_tbw=l_tbw)


def write_frame_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Écrit un tableau de comptes en CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g")
    logger.info(f"📊 Table écrite : {path}")
    return path
