"""
Numérologie FC-F-OFDM : dérivation et validation des paramètres structurels
(longueurs de transformées, recouvrement, nombre de blocs FC) à partir
de la numérologie de haut niveau des sous-bandes.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.constants import (
    BASE_SCS_HZ,
    MIN_OFDM_IFFT_LENGTH,
    NR_REFERENCE_L_CP,
    NR_REFERENCE_L_OFDM,
    REFERENCE_FS_HZ,
    SUBCARRIERS_PER_PRB,
)

logger = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    """Configuration invalide ; `constraint` nomme la contrainte violée"""

    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


def to_fraction(value: Union[int, float, str, Fraction]) -> Fraction:
    """
    Convertit une valeur numérique en rationnel exact

    Les flottants passent par leur représentation décimale (30.72e6 reste exact).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ==================== TYPES ====================

@dataclass(frozen=True)
class SubbandConfig:
    """
    Numérologie d'une sous-bande

    Args:
        index: Indice m de la sous-bande
        n_prb: Nombre de PRB alloués
        scs_hz: Espacement entre sous-porteuses (Hz, rationnel)
        l_ofdm: Longueur de l'IFFT OFDM
        l_cp: Longueur du préfixe cyclique
        center_bin: Centre c_m en bins FC relatifs au DC
        n_symbols: Nombre de symboles OFDM de la rafale
    """
    index: int
    n_prb: int
    scs_hz: Fraction
    l_ofdm: int
    l_cp: int
    center_bin: int = 0
    n_symbols: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scs_hz", to_fraction(self.scs_hz))
        if self.n_prb < 1:
            raise ConfigurationError("n_prb >= 1", f"n_prb={self.n_prb}")
        if self.n_symbols < 1:
            raise ConfigurationError("n_symbols >= 1", f"n_symbols={self.n_symbols}")
        if self.l_ofdm % 2:
            raise ConfigurationError("l_ofdm even", f"l_ofdm={self.l_ofdm}")
        if self.l_act > self.l_ofdm:
            raise ConfigurationError(
                "l_act <= l_ofdm", f"l_act={self.l_act} > l_ofdm={self.l_ofdm}"
            )
        if not 0 <= self.l_cp < self.l_ofdm:
            raise ConfigurationError("l_cp < l_ofdm", f"l_cp={self.l_cp}, l_ofdm={self.l_ofdm}")
        if self.scs_hz <= 0:
            raise ConfigurationError("scs_hz > 0", f"scs_hz={self.scs_hz}")

    @property
    def l_act(self) -> int:
        return SUBCARRIERS_PER_PRB * self.n_prb

    @property
    def symbol_length(self) -> int:
        """Longueur d'un symbole CP-OFDM (L_OFDM + L_CP)"""
        return self.l_ofdm + self.l_cp

    @property
    def t_len(self) -> int:
        """T_m : longueur de la rafale CP-OFDM à bas débit"""
        return self.n_symbols * self.symbol_length

    @property
    def low_rate_hz(self) -> Fraction:
        """Fréquence d'échantillonnage du signal CP-OFDM de la sous-bande"""
        return self.scs_hz * self.l_ofdm

    def with_symbols(self, n_symbols: int) -> "SubbandConfig":
        return SubbandConfig(self.index, self.n_prb, self.scs_hz, self.l_ofdm,
                             self.l_cp, self.center_bin, n_symbols)


@dataclass(frozen=True)
class FcConfig:
    """
    Géométrie du banc de filtres FC généralisé

    Les champs dérivés sont calculés par `derive_fc_params`, ne pas construire
    directement.
    """
    n_long: int
    overlap: Fraction
    fs_hz: Fraction
    subbands: Tuple[SubbandConfig, ...]
    l_short: Tuple[int, ...]
    l_s: Tuple[int, ...] = field(default=())
    s_f: Tuple[int, ...] = field(default=())
    interp: Tuple[int, ...] = field(default=())
    r_blocks: Tuple[int, ...] = field(default=())

    @property
    def n_subbands(self) -> int:
        return len(self.subbands)

    @property
    def n_s(self) -> int:
        """N_S : pas de sortie (échantillons non recouvrants du bloc long)"""
        return int((1 - self.overlap) * self.n_long)

    @property
    def n_o(self) -> int:
        return self.n_long - self.n_s

    @property
    def r_max(self) -> int:
        return max(self.r_blocks)

    @property
    def fc_bin_spacing_hz(self) -> Fraction:
        """f_BS = f_s / N"""
        return self.fs_hz / self.n_long

    def subband_rate_hz(self, m: int) -> Fraction:
        return self.fs_hz / self.interp[m]

    def t_len(self, m: int) -> int:
        return self.subbands[m].t_len

    def output_length(self) -> int:
        """Longueur non tronquée de la sortie du banc de synthèse"""
        return (self.r_max - 1) * self.n_s + self.n_long

    def recomputed_scs_hz(self, m: int) -> Fraction:
        """f_SCS,m = (L_m/N)·f_s/L_OFDM,m recalculé depuis les champs"""
        return Fraction(self.l_short[m], self.n_long) * self.fs_hz / self.subbands[m].l_ofdm

    def with_symbols(self, n_symbols: int) -> "FcConfig":
        """Retourne la même géométrie pour une rafale de n_symbols symboles"""
        subbands = [sb.with_symbols(n_symbols) for sb in self.subbands]
        return derive_fc_params(subbands, self.n_long, self.overlap, self.fs_hz)


@dataclass
class NumerologyDiagnostics:
    """Résultat de validate_mixed_numerology"""
    n_long: int
    fs_hz: Fraction
    l_short: List[int]
    interp: List[int]
    fc_bin_spacing_hz: Fraction
    messages: List[str] = field(default_factory=list)


# ==================== OPÉRATIONS ====================

def derive_ofdm_ifft_length(n_prb: int) -> int:
    """
    Longueur minimale de l'IFFT OFDM pour n_prb PRB

    Returns:
        max(2^ceil(log2(12·n_prb)), 128)
    """
    if n_prb < 1:
        raise ConfigurationError("n_prb >= 1", f"n_prb={n_prb}")
    n_sc = SUBCARRIERS_PER_PRB * n_prb
    return max(1 << (n_sc - 1).bit_length(), MIN_OFDM_IFFT_LENGTH)


def derive_fc_params(subbands: Sequence[SubbandConfig],
                     n_long: int,
                     overlap: Union[Fraction, float, str],
                     fs_hz: Union[Fraction, float, int],
                     l_short: Optional[Sequence[int]] = None) -> FcConfig:
    """
    Dérive la configuration FC complète

    Args:
        subbands: Sous-bandes (au moins une)
        n_long: Longueur N de l'IFFT longue
        overlap: Facteur de recouvrement λ
        fs_hz: Fréquence d'échantillonnage de sortie
        l_short: Longueurs L_m imposées (sinon déduites de f_SCS,m)

    Returns:
        FcConfig avec L_S,m, S_F,m, I_m et R_m

    Raises:
        ConfigurationError: contrainte d'intégralité violée
    """
    if not subbands:
        raise ConfigurationError("subbands", "au moins une sous-bande requise")
    overlap = to_fraction(overlap)
    fs_hz = to_fraction(fs_hz)
    if not 0 < overlap < 1:
        raise ConfigurationError("0 < lambda < 1", f"lambda={overlap}")
    if n_long < 2:
        raise ConfigurationError("N >= 2", f"N={n_long}")

    lengths, l_s, s_f, interp, r_blocks = [], [], [], [], []
    for m, sb in enumerate(subbands):
        exact_l = sb.scs_hz * n_long * sb.l_ofdm / fs_hz
        if l_short is not None:
            l_m = int(l_short[m])
            if Fraction(l_m) != exact_l:
                raise ConfigurationError(
                    "f_SCS = (L_m/N)*f_s/L_OFDM",
                    f"sous-bande {m}: L_m={l_m} incompatible avec f_SCS={float(sb.scs_hz)} Hz")
        else:
            if exact_l.denominator != 1:
                raise ConfigurationError(
                    "L_m = f_SCS*N*L_OFDM/f_s integer",
                    f"sous-bande {m}: L_m={exact_l} non entier")
            l_m = int(exact_l)
        if l_m < 1 or n_long % l_m:
            raise ConfigurationError("I_m = N/L_m integer",
                                     f"sous-bande {m}: N={n_long}, L_m={l_m}")
        if (overlap * l_m).denominator != 1:
            raise ConfigurationError("lambda*L_m integer",
                                     f"sous-bande {m}: lambda={overlap}, L_m={l_m}")
        ls_m = int((1 - overlap) * l_m)
        sf_m = l_m - ls_m
        r_m = _ceil_div(2 * sf_m + sb.t_len - l_m, ls_m) + 1
        lengths.append(l_m)
        l_s.append(ls_m)
        s_f.append(sf_m)
        interp.append(n_long // l_m)
        r_blocks.append(r_m)

    if (overlap * n_long).denominator != 1:
        raise ConfigurationError("lambda*N integer", f"lambda={overlap}, N={n_long}")

    fc = FcConfig(n_long=n_long, overlap=overlap, fs_hz=fs_hz,
                  subbands=tuple(subbands), l_short=tuple(lengths),
                  l_s=tuple(l_s), s_f=tuple(s_f), interp=tuple(interp),
                  r_blocks=tuple(r_blocks))
    logger.debug(f"✅ FcConfig dérivée : N={n_long}, L={lengths}, R={r_blocks}")
    return fc


def occupied_band_hz(sb: SubbandConfig, fc_bin_spacing_hz: Fraction) -> Tuple[Fraction, Fraction]:
    """
    Bande occupée [bas, haut] d'une sous-bande (bords des sous-porteuses actives)

    Les L_ACT bins occupent -L_ACT/2 … L_ACT/2-1 autour du centre.
    """
    center = sb.center_bin * fc_bin_spacing_hz
    half = Fraction(sb.l_act, 2)
    low = center - (half + Fraction(1, 2)) * sb.scs_hz
    high = center + (half - Fraction(1, 2)) * sb.scs_hz
    return low, high


def validate_mixed_numerology(configs: Union[FcConfig, Sequence[FcConfig]]) -> NumerologyDiagnostics:
    """
    Valide une configuration multi-numérologie

    Vérifie un N et un f_s communs, et l'absence de recouvrement des bandes
    actives entre sous-bandes distinctes.

    Raises:
        ConfigurationError: N / f_s différents ou allocations recouvrantes
    """
    if isinstance(configs, FcConfig):
        configs = [configs]
    if not configs:
        raise ConfigurationError("subbands", "au moins une configuration requise")

    ref = configs[0]
    for fc in configs[1:]:
        if fc.n_long != ref.n_long:
            raise ConfigurationError("common N", f"N={fc.n_long} != {ref.n_long}")
        if fc.fs_hz != ref.fs_hz:
            raise ConfigurationError("common f_s", f"f_s={fc.fs_hz} != {ref.fs_hz}")

    subbands = [sb for fc in configs for sb in fc.subbands]
    l_short = [l for fc in configs for l in fc.l_short]
    interp = [i for fc in configs for i in fc.interp]
    diag = NumerologyDiagnostics(n_long=ref.n_long, fs_hz=ref.fs_hz, l_short=l_short,
                                 interp=interp, fc_bin_spacing_hz=ref.fc_bin_spacing_hz)

    bands = [occupied_band_hz(sb, ref.fc_bin_spacing_hz) for sb in subbands]
    for i in range(len(bands)):
        for j in range(i + 1, len(bands)):
            lo = max(bands[i][0], bands[j][0])
            hi = min(bands[i][1], bands[j][1])
            if hi > lo:
                raise ConfigurationError(
                    "non-overlapping allocations",
                    f"sous-bandes {subbands[i].index} et {subbands[j].index} se recouvrent "
                    f"sur {float(hi - lo) / 1e3:.1f} kHz")

    for sb, l_m, i_m in zip(subbands, l_short, interp):
        diag.messages.append(
            f"sous-bande {sb.index}: SCS={float(sb.scs_hz) / 1e3:g} kHz, L={l_m}, I={i_m}, "
            f"f_s,m={float(ref.fs_hz / i_m) / 1e6:g} MHz")
    logger.info(f"✅ Numérologie valide : {len(subbands)} sous-bande(s), N={ref.n_long}")
    return diag


def frequency_to_bin(center_hz: Union[Fraction, float, int], fc: FcConfig) -> Tuple[int, Fraction]:
    """
    Bin FC le plus proche d'une fréquence centrale

    Returns:
        (c_m, résidu en Hz non représentable par un décalage de bins FC)
    """
    center_hz = to_fraction(center_hz)
    step = fc.fc_bin_spacing_hz
    ratio = center_hz / step
    c_m = math.floor(ratio + Fraction(1, 2))
    return c_m, center_hz - c_m * step


def nr_numerology(eta: int, fs_hz: Union[Fraction, float, int] = REFERENCE_FS_HZ) -> Tuple[Fraction, int, int]:
    """
    Numérologie NR : SCS = 2^η·15 kHz, L_OFDM et L_CP à la fréquence fs_hz

    Returns:
        (scs_hz, l_ofdm, l_cp)
    """
    if eta < 0:
        raise ConfigurationError("eta >= 0", f"eta={eta}")
    fs_hz = to_fraction(fs_hz)
    scale = fs_hz / REFERENCE_FS_HZ / (2 ** eta)
    l_ofdm = NR_REFERENCE_L_OFDM * scale
    l_cp = NR_REFERENCE_L_CP * scale
    if l_ofdm.denominator != 1 or l_cp.denominator != 1:
        raise ConfigurationError("NR lengths integer", f"eta={eta}, f_s={float(fs_hz)}")
    return BASE_SCS_HZ * 2 ** eta, int(l_ofdm), int(l_cp)


def reference_allocations(block: str = "narrow", n_long: Optional[int] = None,
                          overlap: Fraction = Fraction(1, 2), n_prb: int = 10) -> List[FcConfig]:
    """
    Paramétrisations de référence 15/30/60 kHz à f_s = 30.72 MHz

    Args:
        block: "narrow" (≤10 PRB, L_OFDM=128, L=N/16, N/8, N/4, simultanées)
               ou "wide" (106/51/24 PRB, L=N, une configuration par SCS)
        n_long: N (défaut 256 en narrow, 2048 en wide)

    Returns:
        Liste de FcConfig
    """
    if block == "narrow":
        n_long = n_long or 256
        centers = (-40, 0, 60)
        subbands = [SubbandConfig(index=m, n_prb=n_prb, scs_hz=BASE_SCS_HZ * 2 ** m,
                                  l_ofdm=128, l_cp=9, center_bin=centers[m] * n_long // 256)
                    for m in range(3)]
        return [derive_fc_params(subbands, n_long, overlap, REFERENCE_FS_HZ)]
    if block == "wide":
        n_long = n_long or 2048
        configs = []
        for eta, prb in ((0, 106), (1, 51), (2, 24)):
            scs, l_ofdm, l_cp = nr_numerology(eta)
            sb = SubbandConfig(index=0, n_prb=prb, scs_hz=scs, l_ofdm=l_ofdm, l_cp=l_cp)
            configs.append(derive_fc_params([sb], n_long, overlap, REFERENCE_FS_HZ))
        return configs
    raise ConfigurationError("block", f"bloc inconnu : {block}")


def describe(fc: FcConfig) -> Dict[str, object]:
    """Résumé clé/valeur d'une configuration (pour le rapport)"""
    return {
        "n_long": fc.n_long,
        "overlap": str(fc.overlap),
        "fs_hz": float(fc.fs_hz),
        "fc_bin_spacing_hz": float(fc.fc_bin_spacing_hz),
        "l_short": list(fc.l_short),
        "interp": list(fc.interp),
        "r_blocks": list(fc.r_blocks),
        "n_s": fc.n_s,
    }
