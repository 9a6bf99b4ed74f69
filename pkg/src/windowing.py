"""
Construction des fenêtres du banc FC généralisé :
fenêtre fréquentielle d_m, prototype d'analyse temporel â_m (aligné sur le CP)
et fenêtre de synthèse temporelle s, plus leur sérialisation texte.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.numerology import FcConfig, SubbandConfig

logger = logging.getLogger(__name__)

WINDOW_FILE_HEADER = "# fcfb-windows v1"
HERMITIAN_TOLERANCE = 1e-9


class WindowError(ValueError):
    """Paramètres de fenêtre incohérents"""


# ==================== SPÉCIFICATIONS ====================

@dataclass
class FdWindowSpec:
    """
    Fenêtre fréquentielle à deux transitions symétriques

    Args:
        l_short: Longueur L_m
        l_act: Nombre de bins de bande passante (bins FC)
        l_tbw: Nombre de bins de transition L_TBW,m par côté
        weights: Poids ξ_m(0..L_TBW-1), du côté bande coupée vers la bande passante
    """
    l_short: int
    l_act: int
    l_tbw: int
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.weights.size != self.l_tbw:
            raise WindowError(f"|ξ|={self.weights.size} != L_TBW={self.l_tbw}")


@dataclass
class AnalysisWindowSpec:
    """Prototype d'analyse paramétré par φ_m (L_OFDM - 2·L_ACT + 2 réels)"""
    l_ofdm: int
    l_act: int
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float).reshape(-1)
        if self.l_ofdm % 2:
            raise WindowError(f"L_OFDM={self.l_ofdm} impair")
        expected = analysis_param_count(self.l_ofdm, self.l_act)
        if self.params.size != expected:
            raise WindowError(f"|φ|={self.params.size}, attendu {expected}")


@dataclass
class SynthesisWindowSpec:
    """Fenêtre de synthèse paramétrée par ψ (2γ-1 réels)"""
    n_long: int
    gamma: int
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float).reshape(-1)
        if self.gamma < 1 or self.gamma > self.n_long // 2:
            raise WindowError(f"γ={self.gamma} hors de [1, N/2]")
        if self.params.size != 2 * self.gamma - 1:
            raise WindowError(f"|ψ|={self.params.size}, attendu {2 * self.gamma - 1}")


@dataclass
class WindowSet:
    """
    Jeu de fenêtres complet

    Args:
        fd: d_m par sous-bande (longueur L_m)
        analysis: â_m par sous-bande ; prototype de longueur L_OFDM,m aligné
            sur le CP si `aligned`, sinon fenêtre de bloc fixe de longueur L_m
        synthesis: s commune (longueur N)
        aligned: Mode d'application de la fenêtre d'analyse
    """
    fd: List[np.ndarray]
    analysis: List[np.ndarray]
    synthesis: np.ndarray
    aligned: bool = True

    def __post_init__(self):
        self.fd = [np.asarray(d, dtype=float) for d in self.fd]
        self.analysis = [np.asarray(a, dtype=float) for a in self.analysis]
        self.synthesis = np.asarray(self.synthesis, dtype=float)

    def check(self, fc: FcConfig) -> None:
        """Vérifie les longueurs par rapport à la configuration"""
        if len(self.fd) != fc.n_subbands or len(self.analysis) != fc.n_subbands:
            raise WindowError("nombre de fenêtres != nombre de sous-bandes")
        for m, sb in enumerate(fc.subbands):
            if self.fd[m].size != fc.l_short[m]:
                raise WindowError(f"|d_{m}|={self.fd[m].size} != L_m={fc.l_short[m]}")
            expected = sb.l_ofdm if self.aligned else fc.l_short[m]
            if self.analysis[m].size != expected:
                raise WindowError(f"|â_{m}|={self.analysis[m].size} != {expected}")
        if self.synthesis.size != fc.n_long:
            raise WindowError(f"|s|={self.synthesis.size} != N={fc.n_long}")


# ==================== FENÊTRE FRÉQUENTIELLE ====================

def passband_bins(subband: SubbandConfig, l_short: int) -> int:
    """Bins FC couverts par les L_ACT sous-porteuses actives (arrondi supérieur)"""
    return math.ceil(subband.l_act * l_short / subband.l_ofdm)


def raised_cosine_ramp(l_tbw: int) -> np.ndarray:
    """Rampe en cosinus surélevé strictement entre 0 et 1 (ξ initial)"""
    p = np.arange(1, l_tbw + 1)
    return 0.5 * (1.0 - np.cos(np.pi * p / (l_tbw + 1)))


def build_fd_window(spec: FdWindowSpec) -> np.ndarray:
    """
    Construit d_m dans l'ordre décalé (indice i ↔ bin i - ceil(L_m/2))

    Layout : [0…, ξ(0)…ξ(T-1), 1×L_ACT, ξ(T-1)…ξ(0), 0…]
    """
    gap = spec.l_short - spec.l_act
    if gap < 0:
        raise WindowError(f"L_ACT={spec.l_act} > L_m={spec.l_short}")
    lead = math.ceil(gap / 2) - spec.l_tbw
    trail = gap // 2 - spec.l_tbw
    if lead < 0 or trail < 0:
        raise WindowError(
            f"transition L_TBW={spec.l_tbw} ne tient pas dans (L_m-L_ACT)/2={gap / 2}")
    return np.concatenate([
        np.zeros(lead),
        spec.weights,
        np.ones(spec.l_act),
        spec.weights[::-1],
        np.zeros(trail),
    ])


# ==================== FENÊTRES TEMPORELLES ====================

def hermitian_ifft(spectrum: np.ndarray, name: str = "fenêtre") -> np.ndarray:
    """
    IDFT d'un spectre à symétrie hermitienne, partie réelle seule

    Raises:
        WindowError: partie imaginaire non négligeable (spectre non hermitien)
    """
    values = np.fft.ifft(spectrum)
    scale = max(1.0, float(np.abs(values.real).max(initial=0.0)))
    residual = float(np.abs(values.imag).max(initial=0.0))
    if residual > HERMITIAN_TOLERANCE * scale:
        raise WindowError(f"{name} : partie imaginaire {residual:.3g} (spectre non hermitien)")
    return values.real


def analysis_param_count(l_ofdm: int, l_act: int) -> int:
    """|φ_m| = L_OFDM - 2·L_ACT + 2, nul si L_ACT >= L_OFDM/2"""
    if 2 * l_act >= l_ofdm:
        return 0
    return l_ofdm - 2 * l_act + 2


def build_analysis_window(spec: AnalysisWindowSpec) -> np.ndarray:
    """
    Prototype d'analyse réel â_m à partir de φ_m

    Le spectre α_m est nul sur les bins 1…L_ACT-1 (et leurs miroirs) :
    les sous-porteuses actives ne sont pas perturbées.

    Args:
        spec: Spécification (L_OFDM, L_ACT, φ)

    Returns:
        â_m de longueur L_OFDM
    """
    l_ofdm, l_act, phi = spec.l_ofdm, spec.l_act, spec.params
    if phi.size == 0:
        return np.ones(l_ofdm)

    half = l_ofdm // 2
    n_free = half - l_act
    alpha = np.zeros(l_ofdm, dtype=complex)
    alpha[0] = phi[0]
    bins = l_act + np.arange(n_free)
    alpha[bins] = phi[1:n_free + 1] + 1j * phi[n_free + 2:]
    alpha[half] = phi[n_free + 1]
    alpha[l_ofdm - bins] = np.conj(alpha[bins])
    return hermitian_ifft(alpha, "â")


def build_synthesis_window(spec: SynthesisWindowSpec) -> np.ndarray:
    """
    Fenêtre de synthèse réelle s à partir de ψ

    β(0)=ψ(0), β(p)=ψ(p)+jψ(γ+p-1) pour p=1…γ-1, β nul jusqu'à N/2, miroir conjugué.
    """
    n_long, gamma, psi = spec.n_long, spec.gamma, spec.params
    beta = np.zeros(n_long, dtype=complex)
    beta[0] = psi[0]
    if gamma > 1:
        p = np.arange(1, gamma)
        beta[p] = psi[1:gamma] + 1j * psi[gamma:]
        beta[n_long - p] = np.conj(beta[p])
    return hermitian_ifft(beta, "s")


def dc_only_params(size: int, dc_value: float) -> np.ndarray:
    """Vecteur de paramètres ne portant que le bin DC (fenêtre toute à un)"""
    params = np.zeros(size)
    if size:
        params[0] = dc_value
    return params


def cp_extended_window(a_hat: np.ndarray, l_cp: int) -> np.ndarray:
    """Prototype étendu par son préfixe cyclique (matrice K)"""
    return np.concatenate([a_hat[a_hat.size - l_cp:], a_hat])


def aligned_analysis_windows(a_hat: np.ndarray, fc: FcConfig, m: int,
                             n_blocks: Optional[int] = None) -> np.ndarray:
    """
    Fenêtres d'analyse alignées pour les blocs r = 0…n_blocks-1

    Returns:
        Tableau (n_blocks, L_m)
    """
    sb = fc.subbands[m]
    n_blocks = fc.r_blocks[m] if n_blocks is None else n_blocks
    extended = cp_extended_window(np.asarray(a_hat, dtype=float), sb.l_cp)
    q = np.arange(fc.l_short[m])
    r = np.arange(n_blocks)[:, None]
    idx = np.mod(q[None, :] + r * fc.l_s[m] - fc.s_f[m], sb.symbol_length)
    return extended[idx]


def align_analysis_window(a_hat: np.ndarray, r: int, fc: FcConfig, m: int) -> np.ndarray:
    """
    Échantillons du prototype étendu couverts par le bloc r de la sous-bande m

    Le prototype est périodisé sur la rafale, y compris sur le zéro-padding
    de tête et de queue.
    """
    if not 0 <= r < fc.r_blocks[m]:
        raise WindowError(f"r={r} hors de [0, R_m={fc.r_blocks[m]})")
    return aligned_analysis_windows(a_hat, fc, m, r + 1)[r]


# ==================== SÉRIALISATION ====================

def save_windows(path: Union[str, Path], windows: WindowSet) -> Path:
    """
    Écrit un jeu de fenêtres au format texte (une valeur par ligne)

    Returns:
        Chemin écrit
    """
    path = Path(path)
    lines = [WINDOW_FILE_HEADER, f"aligned {int(windows.aligned)}"]

    def _block(name: str, m: int, values: np.ndarray):
        lines.append(f"{name} {m} {values.size}")
        lines.extend(f"{v:.17g}" for v in values)

    for m, d in enumerate(windows.fd):
        _block("fd", m, d)
    for m, a in enumerate(windows.analysis):
        _block("analysis", m, a)
    _block("synthesis", 0, windows.synthesis)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"✅ Fenêtres écrites : {path}")
    return path


def load_windows(path: Union[str, Path]) -> WindowSet:
    """Relit un fichier écrit par save_windows"""
    path = Path(path)
    lines = [l.strip() for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines or lines[0] != WINDOW_FILE_HEADER:
        raise WindowError(f"{path}: en-tête absent")

    aligned = True
    families = {"fd": {}, "analysis": {}, "synthesis": {}}
    i = 1
    while i < len(lines):
        tokens = lines[i].split()
        if tokens[0] == "aligned":
            aligned = bool(int(tokens[1]))
            i += 1
            continue
        if tokens[0] not in families or len(tokens) != 3:
            raise WindowError(f"{path}: ligne {i + 1} invalide : {lines[i]}")
        m, size = int(tokens[1]), int(tokens[2])
        values = np.array([float(v) for v in lines[i + 1:i + 1 + size]])
        if values.size != size:
            raise WindowError(f"{path}: bloc {tokens[0]} {m} tronqué")
        families[tokens[0]][m] = values
        i += 1 + size

    if 0 not in families["synthesis"]:
        raise WindowError(f"{path}: fenêtre de synthèse absente")
    fd = [families["fd"][m] for m in sorted(families["fd"])]
    analysis = [families["analysis"][m] for m in sorted(families["analysis"])]
    return WindowSet(fd=fd, analysis=analysis, synthesis=families["synthesis"][0],
                     aligned=aligned)
