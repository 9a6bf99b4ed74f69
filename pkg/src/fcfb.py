"""
Banc de filtres de synthèse à convolution rapide (FC) généralisé

Implémentation par blocs (bufferisation, traitement FD, IFFT longue commune,
fenêtre de synthèse, overlap-add), modèle matriciel dense de référence,
cas particuliers OLS/OLA et oracles de convolution directe.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.numerology import FcConfig
from src.ofdm import ComplexSignal, SignalLengthError
from src.windowing import WindowSet, aligned_analysis_windows

logger = logging.getLogger(__name__)

# Garde-fou mémoire du modèle dense (nombre d'éléments complexes)
MAX_DENSE_ELEMENTS = 20_000_000


class ModelSizeError(ValueError):
    """Modèle dense trop grand pour être assemblé en mémoire"""


# ==================== ORACLES DE CONVOLUTION ====================

def linear_convolve(x: Sequence[complex], h: Sequence[complex]) -> np.ndarray:
    """Convolution linéaire par somme directe (oracle de test)"""
    x = np.asarray(x, dtype=complex)
    h = np.asarray(h, dtype=complex)
    y = np.zeros(x.size + h.size - 1, dtype=complex)
    for k, hk in enumerate(h):
        y[k:k + x.size] += hk * x
    return y


def cyclic_convolve(x: Sequence[complex], h: Sequence[complex], n: int) -> np.ndarray:
    """Convolution cyclique de longueur n par somme directe"""
    xp = np.zeros(n, dtype=complex)
    hp = np.zeros(n, dtype=complex)
    x = np.asarray(x, dtype=complex)
    h = np.asarray(h, dtype=complex)
    xp[:x.size] = x
    hp[:h.size] = h
    y = np.zeros(n, dtype=complex)
    for k in range(n):
        y += hp[k] * np.roll(xp, k)
    return y


# ==================== FENÊTRES DE RÉFÉRENCE ====================

def flat_fd_windows(fc: FcConfig) -> List[np.ndarray]:
    """Fenêtres FD plates pleine bande"""
    return [np.ones(l_m) for l_m in fc.l_short]


def ols_windows(fc: FcConfig, fd: Optional[List[np.ndarray]] = None) -> WindowSet:
    """
    Fenêtres du cas overlap-save multirate

    Analyse toute à un, synthèse [0×N_L, 1×N_S, 0×N_T].
    """
    n_l = math.ceil(fc.n_o / 2)
    n_t = fc.n_o // 2
    synthesis = np.concatenate([np.zeros(n_l), np.ones(fc.n_s), np.zeros(n_t)])
    analysis = [np.ones(sb.l_ofdm) for sb in fc.subbands]
    return WindowSet(fd=fd if fd is not None else flat_fd_windows(fc),
                     analysis=analysis, synthesis=synthesis, aligned=True)


def ola_windows(fc: FcConfig, fd: Optional[List[np.ndarray]] = None) -> WindowSet:
    """
    Fenêtres du cas overlap-add multirate

    Analyse [0×L_L, 1×L_S, 0×L_T] appliquée telle quelle à chaque bloc, synthèse toute à un.
    """
    analysis = []
    for l_m, ls_m in zip(fc.l_short, fc.l_s):
        l_o = l_m - ls_m
        analysis.append(np.concatenate([np.zeros(math.ceil(l_o / 2)), np.ones(ls_m),
                                        np.zeros(l_o // 2)]))
    return WindowSet(fd=fd if fd is not None else flat_fd_windows(fc),
                     analysis=analysis, synthesis=np.ones(fc.n_long), aligned=False)


# ==================== PIPELINE PAR BLOCS ====================

@dataclass
class FcBlockPipeline:
    """
    Chaîne de synthèse FC : configuration, fenêtres, placement des bins
    et rotations de phase par bloc
    """
    fc: FcConfig
    windows: WindowSet

    def __post_init__(self):
        self.windows.check(self.fc)
        n_long = self.fc.n_long
        self.target_bins = []
        self.scale = []
        self._analysis_cache = {}
        for m, sb in enumerate(self.fc.subbands):
            l_m = self.fc.l_short[m]
            bins = np.mod(sb.center_bin - math.ceil(l_m / 2) + np.arange(l_m), n_long)
            self.target_bins.append(bins)
            self.scale.append(math.sqrt(n_long / l_m))

    def theta(self, m: int, r) -> np.ndarray:
        """
        Rotation Θ_m(r) = exp(j2π·r·c_m·L_S,m/L_m), phase réduite exactement modulo 2π
        """
        sb = self.fc.subbands[m]
        l_m = self.fc.l_short[m]
        r = np.asarray(r, dtype=np.int64)
        cycles = np.mod(sb.center_bin * self.fc.l_s[m] * r, l_m) / l_m
        return np.exp(2j * np.pi * cycles)

    def analysis_windows(self, m: int, n_blocks: int) -> np.ndarray:
        """Fenêtres d'analyse des blocs 0…n_blocks-1, forme (n_blocks, L_m)"""
        key = (m, n_blocks)
        if key not in self._analysis_cache:
            if self.windows.aligned:
                win = aligned_analysis_windows(self.windows.analysis[m], self.fc, m, n_blocks)
            else:
                win = np.broadcast_to(self.windows.analysis[m], (n_blocks, self.fc.l_short[m]))
            self._analysis_cache[key] = win
        return self._analysis_cache[key]

    def process_blocks(self, blocks: np.ndarray, m: int, r0: int = 0) -> np.ndarray:
        """
        Traitement FD d'un lot de blocs (n, L_m) de la sous-bande m

        Returns:
            Spectres décalés, pondérés et tournés (n, L_m), avant placement en bins
        """
        l_m = self.fc.l_short[m]
        n_blocks = blocks.shape[0]
        win = self.analysis_windows(m, r0 + n_blocks)[r0:]
        spectra = np.fft.fft(blocks * win, axis=1)
        spectra = np.roll(spectra, math.ceil(l_m / 2), axis=1)
        spectra *= self.windows.fd[m] * self.scale[m]
        spectra *= self.theta(m, np.arange(r0, r0 + n_blocks))[:, None]
        return spectra


def create_pipeline(fc: FcConfig, windows: WindowSet) -> FcBlockPipeline:
    """Crée et retourne une instance de FcBlockPipeline"""
    return FcBlockPipeline(fc=fc, windows=windows)


def zero_pad_input(signal: ComplexSignal, fc: FcConfig, m: int) -> np.ndarray:
    """
    Entrée x_ZP,m : S_F,m zéros en tête et en queue

    Accepte aussi une entrée déjà complétée (longueur T_m + 2·S_F,m).
    """
    t_len, s_f = fc.t_len(m), fc.s_f[m]
    x = signal.samples
    if x.size == t_len + 2 * s_f:
        return x
    if x.size != t_len:
        raise SignalLengthError(f"sous-bande {m}: longueur {x.size} != T_m={t_len}")
    return np.concatenate([np.zeros(s_f, dtype=complex), x, np.zeros(s_f, dtype=complex)])


def buffer_blocks(x_zp: np.ndarray, fc: FcConfig, m: int) -> np.ndarray:
    """Blocs de L_m échantillons au pas L_S,m, forme (R_m, L_m)"""
    l_m, ls_m, r_m = fc.l_short[m], fc.l_s[m], fc.r_blocks[m]
    needed = (r_m - 1) * ls_m + l_m
    padded = np.zeros(max(needed, x_zp.size), dtype=complex)
    padded[:x_zp.size] = x_zp
    idx = np.arange(r_m)[:, None] * ls_m + np.arange(l_m)[None, :]
    return padded[idx]


def fc_synthesize_block(x_block: np.ndarray, r: int, pipeline: FcBlockPipeline,
                        m: int = 0) -> np.ndarray:
    """
    Contribution FD d'un bloc de la sous-bande m dans la trame de N bins

    Args:
        x_block: L_m échantillons du bloc r
        r: Indice du bloc
        pipeline: Chaîne FC
        m: Indice de sous-bande

    Returns:
        Trame FD de longueur N
    """
    fc = pipeline.fc
    x_block = np.asarray(x_block, dtype=complex)
    if x_block.size != fc.l_short[m]:
        raise SignalLengthError(f"|x_block|={x_block.size} != L_m={fc.l_short[m]}")
    if not 0 <= r < fc.r_max:
        raise SignalLengthError(f"r={r} hors de [0, R_max={fc.r_max})")
    spectrum = pipeline.process_blocks(x_block[None, :], m, r)[0]
    frame = np.zeros(fc.n_long, dtype=complex)
    frame[pipeline.target_bins[m]] = spectrum
    return frame


def overlap_add(frames_td: np.ndarray, n_s: int) -> np.ndarray:
    """Overlap-add ordonné des blocs temporels (R, N) au pas N_S"""
    n_blocks, n_long = frames_td.shape
    out = np.zeros((n_blocks - 1) * n_s + n_long, dtype=complex)
    for r in range(n_blocks):
        out[r * n_s:r * n_s + n_long] += frames_td[r]
    return out


def fc_synthesize_full(inputs: Sequence[ComplexSignal],
                       pipeline: FcBlockPipeline) -> Tuple[np.ndarray, List[int]]:
    """
    Synthèse FC complète, sortie non tronquée

    Returns:
        (sortie de longueur (R_max-1)·N_S + N, blocs consommés par sous-bande)
    """
    fc = pipeline.fc
    if len(inputs) != fc.n_subbands:
        raise SignalLengthError(f"{len(inputs)} entrées pour {fc.n_subbands} sous-bandes")

    frames = np.zeros((fc.r_max, fc.n_long), dtype=complex)
    consumed = []
    for m in range(fc.n_subbands):
        x_zp = zero_pad_input(inputs[m], fc, m)
        blocks = buffer_blocks(x_zp, fc, m)
        spectra = pipeline.process_blocks(blocks, m)
        frames[:blocks.shape[0], pipeline.target_bins[m]] += spectra
        consumed.append(blocks.shape[0])

    frames_td = np.fft.ifft(frames, axis=1) * pipeline.windows.synthesis
    return overlap_add(frames_td, fc.n_s), consumed


def trim_output(z: np.ndarray, fc: FcConfig) -> np.ndarray:
    """Retire N_O = I_m·S_F,m échantillons en tête et garde max_m I_m·T_m échantillons"""
    length = max(fc.interp[m] * fc.t_len(m) for m in range(fc.n_subbands))
    return z[fc.n_o:fc.n_o + length]


def fc_synthesize(inputs: Sequence[ComplexSignal], pipeline: FcBlockPipeline) -> ComplexSignal:
    """
    Synthèse FC-F-OFDM multi-sous-bandes

    Args:
        inputs: Signaux CP-OFDM bas débit par sous-bande (longueur T_m)
        pipeline: Chaîne FC

    Returns:
        Signal haut débit tronqué (longueur I_m·T_m) à f_s
    """
    z, _ = fc_synthesize_full(inputs, pipeline)
    return ComplexSignal(trim_output(z, pipeline.fc), pipeline.fc.fs_hz)


def fc_synthesize_components(inputs: Sequence[ComplexSignal],
                             pipeline: FcBlockPipeline) -> List[ComplexSignal]:
    """
    Contributions w_m de chaque sous-bande à la sortie (tronquées)

    Leur somme dans l'ordre croissant de m redonne fc_synthesize.
    """
    fc = pipeline.fc
    if len(inputs) != fc.n_subbands:
        raise SignalLengthError(f"{len(inputs)} entrées pour {fc.n_subbands} sous-bandes")
    components = []
    for m in range(fc.n_subbands):
        blocks = buffer_blocks(zero_pad_input(inputs[m], fc, m), fc, m)
        frames = np.zeros((fc.r_max, fc.n_long), dtype=complex)
        frames[:blocks.shape[0], pipeline.target_bins[m]] = pipeline.process_blocks(blocks, m)
        frames_td = np.fft.ifft(frames, axis=1) * pipeline.windows.synthesis
        components.append(ComplexSignal(trim_output(overlap_add(frames_td, fc.n_s), fc),
                                        fc.fs_hz))
    return components


# ==================== MODÈLE DENSE ====================

@dataclass
class DenseSynthesisModel:
    """Opérateurs F_m bloc-diagonaux avec recouvrements L_O,m (colonnes) et N_O (lignes)"""
    fc: FcConfig
    operators: List[np.ndarray]


def dense_block_operator(pipeline: FcBlockPipeline, m: int, r: int) -> np.ndarray:
    """
    F_{m,r} = √(N/L_m)·S·W_N⁻¹·M_{m,r}·D_m·P·W_L·A_{m,r} assemblé explicitement
    """
    fc = pipeline.fc
    l_m, n_long = fc.l_short[m], fc.n_long
    w_l = np.fft.fft(np.eye(l_m), axis=0)
    w_n_inv = np.fft.ifft(np.eye(n_long), axis=0)
    shift = np.roll(np.eye(l_m), math.ceil(l_m / 2), axis=0)
    mapping = np.zeros((n_long, l_m), dtype=complex)
    mapping[pipeline.target_bins[m], np.arange(l_m)] = pipeline.theta(m, r)
    a_mr = np.diag(pipeline.analysis_windows(m, r + 1)[r])
    d_m = np.diag(pipeline.windows.fd[m])
    s = np.diag(pipeline.windows.synthesis)
    return pipeline.scale[m] * (s @ w_n_inv @ mapping @ d_m @ shift @ w_l @ a_mr)


def build_dense_model(pipeline: FcBlockPipeline) -> DenseSynthesisModel:
    """
    Assemble les opérateurs F_m (réservé aux tailles de bureau)

    Raises:
        ModelSizeError: taille au-delà de MAX_DENSE_ELEMENTS
    """
    fc = pipeline.fc
    rows = fc.output_length()
    operators = []
    for m in range(fc.n_subbands):
        l_m, ls_m, r_m = fc.l_short[m], fc.l_s[m], fc.r_blocks[m]
        cols = (r_m - 1) * ls_m + l_m
        if rows * cols > MAX_DENSE_ELEMENTS:
            raise ModelSizeError(f"modèle dense {rows}x{cols} trop grand")
        f_m = np.zeros((rows, cols), dtype=complex)
        for r in range(r_m):
            f_m[r * fc.n_s:r * fc.n_s + fc.n_long,
                r * ls_m:r * ls_m + l_m] += dense_block_operator(pipeline, m, r)
        operators.append(f_m)
    logger.debug(f"📊 Modèle dense assemblé : {[op.shape for op in operators]}")
    return DenseSynthesisModel(fc=fc, operators=operators)


def fc_synthesize_dense(inputs: Sequence[ComplexSignal],
                        model: DenseSynthesisModel) -> ComplexSignal:
    """w_m = F_m·x_ZP,m puis z = Σ_m w_m, tronqué comme fc_synthesize"""
    fc = model.fc
    z = np.zeros(fc.output_length(), dtype=complex)
    for m, f_m in enumerate(model.operators):
        x_zp = zero_pad_input(inputs[m], fc, m)
        x = np.zeros(f_m.shape[1], dtype=complex)
        n = min(x.size, x_zp.size)
        x[:n] = x_zp[:n]
        z += f_m @ x
    return ComplexSignal(trim_output(z, fc), fc.fs_hz)
