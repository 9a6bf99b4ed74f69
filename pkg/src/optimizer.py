"""
Optimisation conjointe des fenêtres FD/TD

Minimise la pire MSE moyenne par sous-bande sous contraintes de SCR
(ou, en mode permuté, minimise le pire SCR sous contrainte de MSE)
par programmation quadratique séquentielle (SLSQP) avec gradients
par différences finies évalués en parallèle.
"""
import logging
import threading
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from src.constants import (
    CENTRAL_DIFF_MAX_PARAMS,
    DEFAULT_GAMMA,
    DEFAULT_MAX_ITERS,
    FD_STEP,
    FINAL_EVAL_SYMBOLS,
    MAX_LONG_CHECKS,
    SCR_CONSTRAINT_MARGIN_DB,
    SCR_GUARD_HZ,
    SCR_SOLVER_BACKOFF_DB,
    SLOT_SYMBOLS,
    SLSQP_RESTARTS,
    evm_timing_advance,
)
from src.fcfb import FcBlockPipeline, fc_synthesize_components, ols_windows
from src.metrics import (
    MeasurementFilter,
    MetricsReport,
    compute_mse,
    design_measurement_filter,
    measure_scr,
    subband_edges_hz,
    to_db,
)
from src.numerology import ConfigurationError, FcConfig
from src.ofdm import ComplexSignal, cp_ofdm_demod_highrate, cp_ofdm_modulate, random_grid, zf_equalize
from src.performance_monitor import get_monitor, measure_time
from src.windowing import (
    AnalysisWindowSpec,
    FdWindowSpec,
    SynthesisWindowSpec,
    WindowSet,
    analysis_param_count,
    build_analysis_window,
    build_fd_window,
    build_synthesis_window,
    dc_only_params,
    passband_bins,
    raised_cosine_ramp,
    save_windows,
)

logger = logging.getLogger(__name__)


class InfeasibleError(RuntimeError):
    """Aucun point de départ n'atteint la contrainte ; `report` porte le meilleur essai"""

    def __init__(self, message: str, report: "OptimizationReport"):
        super().__init__(message)
        self.report = report


# ==================== CAS ET SCÉNARIO ====================

@dataclass(frozen=True)
class CaseFlags:
    """Familles de fenêtres ajustables (la fenêtre FD l'est toujours)"""
    tdsw: bool
    tdaw: bool
    parameterization: str


CASES: Dict[str, CaseFlags] = {
    "I": CaseFlags(tdsw=False, tdaw=False, parameterization="full"),
    "II": CaseFlags(tdsw=True, tdaw=False, parameterization="full"),
    "III": CaseFlags(tdsw=False, tdaw=True, parameterization="full"),
    "IV": CaseFlags(tdsw=True, tdaw=True, parameterization="full"),
    "V": CaseFlags(tdsw=True, tdaw=True, parameterization="reduced"),
}


def case_flags(case: str) -> CaseFlags:
    if case not in CASES:
        raise ConfigurationError("case", f"cas inconnu : {case}")
    return CASES[case]


@dataclass(frozen=True)
class OptimizationScenario:
    """
    Problème d'optimisation des fenêtres

    Args:
        fc: Configuration FC (le nombre de symboles est fixé à l'évaluation)
        a_des_db: Cible de SCR A_des
        case: Cas I…V (familles ajustables et paramétrisation)
        l_tbw: Bins de transition FD par sous-bande
        gamma: γ de la paramétrisation réduite de la synthèse
        seed: Graine de la charge utile
        eval_symbols: B pendant l'optimisation (relevé au minimum de mesure)
        final_symbols: B de la réévaluation finale
        order: Ordre de modulation
        objective: 'mse' (min MSE s.c. SCR) ou 'scr' (min SCR s.c. MSE)
        mse_target_db: Contrainte de MSE du mode 'scr'
        guard_hz: Garde de la mesure de SCR
        max_iters: Itérations SLSQP maximales
        margin_db: Marge d'acceptation des contraintes
        synthesis_init: 'ols' (projection de la fenêtre OLS) ou 'dc'
        backoff_db: Recul de la cible de SCR vue par le solveur
        fd_step: Pas relatif des différences finies
        central_differences: Différences centrées (sinon avant) ; None : centrées
            si |Ξ| ≤ CENTRAL_DIFF_MAX_PARAMS
        restarts: Relances SLSQP depuis le meilleur point tant qu'il progresse
    """
    fc: FcConfig
    a_des_db: float = -50.0
    case: str = "I"
    l_tbw: Tuple[int, ...] = (8,)
    gamma: int = DEFAULT_GAMMA
    seed: int = 0
    eval_symbols: int = SLOT_SYMBOLS
    final_symbols: int = FINAL_EVAL_SYMBOLS
    order: int = 4
    objective: str = "mse"
    mse_target_db: float = -37.0
    guard_hz: float = SCR_GUARD_HZ
    max_iters: int = DEFAULT_MAX_ITERS
    margin_db: float = SCR_CONSTRAINT_MARGIN_DB
    synthesis_init: str = "ols"
    backoff_db: float = SCR_SOLVER_BACKOFF_DB
    fd_step: float = FD_STEP
    central_differences: Optional[bool] = None
    restarts: int = SLSQP_RESTARTS

    def __post_init__(self):
        case_flags(self.case)
        if len(self.l_tbw) != self.fc.n_subbands:
            raise ConfigurationError("l_tbw", f"{len(self.l_tbw)} valeurs pour "
                                              f"{self.fc.n_subbands} sous-bandes")
        if self.objective not in ("mse", "scr"):
            raise ConfigurationError("objective", f"objectif inconnu : {self.objective}")
        if self.synthesis_init not in ("ols", "dc"):
            raise ConfigurationError("synthesis_init", self.synthesis_init)

    @property
    def flags(self) -> CaseFlags:
        return case_flags(self.case)


# ==================== VECTEUR DE PARAMÈTRES ====================

@dataclass(frozen=True)
class ParamLayout:
    """Tailles des segments ξ_m, φ_m et ψ"""
    xi_sizes: Tuple[int, ...]
    phi_sizes: Tuple[int, ...]
    psi_size: int

    @property
    def size(self) -> int:
        return sum(self.xi_sizes) + sum(self.phi_sizes) + self.psi_size


def param_layout(scenario: OptimizationScenario) -> ParamLayout:
    """Forme de Ξ imposée par le cas du scénario"""
    flags, fc = scenario.flags, scenario.fc
    phi_sizes = []
    for sb in fc.subbands:
        if not flags.tdaw:
            phi_sizes.append(0)
        elif flags.parameterization == "full":
            phi_sizes.append(sb.l_ofdm)
        else:
            phi_sizes.append(analysis_param_count(sb.l_ofdm, sb.l_act))
    if not flags.tdsw:
        psi_size = 0
    elif flags.parameterization == "full":
        psi_size = fc.n_long
    else:
        psi_size = 2 * scenario.gamma - 1
    return ParamLayout(tuple(scenario.l_tbw), tuple(phi_sizes), psi_size)


@dataclass
class ParamVector:
    """Ξ = (tous les ξ_m, tous les φ_m, ψ)"""
    xi: List[np.ndarray]
    phi: List[np.ndarray]
    psi: np.ndarray

    def flatten(self) -> np.ndarray:
        return np.concatenate([*self.xi, *self.phi, self.psi]).astype(float)

    @classmethod
    def unflatten(cls, vector: np.ndarray, layout: ParamLayout) -> "ParamVector":
        vector = np.asarray(vector, dtype=float)
        if vector.size != layout.size:
            raise ValueError(f"|Ξ|={vector.size} != {layout.size}")
        pos = 0
        xi, phi = [], []
        for n in layout.xi_sizes:
            xi.append(vector[pos:pos + n])
            pos += n
        for n in layout.phi_sizes:
            phi.append(vector[pos:pos + n])
            pos += n
        return cls(xi=xi, phi=phi, psi=vector[pos:pos + layout.psi_size])


def ols_synthesis_window(fc: FcConfig) -> np.ndarray:
    return ols_windows(fc).synthesis


def guard_ramp_bins(scenario: OptimizationScenario) -> int:
    """Bins de transition logeables dans la garde de mesure (floor(garde / f_BS))"""
    return int(scenario.guard_hz // float(scenario.fc.fc_bin_spacing_hz))


def guard_limited_ramp(l_tbw: int, n_ramp: int) -> np.ndarray:
    """ξ nul côté bande coupée, rampe en cosinus surélevé sur les n_ramp bins intérieurs"""
    n_ramp = max(0, min(n_ramp, l_tbw))
    return np.concatenate([np.zeros(l_tbw - n_ramp), raised_cosine_ramp(n_ramp)])


def initial_params(scenario: OptimizationScenario,
                   ramp_bins: Optional[int] = None) -> ParamVector:
    """
    Point de départ : rampes en cosinus surélevé, analyse toute à un,
    synthèse OLS (ou sa projection sur γ bins en paramétrisation réduite)

    Args:
        scenario: Problème
        ramp_bins: Longueur de la rampe (défaut : toute la transition)
    """
    fc, flags, layout = scenario.fc, scenario.flags, param_layout(scenario)
    xi = [raised_cosine_ramp(n) if ramp_bins is None else guard_limited_ramp(n, ramp_bins)
          for n in layout.xi_sizes]
    phi = []
    for sb, n in zip(fc.subbands, layout.phi_sizes):
        phi.append(np.ones(n) if flags.parameterization == "full" else dc_only_params(n, sb.l_ofdm))
    if layout.psi_size == 0:
        psi = np.zeros(0)
    elif flags.parameterization == "full":
        psi = ols_synthesis_window(fc)
    elif scenario.synthesis_init == "dc":
        psi = dc_only_params(layout.psi_size, fc.n_long * float(1 - fc.overlap))
    else:
        beta = np.fft.fft(ols_synthesis_window(fc))[:scenario.gamma]
        psi = np.concatenate([[beta[0].real], beta[1:].real, beta[1:].imag])
    return ParamVector(xi=xi, phi=phi, psi=psi)


def build_windows(params: ParamVector, scenario: OptimizationScenario) -> WindowSet:
    """Jeu de fenêtres correspondant à Ξ"""
    fc, flags = scenario.fc, scenario.flags
    fd, analysis = [], []
    for m, sb in enumerate(fc.subbands):
        l_m = fc.l_short[m]
        fd.append(build_fd_window(FdWindowSpec(l_m, passband_bins(sb, l_m),
                                               scenario.l_tbw[m], params.xi[m])))
        if not flags.tdaw:
            analysis.append(np.ones(sb.l_ofdm))
        elif flags.parameterization == "full":
            analysis.append(params.phi[m])
        else:
            analysis.append(build_analysis_window(AnalysisWindowSpec(sb.l_ofdm, sb.l_act,
                                                                     params.phi[m])))
    if not flags.tdsw:
        synthesis = ols_synthesis_window(fc)
    elif flags.parameterization == "full":
        synthesis = params.psi
    else:
        synthesis = build_synthesis_window(SynthesisWindowSpec(fc.n_long, scenario.gamma,
                                                               params.psi))
    return WindowSet(fd=fd, analysis=analysis, synthesis=synthesis, aligned=True)


# ==================== ÉVALUATION ====================

@dataclass
class EvaluationResult:
    """Résultat d'une évaluation de la chaîne TX/RX"""
    mse_avg_db: List[float]
    mse_max_db: List[float]
    scr_db: List[Optional[float]]
    objective_db: float
    constraints_db: List[float]
    report: MetricsReport
    objective_value: float = 0.0
    solver_constraints: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_violation_db(self) -> float:
        """Plus grand dépassement de contrainte (≤ 0 si toutes satisfaites)"""
        return max(self.constraints_db) if self.constraints_db else float("-inf")


def measurable_sides(fc: FcConfig, m: int, guard_hz: float,
                     filt: MeasurementFilter) -> List[str]:
    """Côtés dont la bande d'observation tient dans ±f_s/2"""
    center = float(fc.subbands[m].center_bin * fc.fc_bin_spacing_hz)
    left, right = subband_edges_hz(fc.subbands[m], center)
    reach = guard_hz + 2 * filt.passband_hz + filt.transition_hz
    nyquist = filt.fs_hz / 2
    sides = []
    if left - reach > -nyquist:
        sides.append("left")
    if right + reach < nyquist:
        sides.append("right")
    return sides


def minimum_measurement_symbols(fc: FcConfig, filt: MeasurementFilter) -> int:
    """Plus petit B donnant assez d'échantillons établis pour la mesure de SCR"""
    needed = filt.equivalent_length - 1 + filt.min_steady_samples()
    per_symbol = min(fc.interp[m] * fc.subbands[m].symbol_length for m in range(fc.n_subbands))
    return -(-needed // per_symbol)


def measure_components(fc: FcConfig, components: Sequence[ComplexSignal],
                       grids: Sequence[np.ndarray], guard_hz: float,
                       filt: MeasurementFilter,
                       sides: Sequence[Sequence[str]]) -> MetricsReport:
    """
    MSE (RX haut débit + ZF sur la somme des contributions) et SCR de chaque contribution

    Args:
        fc: Configuration (B fixé)
        components: Signal émis de chaque sous-bande à f_s
        grids: Grilles émises
        guard_hz: Garde de la mesure de SCR
        filt: Filtre de mesure
        sides: Côtés mesurables par sous-bande
    """
    total = np.zeros(max(c.samples.size for c in components), dtype=complex)
    for c in components:
        total[:c.samples.size] += c.samples
    report = MetricsReport()
    for m, sb in enumerate(fc.subbands):
        interp = fc.interp[m]
        center = sb.center_bin * fc.fc_bin_spacing_hz
        span = interp * sb.t_len
        rx = cp_ofdm_demod_highrate(ComplexSignal(total[:span], fc.fs_hz),
                                    interp * sb.l_ofdm, interp * sb.l_cp, sb, center,
                                    timing_advance=evm_timing_advance(interp * sb.l_cp))
        metrics = compute_mse(grids[m], zf_equalize(rx, grids[m]), index=m)
        for side in sides[m]:
            value = measure_scr(components[m], sb, side, center, guard_hz, filt)
            setattr(metrics, f"scr_{side}_db", value)
        report.subbands.append(metrics)
    return report


class ChainEvaluator:
    """
    Évaluateur déterministe de la chaîne TX (FC) / RX (haut débit) / ZF / métriques

    La charge utile est tirée une fois ; les évaluations sont mises en cache par Ξ.
    """

    def __init__(self, scenario: OptimizationScenario, n_symbols: Optional[int] = None,
                 cache_size: int = 4096):
        self.scenario = scenario
        self.layout = param_layout(scenario)
        base = scenario.fc
        self.filt = design_measurement_filter(float(base.fs_hz))
        self.sides = [measurable_sides(base, m, scenario.guard_hz, self.filt)
                      for m in range(base.n_subbands)]
        b = scenario.eval_symbols if n_symbols is None else n_symbols
        if any(self.sides):
            b = max(b, minimum_measurement_symbols(base.with_symbols(1), self.filt))
        self.n_symbols = b
        self.fc = base.with_symbols(b)
        self.grids = [random_grid(sb, scenario.order, scenario.seed * 1000 + m)
                      for m, sb in enumerate(self.fc.subbands)]
        self.inputs = [cp_ofdm_modulate(g, sb.l_ofdm, sb.l_cp, sb.low_rate_hz)
                       for g, sb in zip(self.grids, self.fc.subbands)]
        self._cache: "OrderedDict[bytes, EvaluationResult]" = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()
        self.monitor = get_monitor()
        logger.info(f"✅ ChainEvaluator initialisé : cas {scenario.case}, |Ξ|={self.layout.size}, "
                    f"B={b}")

    def windows(self, vector: np.ndarray) -> WindowSet:
        scenario = replace(self.scenario, fc=self.fc)
        return build_windows(ParamVector.unflatten(vector, self.layout), scenario)

    def evaluate(self, vector: np.ndarray) -> EvaluationResult:
        """Évalue Ξ (résultat mis en cache)"""
        vector = np.ascontiguousarray(vector, dtype=float)
        key = vector.tobytes()
        with self._lock:
            cached = self._cache.get(key)
            if cached is not None:
                self._cache.move_to_end(key)
        if cached is not None:
            self.monitor.record_evaluation(0.0, from_cache=True)
            return cached

        start = time.perf_counter()
        result = self._compute(vector)
        self.monitor.record_evaluation(time.perf_counter() - start)
        with self._lock:
            self._cache[key] = result
            if len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return result

    def _compute(self, vector: np.ndarray) -> EvaluationResult:
        return self.measure(self.windows(vector))

    def measure(self, windows: WindowSet) -> EvaluationResult:
        """Synthèse FC avec un jeu de fenêtres quelconque puis mesure"""
        pipeline = FcBlockPipeline(fc=self.fc, windows=windows)
        components = fc_synthesize_components(self.inputs, pipeline)
        return self.score(measure_components(self.fc, components, self.grids,
                                             self.scenario.guard_hz, self.filt, self.sides))

    def score(self, report: MetricsReport) -> EvaluationResult:
        """Objectif et contraintes du scénario à partir d'un rapport de métriques"""
        scenario = self.scenario
        solver_cons: List[float] = []
        mse_avg = [sb.mse_avg_db for sb in report.subbands]
        mse_max = [sb.mse_max_db for sb in report.subbands]
        scr = [sb.scr_db for sb in report.subbands]

        if scenario.objective == "mse":
            objective_value = max(float(np.mean(sb.mse)) for sb in report.subbands)
            objective_db = to_db(objective_value)
            constraints = [s - scenario.a_des_db for s in scr if s is not None]
            target = scenario.a_des_db - scenario.backoff_db
            for sb in report.subbands:
                for side in ("left", "right"):
                    value = getattr(sb, f"scr_{side}_db")
                    if value is not None:
                        # marge en amplitude : 1 - sqrt(P_i / (P_s·10^(A/10)))
                        solver_cons.append(1.0 - 10.0 ** ((value - target) / 20.0))
        else:
            measured = [s for s in scr if s is not None]
            objective_db = max(measured) if measured else float("-inf")
            objective_value = objective_db
            constraints = [v - scenario.mse_target_db for v in mse_avg]
            solver_cons = [(scenario.mse_target_db - v) / 10.0 for v in mse_avg]

        return EvaluationResult(mse_avg_db=mse_avg, mse_max_db=mse_max, scr_db=scr,
                                objective_db=objective_db, constraints_db=constraints,
                                report=report, objective_value=objective_value,
                                solver_constraints=np.array(solver_cons))

    def is_feasible(self, result: EvaluationResult) -> bool:
        return result.max_violation_db <= self.scenario.margin_db

    # ---------- différences finies ----------

    def _steps(self, vector: np.ndarray) -> np.ndarray:
        return self.scenario.fd_step * np.maximum(1.0, np.abs(vector))

    def evaluate_many(self, vectors: Sequence[np.ndarray], jobs: int = 1) -> List[EvaluationResult]:
        """Évalue une liste de points, en parallèle si jobs > 1 (ordre conservé)"""
        if jobs <= 1:
            return [self.evaluate(v) for v in vectors]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(self.evaluate, vectors))

    def jacobians(self, vector: np.ndarray, scale: float, jobs: int = 1,
                  central: Optional[bool] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Gradient de l'objectif du solveur et jacobienne des contraintes

        Args:
            vector: Point Ξ
            scale: Normalisation de l'objectif
            jobs: Évaluations en parallèle
            central: Différences centrées (défaut : scenario.central_differences)
        """
        vector = np.asarray(vector, dtype=float)
        if central is None:
            central = self.scenario.central_differences
        if central is None:
            central = vector.size <= CENTRAL_DIFF_MAX_PARAMS
        base = self.evaluate(vector)
        steps = self._steps(vector)
        shifted = []
        for sign in ((1.0, -1.0) if central else (1.0,)):
            for i in range(vector.size):
                point = vector.copy()
                point[i] += sign * steps[i]
                shifted.append(point)
        results = self.evaluate_many(shifted, jobs)
        plus = results[:vector.size]
        if central:
            minus = results[vector.size:]
            widths = 2 * steps
        else:
            minus = [base] * vector.size
            widths = steps
        grad = np.array([(p.objective_value - q.objective_value) / (scale * h)
                         for p, q, h in zip(plus, minus, widths)])
        jac = np.array([(p.solver_constraints - q.solver_constraints) / h
                        for p, q, h in zip(plus, minus, widths)]).T
        return grad, jac.reshape(base.solver_constraints.size, vector.size)

    def objective_gradient(self, vector: np.ndarray, coords: Sequence[int],
                           central: bool = False, step: float = 1e-6) -> np.ndarray:
        """Dérivées partielles de objective_value sur quelques coordonnées"""
        vector = np.asarray(vector, dtype=float)
        f0 = self.evaluate(vector).objective_value
        grads = []
        for i in coords:
            plus = vector.copy()
            plus[i] += step
            f_plus = self.evaluate(plus).objective_value
            if central:
                minus = vector.copy()
                minus[i] -= step
                grads.append((f_plus - self.evaluate(minus).objective_value) / (2 * step))
            else:
                grads.append((f_plus - f0) / step)
        return np.array(grads)


# ==================== OPTIMISATION ====================

@dataclass
class OptimizationReport:
    """Rapport d'une optimisation"""
    x_star: np.ndarray
    layout: ParamLayout
    start: EvaluationResult
    final: EvaluationResult
    final_long: Optional[EvaluationResult]
    feasible: bool
    converged: bool
    message: str
    n_iterations: int
    n_symbols: int
    wall_time_s: float
    history: List[Dict[str, float]] = field(default_factory=list)
    monitor: Dict[str, object] = field(default_factory=dict)

    @property
    def objective_db(self) -> float:
        return self.final.objective_db


def _history_row(iteration: int, result: EvaluationResult) -> Dict[str, float]:
    measured = [s for s in result.scr_db if s is not None]
    return {
        "iteration": iteration,
        "objective_db": result.objective_db,
        "worst_mse_avg_db": max(result.mse_avg_db),
        "worst_scr_db": max(measured) if measured else float("nan"),
        "max_violation_db": result.max_violation_db if result.constraints_db else float("nan"),
    }


def select_start(scenario: OptimizationScenario,
                 evaluator: Optional[ChainEvaluator] = None) -> Tuple[np.ndarray, EvaluationResult]:
    """
    Point de départ : rampe complète ou rampes limitées à la garde de mesure

    Les rampes de floor(garde / f_BS) bins ou moins laissent la bande d'observation
    du SCR dans la partie nulle de ξ. Le meilleur candidat faisable est retenu,
    à défaut le moins infaisable.
    """
    evaluator = evaluator or ChainEvaluator(scenario)
    full = initial_params(scenario).flatten()
    candidates = [full]
    if evaluator.layout.xi_sizes and any(evaluator.sides):
        longest = min(guard_ramp_bins(scenario), max(evaluator.layout.xi_sizes))
        candidates += [initial_params(scenario, ramp_bins=n).flatten()
                       for n in range(longest, 0, -1)]
    scored = [(x, evaluator.evaluate(x)) for x in candidates]
    feasible = [(x, r) for x, r in scored if evaluator.is_feasible(r)]
    if feasible:
        return min(feasible, key=lambda item: item[1].objective_value)
    return min(scored, key=lambda item: item[1].max_violation_db)


@measure_time
def optimize(scenario: OptimizationScenario, x0: Optional[np.ndarray] = None,
             jobs: int = 1, max_iters: Optional[int] = None,
             final_eval: bool = True) -> Tuple[np.ndarray, OptimizationReport]:
    """
    Optimise Ξ pour le scénario

    SLSQP est relancé depuis le meilleur point tant qu'il progresse
    (au plus scenario.restarts fois, dans la limite de max_iters itérations).

    Args:
        scenario: Problème
        x0: Point de départ (défaut select_start)
        jobs: Sondes de différences finies en parallèle
        max_iters: Surcharge de scenario.max_iters
        final_eval: Réévaluer Ξ* avec B ≥ final_symbols ; un Ξ* qui ne tient
            pas la contrainte à ce B rend le rapport infaisable

    Returns:
        (Ξ*, rapport) ; le rapport signale l'infaisabilité sans lever d'exception
    """
    started = time.perf_counter()
    monitor = get_monitor()
    monitor.record_optimization()
    evaluator = ChainEvaluator(scenario)
    if x0 is None:
        x0, start = select_start(scenario, evaluator)
    else:
        x0 = np.asarray(x0, dtype=float)
        start = evaluator.evaluate(x0)
    max_iters = scenario.max_iters if max_iters is None else max_iters
    if scenario.objective == "mse":
        scale = max(start.objective_value, 1e-30)
    else:
        scale = 10.0
    logger.info(f"🚀 Optimisation cas {scenario.case} : départ {start.objective_db:.2f} dB, "
                f"|Ξ|={x0.size}")

    jac_cache: Dict[bytes, Tuple[np.ndarray, np.ndarray]] = {}

    def _jac(x):
        key = np.ascontiguousarray(x, dtype=float).tobytes()
        if key not in jac_cache:
            jac_cache.clear()
            jac_cache[key] = evaluator.jacobians(x, scale, jobs)
        return jac_cache[key]

    def fun(x):
        return evaluator.evaluate(x).objective_value / scale, _jac(x)[0]

    def cons(x):
        return evaluator.evaluate(x).solver_constraints

    def cons_jac(x):
        return _jac(x)[1]

    iterates = [x0.copy()]
    history = [_history_row(0, start)]

    def callback(xk, *args):
        iterates.append(np.array(xk, dtype=float))
        history.append(_history_row(len(iterates) - 1, evaluator.evaluate(xk)))
        logger.debug(f"📊 itération {len(iterates) - 1} : {history[-1]['objective_db']:.2f} dB")

    def _ranked(points):
        # faisables par objectif croissant, puis infaisables par dépassement croissant
        evaluated = [(x, evaluator.evaluate(x)) for x in points]
        ok = sorted([item for item in evaluated if evaluator.is_feasible(item[1])],
                    key=lambda item: item[1].objective_value)
        ko = sorted([item for item in evaluated if not evaluator.is_feasible(item[1])],
                    key=lambda item: item[1].max_violation_db)
        return ok, ko

    constraints = []
    if start.solver_constraints.size:
        constraints.append({"type": "ineq", "fun": cons, "jac": cons_jac})

    candidates = [x0]
    if x0.size == 0 or max_iters == 0:
        converged, message = True, "aucun paramètre ajustable"
    else:
        converged, message = False, ""
        best_x, used = x0, 0
        for attempt in range(scenario.restarts + 1):
            budget = max_iters - used
            if budget <= 0:
                break
            previous = evaluator.evaluate(best_x)
            result = minimize(fun, best_x, jac=True, method="SLSQP", constraints=constraints,
                              callback=callback, options={"maxiter": budget, "ftol": 1e-10})
            used += max(int(result.nit), 1)
            converged, message = bool(result.success), str(result.message)
            candidates = iterates + [np.asarray(result.x, dtype=float)]
            ok, ko = _ranked(candidates)
            best_x = ok[0][0] if ok else ko[0][0]
            best = evaluator.evaluate(best_x)
            gain = previous.objective_db - best.objective_db
            if attempt and not ok:
                break
            if evaluator.is_feasible(previous) and gain < 0.01:
                break
            logger.debug(f"📊 relance {attempt + 1} : gain {gain:.3f} dB")

    ok, ko = _ranked(candidates)
    x_star, final = ok[0] if ok else ko[0]
    is_feasible = bool(ok)

    final_long = None
    if final_eval:
        long_b = max(scenario.final_symbols, evaluator.n_symbols)
        long_evaluator = ChainEvaluator(scenario, n_symbols=long_b)
        final_long = long_evaluator.evaluate(x_star)
        if is_feasible and not evaluator.is_feasible(final_long):
            # candidat suivant tenant la contrainte avec B long
            is_feasible = False
            for x, short in ok[1:MAX_LONG_CHECKS]:
                long_result = long_evaluator.evaluate(x)
                if evaluator.is_feasible(long_result):
                    x_star, final, final_long, is_feasible = x, short, long_result, True
                    break
            if not is_feasible:
                logger.warning(f"⚠️ Contrainte perdue à B={long_b} : dépassement "
                               f"{final_long.max_violation_db:.2f} dB")

    report = OptimizationReport(
        x_star=x_star, layout=evaluator.layout, start=start, final=final,
        final_long=final_long, feasible=is_feasible, converged=converged, message=message,
        n_iterations=len(iterates) - 1, n_symbols=evaluator.n_symbols,
        wall_time_s=time.perf_counter() - started, history=history,
        monitor=monitor.get_report())
    if is_feasible:
        logger.info(f"✅ Optimisation terminée : {final.objective_db:.2f} dB "
                    f"({report.n_iterations} itérations)")
    else:
        logger.warning(f"⚠️ Contraintes non satisfaites : dépassement "
                       f"{final.max_violation_db:.2f} dB")
    return x_star, report


def perturbed_start(scenario: OptimizationScenario, seed: int,
                    base: Optional[np.ndarray] = None) -> np.ndarray:
    """Point de départ perturbé pour le multi-départ (autour de base, défaut initial_params)"""
    layout = param_layout(scenario)
    params = (initial_params(scenario) if base is None
              else ParamVector.unflatten(base, layout))
    rng = np.random.default_rng(seed)
    xi = [np.clip(x + rng.uniform(-0.05, 0.05, x.size), 0.0, 1.0) for x in params.xi]

    def _noisy(segment: np.ndarray) -> np.ndarray:
        if segment.size == 0:
            return segment
        scale = 0.01 * max(1.0, float(np.abs(segment).max()))
        return segment + rng.normal(0.0, scale / np.sqrt(segment.size), segment.size)

    return ParamVector(xi=xi, phi=[_noisy(p) for p in params.phi],
                       psi=_noisy(params.psi)).flatten()


def multistart(scenario: OptimizationScenario, k_starts: int = 1,
               seeds: Optional[Sequence[int]] = None, jobs: int = 1,
               max_iters: Optional[int] = None) -> Tuple[np.ndarray, OptimizationReport, List[OptimizationReport]]:
    """
    Optimisations depuis k départs (le premier non perturbé)

    Returns:
        (meilleur Ξ*, son rapport, rapports de tous les départs)

    Raises:
        InfeasibleError: aucun départ faisable
    """
    if k_starts < 1:
        raise ValueError("k_starts >= 1")
    seeds = list(seeds) if seeds is not None else list(range(1, k_starts))
    base = select_start(scenario)[0] if k_starts > 1 else None
    starts = [base] + [perturbed_start(scenario, s, base) for s in seeds[:k_starts - 1]]

    def _run(x0):
        return optimize(scenario, x0=x0, jobs=1 if len(starts) > 1 else jobs,
                        max_iters=max_iters)

    if jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run, starts))
    else:
        outcomes = [_run(x0) for x0 in starts]

    reports = [rep for _, rep in outcomes]
    best: Optional[OptimizationReport] = None
    for rep in reports:
        if rep.feasible and (best is None or rep.final.objective_value < best.final.objective_value):
            best = rep
    finals = [rep.objective_db for rep in reports if rep.feasible]
    if finals:
        logger.info(f"📊 Multi-départ : {len(finals)}/{len(reports)} faisables, "
                    f"dispersion {max(finals) - min(finals):.2f} dB")
    if best is None:
        fallback = min(reports, key=lambda rep: rep.final.max_violation_db)
        raise InfeasibleError("aucun départ faisable", fallback)
    return best.x_star, best, reports


# ==================== ÉMISSION ====================

def history_frame(report: OptimizationReport) -> pd.DataFrame:
    columns = ["iteration", "objective_db", "worst_mse_avg_db", "worst_scr_db", "max_violation_db"]
    return pd.DataFrame(report.history, columns=columns)


def write_history_csv(report: OptimizationReport, path: Union[str, Path]) -> Path:
    """Historique des itérés en CSV (12 chiffres significatifs)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    history_frame(report).to_csv(path, index=False, float_format="%.12g")
    return path


def save_result(report: OptimizationReport, scenario: OptimizationScenario,
                path: Union[str, Path]) -> Path:
    """Écrit les fenêtres de Ξ* au format texte du module de fenêtrage"""
    windows = build_windows(ParamVector.unflatten(report.x_star, report.layout), scenario)
    return save_windows(path, windows)
