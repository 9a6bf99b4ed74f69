"""
Interface en ligne de commande : exécution de scénarios, balayages,
tables de complexité et import/export de fenêtres.

Usage:
    python app.py run data/scenarios/example1_caseI.json
    python app.py sweep data/scenarios/example2_prb_sweep.json --jobs 4
    python app.py counts data/scenarios/table3_fftcounts.json
    python app.py windows export data/scenarios/example1_caseV.json --file w.txt
    python app.py windows import w.txt data/scenarios/example1_caseV.json
"""
import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from src.baselines import (
    WolaConfig,
    design_fofdm_prototype,
    fofdm_tx,
    plain_tx,
    upsampling_factor,
    wola_tx,
)
from src.complexity import (
    UnsupportedLengthError,
    WindowFlags,
    baseline_op_count,
    chain_op_count,
    fft_table_frame,
    scheme_comparison_frame,
    write_frame_csv,
)
from src.fcfb import FcBlockPipeline, fc_synthesize_components, ola_windows, ols_windows
from src.metrics import (
    INI_RECEIVERS,
    MaskError,
    MetricsReport,
    format_summary,
    measure_ini,
    summary_items,
    write_report_csv,
)
from src.numerology import (
    ConfigurationError,
    FcConfig,
    SubbandConfig,
    derive_fc_params,
    derive_ofdm_ifft_length,
    occupied_band_hz,
    to_fraction,
    validate_mixed_numerology,
)
from src.ofdm import ComplexSignal, SignalLengthError, evm_limit_pct
from src.optimizer import (
    CASES,
    ChainEvaluator,
    InfeasibleError,
    OptimizationReport,
    OptimizationScenario,
    ParamVector,
    build_windows,
    initial_params,
    measure_components,
    multistart,
    param_layout,
    write_history_csv,
)
from src.performance_monitor import get_monitor
from src.windowing import (
    FdWindowSpec,
    WindowError,
    WindowSet,
    build_fd_window,
    load_windows,
    passband_bins,
    raised_cosine_ramp,
    save_windows,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2

CASE_MODES = {f"case{case}": case for case in CASES}
WINDOW_MODES = (*CASE_MODES, "ols", "ola", "wola", "f-ofdm", "plain")
SWEEP_AXES = ("n_prb", "ini_guard_khz")
INI_TX_MODES = ("fc", "f-ofdm", "wola", "plain")
COUNT_TABLES = ("fft", "schemes", "chain")


class ScenarioError(ValueError):
    """Scénario invalide ; `field` nomme la clé fautive"""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ==================== SCHÉMA DES SCÉNARIOS ====================

@dataclass(frozen=True)
class SubbandSpec:
    n_prb: int
    scs_khz: float = 15.0
    l_ofdm: Optional[int] = None
    l_cp: Optional[int] = None
    center_khz: float = 0.0


@dataclass(frozen=True)
class NumerologySpec:
    fs_mhz: float
    n_long: int
    overlap: str = "1/2"
    subbands: Tuple[SubbandSpec, ...] = ()


@dataclass(frozen=True)
class WindowSpec:
    mode: str = "caseI"
    l_tbw: Tuple[int, ...] = ()
    gamma: int = 20
    synthesis_init: str = "ols"
    slope: Optional[int] = None
    n_filt: Optional[int] = None


@dataclass(frozen=True)
class OptimizationSpec:
    a_des_db: float = -50.0
    objective: str = "mse"
    mse_target_db: float = -37.0
    seed: int = 0
    max_iters: int = 200
    k_starts: int = 1
    eval_symbols: int = 14


@dataclass(frozen=True)
class MeasurementSpec:
    n_symbols: int = 100
    guard_khz: float = 180.0
    order: int = 4


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: Tuple[float, ...] = ()


@dataclass(frozen=True)
class IniSpec:
    victim_n_prb: int = 4
    victim_scs_khz: float = 15.0
    victim_l_ofdm: Optional[int] = None
    victim_l_cp: Optional[int] = None
    tx_modes: Tuple[str, ...] = ("fc", "f-ofdm", "plain")
    receivers: Tuple[str, ...] = INI_RECEIVERS


@dataclass(frozen=True)
class CountsSpec:
    table: str = "fft"
    symbols: Tuple[int, ...] = (1, 7, 14)
    l_tbw: int = 0


@dataclass(frozen=True)
class Scenario:
    """Scénario complet tel que lu depuis le fichier JSON"""
    name: str
    numerology: Optional[NumerologySpec] = None
    windows: WindowSpec = field(default_factory=WindowSpec)
    optimization: OptimizationSpec = field(default_factory=OptimizationSpec)
    measurement: MeasurementSpec = field(default_factory=MeasurementSpec)
    sweep: Optional[SweepSpec] = None
    ini: Optional[IniSpec] = None
    counts: Optional[CountsSpec] = None
    output_dir: Optional[str] = None


_NESTED = {
    "numerology": NumerologySpec,
    "windows": WindowSpec,
    "optimization": OptimizationSpec,
    "measurement": MeasurementSpec,
    "sweep": SweepSpec,
    "ini": IniSpec,
    "counts": CountsSpec,
}


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ScenarioError(path, "objet JSON attendu")
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ScenarioError(f"{path}.{key}" if path else key, "clé inconnue")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ScenarioError(f"{path}.{f.name}" if path else f.name, "clé obligatoire")
            continue
        value = data[f.name]
        where = f"{path}.{f.name}" if path else f.name
        if cls is NumerologySpec and f.name == "subbands":
            if not isinstance(value, list) or not value:
                raise ScenarioError(where, "liste non vide attendue")
            value = tuple(_build(SubbandSpec, v, f"{where}[{i}]") for i, v in enumerate(value))
        elif cls is Scenario and f.name in _NESTED:
            value = _build(_NESTED[f.name], value, where)
        elif isinstance(value, list):
            value = tuple(value)
        elif cls is NumerologySpec and f.name == "overlap":
            value = str(to_fraction(str(value)))
        kwargs[f.name] = value
    return cls(**kwargs)


def parse_scenario(data: Dict[str, Any]) -> Scenario:
    """
    Construit un Scenario depuis un dictionnaire JSON

    Raises:
        ScenarioError: clé inconnue, manquante ou valeur hors domaine
    """
    scenario = _build(Scenario, data, "")
    if scenario.windows.mode not in WINDOW_MODES:
        raise ScenarioError("windows.mode", f"mode inconnu : {scenario.windows.mode}")
    if scenario.optimization.objective not in ("mse", "scr"):
        raise ScenarioError("optimization.objective", scenario.optimization.objective)
    if scenario.sweep is not None:
        if scenario.sweep.axis not in SWEEP_AXES:
            raise ScenarioError("sweep.axis", f"axe inconnu : {scenario.sweep.axis}")
        if scenario.sweep.axis == "ini_guard_khz" and scenario.ini is None:
            raise ScenarioError("ini", "bloc requis pour l'axe ini_guard_khz")
    if scenario.ini is not None:
        for mode in scenario.ini.tx_modes:
            if mode not in INI_TX_MODES:
                raise ScenarioError("ini.tx_modes", f"émetteur inconnu : {mode}")
        for receiver in scenario.ini.receivers:
            if receiver not in INI_RECEIVERS:
                raise ScenarioError("ini.receivers", f"récepteur inconnu : {receiver}")
    if scenario.counts is not None and scenario.counts.table not in COUNT_TABLES:
        raise ScenarioError("counts.table", f"table inconnue : {scenario.counts.table}")
    if scenario.numerology is None and (scenario.counts is None or scenario.counts.table == "chain"):
        raise ScenarioError("numerology", "clé obligatoire")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Lit et valide un fichier de scénario JSON"""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if "name" not in data:
        data = {"name": path.stem, **data}
    scenario = parse_scenario(data)
    logger.info(f"✅ Scénario chargé : {scenario.name}")
    return scenario


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Forme normalisée (clés triées, tuples en listes, blocs absents omis)"""
    def _plain(obj):
        if dataclasses.is_dataclass(obj):
            return {k: _plain(v) for k, v in sorted(vars(obj).items()) if v is not None}
        if isinstance(obj, tuple):
            return [_plain(v) for v in obj]
        return obj
    return _plain(scenario)


# ==================== DÉRIVATIONS ====================

def _default_cp(l_ofdm: int, where: str) -> int:
    l_cp = Fraction(9 * l_ofdm, 128)
    if l_cp.denominator != 1:
        raise ScenarioError(where, f"L_CP à préciser pour L_OFDM={l_ofdm}")
    return int(l_cp)


def build_fc(spec: NumerologySpec, n_symbols: int = 1,
             n_prb: Optional[int] = None) -> FcConfig:
    """
    FcConfig du bloc de numérologie

    Args:
        spec: Bloc numérologie
        n_symbols: Nombre de symboles de la rafale
        n_prb: Surcharge du nombre de PRB de toutes les sous-bandes (balayage)
    """
    fs_hz = to_fraction(spec.fs_mhz) * 1_000_000
    bin_hz = fs_hz / spec.n_long
    subbands = []
    for m, sb in enumerate(spec.subbands):
        prb = sb.n_prb if n_prb is None else int(n_prb)
        l_ofdm = sb.l_ofdm if sb.l_ofdm is not None else derive_ofdm_ifft_length(prb)
        l_cp = sb.l_cp if sb.l_cp is not None else _default_cp(l_ofdm, f"numerology.subbands[{m}].l_cp")
        center = to_fraction(sb.center_khz) * 1000 / bin_hz
        if center.denominator != 1:
            raise ScenarioError(f"numerology.subbands[{m}].center_khz",
                                f"centre non multiple de f_BS={float(bin_hz) / 1e3:g} kHz")
        subbands.append(SubbandConfig(index=m, n_prb=prb, scs_hz=to_fraction(sb.scs_khz) * 1000,
                                      l_ofdm=l_ofdm, l_cp=l_cp, center_bin=int(center),
                                      n_symbols=n_symbols))
    fc = derive_fc_params(subbands, spec.n_long, spec.overlap, fs_hz)
    validate_mixed_numerology(fc)
    return fc


def resolve_l_tbw(fc: FcConfig, requested: Sequence[int]) -> Tuple[int, ...]:
    """L_TBW par sous-bande, ramené à la place disponible hors bande passante"""
    if requested and len(requested) not in (1, fc.n_subbands):
        raise ScenarioError("windows.l_tbw", f"{len(requested)} valeurs pour {fc.n_subbands} sous-bandes")
    values = []
    for m, sb in enumerate(fc.subbands):
        want = int(requested[m if len(requested) > 1 else 0]) if requested else 0
        room = (fc.l_short[m] - passband_bins(sb, fc.l_short[m])) // 2
        if want > room:
            logger.warning(f"⚠️ Sous-bande {m} : L_TBW={want} ramené à {room}")
            want = room
        values.append(want)
    return tuple(values)


def optimization_scenario(scenario: Scenario, fc: FcConfig, seed: Optional[int] = None,
                          max_iters: Optional[int] = None) -> OptimizationScenario:
    """Problème d'optimisation correspondant au scénario"""
    opt, win, meas = scenario.optimization, scenario.windows, scenario.measurement
    case = CASE_MODES.get(win.mode, "I")
    return OptimizationScenario(
        fc=fc, a_des_db=opt.a_des_db, case=case, l_tbw=resolve_l_tbw(fc, win.l_tbw),
        gamma=win.gamma, seed=opt.seed if seed is None else seed,
        eval_symbols=opt.eval_symbols, final_symbols=meas.n_symbols, order=meas.order,
        objective=opt.objective, mse_target_db=opt.mse_target_db,
        guard_hz=meas.guard_khz * 1e3,
        max_iters=opt.max_iters if max_iters is None else max_iters,
        synthesis_init=win.synthesis_init)


def raised_cosine_fd_windows(fc: FcConfig, l_tbw: Sequence[int]) -> List[np.ndarray]:
    fd = []
    for m, sb in enumerate(fc.subbands):
        l_m = fc.l_short[m]
        fd.append(build_fd_window(FdWindowSpec(l_m, passband_bins(sb, l_m), l_tbw[m],
                                               raised_cosine_ramp(l_tbw[m]))))
    return fd


def baseline_signal(mode: str, grid: np.ndarray, sb: SubbandConfig, fs_hz: Fraction,
                    center_hz: Fraction, windows: WindowSpec) -> ComplexSignal:
    """Émission d'une sous-bande par une forme d'onde de référence"""
    plain = plain_tx(grid, sb, fs_hz, center_hz)
    if mode == "plain":
        return plain
    interp = upsampling_factor(sb, fs_hz)
    if mode == "wola":
        return wola_tx(plain, WolaConfig(interp * sb.l_ofdm, interp * sb.l_cp, windows.slope))
    if mode == "f-ofdm":
        return fofdm_tx(plain, design_fofdm_prototype(sb, fs_hz, windows.n_filt, center_hz))
    raise ScenarioError("windows.mode", f"forme d'onde inconnue : {mode}")


# ==================== EXÉCUTION ====================

@dataclass
class RunOutcome:
    """Résultat d'une exécution de scénario"""
    exit_code: int
    report: MetricsReport
    items: Dict[str, Any]
    windows: Optional[WindowSet] = None
    optimization: Optional[OptimizationReport] = None
    fc: Optional[FcConfig] = None
    artifacts: List[Path] = field(default_factory=list)


def design_and_measure(scenario: Scenario, fc: FcConfig, seed: Optional[int] = None,
                       max_iters: Optional[int] = None, jobs: int = 1,
                       windows: Optional[WindowSet] = None) -> RunOutcome:
    """
    Conçoit (ou reprend) les fenêtres du mode demandé et mesure la chaîne

    Returns:
        RunOutcome sans artefacts ; exit_code vaut 2 si l'optimisation est infaisable
    """
    mode = scenario.windows.mode
    opt_scn = optimization_scenario(scenario, fc, seed, max_iters)
    items: Dict[str, Any] = {"scenario": scenario.name, "mode": mode, "seed": opt_scn.seed}
    exit_code = EXIT_OK
    opt_report = None

    if windows is not None or mode in ("ols", "ola"):
        evaluator = ChainEvaluator(opt_scn, n_symbols=scenario.measurement.n_symbols)
        if windows is None:
            fd = raised_cosine_fd_windows(evaluator.fc, opt_scn.l_tbw)
            windows = ols_windows(evaluator.fc, fd) if mode == "ols" else ola_windows(evaluator.fc, fd)
        result = evaluator.measure(windows)
    elif mode in CASE_MODES:
        iters = opt_scn.max_iters
        if iters == 0:
            x_star = initial_params(opt_scn).flatten()
            result = ChainEvaluator(opt_scn, n_symbols=scenario.measurement.n_symbols).evaluate(x_star)
        else:
            try:
                x_star, opt_report, _ = multistart(opt_scn, scenario.optimization.k_starts,
                                                   jobs=jobs, max_iters=iters)
            except InfeasibleError as e:
                logger.error(f"❌ Optimisation infaisable : {e}")
                opt_report = e.report
                x_star = opt_report.x_star
                exit_code = EXIT_INFEASIBLE
            result = opt_report.final_long or opt_report.final
            items.update({"feasible": opt_report.feasible, "converged": opt_report.converged,
                          "iterations": opt_report.n_iterations,
                          "optimization_symbols": opt_report.n_symbols})
        windows = build_windows(ParamVector.unflatten(x_star, param_layout(opt_scn)), opt_scn)
    else:
        evaluator = ChainEvaluator(opt_scn, n_symbols=scenario.measurement.n_symbols)
        components = [baseline_signal(mode, evaluator.grids[m], sb, evaluator.fc.fs_hz,
                                      sb.center_bin * evaluator.fc.fc_bin_spacing_hz,
                                      scenario.windows)
                      for m, sb in enumerate(evaluator.fc.subbands)]
        result = evaluator.score(measure_components(evaluator.fc, components, evaluator.grids,
                                                    opt_scn.guard_hz, evaluator.filt,
                                                    evaluator.sides))

    items["objective_db"] = round(result.objective_db, 3)
    items.update(summary_items(result.report))
    limit = evm_limit_pct(scenario.measurement.order)
    if limit is not None:
        for sb in result.report.subbands:
            evm = float(100 * np.sqrt(np.mean(sb.mse)))
            items[f"subband{sb.index}.evm_margin_pct"] = round(limit - evm, 5)
    return RunOutcome(exit_code=exit_code, report=result.report, items=items,
                      windows=windows, optimization=opt_report, fc=fc)


def _op_count_frame(scenario: Scenario, fc: FcConfig) -> Optional[pd.DataFrame]:
    """Comptes de la chaîne du scénario ; None si une longueur de FFT n'est pas modélisée"""
    mode = scenario.windows.mode
    l_tbw = resolve_l_tbw(fc, scenario.windows.l_tbw)
    b = fc.with_symbols(scenario.measurement.n_symbols)
    rows = []
    try:
        if mode in CASE_MODES or mode in ("ols", "ola"):
            flags = CASES[CASE_MODES[mode]] if mode in CASE_MODES else None
            wf = WindowFlags(fdw=True, tdaw=bool(flags and flags.tdaw),
                             tdsw=bool(flags and flags.tdsw))
            count = chain_op_count(b, wf, l_tbw)
        else:
            sb = fc.subbands[0]
            interp = upsampling_factor(sb, fc.fs_hz)
            kind = "cp-ofdm" if mode == "plain" else mode
            count = baseline_op_count(kind, interp * sb.l_ofdm, interp * sb.l_cp,
                                      slope=scenario.windows.slope, n_filt=scenario.windows.n_filt)
    except UnsupportedLengthError as e:
        logger.warning(f"⚠️ Comptes d'opérations non calculés : {e}")
        return None
    rows.append({"scheme": mode, "n_symbols": scenario.measurement.n_symbols, **vars(count)})
    return pd.DataFrame(rows, columns=["scheme", "n_symbols", "real_mults", "real_adds"])


def write_outcome(outcome: RunOutcome, scenario: Scenario, out_dir: Path,
                  wall_time_s: Optional[float] = None) -> List[Path]:
    """Écrit summary.txt, subcarriers.csv, history.csv, windows.txt et opcounts.csv"""
    out_dir.mkdir(parents=True, exist_ok=True)
    items = dict(outcome.items)
    if wall_time_s is not None:
        items["wall_time_s"] = round(wall_time_s, 3)
    monitor = get_monitor().get_report()
    items["evaluations"] = monitor["total_evaluations"]
    items["cache_hit_rate"] = monitor["cache_hit_rate"]

    paths = [out_dir / "summary.txt"]
    paths[0].write_text(format_summary(items), encoding="utf-8")
    paths.append(write_report_csv(outcome.report, out_dir / "subcarriers.csv"))
    if outcome.optimization is not None:
        paths.append(write_history_csv(outcome.optimization, out_dir / "history.csv"))
    if outcome.windows is not None:
        paths.append(save_windows(out_dir / "windows.txt", outcome.windows))
    frame = _op_count_frame(scenario, outcome.fc) if outcome.fc is not None else None
    if frame is not None:
        paths.append(write_frame_csv(frame, out_dir / "opcounts.csv"))
    return paths


def run_scenario(scenario: Scenario, out_dir: Union[str, Path], seed: Optional[int] = None,
                 max_iters: Optional[int] = None, jobs: int = 1) -> RunOutcome:
    """
    Dérivation → (optimisation) → synthèse → mesure, puis écriture des artefacts

    Raises:
        ScenarioError, ConfigurationError, WindowError: scénario invalide
    """
    started = time.perf_counter()
    out_dir = Path(out_dir)
    if scenario.counts is not None:
        path = counts(scenario, out_dir)
        return RunOutcome(exit_code=EXIT_OK, report=MetricsReport(),
                          items={"scenario": scenario.name}, artifacts=[path])

    logger.info(f"🚀 Exécution du scénario {scenario.name} ({scenario.windows.mode})")
    fc = build_fc(scenario.numerology)
    outcome = design_and_measure(scenario, fc, seed, max_iters, jobs)
    outcome.artifacts = write_outcome(outcome, scenario, out_dir, time.perf_counter() - started)
    logger.info(f"✅ Artefacts écrits dans {out_dir}")
    return outcome


def counts(scenario: Scenario, out_dir: Union[str, Path]) -> Path:
    """Écrit opcounts.csv pour le bloc counts (ou la chaîne du scénario)"""
    out_dir = Path(out_dir)
    spec = scenario.counts or CountsSpec(table="chain")
    if spec.table == "fft":
        frame = fft_table_frame()
    elif spec.table == "schemes":
        frame = scheme_comparison_frame(spec.symbols, spec.l_tbw)
    else:
        frame = _op_count_frame(scenario, build_fc(scenario.numerology))
        if frame is None:
            raise ScenarioError("counts.table", "longueurs de FFT hors des familles 2^k et 3·2^k")
    return write_frame_csv(frame, out_dir / "opcounts.csv")


# ==================== BALAYAGES ====================

def _victim_config(ini: IniSpec) -> SubbandConfig:
    l_ofdm = ini.victim_l_ofdm or derive_ofdm_ifft_length(ini.victim_n_prb)
    l_cp = ini.victim_l_cp if ini.victim_l_cp is not None else _default_cp(l_ofdm, "ini.victim_l_cp")
    return SubbandConfig(index=0, n_prb=ini.victim_n_prb,
                         scs_hz=to_fraction(ini.victim_scs_khz) * 1000,
                         l_ofdm=l_ofdm, l_cp=l_cp)


def interferer_signals(scenario: Scenario, seed: Optional[int] = None,
                       max_iters: Optional[int] = None,
                       jobs: int = 1) -> Dict[str, ComplexSignal]:
    """Signal émis par la sous-bande 0 pour chaque émetteur comparé"""
    fc = build_fc(scenario.numerology)
    opt_scn = optimization_scenario(scenario, fc, seed, max_iters)
    evaluator = ChainEvaluator(opt_scn, n_symbols=scenario.measurement.n_symbols)
    sb = evaluator.fc.subbands[0]
    center = sb.center_bin * evaluator.fc.fc_bin_spacing_hz
    signals = {}
    for mode in scenario.ini.tx_modes:
        if mode == "fc":
            windows = design_and_measure(scenario, fc, seed, max_iters, jobs).windows
            pipeline = FcBlockPipeline(fc=evaluator.fc, windows=windows)
            signals[mode] = fc_synthesize_components(evaluator.inputs, pipeline)[0]
        else:
            signals[mode] = baseline_signal(mode, evaluator.grids[0], sb, evaluator.fc.fs_hz,
                                            center, scenario.windows)
    return signals


def ini_sweep_frame(scenario: Scenario, seed: Optional[int] = None,
                    max_iters: Optional[int] = None, jobs: int = 1) -> pd.DataFrame:
    """INI vue par la victime (à gauche de la sous-bande 0) par garde, émetteur et récepteur"""
    fc = build_fc(scenario.numerology)
    victim = _victim_config(scenario.ini)
    interferer = fc.subbands[0]
    i_low, _ = occupied_band_hz(interferer, fc.fc_bin_spacing_hz)
    _, v_high = occupied_band_hz(victim, Fraction(0))
    signals = interferer_signals(scenario, seed, max_iters, jobs)
    rows = []
    for guard in scenario.sweep.values:
        victim_center = i_low - to_fraction(guard) * 1000 - v_high
        for mode, signal in signals.items():
            for receiver in scenario.ini.receivers:
                ini_db = measure_ini(victim, signal, victim_center,
                                     [(interferer, interferer.center_bin * fc.fc_bin_spacing_hz)],
                                     receiver=receiver)
                rows.append({"ini_guard_khz": guard, "tx": mode, "rx": receiver, "ini_db": ini_db})
                logger.info(f"📊 Garde {guard} kHz, {mode} → {receiver} : INI {ini_db:.2f} dB")
    return pd.DataFrame(rows, columns=["ini_guard_khz", "tx", "rx", "ini_db"])


def sweep(scenario: Scenario, out_dir: Union[str, Path], seed: Optional[int] = None,
          max_iters: Optional[int] = None, jobs: int = 1) -> pd.DataFrame:
    """
    Balayage déclaré par le bloc sweep ; écrit sweep.csv (une ligne par point)

    Raises:
        ScenarioError: axe absent ou vide
    """
    out_dir = Path(out_dir)
    if scenario.sweep is None:
        raise ScenarioError("sweep", "bloc requis")
    if not scenario.sweep.values:
        raise ScenarioError("sweep.values", "axe vide")

    logger.info(f"🚀 Balayage {scenario.sweep.axis} : {len(scenario.sweep.values)} points")
    if scenario.sweep.axis == "ini_guard_khz":
        frame = ini_sweep_frame(scenario, seed, max_iters, jobs)
    else:
        def _point(indexed):
            i, value = indexed
            fc = build_fc(scenario.numerology, n_prb=int(value))
            outcome = design_and_measure(scenario, fc, seed, max_iters, jobs=1)
            write_outcome(outcome, scenario, out_dir / f"point_{i:03d}")
            return {"n_prb": int(value), **{k: v for k, v in outcome.items.items()
                                            if k not in ("scenario", "mode", "seed")}}

        points = list(enumerate(scenario.sweep.values))
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_point, points))
        else:
            rows = [_point(p) for p in points]
        frame = pd.DataFrame(rows)

    write_frame_csv(frame, out_dir / "sweep.csv")
    return frame


# ==================== ENTRÉE ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcofdm",
        description="Banc de filtres FC-F-OFDM généralisé : scénarios, balayages, complexité",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Graine de la charge utile")
    common.add_argument("--out-dir", type=Path, default=None, help="Répertoire des artefacts")
    common.add_argument("--max-iters", type=int, default=None, help="Itérations SLSQP maximales")
    common.add_argument("--jobs", type=int, default=None, help="Évaluations en parallèle")
    common.add_argument("--verbose", "-v", action="store_true", help="Journalisation DEBUG")

    verbs = parser.add_subparsers(dest="verb", required=True)
    for name, text in (("run", "Exécute un scénario"), ("sweep", "Balayage d'un scénario"),
                       ("counts", "Tables de complexité")):
        p = verbs.add_parser(name, parents=[common], help=text)
        p.add_argument("scenario", type=Path)

    win = verbs.add_parser("windows", help="Import/export de fenêtres")
    actions = win.add_subparsers(dest="action", required=True)
    export = actions.add_parser("export", parents=[common], help="Conçoit et écrit les fenêtres")
    export.add_argument("scenario", type=Path)
    export.add_argument("--file", type=Path, default=None)
    imp = actions.add_parser("import", parents=[common], help="Mesure des fenêtres importées")
    imp.add_argument("file", type=Path)
    imp.add_argument("scenario", type=Path)
    return parser


def _configure_logging(verbose: bool):
    level = "DEBUG" if verbose else os.getenv("FCOFDM_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Point d'entrée ; retourne le code de sortie (0 succès, 1 configuration, 2 infaisable)"""
    load_dotenv()
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    jobs = args.jobs if args.jobs is not None else int(os.getenv("FCOFDM_JOBS", "1"))

    try:
        scenario = load_scenario(args.scenario)
        out_dir = args.out_dir or Path(scenario.output_dir or
                                       Path(os.getenv("FCOFDM_OUT_DIR", "out")) / scenario.name)
        if args.verb == "run":
            return run_scenario(scenario, out_dir, args.seed, args.max_iters, jobs).exit_code
        if args.verb == "sweep":
            sweep(scenario, out_dir, args.seed, args.max_iters, jobs)
            return EXIT_OK
        if args.verb == "counts":
            counts(scenario, out_dir)
            return EXIT_OK
        fc = build_fc(scenario.numerology)
        if args.action == "export":
            outcome = design_and_measure(scenario, fc, args.seed, args.max_iters, jobs)
            save_windows(args.file or out_dir / "windows.txt", outcome.windows)
            return outcome.exit_code
        windows = load_windows(args.file)
        outcome = design_and_measure(scenario, fc, args.seed, args.max_iters, jobs, windows=windows)
        write_outcome(outcome, scenario, out_dir)
        return EXIT_OK
    except (ScenarioError, ConfigurationError, WindowError, SignalLengthError, MaskError,
            OSError, json.JSONDecodeError) as e:
        logger.error(f"❌ Configuration invalide : {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
