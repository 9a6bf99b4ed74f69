"""
Constantes de numérologie et de mesure pour FC-F-OFDM
"""
from fractions import Fraction

# Ressources physiques
SUBCARRIERS_PER_PRB = 12
BASE_SCS_HZ = Fraction(15_000)
MIN_OFDM_IFFT_LENGTH = 128

# Fréquence d'échantillonnage de référence NR (Hz)
REFERENCE_FS_HZ = Fraction(30_720_000)
NR_REFERENCE_L_OFDM = 2048
NR_REFERENCE_L_CP = 144

# Facteurs de recouvrement évalués
DEFAULT_OVERLAPS = (Fraction(1, 2), Fraction(1, 4))

# Filtre de mesure (SCR)
MEASUREMENT_BANDWIDTH_HZ = 180_000.0
MEASUREMENT_HALF_BANDWIDTH_HZ = 90_000.0
MEASUREMENT_TRANSITION_HZ = 7_500.0
MEASUREMENT_STOPBAND_DB = 100.0
MEASUREMENT_PASSBAND_RIPPLE_DB = 0.1
SCR_GUARD_HZ = 180_000.0

# Métriques
N_EDGE_SUBCARRIERS = 12
DB_FLOOR = -300.0
DB_CEILING = 200.0

# Créneau NR
SLOT_SYMBOLS = 14

# Limites EVM NR (%), par ordre de modulation
EVM_LIMITS_PCT = {
    4: 17.5,
    16: 12.5,
    64: 8.0,
    256: 3.5,
}

# Optimisation
SCR_CONSTRAINT_MARGIN_DB = 0.5
DEFAULT_MAX_ITERS = 200
DEFAULT_GAMMA = 20
FINAL_EVAL_SYMBOLS = 100
SCR_SOLVER_BACKOFF_DB = 0.25
FD_STEP = 1e-5
SLSQP_RESTARTS = 2
CENTRAL_DIFF_MAX_PARAMS = 64
MAX_LONG_CHECKS = 5

# Fenêtre EVM : la DFT du récepteur de mesure démarre au milieu du CP
EVM_WINDOW_CP_FRACTION = Fraction(1, 2)

# Pente WOLA (TX et RX) en fraction de L_CP
WOLA_SLOPE_CP_FRACTION = Fraction(1, 2)


def evm_timing_advance(n_cp: int) -> int:
    """Avance (en échantillons) de la fenêtre DFT de mesure dans le CP"""
    return int(n_cp * EVM_WINDOW_CP_FRACTION)


def wola_slope(n_cp: int) -> int:
    """Pente WOLA par défaut pour un CP de n_cp échantillons"""
    return int(n_cp * WOLA_SLOPE_CP_FRACTION)
