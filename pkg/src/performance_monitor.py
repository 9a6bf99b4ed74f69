"""
Moniteur de performance des évaluations de la chaîne TX/RX
"""

import logging
import threading
import time
from datetime import datetime
from functools import wraps
from typing import Dict

logger = logging.getLogger(__name__)


class PerformanceMonitor:
    """
    Compteurs d'évaluations, de cache et de temps cumulé
    """

    def __init__(self):
        """Initialise le moniteur"""
        self._lock = threading.Lock()
        self.reset()
        logger.debug("📊 PerformanceMonitor initialisé")

    def reset(self):
        """Remet les compteurs à zéro"""
        with self._lock:
            self.metrics = {
                'total_evaluations': 0,
                'cache_hits': 0,
                'cache_misses': 0,
                'total_eval_time': 0.0,
                'optimizations_run': 0,
                'start_time': datetime.now()
            }

    def record_evaluation(self, eval_time: float, from_cache: bool = False):
        """
        Enregistre une évaluation de la chaîne

        Args:
            eval_time: Temps d'exécution (s)
            from_cache: Si résultat du cache
        """
        with self._lock:
            self.metrics['total_evaluations'] += 1
            self.metrics['total_eval_time'] += eval_time
            if from_cache:
                self.metrics['cache_hits'] += 1
            else:
                self.metrics['cache_misses'] += 1

    def record_optimization(self):
        """Enregistre une optimisation lancée"""
        with self._lock:
            self.metrics['optimizations_run'] += 1

    def get_report(self) -> Dict:
        """
        Génère un rapport de performance

        Returns:
            Rapport avec toutes les métriques
        """
        uptime = (datetime.now() - self.metrics['start_time']).total_seconds()
        computed = self.metrics['cache_misses']
        cache_hit_rate = 0.0
        if self.metrics['total_evaluations'] > 0:
            cache_hit_rate = self.metrics['cache_hits'] / self.metrics['total_evaluations'] * 100
        avg_eval_time = self.metrics['total_eval_time'] / computed if computed else 0.0

        return {
            'uptime_seconds': uptime,
            'total_evaluations': self.metrics['total_evaluations'],
            'cache_hit_rate': f"{cache_hit_rate:.1f}%",
            'avg_eval_time': f"{avg_eval_time * 1e3:.2f}ms",
            'optimizations_run': self.metrics['optimizations_run'],
        }

    def print_report(self):
        """Affiche le rapport de performance"""
        report = self.get_report()

        print("\n" + "=" * 60)
        print("📊 RAPPORT DE PERFORMANCE")
        print("=" * 60)
        print(f"Uptime: {report['uptime_seconds']:.0f}s")
        print(f"Évaluations totales: {report['total_evaluations']}")
        print(f"Taux de cache hit: {report['cache_hit_rate']}")
        print(f"Temps moyen par évaluation: {report['avg_eval_time']}")
        print(f"Optimisations lancées: {report['optimizations_run']}")
        print("=" * 60)


def measure_time(func):
    """
    Décorateur pour mesurer le temps d'exécution des opérations longues

    Usage:
        @measure_time
        def optimize(scenario):
            ...
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        execution_time = time.perf_counter() - start_time

        logger.info(f"⏱️ {func.__name__} exécuté en {execution_time:.3f}s")

        return result

    return wrapper


# Instance globale
_monitor = PerformanceMonitor()


def get_monitor() -> PerformanceMonitor:
    """Retourne l'instance globale du moniteur"""
    return _monitor
