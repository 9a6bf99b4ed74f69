"""
Script pour rejouer tous les scénarios fournis (tables de complexité,
optimisations par cas, balayages PRB / INI) et rassembler les résultats
"""
import argparse
import fnmatch
import logging
import sys
import time
from pathlib import Path

import pandas as pd
from dotenv import load_dotenv

# Ajouter le répertoire parent au path pour importer les modules
sys.path.append(str(Path(__file__).parent.parent))

from src.cli import EXIT_CONFIG, EXIT_OK, ScenarioError, counts, load_scenario, run_scenario, sweep
from src.numerology import ConfigurationError
from src.performance_monitor import get_monitor

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent.parent / "data" / "scenarios"


class ScenarioBatch:
    """
    Exécute une liste de scénarios JSON et collecte un résumé par scénario
    """

    def __init__(self, out_dir: Path, jobs: int = 1, max_iters=None):
        self.out_dir = out_dir
        self.jobs = jobs
        self.max_iters = max_iters
        self.rows = []

    def run_one(self, path: Path):
        """Exécute un scénario selon son type (counts, sweep ou run)"""
        scenario = load_scenario(path)
        target = self.out_dir / scenario.name
        start = time.perf_counter()
        row = {"scenario": scenario.name, "kind": "run", "exit_code": EXIT_OK,
               "objective_db": None}
        try:
            if scenario.counts is not None:
                row["kind"] = "counts"
                counts(scenario, target)
            elif scenario.sweep is not None:
                row["kind"] = "sweep"
                frame = sweep(scenario, target, max_iters=self.max_iters, jobs=self.jobs)
                print(f"  📊 {len(frame)} points")
            else:
                outcome = run_scenario(scenario, target, max_iters=self.max_iters, jobs=self.jobs)
                row["exit_code"] = outcome.exit_code
                row["objective_db"] = outcome.items.get("objective_db")
        except (ScenarioError, ConfigurationError) as e:
            print(f"  ❌ {scenario.name} : {e}")
            row["exit_code"] = EXIT_CONFIG
        row["wall_time_s"] = round(time.perf_counter() - start, 2)
        status = "✅" if row["exit_code"] == EXIT_OK else "⚠️"
        print(f"  {status} {scenario.name} ({row['kind']}) en {row['wall_time_s']}s")
        self.rows.append(row)

    def run_all(self, paths):
        for path in paths:
            print(f"\n🚀 {path.name}")
            self.run_one(path)
        overview = pd.DataFrame(self.rows, columns=["scenario", "kind", "exit_code",
                                                    "objective_db", "wall_time_s"])
        self.out_dir.mkdir(parents=True, exist_ok=True)
        overview.to_csv(self.out_dir / "overview.csv", index=False)
        return overview


def main():
    """
    Fonction principale
    """
    load_dotenv()
    parser = argparse.ArgumentParser(description="Rejoue les scénarios fournis")
    parser.add_argument("--only", default="*", help="Motif de noms de fichiers (ex. 'example1_*')")
    parser.add_argument("--out-dir", type=Path, default=Path("out") / "reproduction")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--max-iters", type=int, default=None)
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    print("\n" + "=" * 70)
    print("📡 REPRODUCTION DES SCÉNARIOS FC-F-OFDM")
    print("=" * 70)

    paths = [p for p in sorted(SCENARIO_DIR.glob("*.json"))
             if fnmatch.fnmatch(p.stem, args.only)]
    if not paths:
        print(f"❌ Aucun scénario ne correspond à '{args.only}' dans {SCENARIO_DIR}")
        return
    print(f"✅ {len(paths)} scénario(s) sélectionné(s)")

    batch = ScenarioBatch(args.out_dir, args.jobs, args.max_iters)
    overview = batch.run_all(paths)

    print("\n" + "=" * 70)
    print("🎉 REPRODUCTION TERMINÉE !")
    print("=" * 70)
    print(overview.to_string(index=False))
    get_monitor().print_report()


if __name__ == "__main__":
    main()
