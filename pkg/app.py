"""
Application FC-F-OFDM - Point d'entrée en ligne de commande

    python app.py run data/scenarios/example1_caseI.json
"""

import sys
from pathlib import Path

# Ajouter le dossier racine au path
sys.path.append(str(Path(__file__).parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
