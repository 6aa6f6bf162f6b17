import sys
from pathlib import Path

# agents/ and utils/ are imported as top-level packages, the way main.py runs them
sys.path.insert(0, str(Path(__file__).resolve().parent))
