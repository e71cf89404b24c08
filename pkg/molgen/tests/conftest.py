import sys
from pathlib import Path

# molgen is run from a checkout, never installed; make src importable
_SRC = Path(__file__).resolve().parents[1] / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))
