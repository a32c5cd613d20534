import sys
from pathlib import Path

RENDER_DIR = Path(__file__).resolve().parent.parent
if str(RENDER_DIR) not in sys.path:
    sys.path.insert(0, str(RENDER_DIR))
