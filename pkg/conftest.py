import sys
from pathlib import Path

# flat top-level modules import without installation
sys.path.insert(0, str(Path(__file__).parent))
