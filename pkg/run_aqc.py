#!/usr/bin/env python
"""
Run the Ensemble AQC command-line toolkit.

    python run_aqc.py landscape --instance data/instances/chain.json
"""
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

if __name__ == "__main__":
    from cli import main

    sys.exit(main())
