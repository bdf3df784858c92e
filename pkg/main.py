"""
Main entry point for the stiffkit command line.

Usage: python main.py simulate|estimate|stability|sweep|order <scenario.json> [flags] [--out DIR]
"""

import sys
import logging
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

# Configure logging for the application
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)


def main() -> None:
    """Run one stiffkit command and exit with its code."""
    from cli.commands import main as cli_main
    try:
        sys.exit(cli_main())
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
