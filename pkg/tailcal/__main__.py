"""Run the tailcal command line with python -m tailcal."""
import sys

from .cli import main

sys.exit(main())
