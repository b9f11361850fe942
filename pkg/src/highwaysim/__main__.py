import sys

from .scenario_runner.cli import main

sys.exit(main())
