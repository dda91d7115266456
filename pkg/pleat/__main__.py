# pleat/__main__.py

import sys

from pleat.cli import main

sys.exit(main())
