"""Allow ``python -m bhscatter``."""

import sys

from .cli import main

sys.exit(main())
