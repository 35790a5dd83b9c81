import sys

from dagforge.cli import main

sys.exit(main())
