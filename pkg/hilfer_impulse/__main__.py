import sys

from hilfer_impulse.cli import main

sys.exit(main())
