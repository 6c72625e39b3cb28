import sys

from treedrive.cli import main

sys.exit(main())
