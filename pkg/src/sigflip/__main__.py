import sys

from sigflip.cli import main

sys.exit(main())
