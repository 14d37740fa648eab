import sys

from reactorscale.cli import main

sys.exit(main())
