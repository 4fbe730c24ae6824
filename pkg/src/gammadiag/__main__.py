import sys

from gammadiag.cli import main

sys.exit(main())
