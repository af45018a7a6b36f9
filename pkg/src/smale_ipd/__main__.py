import sys

from smale_ipd.cli import main

sys.exit(main())
