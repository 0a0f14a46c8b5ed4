import sys

from posipath.cli.main import main

sys.exit(main())
