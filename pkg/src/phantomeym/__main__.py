import sys

from phantomeym.cli import main

sys.exit(main())
