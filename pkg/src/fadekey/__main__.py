import sys

from fadekey.cli import main

sys.exit(main())
