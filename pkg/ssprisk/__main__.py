import sys

from ssprisk.cli import main

sys.exit(main())
