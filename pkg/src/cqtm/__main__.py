import sys

from cqtm.cli import main

sys.exit(main())
