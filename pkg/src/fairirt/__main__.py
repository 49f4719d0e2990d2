import sys

from fairirt.cli import main

sys.exit(main())
