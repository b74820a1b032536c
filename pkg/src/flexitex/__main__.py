import sys

from flexitex.cli import main

sys.exit(main())
