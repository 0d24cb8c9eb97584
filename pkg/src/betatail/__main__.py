import sys

from betatail.cli import main

sys.exit(main())
