import sys

from ellsim.cli import main

sys.exit(main())
