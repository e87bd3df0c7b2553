import sys

from ddenorm.cli import main

sys.exit(main())
