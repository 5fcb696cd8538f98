import sys

from catengine.cli import main

sys.exit(main())
