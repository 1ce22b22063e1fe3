import sys

from tasksampler.cli import main

sys.exit(main())
