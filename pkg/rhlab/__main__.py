"""Allow ``python -m rhlab``."""

from rhlab.cli import main

raise SystemExit(main())
