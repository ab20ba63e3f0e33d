"""
Allow ``python -m qubo_annealer``.
"""

from qubo_annealer.cli import main

raise SystemExit(main())
