"""Suite-wide pytest configuration: a relaxed hypothesis profile for the
property tests (compiled kernels make first examples slow, so no deadline).

Shared helpers live in support.py; this file stays import-side-effect only so
its module name cannot clash with other conftest files in the repository.
"""

from __future__ import annotations

from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")
