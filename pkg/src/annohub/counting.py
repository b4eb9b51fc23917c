"""Statement (triple) counting over parsed annotation trees.

The count of one node is 1 for its ``@type`` plus, for every non-keyword
property value: 1 per scalar, and 1 + the nested count per object value
(the extra 1 is the linking statement). ``@context`` and ``@id`` contribute
nothing. A compiled kernel is used when available; the pure-Python walker is
the always-present fallback and the equivalence anchor for tests.
"""

from __future__ import annotations


def count_statements_py(node: dict) -> int:
    total = 1  # the node's @type statement
    for key, value in node.items():
        if key.startswith("@"):
            continue
        if isinstance(value, list):
            for item in value:
                if isinstance(item, dict):
                    total += 1 + count_statements_py(item)
                else:
                    total += 1
        elif isinstance(value, dict):
            total += 1 + count_statements_py(value)
        else:
            total += 1
    return total


try:
    from annohub._speedups import count_statements_fast as _fast
except ImportError:  # pure install, or extension build skipped
    _fast = None

count_statements = _fast if _fast is not None else count_statements_py

HAVE_COMPILED_KERNEL = _fast is not None
