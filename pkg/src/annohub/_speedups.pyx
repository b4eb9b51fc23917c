# cython: boundscheck=False, wraparound=False
"""Compiled statement-counting kernel.

Mirrors annohub.counting.count_statements_py exactly; bulk uploads walk every
node of every document, so this loop dominates ingest CPU time.
"""


cpdef long count_statements_fast(dict node):
    cdef long total = 1  # the node's @type statement
    cdef str key
    for key, value in node.items():
        if key.startswith(u"@"):
            continue
        if type(value) is list:
            for item in <list>value:
                if type(item) is dict:
                    total += 1 + count_statements_fast(<dict>item)
                else:
                    total += 1
        elif type(value) is dict:
            total += 1 + count_statements_fast(<dict>value)
        else:
            total += 1
    return total
