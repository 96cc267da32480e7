"""What the coordinate grammar accepts, what it rejects, and where.

Run:  python demos/02_grammar_strictness.py
"""

import trajseg as T

good = [
    "[0.25, 0.5]",
    "[0.1, 0.1, 0.9, 0.8]",
    "[[0.2, 0.2], [0.6, 0.2], [0.6, 0.6], [0.2, 0.6]]",
    " [ [0.2,0.2] ,\n [0.6,\t0.2], [0.6, 0.6] ] ",   # whitespace is free
    "[[[0.1, 0.1], [0.4, 0.1], [0.4, 0.4]], "
    "[[0.6, 0.6], [0.9, 0.6], [0.9, 0.9]]]",          # two-part object
]
for text in good:
    parsed = T.parse(text)
    print(f"{parsed.kind.value:<12} <- {text[:60]!r}")

print()
bad = [
    "[[0.1, 0.2], [0.3]]",        # a pair with one number
    "[1.2, 0.5]",                 # out of the unit square
    "[[0.1, 0.2], [0.3, 0.4]]",   # two vertices do not make a ring
    "[0.1, 0.2] and then some",   # trailing garbage
    "[[0.1, 0.2], [0.3",          # truncated mid-stream
]
for text in bad:
    try:
        T.parse(text)
    except T.ParseError as e:
        print(f"{e.kind.value:<16} byte {e.byte_offset:<3} <- {text!r}")

# A structurally valid bbox is still the wrong answer to a mask query.
try:
    T.parse("[0.1, 0.1, 0.9, 0.9]", T.ShapeKind.POLYGON)
except T.ParseError as e:
    print(f"{e.kind.value:<16} byte {e.byte_offset:<3} <- bbox given, polygon expected")
