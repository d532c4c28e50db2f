"""Pure-Python (numpy) BM25 accumulation kernel.

Same contract as the compiled kernel in _score.pyx: fold one query term's
postings into the running score array. Ordinals within one postings list
are unique, so fancy-indexed += is safe.
"""

import numpy as np


def accumulate(scores, matched, ordinals, freqs, doc_len, avg_len, k1, b, idf):
    norm = k1 * (1.0 - b + b * doc_len[ordinals] / avg_len)
    scores[ordinals] += idf * freqs * (k1 + 1.0) / (freqs + norm)
    matched[ordinals] = True
