# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled BM25 accumulation kernel (see _score_py.py for the fallback)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def accumulate(cnp.float64_t[::1] scores,
               cnp.uint8_t[::1] matched,
               cnp.int32_t[::1] ordinals,
               cnp.float64_t[::1] freqs,
               cnp.float64_t[::1] doc_len,
               double avg_len, double k1, double b, double idf):
    cdef Py_ssize_t i, n = ordinals.shape[0]
    cdef int o
    cdef double tf, norm
    for i in range(n):
        o = ordinals[i]
        tf = freqs[i]
        norm = k1 * (1.0 - b + b * doc_len[o] / avg_len)
        scores[o] += idf * tf * (k1 + 1.0) / (tf + norm)
        matched[o] = True
