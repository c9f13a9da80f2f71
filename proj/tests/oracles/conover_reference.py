#!/usr/bin/env python3
"""Reference values for the 10 x 3 Conover worksheet in
statkit_rank_test.cpp, from scikit-posthocs and scipy."""
import numpy as np
import scikit_posthocs as sp
from scipy import stats

worksheet = np.array([
    [7, 9, 8], [6, 5, 7], [9, 7, 6], [8, 5, 9], [10, 8, 9],
    [4, 6, 3], [9, 8, 10], [5, 4, 6], [7, 4, 7], [8, 9, 6],
], dtype=float)
shifted = np.array([
    [60, 72, 61], [55, 70, 57], [80, 86, 79], [72, 81, 74], [66, 79, 66],
    [90, 96, 88], [45, 57, 47], [70, 82, 69], [62, 71, 60], [77, 85, 78],
], dtype=float)

for name, m in (("worksheet", worksheet), ("shifted", shifted)):
    chi, p = stats.friedmanchisquare(*m.T)
    print(name, "friedman", repr(chi), repr(p))
    raw = sp.posthoc_conover_friedman(m, p_adjust=None).to_numpy()
    adj = sp.posthoc_conover_friedman(m, p_adjust="bonferroni").to_numpy()
    for i, j in ((0, 1), (0, 2), (1, 2)):
        print(name, i, j, repr(raw[i, j]), repr(adj[i, j]))
