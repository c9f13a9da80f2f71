#!/usr/bin/env python3
"""Prints (n, W, p) from scipy.stats.shapiro for the vectors frozen in
shapiro_wilk_reference.hpp. The random vectors came from
numpy.random.default_rng(20240501): normal(50,10,20) rounded to 3 places,
exponential(2,50) and uniform(0,1,100) rounded to 4."""
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240501)
cases = {
    "weights11": [148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
    "n3": [1.0, 2.0, 4.0],
    "n3_equal_gaps": [1.0, 2.0, 3.0],
    "n4": [2.1, 3.7, 3.9, 8.4],
    "n5": [0.5, 1.1, 1.9, 2.2, 9.0],
    "n6": [3.2, 3.3, 3.9, 4.1, 4.4, 5.0],
    "n11_skewed": [1, 1, 1, 2, 2, 3, 4, 6, 9, 14, 30],
    "n12": [12.5, 13.1, 13.8, 14.0, 14.2, 14.9, 15.3, 15.8, 16.0, 16.6, 17.4, 19.9],
    "n20_normal": list(np.round(rng.normal(50, 10, 20), 3)),
    "n50_exponential": list(np.round(rng.exponential(2.0, 50), 4)),
    "n100_uniform": list(np.round(rng.uniform(0, 1, 100), 4)),
}
for name, sample in cases.items():
    w, p = stats.shapiro(sample)
    print(name, len(sample), repr(float(w)), repr(float(p)))
