"""Tour of the stochastic-matrix calculus: the ergodicity coefficient tau,
the scrambling / sia / markov classes, patterns, and periods.

Run:  python demos/01_matrix_classes.py
"""

import numpy as np

import stochprod as sp

# A scrambling matrix: its two rows overlap in both columns.
S = sp.StochasticMatrix([[0.2, 0.8], [0.5, 0.5]])
print("S =", S.entries.tolist())
print("tau(S) =", sp.tau(S), " (1 minus the worst row-pair overlap)")
print("classify(S) =", sp.classify(S))

# A rotation never mixes: pattern powers cycle and tau stays at 1.
R = sp.StochasticMatrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
print("\nR is a pure rotation:")
print("tau(R) =", sp.tau(R), " pattern period =", sp.pattern_period(R))
print("classify(R) =", sp.classify(R))

# tau is submultiplicative, so products of scrambling factors mix geometrically.
prod = sp.backward_product([S] * 6)
print("\ntau of six scrambling factors:", sp.tau(prod),
      "<= tau(S)^6 =", sp.tau(S) ** 6)

# The spread of a state vector contracts by at most tau per application.
x = np.array([1.0, -1.0])
print("\nspread before:", sp.spread(x), " after S:", sp.spread(S.entries @ x),
      " bound tau*spread:", sp.tau(S) * sp.spread(x))

# How many same-pattern factors until a product must scramble?
C = sp.StochasticMatrix([[0, 1, 0], [0, 0, 1], [0.5, 0.5, 0]])
print("\ncycle-with-a-chord needs", sp.scrambling_index(C),
      "same-type factors before the product scrambles")

# An sia matrix with a periodic transient part: powers still converge to a
# rank-one matrix (the closed class decides), but the zero pattern of the
# powers keeps alternating.
T = sp.StochasticMatrix([[0, 0.5, 0.5], [0.5, 0, 0.5], [0, 0, 1]])
print("\nperiodic-transient example: sia =", sp.is_sia(T),
      " pattern period =", sp.pattern_period(T))
