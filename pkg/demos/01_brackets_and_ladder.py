# %% [markdown]
# # Brackets of trace functions
#
# Functions of the form tr(word in A, B) are closed under both brackets of the
# pencil. This script builds a few of them, compares the exact necklace
# bracket with a direct evaluation from gradients, and walks up the hierarchy
# with the recursion operator.

# %%
import numpy as np

from calogero_pencil.matpair import PhasePoint, TraceExpr, eval_trace_expr
from calogero_pencil.pencil import (
    P0,
    P1,
    bracket_numeric,
    hierarchy_differential,
    jacobi_defect,
    necklace_bracket,
    pencil,
    recursion_transpose_apply,
)

rng = np.random.default_rng(0)
p = PhasePoint(rng.uniform(-1, 1, (3, 3)), rng.uniform(-1, 1, (3, 3)))

# %% [markdown]
# Words are stored up to cyclic rotation, so `BAA` and `AAB` are the same key.

# %%
f = TraceExpr.word("BAA") + TraceExpr.word("ABB", 0.5)
g = TraceExpr.word("AB")
print(f)

# %%
for s in (P0, P1):
    exact = necklace_bracket(s, f, g)
    print(s, exact, eval_trace_expr(exact, p), bracket_numeric(s, f, g, p))

# %% [markdown]
# The canonical bracket of tr B and tr A is the constant n.

# %%
print(necklace_bracket(P0, TraceExpr.word("B"), TraceExpr.word("A")), "->", p.n)

# %% [markdown]
# Jacobi defects for the two tensors and a few members of the pencil are at
# rounding level.

# %%
h = TraceExpr.word("AABB")
for s in (P0, P1, pencil(-1.0), pencil(2.0)):
    print(f"{s!s:12s} {jacobi_defect(s, f, g, h, p):+.2e}")

# %% [markdown]
# The transposed recursion operator maps dH_k to dH_{k+1}, where H_k = tr(A^k)/k.

# %%
for k in range(1, 5):
    step = recursion_transpose_apply(p, hierarchy_differential(k, p))
    nxt = hierarchy_differential(k + 1, p)
    print(k, np.max(np.abs(step.xi - nxt.xi)), np.max(np.abs(step.eta - nxt.eta)))
