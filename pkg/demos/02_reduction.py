# %% [markdown]
# # From matrix pairs to particles
#
# Conjugation acts on pairs (A, B). In the open set where both matrices have
# real simple spectra there is a unique representative with B diagonal and
# increasing and a normalized tridiagonal part of A. Pairs satisfying
# rank([B, A] + I) = 1 reduce further to the Calogero-Moser phase space.

# %%
import numpy as np

from calogero_pencil.cmspace import (
    CMState,
    bracket_table,
    embed_Q,
    invariants_map,
    n2_bracket1_matrix,
    normalize_to_Q,
    pi_inverse,
    rank1_check,
    transported_xy_brackets,
)
from calogero_pencil.matpair import conjugate
from calogero_pencil.pencil import P1
from calogero_pencil.reduction import canonical_form, random_conjugator, random_section_point

rng = np.random.default_rng(1)

# %% [markdown]
# Hide a section point behind a random conjugation and recover it.

# %%
q = random_section_point(4, rng)
g0 = random_conjugator(4, rng)
sp_, g = canonical_form(conjugate(g0, q.point))
print("sign pattern", sp_.pattern, "error", np.max(np.abs(sp_.A - q.A)))

# %% [markdown]
# A particle configuration and its Lax pair.

# %%
c = CMState([-1.5, -0.2, 1.1], [-2.0, 0.3, 2.5])
p = embed_Q(c)
print(p.A)
print("rank-one condition:", rank1_check(p))

# %%
hidden = conjugate(random_conjugator(3, rng), p)
print("recovered:", normalize_to_Q(hidden))

# %% [markdown]
# The invariants I_k = tr(A^k)/k and J_k = tr(A^(k-1) B), and the
# spectral data they determine.

# %%
v = invariants_map(p)
print(v)
print(pi_inverse(v))

# %% [markdown]
# Bracket table of the invariants for two particles, second tensor.

# %%
for u, w, e in bracket_table(P1, 2):
    if u < w:
        print(f"{{{u},{w}}} = {e}")

# %% [markdown]
# Pulling the table back to (x1, x2, y1, y2) reproduces the closed form.

# %%
c2 = CMState([-1.0, 1.0], [-1.0, 1.0])
print(np.round(transported_xy_brackets(P1, c2), 12))
print(n2_bracket1_matrix(c2))
