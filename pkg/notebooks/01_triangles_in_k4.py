# %% [markdown]
# # Triangles in G(4, 1/2)
#
# Each of the six edges of K4 is present independently with probability 1/2.
# X counts the four triangles.  The support relation links two triangles
# exactly when they share an edge, so every pair is related here.
#
# We first enumerate all 64 graphs to get the law of X, then ask how close
# the bounds on Pr(X = 0) and on the lower tail get to it.

# %%
from upjanson import enumerate_distribution, summarize, subgraph_count
from upjanson.bounds import bound_i1, bound_i1a, bound_i2, bound_i2a, lower_bound

family = subgraph_count("triangle", 4, 0.5)
dist = enumerate_distribution(family)
for value, prob in dist.atoms.items():
    print(f"Pr(X = {value:g}) = {prob * 64:g}/64")

# %% [markdown]
# Only 0, 1, 2 and 4 triangles are possible.  Three triangles force the
# fourth.  The mean is 4/8 = 1/2.

# %%
s = summarize(family)
print(f"mu = {s.mu}, delta = {s.delta}, eps = {s.eps}")

# %% [markdown]
# Delta sums Pr(A_i and A_j) over the 12 ordered related pairs.  Two
# triangles share one edge, so each pair needs five edges: 12 / 32 = 0.375.

# %%
exact = dist.pr_zero
rows = [
    ("product lower bound", lower_bound(s)),
    ("exact", exact),
    ("i2a", bound_i2a(family)),
    ("i1a", bound_i1a(s)),
    ("i1", bound_i1(s)),
]
for name, value in rows:
    print(f"{name:<22}{value:.6f}")

# %% [markdown]
# The chain lower <= exact <= i2a <= i1 holds.  The product of Pr(not A_i)
# is the Harris lower bound.  i2a is the tightest upper bound because it
# uses the exact conditional expectations instead of Delta.

# %%
for t in s.t_grid():
    phi_form, quad_form = bound_i2(s, t)
    print(f"t = {t:.3f}: phi form {phi_form:.6f}, quadratic form {quad_form:.6f}")
