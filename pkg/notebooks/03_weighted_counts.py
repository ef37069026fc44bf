# %% [markdown]
# # Weighted counts
#
# With positive weights c_i the count becomes X = sum of c_i 1[A_i].  Delta
# is replaced by Delta-bar, which adds the c_i^2 Pr(A_i) diagonal and weights
# each related pair by c_i c_j.  The unweighted i1 and i2 forms do not apply.
# The i2e forms and the i2a product remain valid.

# %%
from upjanson import generate, verify

family = generate("random-monotone-dnf", {"n": 10, "k": 5, "weights": (0.5, 3.0)}, seed=4)
print("weights:", [round(c, 3) for c in family.weights])
ver = verify(family)
s = ver.report.summary
print(f"mu = {s.mu:.4f}, delta_bar = {s.delta_bar:.4f}")
print(ver.report.notes[0])

# %%
for bound_id, values in ver.report.tail.items():
    cells = "  ".join(f"{v:.4f}" for v in values)
    print(f"{bound_id:<14}{cells}")
print(f"{'exact':<14}" + "  ".join(f"{q:.4f}" for q in ver.lower_tails))

# %% [markdown]
# Setting every weight to 1 returns the unweighted setting, and then the
# i2e forms coincide with the i2 forms.

# %%
from upjanson.bounds import bound_i2, bound_i2e, summarize

plain = family.with_weights([1.0] * family.k)
s1 = summarize(plain)
t = s1.mu / 2
print(bound_i2(s1, t), bound_i2e(s1, t))
