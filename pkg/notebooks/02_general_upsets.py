# %% [markdown]
# # Beyond principal events
#
# The classic inequality handles events of the form "all of these
# coordinates are 1".  The same bounds hold for any increasing event.  Here
# every event is a majority vote: A_i occurs when at least two of its three
# coordinates are 1.

# %%
from upjanson import generate, verify

family = generate("threshold", {"n": 9, "k": 4, "r": 3, "threshold": 2, "p": 0.4}, seed=1)
for i, ev in enumerate(family.events):
    print(i, ev.minset_indices(), "principal" if ev.is_principal else "not principal")

# %% [markdown]
# `verify` computes every bound and the exact law of X, then compares
# them.  It also replays the two conditional steps behind the proofs on the
# enumerated law.

# %%
ver = verify(family)
s = ver.report.summary
print(f"mu = {s.mu:.4f}, delta = {s.delta:.4f}, Pr(X=0) = {ver.pr_zero:.6f}")
for d in ver.domination:
    where = "Pr(X=0)" if d.t is None else f"t={d.t:.3f}"
    print(f"{d.bound:<14}{where:<10}bound {d.bound_value:.6f}  exact {d.exact_value:.6f}")
print("all checks passed:", ver.passed)

# %% [markdown]
# Random monotone DNFs mix events of different shapes.  Many of these
# instances have events sharing coordinates in several min-sets.

# %%
bad = 0
for seed in range(50):
    fam = generate("random-monotone-dnf", {"n": 14, "k": 6, "minsets": (1, 4), "size": (1, 3)}, seed)
    bad += not verify(fam, seed=seed).passed
print(f"{bad} failing instances out of 50")
