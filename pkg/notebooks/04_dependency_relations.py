# %% [markdown]
# # Choosing a dependency relation
#
# The bounds need a relation such that each event is independent of the
# whole family of its non-neighbors, not merely of each one separately.
# Disjoint supports guarantee this on a product space.  A hand-written
# relation is checked before any bound is reported.

# %%
from upjanson import EventFamily, ProductSpace, canonicalize
from upjanson.dependency import DependencyRelation, UnsoundRelation, validate_relation
from upjanson.bounds import build_report

space = ProductSpace.uniform(4, 0.5)
events = [canonicalize([[0, 1]], 4), canonicalize([[1, 2]], 4), canonicalize([[3]], 4)]
family = EventFamily(space, events)

# %% [markdown]
# Events 0 and 1 share coordinate 1.  Leaving that pair out is unsound.

# %%
rel = DependencyRelation.from_pairs(3, [])
report = validate_relation(rel, family)
print("passed:", report.passed, "worst event:", report.worst_event,
      "worst subset:", report.worst_subset, f"violation {report.worst_violation:.4f}")

try:
    build_report(family.with_dependency(rel))
except UnsoundRelation as exc:
    print(exc)

# %% [markdown]
# The exact refinement starts from support overlap and drops a pair only when
# the two events are exactly independent.  Sharing a coordinate with
# probability 1 makes no difference, for instance.

# %%
from upjanson.dependency import build_support_relation, refine_exact

sure = ProductSpace([0.5, 1.0, 0.5, 0.5])
fam2 = EventFamily(sure, events)
support = build_support_relation(fam2)
refined = refine_exact(support, fam2)
print("support pairs:", support.sorted_pairs(), "refined pairs:", refined.sorted_pairs())
print("refined relation valid:", validate_relation(refined, fam2).passed)
