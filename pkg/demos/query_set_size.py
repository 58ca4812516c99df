"""
Does a bigger query set help?
=============================

A transductive method can only exploit the query set if there is one. Here
each task is sampled once with 30 queries per class, and nested subsets of
1, 5, 15 and 30 per class are handed to the solver with the support fixed.
The k-NN detector scores every query on its own, so its scores for a given
query are the same whatever the subset size.
"""

import numpy as np

from oslo import (
    CenteringMode, Episode, EpisodeSpec, ScoredQuerySet, SolverConfig, SyntheticSpec, auroc,
    compute_base_center, generate_synthetic_dataset, knn_outlier_score, normalize_episode,
    sample_episode, solve,
)

full = generate_synthetic_dataset(SyntheticSpec(50, 64, 0.5, 60, rng_seed=2))
base_center = compute_base_center(full.subset(full.labels < 10, "base"))
test = full.subset(full.labels >= 10, "test")

SIZES = (1, 5, 15, 30)
config = SolverConfig(lambda_z=0.15, lambda_xi=1.0)
scores = {"oslo": {n: [] for n in SIZES}, "k-NN": {n: [] for n in SIZES}}

for t in range(150):
    ep = sample_episode(test, EpisodeSpec(n_query_per_class=30, rng_seed=2), t)
    for n in SIZES:
        # queries are stored class by class, 30 each
        keep = np.concatenate([np.arange(c * 30, c * 30 + n) for c in range(10)])
        sub = Episode(ep.support_features, ep.support_labels, ep.query_features[keep],
                      ep.ground_truth_labels[keep], ep.n_ways)
        result, _ = solve(normalize_episode(sub, CenteringMode("task")), config)
        scores["oslo"][n].append(auroc(ScoredQuerySet.from_scores(result.outlierness,
                                                                  sub.is_outlier)))
        knn = knn_outlier_score(normalize_episode(sub, CenteringMode("base", base_center)))
        scores["k-NN"][n].append(auroc(ScoredQuerySet.from_scores(knn, sub.is_outlier)))

print("queries/class " + "".join(f"{n:>8}" for n in SIZES))
for method, by_size in scores.items():
    print(f"{method:<14}" + "".join(f"{np.mean(by_size[n]):>8.3f}" for n in SIZES))
