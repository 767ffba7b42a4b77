"""Class-specific subspace multiple-kernel metric learning.

Per-class kernel subspaces are estimated by greedy landmark selection,
kernel weights are optimized for class separability on the probability
simplex, closed-form separability bounds are evaluated from plug-in
statistics, and layered feature augmentation stacks the learned
embeddings for a least-squares base classifier.
"""

from ._backend import backend_name
from .data import Dataset, Standardizer, kfold_indices, load_dataset, split_stratified
from .hierarchy import HierarchicalModel, HierarchyHyper, embed_full, embed_layer, train_hierarchy
from .kernels import (KernelFamily, KernelSet, KernelSpec, clasmk_eval, eval_kernel,
                      feature_distance_sq, gram)
from .lssvm import LinearModel, Prediction, fit_lssvm, predict, select_marginal
from .pipeline import PipelineModel, evaluate, kfold_errors, train_pipeline
from .separability import (bound_lemma1, bound_theorem1, bound_theorem2, build_report,
                           empirical_separation, estimate_model_stats, lemma3_lower_bound)
from .subspace import (BasisBank, ClassBasis, approx_gram, fit_bank, fit_class_basis,
                       project, project_many, subspace_overlap)
from .weights import (ClasmkHyper, ObjectiveParts, WeightMatrix, classwise_criterion,
                      empirical_objective, optimize_weights, select_best_kernels,
                      threshold_weights, train_clasmk, truncate_kernels)

__version__ = "0.1.0"
