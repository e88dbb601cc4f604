"""pacbound: offset-free RBF SVM with self-computed risk certificates.

Trains a kernel SVM by SMO, wraps it in a Gaussian-randomized classifier,
and certifies its risk from the training data alone via PAC-Bayes and
stability bounds.
"""

from ._backend import HAVE_EXTENSION, backend_name, get_backend
from .bounds import (BE, LIU, PEW, PO, BoundReport, bound_be, bound_liu,
                     bound_pew, bound_po, concentration_radius, kl_bernoulli,
                     kl_gaussian_shift, kl_inverse_upper)
from .data import (Dataset, SplitSpec, Standardizer, load_dataset,
                   save_dataset, split, standardize)
from .kernel import KernelSpec, c0_heuristic, gram, median_heuristic, rbf_eval
from .rand_risk import (RandomizedClassifier, average_risk, gaussian_cdf,
                        mc_average_risk, sample_predict)
from .svm import (BE_LAMBDA, C_STYLE, OURS_LAMBDA, SvmFormulation, SvmModel,
                  convert, load_model, losses, margin, margins, save_model,
                  train, weight_norm_sq)
from .tuning import (GridSpec, SigmaSearchSpec, optimize_sigma, run_grid,
                     test_confidence_correction)
from .verify import (StabilityProbe, check_vector_mcdiarmid,
                     check_weight_concentration, estimate_beta,
                     two_cluster_dataset)

__version__ = "0.1.0"
