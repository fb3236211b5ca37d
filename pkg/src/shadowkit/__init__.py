"""shadowkit: classical shadow estimation with circuit reuse.

The package has three layers:

* simulation: ``stabilizer`` (tableaux, exact overlaps), ``clifford``
  (symplectic group elements, exactly uniform sampling, enumeration for
  n <= 2), ``dense`` (statevector oracle paths), ``ensembles`` (Haar,
  Clifford, and T-gate-interpolated circuit families);
* estimation: ``protocol`` (single-shot estimator, acquisition with reuse,
  median of means, conditional-mean variances);
* analysis: ``moments`` (commutant bases, exact Gram/Weingarten matrices,
  closed-form variances), ``tails`` (exact estimator moments, tail bounds,
  reuse-cost optimizer), ``experiments``/``cli`` (reproducible runs).
"""

from .clifford import CliffordElement, clifford_order, enumerate_group, sample_uniform
from .ensembles import EnsembleSpec, SampledCircuit, inverse_frame_apply, sample_circuit
from .protocol import (ObservableSpec, RunConfig, ShadowRecord, acquire, estimate,
                       estimate_vstar, median_of_means, single_shot, stabilizer_pair)
from .stabilizer import PauliString, StabilizerTableau, overlap_sq
from .moments import (commutant_labels, gram_matrix, sigma_tt_enumerate,
                      stabilizer_pair_variance, thrifty_variance_predict,
                      variance_3design, weingarten_matrix)
from .tails import (CostModel, MomentTable, bernstein_tail, clifford_moment,
                    limiting_moment, mgf_bound_haar, optimal_reuse, tail_experiment)

__version__ = "0.1.0"

__all__ = [
    "CliffordElement", "CostModel", "EnsembleSpec", "MomentTable",
    "ObservableSpec", "PauliString", "RunConfig", "SampledCircuit",
    "ShadowRecord", "StabilizerTableau", "acquire", "bernstein_tail",
    "clifford_moment", "clifford_order", "commutant_labels", "enumerate_group",
    "estimate", "estimate_vstar", "gram_matrix", "inverse_frame_apply",
    "limiting_moment", "median_of_means", "mgf_bound_haar", "optimal_reuse",
    "overlap_sq", "sample_circuit", "sample_uniform", "sigma_tt_enumerate",
    "single_shot", "tail_experiment", "stabilizer_pair", "stabilizer_pair_variance",
    "thrifty_variance_predict", "variance_3design", "weingarten_matrix",
]
