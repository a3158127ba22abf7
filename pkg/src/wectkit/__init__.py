"""Weighted Euler characteristic transforms of grayscale images.

Images are triangulated on the Freudenthal pixel grid, simplex weights are
extended from pixel intensities, and the transform is computed as exact
right-continuous step functions per direction.
"""

from .complex import (EXTENSIONS, Image, UnextendedWeightsError, WeightedComplex, complex_from_mask,
                      euler_characteristic, extend_weights, read_image_csv, triangulate,
                      weighted_euler_characteristic, write_image_csv)
from .filtration import (Direction, StepFunction, VectorizedWect, Wect, WectSampler, compute_wecf,
                         compute_wect, default_interval, equally_spaced_directions, height_filter,
                         sample_thresholds, vectorize)
from .intensity import STUDY_MODELS, UNIFORM, IntensityModel, UnsupportedModelError
from .metrics import (CurveMetric, calibrated_vectorized_distance, curve_distance,
                      pairwise_wect_distances, vectorized_distance, wect_distance)
from .expectation import (expected_simplex_weights, expected_wec, expected_wecf,
                          monte_carlo_wecf_mean, square_max_expected_wecf)
from .shapes import (SHAPES, ClassSpec, DatasetSpec, generate_dataset, sample_intensities, support,
                     write_dataset)
from .classify import (ExperimentSpec, knn_classify, run_experiment, run_many, train_kernel_svm,
                       train_svm)

__version__ = "0.1.0"
