"""Trajectory imaging of moving point sources from multi-frequency far-field data."""

from .forward import (FarFieldSamples, FrequencyBand, NoiseSpec,
                      QuadratureError, add_noise, far_field_line_closed_form,
                      far_field_value, read_farfield_csv, sample_band,
                      write_farfield_csv)
from .imaging import (ScalarField, SearchGrid, SliceSpec, contrast_metric,
                      evaluate_field, make_grid, mask_strip, mask_theta,
                      normalize_field, read_field_csv, slice_field_3d,
                      write_field_csv, write_mask_csv, write_pgm)
from .indicator import (DEFAULT_THRESHOLD, PicardResult, TestVector,
                        direction_filter, filtered_field_values,
                        indicator_multi, indicator_single, picard_sum,
                        picard_sums_grid, test_vector)
from .spectral import (MODE_PAPER, MODE_RIGOROUS, DiagonalizationError,
                       FarFieldOperator, Spectrum, build_operator,
                       f_sharp_spectrum, hermitian_abs, hermitian_parts,
                       write_spectrum_csv)
from .trajectory import (Arc, Direction, Line, ObservabilityReport,
                         PiecewiseLinear, Sampled, Strip, ThetaDomain,
                         TimeInterval, Trajectory, classify, contains,
                         division_points, eval_position, eval_velocity,
                         h_derivative, h_value, observable_set_arc,
                         observable_set_line, projection_hull, strip,
                         theta_domain, xi_extrema)

__version__ = "0.1.0"
