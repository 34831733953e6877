"""Appliance identification from power signatures.

Signatures are min-max normalized, laid out as a near-square matrix and
described by local texture histograms (LPH and five rival descriptors),
then classified with an improved k-nearest-neighbors model.
"""

from .descriptors import (
    DescriptorHistogram,
    DescriptorKind,
    code_matrix,
    extract,
    extract_many,
    generate_bsif_bank,
)
from .eventdetect import EdgeEvent, Segment, detect_edges, segment_between
from .evaluation import compare_descriptors, kfold_eval, metrics, ncc, ncc_matrix
from .iknn import IknnConfig, IknnModel, KnnConfig, fit, knn_predict, predict
from .modelfile import load_model, save_model
from .signals import Dataset, PowerSignal, load_csv, write_csv
from .synthetic import ArchetypeSpec, SynthConfig, benchmark_config, generate_synthetic
from .transform2d import PowerMatrix, normalize, reshape_to_matrix

__version__ = "0.1.0"
