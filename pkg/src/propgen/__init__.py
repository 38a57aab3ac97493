"""Property-graph simulation from label and edge-category multinomials."""

from .augmentation import (
    AugmentationConfig,
    BucketingScheme,
    assign_degree_labels,
    augment,
    degree_bucket_boundaries,
    generate_with_augmentation,
    pgm_augmented,
)
from .estimation import (
    CategoricalDistribution,
    EdgeCategoryDistribution,
    FittedModel,
    Sampler,
    build_sampler,
    estimate_edge_distribution,
    estimate_label_distribution,
    fit,
    marginalize,
    total_variation,
)
from .generation import (
    GenerationConfig,
    GenerationReport,
    build_category_pools,
    expand,
    generate,
    sample_edges,
    sample_vertex_labels,
    sim_attr_graph,
)
from .graph_model import (
    Label,
    LabelSchema,
    PropertyGraph,
    decode_category,
    degree_sequence,
    encode_label_vector,
    validate,
)
from .metrics import ccdf, degree_jsd, degree_pmf, jsd

__version__ = "0.1.0"
