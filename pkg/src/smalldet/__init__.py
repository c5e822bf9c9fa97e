"""smalldet: label-assignment analytics and frequency-domain feature tools.

A detector-agnostic toolkit covering three mechanisms that matter for
small-object detection, plus the harness to study them:

* box geometry and the analytic IoU curves that expose its size bias,
* dense prior generation over feature pyramids,
* label assigners (best-overlap and multi-criteria) with a Monte-Carlo
  study of how positives distribute across object sizes,
* centered-FFT feature purification and low/high frequency splitting,
* COCO-format annotation ingestion for the same statistics on real data.
"""

from .assign import (
    IGNORED,
    NEGATIVE,
    ONE_STAGE_CONFIG,
    TWO_STAGE_CONFIG,
    AssignConfig,
    AssignResult,
    MclaWeights,
    assign_max_quality,
    center_mse_matrix,
    criterion_matrix,
    mcla_assign,
    mcla_scores,
    minmax_normalize,
    one_stage_maxiou,
    scores_to_csv,
    shape_mse_matrix,
    two_stage_maxiou,
)
from .freq import (
    HfpConfig,
    build_band_mask,
    build_hfp_mask,
    fd_split,
    fft2_centered,
    hfp_purify,
    ifft2_centered,
    purify_with_mask,
)
from .geometry import (
    Box,
    CenterSize,
    as_xyxy,
    cxcywh_to_xyxy,
    iou,
    iou_contained,
    iou_matrix,
    iou_under_shift,
    xyxy_to_cxcywh,
)
from .ingest import Dataset, dataset_assignment_stats, load_coco
from .priors import (
    LevelSpec,
    PriorSet,
    PyramidSpec,
    generate_priors,
    one_stage_spec,
    two_stage_spec,
)
from .sim import (
    AssignerDef,
    SimConfig,
    SimReport,
    SizeBins,
    default_assigners,
    gt_size,
    gt_sizes,
    make_assigner,
    report_from_json,
    report_to_csv,
    report_to_json,
    run_simulation,
    sample_gts,
)
from .tensorio import TensorFormatError, read_ftm, write_ftm

__version__ = "0.1.0"
