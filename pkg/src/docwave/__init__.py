"""Document image binarization: wavelet preprocessing, fusion pipeline, metrics."""

from .manifest import PatchManifest, PatchRecord, export_grids, read_manifest, write_manifest
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    avg_score,
    confusion,
    drd,
    evaluate,
    f_measure,
    mean_report,
    nubn,
    pseudo_f_measure,
    psnr,
)
from .patching import PatchGrid, reassemble, split_patches
from .pipeline import (
    Enhancer,
    FusionWeights,
    RunConfig,
    apply_enhancer,
    assemble_color_prediction,
    channel_groundtruth,
    fuse_channels,
    fuse_local_global,
    prepare_channels,
    run_pipeline,
)
from .raster import (
    ChannelBundle,
    as_plane,
    binarize,
    combine_channels,
    load_raster,
    luma,
    mask_from_raster,
    mask_to_raster,
    otsu_threshold,
    plane_to_raster,
    resize_bicubic,
    save_raster,
    split_channels,
)
from .wavelet import (
    NormParams,
    SubbandSet,
    auto_norm_params,
    dwt2_haar,
    idwt2_haar,
    lowpass_normalize,
    lowpass_raw,
    normalize_sigmoid,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelBundle",
    "ConfusionCounts",
    "Enhancer",
    "FusionWeights",
    "MetricsReport",
    "NormParams",
    "PatchGrid",
    "PatchManifest",
    "PatchRecord",
    "RunConfig",
    "SubbandSet",
    "apply_enhancer",
    "as_plane",
    "assemble_color_prediction",
    "auto_norm_params",
    "avg_score",
    "binarize",
    "combine_channels",
    "channel_groundtruth",
    "confusion",
    "drd",
    "dwt2_haar",
    "evaluate",
    "export_grids",
    "f_measure",
    "fuse_channels",
    "fuse_local_global",
    "idwt2_haar",
    "load_raster",
    "lowpass_normalize",
    "lowpass_raw",
    "luma",
    "mask_from_raster",
    "mask_to_raster",
    "mean_report",
    "nubn",
    "otsu_threshold",
    "plane_to_raster",
    "prepare_channels",
    "pseudo_f_measure",
    "psnr",
    "read_manifest",
    "reassemble",
    "resize_bicubic",
    "run_pipeline",
    "save_raster",
    "split_channels",
    "split_patches",
    "write_manifest",
]
