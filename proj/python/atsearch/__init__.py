"""Sequential pose search with a sparse oracle budget."""

from atsearch._core import (  # noqa: F401
    SOFT_FAMILY_COUNT,
    DegenerateSampleError,
    GrayImage,
    IntegralSet,
    Lattice,
    ModelBundle,
    ModelCoverageError,
    Orientation,
    ScaleInterval,
    SceneSpec,
    SearchConfig,
    TargetSpec,
    TrainingCoverageError,
    __version__,
    beta_pdf,
    build_lattice,
    config_from_json,
    config_to_json,
    detect_edges,
    file_hash_hex,
    fit_beta_mle,
    l2_distance,
    load_config,
    load_models,
    load_pgm,
    random_scene_spec,
    save_config,
    save_models,
    save_pgm,
    search,
    synth_scene,
    train,
)
