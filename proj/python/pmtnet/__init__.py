"""CNN and convolutional autoencoder for 8x24 PMT charge images."""

from ._pmtnet import (
    CLASS_NAMES,
    COLUMNS,
    RINGS,
    Model,
    PmtnetError,
    f1_per_class,
    generate,
    kmeans,
    macro_f1,
    prepare,
    run_command,
    tsne,
)

__all__ = [
    "CLASS_NAMES",
    "COLUMNS",
    "RINGS",
    "Model",
    "PmtnetError",
    "f1_per_class",
    "generate",
    "kmeans",
    "macro_f1",
    "prepare",
    "run_command",
    "tsne",
]
