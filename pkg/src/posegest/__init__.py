"""posegest: body-gesture recognition from 33-point pose landmarks.

Library + CLI: synthetic dataset generation, a from-scratch dense
classifier trained with Adam under leave-one-subject-out evaluation,
precision/recall/F1 reporting with rendered figures, and a streaming
newline-delimited prediction service.
"""

from .core import (
    CLASS_LABELS,
    FRAME_WIDTH,
    LANDMARK_INDEX,
    LANDMARK_NAMES,
    NUM_CLASSES,
    NUM_LANDMARKS,
    Dataset,
    GestureClass,
    Landmark,
    PoseFrame,
    Sample,
    flatten_frame,
    unflatten_frame,
)
from .mlp import (
    DEFAULT_DIMS,
    DenseLayer,
    GradientSet,
    MlpModel,
    backward,
    backward_batch,
    cross_entropy_loss,
    forward,
    forward_batch,
    log_softmax,
    predict,
    relu,
    softmax,
)
from .adam import AdamState, adam_new, adam_step
from .dataio import (
    CheckpointError,
    DatasetFormatError,
    load_model,
    model_checksum,
    read_dataset,
    save_model,
    write_dataset,
)
from .metrics import ClassReport, ConfusionMatrix, render_report, report
from .serve import (
    PredictionServer,
    ProtocolError,
    handle_line,
    parse_frame_line,
    prediction_line,
    serve_stream,
)
from .synth import SubjectStyle, SynthConfig, archetype_frame, base_skeleton, generate
from .training import (
    Fold,
    LosoResult,
    SplitPlan,
    TrainConfig,
    TrainReport,
    loso_split,
    normalize_frame,
    run_loso,
    train_fold,
)

__version__ = "0.1.0"
