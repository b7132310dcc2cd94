"""Respiratory sound annotation workbench.

Ingest WAV recordings, render STFT spectrograms, manage multitrack
interval labels with journaled autosave, and score detector output with
segment- and event-level F1.
"""

from .annotations import (
    Annotation,
    AnnotationSet,
    ClassGroup,
    LabelClass,
    TrackLayout,
    class_group,
    default_layout,
    validate_set,
)
from .audio_io import (
    Recording,
    SegmentRef,
    load_recording,
    sample_window,
    truncate_segments,
    write_wav,
)
from .detector import DetectorConfig, detect_events
from .metrics import (
    EvalConfig,
    EvalReport,
    StatsTable,
    dataset_stats,
    event_f1,
    load_prediction_file,
    segment_f1,
)
from .persistence import (
    Config,
    Journal,
    JournalEvent,
    load_config,
    load_labels,
    replay_journal,
    save_config,
    snapshot_labels,
)
from .spectrogram import (
    Spectrogram,
    SpectrogramParams,
    compute_spectrogram,
    export_matrix,
    render_tile,
)

__version__ = "0.1.0"
