//! Multitask gait-phase and terrain recognition from a single
//! thigh-mounted IMU.
//!
//! The crate covers the full offline loop: a synthetic gait generator
//! (stand-in for treadmill/walkway recordings), the windowing and
//! normalization pipeline, FSR-based gait-percent labeling on the unit
//! circle, a small deterministic 1-D CNN engine with Adam and full
//! backpropagation, the two-stage training protocol (gait-phase model
//! first, then a terrain head on its frozen backbone), and the
//! three-way data-efficiency comparison.

pub mod compare;
pub mod error;
pub mod io;
pub mod labeler;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod synthgait;
pub mod trainer;
pub mod weights;

pub use compare::{
    emit_report, run_comparison, ComparisonConfig, ComparisonReport, ModelSettings, MODEL_NAMES,
};
pub use error::{Error, Result};
pub use labeler::{
    assign_percent, circular_rmse, contact_sections, detect_events, from_phase_xy, to_phase_xy,
    EventKind, FsrSample, GaitEvent, GaitLabel, PhaseSection, SectionKind,
};
pub use model::{
    grad_check, grad_check_with_fault, ArchSpec, GaitModel, OutputActivation, Task, TaskTargets,
};
pub use pipeline::{
    make_input, minmax_scale, moving_average, resample, select_features, stack_windows, Channels,
    ImuSample, InputTensor, RawWindow, WindowConfig,
};
pub use synthgait::{
    generate_dataset, generate_trial, Dataset, DatasetConfig, GeneratorParams, SensorTrial,
    Terrain, TrialCondition,
};
pub use trainer::{
    evaluate_gpr, evaluate_tc, split_gpr, split_tc, train, train_tc_stage, LossHistory,
    SplitIndices, TrainConfig,
};
pub use weights::{load_weights, load_weights_expecting, save_weights};
