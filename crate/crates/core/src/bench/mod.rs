//! Noise injection, synthetic data, F1* scoring and parameter sweeps.

pub mod metrics;
pub mod noise;
pub mod runner;
pub mod synth;

pub use metrics::{
    datatype_errors, datatype_sampling_error, majority_f1, AssignmentMap, F1Report, TypeScore,
};
pub use noise::{inject_noise, GroundTruth, NoiseProfile};
pub use runner::{
    bench_csv, evaluate, run_benchmark, run_cell, sweep, sweep_csv, BenchGrid, BenchRow,
    Evaluation, SweepRow,
};
pub use synth::{
    datatype_spec, desk_spec, gen_synthetic, social_example, EdgeSpec, NodeSpec, PropertyGen,
    SyntheticSpec,
};
