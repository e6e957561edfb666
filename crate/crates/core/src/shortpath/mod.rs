//! Explicit path families whose energy and length go to zero while their
//! endpoints stay fixed.

mod connect;
mod corner;
mod family;
mod lemma;
mod report;
mod tune;

pub use connect::{connect, ConnectConfig, Connection};
pub use corner::{
    corner_displacement, corner_path_raw, indicator_fields, corner_path, CornerPath,
    CornerPathParams,
};
pub use family::{compute_i, i_integral, FFamily, FValues};
pub use lemma::{
    leg_bounds, loop_i, measure_loop, predicted_drift, symmetry_blocks, vertical_drift, Leg,
    LegBounds, LegPoint, LegSampler, LoopParams, LambdaRule, LoopMeasures, Placement,
    PlateauProfile,
};
pub use report::{
    corner_sweep, fit_power, write_bounds_csv, write_figure_csv, write_sweep_csv, SweepRow,
};
pub use tune::{eps1_limit, tune_center, TuneConfig, TunedLoop};
