//! Experiment drivers. Each turns a [`RunConfig`] into a [`ResultRecord`];
//! independent simulations inside one experiment fan out over rayon.

use std::time::Instant;

use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::record::ResultRecord;

pub mod convergence;
pub mod energy;
pub mod kernels;
pub mod recover;
pub mod timing;

pub use convergence::{manufactured_run, run_space_convergence, run_time_convergence, ManufacturedRun};
pub use energy::{decay_initial, energy_trace, run_energy};
pub use kernels::{run_fastconv_verify, run_kernel_eval, run_weights_dump};
pub use recover::{recovery_errors, run_fdtd_recover, RecoveryErrors};
pub use timing::{run_timing, TimingRow};

/// Validates `cfg` and runs its experiment.
pub fn run(cfg: &RunConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let t0 = Instant::now();
    let mut rec = match cfg.experiment {
        Experiment::TimeConvergence => run_time_convergence(cfg),
        Experiment::SpaceConvergence => run_space_convergence(cfg),
        Experiment::Energy => run_energy(cfg),
        Experiment::Timing => run_timing(cfg),
        Experiment::FdtdRecover => run_fdtd_recover(cfg),
        Experiment::KernelEval => run_kernel_eval(cfg),
        Experiment::WeightsDump => run_weights_dump(cfg),
        Experiment::FastconvVerify => run_fastconv_verify(cfg),
    }?;
    rec.wall_seconds = t0.elapsed().as_secs_f64();
    Ok(rec)
}

pub(crate) fn tag(alpha: f64, beta: f64) -> String {
    format!("a{alpha}_b{beta}")
}
