//! TOML run configuration. Keys follow the model's symbols: `alpha`,
//! `beta`, `eps_s`, `eps_inf`, `tau0`, `N`, `T`, `dt`, `Nt`, `fast.*`.

use std::path::Path;

use clap::ValueEnum;
use hn_core::fastconv::FastParams;
use hn_core::fdtd1d::PhysicalMedium;
use hn_core::prabhakar::KernelSpec;
use hn_core::timestepper::{HistoryMode, MediumParams};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TimeConvergence,
    SpaceConvergence,
    Energy,
    Timing,
    FdtdRecover,
    KernelEval,
    WeightsDump,
    FastconvVerify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::TimeConvergence => "time-convergence",
            Self::SpaceConvergence => "space-convergence",
            Self::Energy => "energy",
            Self::Timing => "timing",
            Self::FdtdRecover => "fdtd-recover",
            Self::KernelEval => "kernel-eval",
            Self::WeightsDump => "weights-dump",
            Self::FastconvVerify => "fastconv-verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    #[default]
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FastConfig {
    pub base: usize,
    pub ncol: usize,
    pub eps_f: f64,
}

impl Default for FastConfig {
    fn default() -> Self {
        let p = FastParams::default();
        Self { base: p.base, ncol: p.ncol, eps_f: p.eps_f }
    }
}

impl FastConfig {
    pub fn params(&self) -> FastParams {
        FastParams { base: self.base, ncol: self.ncol, eps_f: self.eps_f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Medium {
    pub alpha: f64,
    pub beta: f64,
    pub eps_s: f64,
    pub eps_inf: f64,
    /// Relaxation time in seconds; FDTD only.
    pub tau0: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 0.5, eps_s: 2.0, eps_inf: 1.0, tau0: 1.53e-10 }
    }
}

impl Medium {
    pub fn with(&self, alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, ..*self }
    }

    pub fn scaled(&self) -> Result<MediumParams> {
        Ok(MediumParams::new(self.eps_inf, self.eps_s, self.alpha, self.beta)?)
    }

    pub fn physical(&self) -> Result<PhysicalMedium> {
        Ok(PhysicalMedium::new(self.eps_s, self.eps_inf, self.tau0, self.alpha, self.beta)?)
    }
}

/// 1D FDTD setup; lengths in metres, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdtdConfig {
    pub a: f64,
    pub b: f64,
    pub dz: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub z_star: f64,
    /// Probe offsets l (in cells) past the source.
    pub offsets: Vec<usize>,
    /// Sampled band in Hz.
    pub f_min: f64,
    pub f_max: f64,
    pub n_omega: usize,
}

impl Default for FdtdConfig {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 1.1,
            dz: 1.1e-3,
            dt: 1.768e-12,
            t: 5.304e-9,
            z_star: 0.55,
            offsets: vec![20, 30],
            f_min: 0.1e9,
            f_max: 10e9,
            n_omega: 400,
        }
    }
}

impl FdtdConfig {
    pub fn cells(&self) -> usize {
        ((self.b - self.a) / self.dz).round() as usize
    }

    pub fn steps(&self) -> usize {
        (self.t / self.dt).round() as usize
    }

    pub fn source_index(&self) -> usize {
        ((self.z_star - self.a) / self.dz).round() as usize
    }
}

/// Kernel parameters for `kernel-eval`, `weights-dump` and `fastconv-verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Shift σ in e^γ_{α,μ}(t; σ).
    pub sigma: f64,
    /// Defaults to αβ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Defaults to β.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub times: Vec<f64>,
    /// ϱ in the fast-history symbol.
    pub varrho: f64,
    pub dofs: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { sigma: -1.0, mu: None, gamma: None, times: vec![0.1, 0.5, 1.0, 2.0, 5.0], varrho: 1.0, dofs: 4 }
    }
}

/// Assertion-grade gates; a failed gate makes the CLI exit nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_gap: Option<f64>,
    /// Allowed ℰ^k - ℰ^{k-1} relative to ℰ^0.
    pub energy_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_tol: Option<f64>,
    pub weight_sum_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fastconv_tol: Option<f64>,
    /// Accepted band for the direct op-count ratio per N_t doubling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_ratio: Option<[f64; 2]>,
    /// Largest fast op-count ratio per N_t doubling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast_ratio_max: Option<f64>,
}

impl Default for Checks {
    fn default() -> Self {
        Self { order_range: None, mode_gap: None, energy_tol: 1e-12, recovery_tol: None, weight_sum_tol: 1e-11, fastconv_tol: None, direct_ratio: None, fast_ratio_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "Ns", default, skip_serializing_if = "Vec::is_empty")]
    pub ns: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dts: Vec<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "Nt", default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(rename = "Nts", default, skip_serializing_if = "Vec::is_empty")]
    pub nts: Vec<usize>,
    /// Weight count K for `weights-dump`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// (α, β) pairs swept by multi-panel experiments.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<[f64; 2]>,
    /// Also run the other history mode and report the field discrepancy.
    #[serde(default)]
    pub compare_modes: bool,
    #[serde(default)]
    pub medium: Medium,
    #[serde(default)]
    pub fast: FastConfig,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fdtd: Option<FdtdConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            mode: Mode::default(),
            out: None,
            seed: 0,
            n: None,
            ns: Vec::new(),
            dt: None,
            dts: Vec::new(),
            t: None,
            nt: None,
            nts: Vec::new(),
            k: None,
            panels: Vec::new(),
            compare_modes: false,
            medium: Medium::default(),
            fast: FastConfig::default(),
            checks: Checks::default(),
            fdtd: None,
            kernel: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn emit(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn history_mode(&self) -> HistoryMode {
        match self.mode {
            Mode::Direct => HistoryMode::Direct,
            Mode::Fast => HistoryMode::Fast(self.fast.params()),
        }
    }

    /// The (α, β) panels, falling back to the medium's own pair.
    pub fn panel_list(&self) -> Vec<(f64, f64)> {
        if self.panels.is_empty() {
            vec![(self.medium.alpha, self.medium.beta)]
        } else {
            self.panels.iter().map(|p| (p[0], p[1])).collect()
        }
    }

    pub fn kernel_config(&self) -> KernelConfig {
        self.kernel.clone().unwrap_or_default()
    }

    pub fn fdtd_config(&self) -> FdtdConfig {
        self.fdtd.clone().unwrap_or_default()
    }

    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| HarnessError::Config(format!("missing key `{key}`")))
    }

    pub fn n_required(&self) -> Result<usize> {
        Self::require(self.n, "N")
    }

    pub fn dt_required(&self) -> Result<f64> {
        Self::require(self.dt, "dt")
    }

    pub fn t_required(&self) -> Result<f64> {
        Self::require(self.t, "T")
    }

    /// Rejects out-of-domain parameters and missing experiment inputs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        for (a, b) in self.panel_list() {
            let m = self.medium.with(a, b);
            if self.experiment == Experiment::FdtdRecover {
                m.physical()?;
            } else if matches!(self.experiment, Experiment::KernelEval | Experiment::WeightsDump | Experiment::FastconvVerify) {
                KernelSpec::new(a, b, self.kernel_config().sigma)?;
            } else {
                m.scaled()?;
            }
        }
        if self.fast.base < 2 || self.fast.ncol == 0 || !(self.fast.eps_f > 0.0) {
            return bad("fast.base >= 2, fast.ncol >= 1 and fast.eps_f > 0 required".into());
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.dt.is_some_and(|v| !positive(v)) || self.dts.iter().any(|&v| !positive(v)) {
            return bad("time steps must be positive".into());
        }
        if self.t.is_some_and(|v| !positive(v)) {
            return bad("T must be positive".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must fit a TOML integer".into());
        }
        match self.experiment {
            Experiment::TimeConvergence => {
                self.n_required()?;
                self.t_required()?;
                if self.dts.is_empty() {
                    return bad("time-convergence needs `dts`".into());
                }
            }
            Experiment::SpaceConvergence => {
                self.dt_required()?;
                self.t_required()?;
                if self.ns.is_empty() {
                    return bad("space-convergence needs `Ns`".into());
                }
            }
            Experiment::Energy => {
                self.n_required()?;
                Self::require(self.nt, "Nt")?;
                if self.dt.is_none() && self.dts.is_empty() {
                    return bad("energy needs `dt` or `dts`".into());
                }
            }
            Experiment::Timing => {
                self.n_required()?;
                self.t_required()?;
                if self.nts.is_empty() {
                    return bad("timing needs `Nts`".into());
                }
            }
            Experiment::FdtdRecover => {
                let f = self.fdtd_config();
                if !(f.b > f.a && positive(f.dz) && positive(f.dt) && positive(f.t)) {
                    return bad("fdtd needs b > a and positive dz, dt, T".into());
                }
                let (m, src) = (f.cells(), f.source_index());
                if src == 0 || src >= m || f.offsets.iter().any(|&l| l == 0 || src + l > m) {
                    return bad("fdtd source and probes must lie inside the grid".into());
                }
                if !(f.f_min > 0.0 && f.f_max > f.f_min && f.n_omega >= 2) {
                    return bad("fdtd band needs 0 < f_min < f_max and n_omega >= 2".into());
                }
            }
            Experiment::KernelEval => {
                if self.kernel_config().times.iter().any(|&t| !(t > 0.0)) {
                    return bad("kernel times must be positive".into());
                }
            }
            Experiment::WeightsDump => {
                self.dt_required()?;
                Self::require(self.k, "K")?;
            }
            Experiment::FastconvVerify => {
                self.dt_required()?;
                Self::require(self.nt, "Nt")?;
                if !(self.kernel_config().varrho > 0.0) {
                    return bad("kernel.varrho must be positive".into());
                }
            }
        }
        Ok(())
    }
}
