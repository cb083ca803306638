//! Experiment configuration: one JSON document per run.

use meanfield_core::nls::threshold_l1;
use meanfield_core::{GridSpec, InteractionSpec, Profile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "parameters", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Converge(ConvergeParams),
    EnergyCheck(EnergyCheckParams),
    LewinCheck(LewinParams),
    HartreeScan(HartreeParams),
    Definetti(DefinettiParams),
    Counterexample(CounterexampleParams),
    TraceIdentity(TraceIdentityParams),
    NlsEvolve(NlsParams),
    ManybodyEvolve(ManybodyParams),
    GnConstant(GnParams),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("config does not match the schema")?;
        config.validate()?;
        Ok(config)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Converge(_) => "converge",
            Self::EnergyCheck(_) => "energy-check",
            Self::LewinCheck(_) => "lewin-check",
            Self::HartreeScan(_) => "hartree-scan",
            Self::Definetti(_) => "definetti",
            Self::Counterexample(_) => "counterexample",
            Self::TraceIdentity(_) => "trace-identity",
            Self::NlsEvolve(_) => "nls-evolve",
            Self::ManybodyEvolve(_) => "manybody-evolve",
            Self::GnConstant(_) => "gn-constant",
        }
    }

    /// Seed slot of stochastic experiments, `None` for deterministic ones.
    pub fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Self::HartreeScan(p) => Some(&mut p.seed),
            Self::Definetti(p) => Some(&mut p.seed),
            Self::TraceIdentity(p) => Some(&mut p.seed),
            Self::GnConstant(p) => Some(&mut p.seed),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Converge(p) => {
                positive("omega", p.omega)?;
                nonempty("n_list", &p.n_list)?;
                if p.n_list.windows(2).any(|w| w[1] < w[0]) || p.n_list.contains(&0) {
                    bail!("n_list must be positive and nondecreasing");
                }
                nonempty("times", &p.times)?;
                if p.times.iter().any(|t| !(*t >= 0.0)) || p.times.windows(2).any(|w| w[1] <= w[0]) {
                    bail!("times must be nonnegative and increasing");
                }
                if p.initial.iter().all(|c| c.norm() == 0.0) {
                    bail!("initial coefficients vanish");
                }
                positive("dt", p.dt)?;
                positive("krylov_tol", p.krylov_tol)?;
                p.potential.check()?;
            }
            Self::EnergyCheck(p) => {
                nonempty("n_list", &p.n_list)?;
                nonempty("checks", &p.checks)?;
                alpha(p.alpha)?;
                p.potential.check()?;
            }
            Self::LewinCheck(p) => {
                nonempty("n_list", &p.n_list)?;
                nonempty("epsilons", &p.epsilons)?;
                alpha(p.alpha)?;
                positive("m", p.m)?;
                p.potential.check()?;
            }
            Self::HartreeScan(p) => {
                alpha(p.alpha)?;
                p.potential.check()?;
                if p.trials == 0 {
                    bail!("trials must be positive");
                }
            }
            Self::Definetti(p) => {
                if p.particles < 2 || p.modes == 0 {
                    bail!("need D >= 1 and N >= 2");
                }
            }
            Self::Counterexample(p) => nonempty("epsilons", &p.epsilons)?,
            Self::TraceIdentity(p) => {
                if !(p.m1 >= 0.0 && p.m2 >= p.m1) {
                    bail!("need 0 <= m1 <= m2");
                }
            }
            Self::NlsEvolve(p) => {
                positive("dt", p.dt)?;
                if !(p.t_final >= 0.0) {
                    bail!("t_final must be nonnegative");
                }
                if !(p.b0 >= 0.0) {
                    bail!("b0 must be nonnegative");
                }
            }
            Self::ManybodyEvolve(p) => {
                nonempty("times", &p.times)?;
                if p.times.iter().any(|t| !(*t >= 0.0)) || p.times.windows(2).any(|w| w[1] <= w[0]) {
                    bail!("times must be nonnegative and increasing");
                }
                if p.initial.iter().all(|c| c.norm() == 0.0) {
                    bail!("initial coefficients vanish");
                }
                p.potential.check()?;
            }
            Self::GnConstant(p) => nonempty("ascent_seeds", &p.ascent_seeds)?,
        }
        if let Some(g) = self.grid() {
            GridSpec::new(g.half_width(), g.points_per_axis()).context("invalid grid")?;
        }
        Ok(())
    }

    fn grid(&self) -> Option<&GridSpec> {
        match self {
            Self::Converge(p) => p.grid.as_ref(),
            Self::HartreeScan(p) => p.grid.as_ref(),
            Self::NlsEvolve(p) => p.grid.as_ref(),
            Self::GnConstant(p) => p.grid.as_ref(),
            _ => None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        bail!("{name} must be positive, got {v}");
    }
    Ok(())
}

fn alpha(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        bail!("alpha must lie in (0, 1), got {a}");
    }
    Ok(())
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        bail!("{name} must not be empty");
    }
    Ok(())
}

/// Pair potential, always a Gaussian of the core family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    Gaussian { lambda: f64 },
    /// `‖V‖₁ = l1`
    L1 { l1: f64 },
    /// `‖V‖₁ = fraction · 2α/C_gn⁴`
    ThresholdFraction { fraction: f64, alpha: f64 },
}

impl Potential {
    fn check(&self) -> Result<()> {
        let v = match *self {
            Potential::Zero => 0.0,
            Potential::Gaussian { lambda } => lambda,
            Potential::L1 { l1 } => l1,
            Potential::ThresholdFraction { fraction, alpha: a } => {
                alpha(a)?;
                fraction
            }
        };
        if !(v >= 0.0) {
            bail!("potential strength must be nonnegative, got {v}");
        }
        Ok(())
    }

    pub fn spec(&self, beta: f64, n: usize) -> Result<InteractionSpec> {
        let spec = match *self {
            Potential::Zero => InteractionSpec::new(Profile::Zero, beta, n)?,
            Potential::Gaussian { lambda } => InteractionSpec::new(Profile::Gaussian { lambda }, beta, n)?,
            Potential::L1 { l1 } => InteractionSpec::gaussian_with_l1(l1, beta, n)?,
            Potential::ThresholdFraction { fraction, alpha } => {
                InteractionSpec::gaussian_with_l1(fraction * threshold_l1(alpha)?, beta, n)?
            }
        };
        Ok(spec)
    }
}

fn one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    1e-3
}

fn default_krylov_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub cutoff_energy: f64,
    pub potential: Potential,
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub times: Vec<f64>,
    /// Mode coefficients of `φ₀` as `[re, im]` pairs; normalized on load.
    pub initial: Vec<Complex64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_krylov_tol")]
    pub krylov_tol: f64,
    #[serde(default = "default_family")]
    pub family_size: usize,
}

fn default_family() -> usize {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyCheckKind {
    Prop23,
    Thm22,
    MainEnergyK1,
    MainEnergyK2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCheckParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub cutoff_energy: f64,
    pub alpha: f64,
    /// `C₀` for the pair forms; `None` uses `(1 − α)/2`.
    #[serde(default)]
    pub c0: Option<f64>,
    pub potential: Potential,
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub checks: Vec<EnergyCheckKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LewinParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub cutoff_energy: f64,
    pub alpha: f64,
    pub potential: Potential,
    pub beta: f64,
    pub m: f64,
    pub n_list: Vec<usize>,
    pub epsilons: Vec<f64>,
    /// Extra cell expected to violate the inequality because `M ≪ N^β`.
    #[serde(default)]
    pub violation: Option<LewinCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LewinCell {
    pub m: f64,
    pub n: usize,
    pub epsilon: f64,
    pub potential: Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HartreeParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub alpha: f64,
    pub potential: Potential,
    pub beta: f64,
    pub n: usize,
    /// `None` pins the largest admissible `2^{-k}`, or 0 above threshold.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// Haar-random vector in the symmetric sector.
    Random,
    /// `e₀^{⊗N}`
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefinettiParams {
    pub modes: usize,
    pub particles: usize,
    pub samples: usize,
    pub state: StateKind,
    #[serde(default)]
    pub state_seed: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleParams {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceIdentityParams {
    pub points: usize,
    pub m1: f64,
    pub m2: f64,
    pub n: usize,
    pub beta: f64,
    pub profile: meanfield_core::estimates::FourierProfile,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Initial NLS datum `e^{−|x−c|²/w} e^{i k·x}`, normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDatum {
    pub center: [f64; 2],
    pub width: f64,
    pub momentum: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub b0: f64,
    pub dt: f64,
    pub t_final: f64,
    pub initial: GaussianDatum,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Repeat at `dt/2` and report the energy-drift ratio.
    #[serde(default)]
    pub order_check: bool,
    #[serde(default = "mass_tol")]
    pub mass_tolerance: f64,
    #[serde(default = "energy_tol")]
    pub energy_tolerance: f64,
}

fn mass_tol() -> f64 {
    1e-10
}

fn energy_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManybodyParams {
    #[serde(default = "one")]
    pub omega: f64,
    pub cutoff_energy: f64,
    pub potential: Potential,
    pub beta: f64,
    pub n: usize,
    pub times: Vec<f64>,
    pub initial: Vec<Complex64>,
    #[serde(default = "default_krylov_tol")]
    pub krylov_tol: f64,
    /// Write a state snapshot at every time.
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnParams {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub ascent_seeds: Vec<u64>,
    #[serde(default = "ascent_iterations")]
    pub max_iterations: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn ascent_iterations() -> usize {
    2000
}

/// Normalize mode coefficients, rejecting the zero vector.
pub fn normalized(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) {
        bail!("coefficients vanish");
    }
    Ok(c.iter().map(|z| z / n).collect())
}
