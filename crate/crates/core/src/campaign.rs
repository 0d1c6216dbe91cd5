//! Ensemble simulation, empirical regime detection and theory-versus-simulation
//! comparison.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify, detect_drift, find_fixed_points, PredictedState, RegimeClassification, RegimeKind,
};
use crate::averaging::{average_through_order2, QuadratureSpec};
use crate::bench::{BenchFamily, FamilyParams, DEFAULT_R_MAX};
use crate::error::{Error, Result};
use crate::hashing::config_hash;
use crate::integrate::{integrate, InitialState, IntegratorConfig, Sample, TrajectoryRecord};
use crate::model::{angle_distance, wrap_angle};

/// Benchmark family addressed by name and key-value parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
}

impl FamilySpec {
    pub fn new(family: &str, params: &[(&str, f64)]) -> Self {
        Self {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            r_max: None,
        }
    }

    pub fn from_params(p: FamilyParams) -> Self {
        Self {
            family: p.name().to_string(),
            params: p.pairs(),
            r_max: None,
        }
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    pub fn build(&self) -> Result<BenchFamily> {
        let params = FamilyParams::from_pairs(&self.family, &self.params)?;
        BenchFamily::new(params, self.r_max.unwrap_or(DEFAULT_R_MAX))
    }
}

/// Detector thresholds. All are overridable from config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorWindows {
    /// Max `|dϱ/dt|` on the tail for a steady amplitude.
    pub slope_tol: f64,
    /// Max variance of `ϱ` on the tail for a steady amplitude.
    pub var_tol: f64,
    /// Max total variation of the block-averaged `θ` on the tail for a lock.
    pub lock_tv: f64,
    /// Min `|θ(t_end) − θ(t_end/10)|` for a drift.
    pub drift_min_change: f64,
    /// Min fraction of block-to-block `θ` steps sharing the drift sign.
    pub drift_monotone: f64,
    /// Min slope of `ϱ` against `log t` for logarithmic growth.
    pub log_min_slope: f64,
    /// Max relative mismatch of the two half-window log slopes.
    pub log_ratio_tol: f64,
    /// Number of time blocks the tail is averaged over.
    pub blocks: usize,
}

impl Default for DetectorWindows {
    fn default() -> Self {
        Self {
            slope_tol: 1e-5,
            var_tol: 1e-3,
            lock_tv: 0.2,
            drift_min_change: 4.0 * PI,
            drift_monotone: 0.9,
            log_min_slope: 0.05,
            log_ratio_tol: 0.1,
            blocks: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeVerdict {
    SteadyAmplitude { rho_inf: f64, tail_slope: f64 },
    LogGrowth { slope: f64 },
    Escaped { exit_time: f64 },
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseVerdict {
    PhaseLocked { theta_inf: f64 },
    PhaseDrifting { sign: i8, change: f64 },
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeObservation {
    pub amplitude: AmplitudeVerdict,
    pub phase: PhaseVerdict,
}

impl RegimeObservation {
    pub fn label(&self) -> String {
        let a = match self.amplitude {
            AmplitudeVerdict::SteadyAmplitude { .. } => "steady",
            AmplitudeVerdict::LogGrowth { .. } => "log_growth",
            AmplitudeVerdict::Escaped { .. } => "escaped",
            AmplitudeVerdict::Undetermined => "undetermined",
        };
        let p = match self.phase {
            PhaseVerdict::PhaseLocked { .. } => "locked",
            PhaseVerdict::PhaseDrifting { .. } => "drifting",
            PhaseVerdict::Undetermined => "undetermined",
        };
        format!("{a}+{p}")
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Means of `value` over `blocks` equal time bins of the slice (empty bins skipped).
fn block_means(tail: &[Sample], blocks: usize, value: impl Fn(&Sample) -> f64) -> Vec<f64> {
    let (t0, t1) = (tail[0].t, tail[tail.len() - 1].t);
    let width = (t1 - t0) / blocks as f64;
    let mut sums = vec![(0.0, 0usize); blocks];
    for s in tail {
        let b = (((s.t - t0) / width) as usize).min(blocks - 1);
        sums[b].0 += value(s);
        sums[b].1 += 1;
    }
    sums.into_iter().filter(|b| b.1 > 0).map(|b| b.0 / b.1 as f64).collect()
}

/// Tail statistics of the recorded series. Verdicts depend only on the samples.
pub fn detect_regime(rec: &TrajectoryRecord, w: &DetectorWindows) -> Result<RegimeObservation> {
    if let Some(exit) = rec.exit {
        return Ok(RegimeObservation {
            amplitude: AmplitudeVerdict::Escaped { exit_time: exit.t },
            phase: PhaseVerdict::Undetermined,
        });
    }
    let (Some(first), Some(last)) = (rec.samples.first(), rec.samples.last()) else {
        return Err(Error::RecordTooShort("empty record".into()));
    };
    let t_end = last.t;
    if t_end < 100.0 * first.t {
        return Err(Error::RecordTooShort(format!(
            "record spans [{}, {}], fewer than two decades",
            first.t, t_end
        )));
    }
    let tail: Vec<Sample> = rec.samples.iter().filter(|s| s.t >= t_end / 10.0).copied().collect();
    if tail.len() < 2 * w.blocks.max(4) {
        return Err(Error::RecordTooShort(format!("only {} tail samples", tail.len())));
    }
    let ts: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let rhos: Vec<f64> = tail.iter().map(|s| s.rho).collect();
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let var = rhos.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rhos.len() as f64;
    let slope = ls_slope(&ts, &rhos);

    let amplitude = if slope.abs() < w.slope_tol && var < w.var_tol {
        AmplitudeVerdict::SteadyAmplitude {
            rho_inf: median(rhos.clone()),
            tail_slope: slope,
        }
    } else {
        let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let mid = ((t_end / 10.0).ln() + t_end.ln()) / 2.0;
        let split = logs.partition_point(|l| *l < mid);
        let s_all = ls_slope(&logs, &rhos);
        let s1 = ls_slope(&logs[..split], &rhos[..split]);
        let s2 = ls_slope(&logs[split..], &rhos[split..]);
        let stable = (s1 - s2).abs() <= w.log_ratio_tol * s1.abs().max(s2.abs());
        if s_all > w.log_min_slope && s1 > 0.0 && s2 > 0.0 && stable {
            AmplitudeVerdict::LogGrowth { slope: s_all }
        } else {
            AmplitudeVerdict::Undetermined
        }
    };

    let theta_blocks = block_means(&tail, w.blocks, |s| s.theta);
    let tv: f64 = theta_blocks.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    let change = tail[tail.len() - 1].theta - tail[0].theta;
    let steps: Vec<f64> = theta_blocks.windows(2).map(|p| p[1] - p[0]).collect();
    let agreeing = steps.iter().filter(|d| d.signum() == change.signum() && **d != 0.0).count();
    let phase = if tv < w.lock_tv {
        PhaseVerdict::PhaseLocked {
            theta_inf: wrap_angle(median(tail.iter().map(|s| s.theta).collect())),
        }
    } else if change.abs() > w.drift_min_change && agreeing as f64 >= w.drift_monotone * steps.len() as f64 {
        PhaseVerdict::PhaseDrifting {
            sign: change.signum() as i8,
            change,
        }
    } else {
        PhaseVerdict::Undetermined
    };
    Ok(RegimeObservation { amplitude, phase })
}

/// Initial conditions for an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSet {
    Explicit { states: Vec<InitialState> },
    /// Uniform draws from `|ϱ − ϱ_c| + |θ − θ_c| ≤ radius` in the `(ϱ, θ)` plane.
    Ball {
        rho: f64,
        theta: f64,
        radius: f64,
        count: usize,
        seed: u64,
    },
}

impl InitSet {
    pub fn states(&self) -> Result<Vec<InitialState>> {
        match self {
            InitSet::Explicit { states } => Ok(states.clone()),
            &InitSet::Ball {
                rho,
                theta,
                radius,
                count,
                seed,
            } => {
                if count == 0 {
                    return Err(Error::Config("ball count must be at least 1".into()));
                }
                if !(radius >= 0.0) {
                    return Err(Error::Config("ball radius must be non-negative".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let d1: f64 = rng.gen_range(-1.0..=1.0);
                    let d2: f64 = rng.gen_range(-1.0..=1.0);
                    if d1.abs() + d2.abs() <= 1.0 {
                        out.push(InitialState::Shift {
                            rho: rho + radius * d1,
                            theta: theta + radius * d2,
                        });
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Containment test: starting within `delta` at `t_s`, stay within `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Containment {
    pub t_s: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for Containment {
    fn default() -> Self {
        Self {
            t_s: 10.0,
            delta: 0.3,
            epsilon: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub family: FamilySpec,
    pub inits: InitSet,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub detector: DetectorWindows,
    #[serde(default)]
    pub containment: Option<Containment>,
    /// Compute the theoretical prediction with the averaging pipeline.
    #[serde(default = "yes")]
    pub predict: bool,
}

fn yes() -> bool {
    true
}

impl CampaignConfig {
    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// Theory side of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub n: u32,
    pub m: u32,
    pub classifications: Vec<RegimeClassification>,
    /// Stable state used for the containment test, if any.
    pub stable: Option<PredictedState>,
}

/// Numerical prediction: average, locate fixed points and drift circles, classify.
pub fn predict(fam: &BenchFamily) -> Result<TheoryPrediction> {
    let avg = average_through_order2(&fam.system, QuadratureSpec::default())?;
    let (n, m) = avg.indices()?;
    let mut classifications: Vec<RegimeClassification> =
        find_fixed_points(&avg, n, m)?.iter().map(classify).collect();
    let seeds: Vec<f64> = fam.rho_star().into_iter().collect();
    classifications.extend(detect_drift(&avg, n, m, &seeds).into_iter().map(|d| d.classification));
    // Prefer locks over drift, then the smallest |φ*|.
    let stable = classifications
        .iter()
        .filter(|c| c.kind.is_stable())
        .min_by(|a, b| {
            let key = |c: &RegimeClassification| match c.predicted {
                PredictedState::Lock { phi_star, .. } => (0, phi_star.abs()),
                PredictedState::Drift { rho_star } => (1, rho_star),
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        })
        .map(|c| c.predicted);
    Ok(TheoryPrediction {
        n,
        m,
        classifications,
        stable,
    })
}

fn distance(state: PredictedState, s: &Sample) -> f64 {
    match state {
        PredictedState::Lock { rho_star, phi_star } => {
            (s.rho - rho_star).abs() + angle_distance(s.theta, phi_star)
        }
        PredictedState::Drift { rho_star } => (s.rho - rho_star).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentOutcome {
    /// Within `delta` at `t_s`.
    pub eligible: bool,
    /// Within `epsilon` for every recorded `t > t_s`.
    pub contained: bool,
    pub max_distance: f64,
}

/// Checks the containment inequality along a record.
pub fn containment(rec: &TrajectoryRecord, state: PredictedState, c: &Containment) -> ContainmentOutcome {
    let start = rec.samples.iter().find(|s| s.t >= c.t_s);
    let eligible = start.is_some_and(|s| distance(state, s) <= c.delta + 1e-12);
    let max_distance = rec
        .samples
        .iter()
        .filter(|s| s.t > c.t_s)
        .map(|s| distance(state, s))
        .fold(0.0, f64::max);
    ContainmentOutcome {
        eligible,
        contained: rec.exit.is_none() && start.is_some() && max_distance < c.epsilon,
        max_distance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOutcome {
    pub index: usize,
    pub init: InitialState,
    pub observation: Option<RegimeObservation>,
    pub containment: Option<ContainmentOutcome>,
    pub final_rho: Option<f64>,
    pub final_theta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config_hash: String,
    pub system: String,
    pub prediction: Option<TheoryPrediction>,
    pub prediction_error: Option<String>,
    pub outcomes: Vec<TrajectoryOutcome>,
    /// Verdict label -> number of trajectories.
    pub verdicts: BTreeMap<String, usize>,
    pub eligible: usize,
    pub contained: usize,
}

impl CampaignSummary {
    pub fn contained_fraction(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.contained as f64 / self.eligible as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub summary: CampaignSummary,
    /// Per-initial-condition records, in init order.
    pub records: Vec<Option<TrajectoryRecord>>,
}

/// Integrates every initial condition, detects regimes and compares with theory.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.integrator.validate()?;
    let fam = cfg.family.build()?;
    let inits = cfg.inits.states()?;
    let (prediction, prediction_error) = if cfg.predict && fam.is_resonant() {
        match predict(&fam) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let stable = prediction.as_ref().and_then(|p| p.stable);

    let runs: Vec<(TrajectoryOutcome, Option<TrajectoryRecord>)> = inits
        .par_iter()
        .enumerate()
        .map(|(index, &init)| match integrate(&fam.system, init, &cfg.integrator) {
            Ok(rec) => {
                let observation = detect_regime(&rec, &cfg.detector).ok();
                let cont = match (stable, cfg.containment) {
                    (Some(state), Some(c)) => Some(containment(&rec, state, &c)),
                    _ => None,
                };
                let last = rec.last().copied();
                (
                    TrajectoryOutcome {
                        index,
                        init,
                        observation,
                        containment: cont,
                        final_rho: last.map(|s| s.rho),
                        final_theta: last.map(|s| s.theta),
                        error: None,
                    },
                    Some(rec),
                )
            }
            Err(e) => (
                TrajectoryOutcome {
                    index,
                    init,
                    observation: None,
                    containment: None,
                    final_rho: None,
                    final_theta: None,
                    error: Some(e.to_string()),
                },
                None,
            ),
        })
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    let mut records = Vec::with_capacity(runs.len());
    for (o, r) in runs {
        outcomes.push(o);
        records.push(r);
    }
    outcomes.sort_by_key(|o| o.index);
    let mut verdicts = BTreeMap::new();
    for o in &outcomes {
        let label = match (&o.observation, &o.error) {
            (Some(obs), _) => obs.label(),
            (None, Some(_)) => "error".to_string(),
            (None, None) => "undetectable".to_string(),
        };
        *verdicts.entry(label).or_insert(0) += 1;
    }
    let eligible = outcomes.iter().filter(|o| o.containment.is_some_and(|c| c.eligible)).count();
    let contained = outcomes
        .iter()
        .filter(|o| o.containment.is_some_and(|c| c.eligible && c.contained))
        .count();
    Ok(CampaignResult {
        summary: CampaignSummary {
            config_hash: cfg.hash(),
            system: fam.system.name.clone(),
            prediction,
            prediction_error,
            outcomes,
            verdicts,
            eligible,
            contained,
        },
        records,
    })
}

/// Writes `summary.json` and one CSV per trajectory into `<root>/<config hash>/`.
pub fn write_run_directory(result: &CampaignResult, root: &Path) -> Result<PathBuf> {
    let dir = root.join(&result.summary.config_hash);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (i, rec) in result.records.iter().enumerate() {
        if let Some(rec) = rec {
            crate::report::emit_csv(rec, &dir.join(format!("traj_{i:03}.csv")))?;
        }
    }
    let path = dir.join("summary.json");
    std::fs::write(&path, result.summary.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(dir)
}

/// Largest `δ` (by bisection on `[0, hi]`) for which every member of a ball
/// ensemble centred on the stable prediction at `t_s` stays within `ε`.
pub fn bisect_delta(cfg: &CampaignConfig, hi: f64, iterations: usize) -> Result<Option<f64>> {
    let c = cfg
        .containment
        .ok_or_else(|| Error::Config("bisection needs a containment section".into()))?;
    let fam = cfg.family.build()?;
    let Some(state) = predict(&fam)?.stable else {
        return Ok(None);
    };
    let (rho, theta) = match state {
        PredictedState::Lock { rho_star, phi_star } => (rho_star, phi_star),
        PredictedState::Drift { rho_star } => (rho_star, 0.0),
    };
    let (count, seed) = match cfg.inits {
        InitSet::Ball { count, seed, .. } => (count, seed),
        InitSet::Explicit { .. } => (4, 0),
    };
    let all_contained = |delta: f64| -> Result<bool> {
        let trial = CampaignConfig {
            inits: InitSet::Ball { rho, theta, radius: delta, count, seed },
            integrator: IntegratorConfig { t_start: c.t_s, ..cfg.integrator.clone() },
            containment: Some(Containment { delta, ..c }),
            predict: true,
            ..cfg.clone()
        };
        let res = run_campaign(&trial)?;
        Ok(res.summary.contained == res.summary.outcomes.len())
    };
    let (mut lo, mut hi) = (0.0, hi);
    if all_contained(hi)? {
        return Ok(Some(hi));
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if all_contained(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo > 0.0).then_some(lo))
}

/// Classification kinds of a prediction, for quick comparisons.
pub fn predicted_kinds(p: &TheoryPrediction) -> Vec<RegimeKind> {
    p.classifications.iter().map(|c| c.kind).collect()
}
