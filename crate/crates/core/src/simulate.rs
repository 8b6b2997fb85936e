//! Repeated generate-and-detect trials for one synthetic setting.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changepoint::{detect, fit_known};
use crate::community::SearchConfig;
use crate::error::Result;
use crate::eval::{changepoint_frequency, frequency_csv, overall_nmi};
use crate::seed::derive_seed;
use crate::synth::{generate, SettingSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub change_points: Vec<usize>,
    pub mdl: f64,
    /// Overall NMI of community fits made with the true change points.
    pub known_nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub true_change_points: Vec<usize>,
    pub horizon: usize,
    pub trials: Vec<TrialOutcome>,
}

/// Runs one trial. The generator and the search get independent seeds.
pub fn run_trial(spec: &SettingSpec, trial: usize, seed: u64, cfg: &SearchConfig) -> Result<TrialOutcome> {
    let trial_seed = derive_seed(seed, &[trial as u64]);
    let spec = spec.clone().with_seed(derive_seed(trial_seed, &[0]));
    let (seq, truth) = generate(&spec)?;
    let search_seed = derive_seed(trial_seed, &[1]);
    let found = detect(&seq, search_seed, cfg)?;
    let known = fit_known(&seq, &truth.change_points, search_seed, cfg)?;
    Ok(TrialOutcome {
        trial,
        seed: trial_seed,
        change_points: found.change_points,
        mdl: found.mdl_value,
        known_nmi: overall_nmi(&known, &truth)?.overall,
    })
}

/// Trials run in parallel; the report is ordered by trial index.
pub fn run_trials(spec: &SettingSpec, trials: usize, seed: u64, cfg: &SearchConfig) -> Result<SimulationReport> {
    spec.validate()?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(spec, i, seed, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        true_change_points: spec.change_points(),
        horizon: spec.horizon(),
        trials: outcomes,
    })
}

impl SimulationReport {
    pub fn frequency(&self) -> BTreeMap<usize, usize> {
        changepoint_frequency(self.trials.iter().map(|t| t.change_points.as_slice()), self.horizon)
    }

    pub fn frequency_csv(&self) -> String {
        frequency_csv(&self.frequency())
    }

    pub fn mean_known_nmi(&self) -> f64 {
        self.trials.iter().map(|t| t.known_nmi).sum::<f64>() / self.trials.len().max(1) as f64
    }

    /// Fraction of trials whose estimate equals the truth exactly.
    pub fn exact_rate(&self) -> f64 {
        self.rate(|t| t.change_points == self.true_change_points)
    }

    /// Fraction of trials with some estimate within `tol` of `point`.
    pub fn hit_rate(&self, point: usize, tol: usize) -> f64 {
        self.rate(|t| t.change_points.iter().any(|&e| e.abs_diff(point) <= tol))
    }

    /// Mean number of estimates farther than `tol` from every true point.
    pub fn mean_spurious(&self, tol: usize) -> f64 {
        let total: usize = self
            .trials
            .iter()
            .map(|t| {
                t.change_points
                    .iter()
                    .filter(|&&e| self.true_change_points.iter().all(|&p| e.abs_diff(p) > tol))
                    .count()
            })
            .sum();
        total as f64 / self.trials.len().max(1) as f64
    }

    fn rate(&self, pred: impl Fn(&TrialOutcome) -> bool) -> f64 {
        self.trials.iter().filter(|t| pred(t)).count() as f64 / self.trials.len().max(1) as f64
    }

    /// `trial,seed,change_points,known_nmi` with points space-separated.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("trial,seed,change_points,mdl,known_nmi\n");
        for t in &self.trials {
            let cps: Vec<String> = t.change_points.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                t.trial,
                t.seed,
                cps.join(" "),
                t.mdl,
                t.known_nmi
            ));
        }
        out
    }

    /// `segment,nmi`-style summary: one row per trial then the mean.
    pub fn nmi_csv(&self) -> String {
        let mut out = String::from("trial,nmi\n");
        for t in &self.trials {
            out.push_str(&format!("{},{:.6}\n", t.trial, t.known_nmi));
        }
        out.push_str(&format!("mean,{:.6}\n", self.mean_known_nmi()));
        out
    }
}
