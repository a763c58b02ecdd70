//! Lee–Mykland jump detection on quarterly returns.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_2_PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{MsaSeries, Quarter, ReturnPanel};

pub const DEFAULT_BIPOWER_WINDOW: usize = 20;
pub const MIN_BIPOWER_WINDOW: usize = 8;
pub const JUMP_THRESHOLD: f64 = 1.65;
pub const BIG_JUMP_THRESHOLD: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum JumpError {
    #[error("insufficient history: {actual} returns, need at least {required}")]
    InsufficientHistory { required: usize, actual: usize },

    #[error("bipower variation is zero; statistic undefined")]
    Untestable,

    #[error("invalid jump configuration: {0}")]
    Config(String),

    #[error("non-finite return in window")]
    NonFinite,
}

/// Which statistic the thresholds are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdBasis {
    /// `L·√(2/π)`, asymptotically unit normal.
    #[default]
    Scaled,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    pub bipower_window: usize,
    pub jump_threshold: f64,
    pub big_threshold: f64,
    pub basis: ThresholdBasis,
    /// Subtract the trailing-window mean before computing the statistic.
    pub demean: bool,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self {
            bipower_window: DEFAULT_BIPOWER_WINDOW,
            jump_threshold: JUMP_THRESHOLD,
            big_threshold: BIG_JUMP_THRESHOLD,
            basis: ThresholdBasis::Scaled,
            demean: false,
        }
    }
}

impl JumpConfig {
    pub fn validate(&self) -> Result<(), JumpError> {
        if self.bipower_window < MIN_BIPOWER_WINDOW {
            return Err(JumpError::Config(format!(
                "bipower window {} below minimum {MIN_BIPOWER_WINDOW}",
                self.bipower_window
            )));
        }
        if !(self.jump_threshold > 0.0 && self.big_threshold > 0.0) {
            return Err(JumpError::Config("thresholds must be positive".into()));
        }
        if self.big_threshold < self.jump_threshold {
            return Err(JumpError::Config("big-jump threshold below jump threshold".into()));
        }
        Ok(())
    }
}

/// `(1/(T−1)) Σ_{t=2..T} |R_t||R_{t−1}|`
pub fn bipower_variation(window: &[f64]) -> Result<f64, JumpError> {
    if window.len() < 2 {
        return Err(JumpError::InsufficientHistory {
            required: 2,
            actual: window.len(),
        });
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(JumpError::NonFinite);
    }
    let s: f64 = window.windows(2).map(|p| p[0].abs() * p[1].abs()).sum();
    Ok(s / (window.len() - 1) as f64)
}

/// `(L, L·√(2/π))` for `next` against its trailing `window`.
pub fn lm_statistic(next: f64, window: &[f64]) -> Result<(f64, f64), JumpError> {
    let b = bipower_variation(window)?;
    if !next.is_finite() {
        return Err(JumpError::NonFinite);
    }
    if b <= 0.0 {
        return Err(JumpError::Untestable);
    }
    let l = next / b.sqrt();
    Ok((l, l * FRAC_2_PI.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    Jump,
    Big,
}

/// Per-quarter jump statistics for one MSA. Untestable quarters hold NaN
/// statistics and no flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpSeries {
    pub msa_id: String,
    pub bipower_window: usize,
    pub quarters: Vec<Quarter>,
    pub l: Vec<f64>,
    pub l_scaled: Vec<f64>,
    pub jump_flag: Vec<bool>,
    pub big_flag: Vec<bool>,
    pub testable: Vec<bool>,
}

impl JumpSeries {
    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn flag(&self, kind: FlagKind, i: usize) -> bool {
        match kind {
            FlagKind::Jump => self.jump_flag[i],
            FlagKind::Big => self.big_flag[i],
        }
    }

    pub fn index_of(&self, q: Quarter) -> Option<usize> {
        let first = *self.quarters.first()?;
        let i = first.quarters_until(q);
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// `L` where big-flagged, else 0; `None` where untestable.
    pub fn masked(&self, i: usize) -> Option<f64> {
        self.testable[i].then(|| if self.big_flag[i] { self.l[i] } else { 0.0 })
    }
}

/// Rolling Lee–Mykland statistics using strictly preceding returns.
pub fn lm_series(returns: &MsaSeries, config: &JumpConfig) -> Result<JumpSeries, JumpError> {
    config.validate()?;
    let r = &returns.series.values;
    let w = config.bipower_window;
    if r.len() < w + 1 {
        return Err(JumpError::InsufficientHistory {
            required: w + 1,
            actual: r.len(),
        });
    }
    let n = r.len();
    let mut out = JumpSeries {
        msa_id: returns.msa.id.clone(),
        bipower_window: w,
        quarters: returns.series.quarters().collect(),
        l: vec![f64::NAN; n],
        l_scaled: vec![f64::NAN; n],
        jump_flag: vec![false; n],
        big_flag: vec![false; n],
        testable: vec![false; n],
    };
    let mut buf = vec![0.0; w];
    for t in w..n {
        let window = &r[t - w..t];
        let (next, stat) = if config.demean {
            let m = window.iter().sum::<f64>() / w as f64;
            for (b, v) in buf.iter_mut().zip(window) {
                *b = v - m;
            }
            (r[t] - m, lm_statistic(r[t] - m, &buf))
        } else {
            (r[t], lm_statistic(r[t], window))
        };
        match stat {
            Ok((l, ls)) => {
                let x = match config.basis {
                    ThresholdBasis::Scaled => ls,
                    ThresholdBasis::Raw => l,
                }
                .abs();
                out.l[t] = l;
                out.l_scaled[t] = ls;
                out.testable[t] = true;
                out.jump_flag[t] = x > config.jump_threshold;
                out.big_flag[t] = x > config.big_threshold;
            }
            Err(JumpError::Untestable) => {
                log::debug!("MSA {} {}: untestable (zero bipower variation)", out.msa_id, out.quarters[t]);
            }
            Err(e) => {
                log::warn!("MSA {} {}: {e} (next return {next})", out.msa_id, out.quarters[t]);
                return Err(e);
            }
        }
    }
    Ok(out)
}

/// [`lm_series`] for every MSA, in panel order. MSAs too short to test are
/// skipped with a log entry.
pub fn lm_panel(panel: &ReturnPanel, config: &JumpConfig) -> Result<Vec<JumpSeries>, JumpError> {
    config.validate()?;
    let results: Vec<_> = panel.members().par_iter().map(|m| lm_series(m, config)).collect();
    let mut out = Vec::new();
    for (m, r) in panel.members().iter().zip(results) {
        match r {
            Ok(s) => out.push(s),
            Err(e @ JumpError::InsufficientHistory { .. }) => {
                log::info!("MSA {} excluded from jump analysis: {e}", m.msa.id);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Percentage of testable MSAs flagged, per quarter. Quarters with no
/// testable MSA are omitted.
pub fn jump_incidence(series: &[&JumpSeries], kind: FlagKind) -> Vec<(Quarter, f64)> {
    let mut counts: BTreeMap<Quarter, (usize, usize)> = BTreeMap::new();
    for s in series {
        for i in 0..s.len() {
            let e = counts.entry(s.quarters[i]).or_default();
            if s.testable[i] {
                e.1 += 1;
                if s.flag(kind, i) {
                    e.0 += 1;
                }
            }
        }
    }
    counts
        .into_iter()
        .filter_map(|(q, (flagged, testable))| {
            if testable == 0 {
                log::debug!("{q}: no testable MSA, omitted from incidence");
                None
            } else {
                Some((q, 100.0 * flagged as f64 / testable as f64))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{parse_quarter, Msa, QuarterSeries};
    use proptest::prelude::*;

    fn msa(values: Vec<f64>) -> MsaSeries {
        MsaSeries {
            msa: Msa::new("m", "M", "CA"),
            series: QuarterSeries::new(parse_quarter("1980:Q1").unwrap(), values),
        }
    }

    fn small(w: usize) -> JumpConfig {
        JumpConfig {
            bipower_window: w,
            ..JumpConfig::default()
        }
    }

    #[test]
    fn bipower_examples() {
        assert_eq!(bipower_variation(&[2.5; 6]).unwrap(), 6.25);
        assert_eq!(bipower_variation(&[1.0, 0.0, 1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(bipower_variation(&[1.0, 2.0, 3.0]).unwrap(), 4.0);
        assert_eq!(bipower_variation(&[-1.0, 2.0, -3.0]).unwrap(), 4.0);
        assert!(matches!(bipower_variation(&[1.0]), Err(JumpError::InsufficientHistory { .. })));
        assert_ne!(
            bipower_variation(&[1.0, 0.0, 1.0]).unwrap(),
            bipower_variation(&[1.0, 1.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn lm_examples() {
        let (l, ls) = lm_statistic(0.7, &[0.7; 20]).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        assert!((ls - 0.797_884_560_802_865_4).abs() < 1e-12);
        let window = [1.0, 2.0, 3.0];
        let (l, ls) = lm_statistic(3.0 * 2.0, &window).unwrap();
        assert!((l - 3.0).abs() < 1e-15);
        assert!((ls - 2.393_653_682_408_596).abs() < 1e-12);
        assert_eq!(lm_statistic(1.0, &[1.0, 0.0, 1.0]), Err(JumpError::Untestable));
    }

    #[test]
    fn thresholds_at_three_root_b() {
        let mut v = vec![1.0; 20];
        v.push(3.0);
        let s = lm_series(&msa(v), &JumpConfig::default()).unwrap();
        assert!(s.jump_flag[20] && s.big_flag[20]);
        assert!((0..20).all(|i| !s.testable[i] && !s.jump_flag[i]));
    }

    #[test]
    fn constant_series_has_no_flags() {
        let s = lm_series(&msa(vec![1.3; 60]), &JumpConfig::default()).unwrap();
        assert!(!s.jump_flag.iter().any(|&f| f));
        assert_eq!(s.testable.iter().filter(|&&t| t).count(), 40);
    }

    #[test]
    fn zero_bipower_quarter_is_untestable() {
        let mut v: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        v.push(5.0);
        v.push(0.5);
        v.push(0.5);
        let s = lm_series(&msa(v), &JumpConfig::default()).unwrap();
        assert!(!s.testable[20] && !s.testable[21]);
        assert!(s.l[20].is_nan());
        assert!(s.testable[22]);
    }

    #[test]
    fn planted_jump_flagged_alone() {
        // calm deterministic pseudo-noise with unit-ish magnitude
        let mut v: Vec<f64> = (0..80).map(|i| 0.6 + 0.4 * ((i * 37 % 11) as f64 / 11.0)).collect();
        v[50] += 12.0;
        let s = lm_series(&msa(v), &JumpConfig::default()).unwrap();
        let big: Vec<usize> = (0..s.len()).filter(|&i| s.big_flag[i]).collect();
        assert_eq!(big, vec![50]);
    }

    #[test]
    fn raw_basis_and_demean_options() {
        let mut v = vec![1.0; 20];
        v.push(1.8);
        let scaled = lm_series(&msa(v.clone()), &small(20)).unwrap();
        assert!(!scaled.jump_flag[20]);
        let raw = lm_series(
            &msa(v.clone()),
            &JumpConfig {
                basis: ThresholdBasis::Raw,
                ..small(20)
            },
        )
        .unwrap();
        assert!(raw.jump_flag[20] && !raw.big_flag[20]);
        let dm = lm_series(
            &msa(v),
            &JumpConfig {
                demean: true,
                ..small(20)
            },
        )
        .unwrap();
        // demeaned window is all zeros
        assert!(!dm.testable[20]);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(lm_series(&msa(vec![1.0; 30]), &small(7)), Err(JumpError::Config(_))));
        assert!(matches!(
            lm_series(&msa(vec![1.0; 20]), &small(20)),
            Err(JumpError::InsufficientHistory { required: 21, .. })
        ));
    }

    #[test]
    fn incidence_examples() {
        let a = lm_series(&msa(vec![1.0; 30]), &small(20)).unwrap();
        let inc = jump_incidence(&[&a], FlagKind::Big);
        assert_eq!(inc.len(), 10);
        assert!(inc.iter().all(|&(_, p)| p == 0.0));
        let mut v = vec![1.0; 20];
        v.push(9.0);
        let b = lm_series(&msa(v.clone()), &small(20)).unwrap();
        let c = lm_series(&msa(v), &small(20)).unwrap();
        let inc = jump_incidence(&[&b, &c], FlagKind::Big);
        assert_eq!(inc, vec![(b.quarters[20], 100.0)]);
        let d = lm_series(&msa(vec![1.0; 21]), &small(20)).unwrap();
        let inc = jump_incidence(&[&b, &d], FlagKind::Jump);
        assert_eq!(inc, vec![(b.quarters[20], 50.0)]);
    }

    proptest! {
        #[test]
        fn scale_invariance(v in prop::collection::vec(-5.0f64..5.0, 30..60), c in 0.01f64..100.0) {
            let a = lm_series(&msa(v.clone()), &small(10)).unwrap();
            let b = lm_series(&msa(v.iter().map(|x| x * c).collect()), &small(10)).unwrap();
            for i in 0..a.len() {
                prop_assert_eq!(a.testable[i], b.testable[i]);
                if a.testable[i] {
                    prop_assert!((a.l[i] - b.l[i]).abs() <= 1e-10 * a.l[i].abs().max(1.0));
                }
            }
        }

        #[test]
        fn flags_use_only_past_data(v in prop::collection::vec(-5.0f64..5.0, 30..60), t in 10usize..30, bump in -50.0f64..50.0) {
            let a = lm_series(&msa(v.clone()), &small(10)).unwrap();
            let mut w = v.clone();
            for x in &mut w[t + 1..] {
                *x += bump;
            }
            let b = lm_series(&msa(w), &small(10)).unwrap();
            for i in 0..=t {
                prop_assert_eq!(a.jump_flag[i], b.jump_flag[i]);
                prop_assert_eq!(a.big_flag[i], b.big_flag[i]);
            }
        }

        #[test]
        fn big_implies_jump(v in prop::collection::vec(-5.0f64..5.0, 30..60)) {
            let a = lm_series(&msa(v), &small(10)).unwrap();
            for i in 0..a.len() {
                prop_assert!(!a.big_flag[i] || a.jump_flag[i]);
            }
        }
    }
}
