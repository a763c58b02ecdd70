use serde::{Deserialize, Serialize};

use super::{Quarter, TimeseriesError};

/// Metropolitan area metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Msa {
    pub id: String,
    pub name: String,
    pub state: String,
}

impl Msa {
    pub fn new(id: impl Into<String>, name: impl Into<String>, state: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            state: state.into(),
        }
    }
}

/// A contiguous run of quarterly observations starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterSeries {
    pub start: Quarter,
    pub values: Vec<f64>,
}

impl QuarterSeries {
    pub fn new(start: Quarter, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last covered quarter; `None` when empty.
    pub fn end(&self) -> Option<Quarter> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.start.offset(self.values.len() as i64 - 1))
        }
    }

    pub fn quarter_at(&self, idx: usize) -> Quarter {
        self.start.offset(idx as i64)
    }

    pub fn get(&self, quarter: Quarter) -> Option<f64> {
        let offset = self.start.quarters_until(quarter);
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    pub fn quarters(&self) -> impl Iterator<Item = Quarter> + '_ {
        (0..self.values.len()).map(move |i| self.quarter_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Quarter, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.quarter_at(i), v))
    }

    /// Sub-series restricted to `first..=last` (clipped to coverage).
    pub fn slice(&self, first: Quarter, last: Quarter) -> QuarterSeries {
        let lo = self.start.quarters_until(first).max(0) as usize;
        let hi_excl = (self.start.quarters_until(last) + 1).clamp(0, self.values.len() as i64) as usize;
        if lo >= hi_excl {
            return QuarterSeries::new(first.max(self.start), Vec::new());
        }
        QuarterSeries::new(self.quarter_at(lo), self.values[lo..hi_excl].to_vec())
    }
}

/// One MSA's series within a panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsaSeries {
    pub msa: Msa,
    pub series: QuarterSeries,
}

/// Quarterly index levels per MSA. Each MSA is contiguous from its first
/// available quarter to the panel end; all levels are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPanel {
    first: Quarter,
    last: Quarter,
    members: Vec<MsaSeries>,
}

impl IndexPanel {
    /// Validates the positivity and contiguity invariants.
    pub fn new(members: Vec<MsaSeries>) -> Result<Self, TimeseriesError> {
        let (first, last) = check_members(&members)?;
        for m in &members {
            for (q, v) in m.series.iter() {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(TimeseriesError::Domain {
                        msa: m.msa.id.clone(),
                        quarter: q,
                        reason: format!("index level {v} is not positive"),
                    });
                }
            }
        }
        Ok(Self { first, last, members })
    }

    pub fn first_quarter(&self) -> Quarter {
        self.first
    }

    pub fn last_quarter(&self) -> Quarter {
        self.last
    }

    pub fn members(&self) -> &[MsaSeries] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, msa_id: &str) -> Option<&MsaSeries> {
        self.members.iter().find(|m| m.msa.id == msa_id)
    }

    /// Multiplies every level by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, TimeseriesError> {
        let members = self
            .members
            .iter()
            .map(|m| MsaSeries {
                msa: m.msa.clone(),
                series: QuarterSeries::new(
                    m.series.start,
                    m.series.values.iter().map(|v| v * factor).collect(),
                ),
            })
            .collect();
        Self::new(members)
    }
}

/// Log-quarterly returns in percent, one fewer observation per MSA than the
/// index it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    first: Quarter,
    last: Quarter,
    members: Vec<MsaSeries>,
}

impl ReturnPanel {
    pub fn new(members: Vec<MsaSeries>) -> Result<Self, TimeseriesError> {
        let (first, last) = check_members(&members)?;
        Ok(Self { first, last, members })
    }

    pub fn first_quarter(&self) -> Quarter {
        self.first
    }

    pub fn last_quarter(&self) -> Quarter {
        self.last
    }

    pub fn members(&self) -> &[MsaSeries] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, msa_id: &str) -> Option<&MsaSeries> {
        self.members.iter().find(|m| m.msa.id == msa_id)
    }

    pub fn msas(&self) -> impl Iterator<Item = &Msa> {
        self.members.iter().map(|m| &m.msa)
    }
}

fn check_members(members: &[MsaSeries]) -> Result<(Quarter, Quarter), TimeseriesError> {
    let mut first: Option<Quarter> = None;
    let mut last: Option<Quarter> = None;
    for m in members {
        let end = m.series.end().ok_or_else(|| TimeseriesError::Shape(format!(
            "MSA {} has no observations",
            m.msa.id
        )))?;
        first = Some(first.map_or(m.series.start, |f| f.min(m.series.start)));
        last = Some(last.map_or(end, |l| l.max(end)));
    }
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(TimeseriesError::Shape("panel has no MSAs".into())),
    };
    let mut seen = std::collections::HashSet::new();
    for m in members {
        if !seen.insert(m.msa.id.as_str()) {
            return Err(TimeseriesError::Shape(format!("duplicate MSA id {}", m.msa.id)));
        }
        if m.series.end() != Some(last) {
            return Err(TimeseriesError::Shape(format!(
                "MSA {} ends at {} but the panel ends at {last}",
                m.msa.id,
                m.series.end().expect("non-empty")
            )));
        }
    }
    Ok((first, last))
}

/// `100 * ln(level_t / level_{t-1})` for each consecutive pair of levels.
pub fn log_returns_pct(levels: &[f64]) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| 100.0 * (w[1] / w[0]).ln())
        .collect()
}

/// Converts an index panel to percent log returns.
pub fn compute_returns(panel: &IndexPanel) -> Result<ReturnPanel, TimeseriesError> {
    let mut members = Vec::with_capacity(panel.len());
    for m in panel.members() {
        for (q, v) in m.series.iter() {
            if !(v > 0.0) {
                return Err(TimeseriesError::Domain {
                    msa: m.msa.id.clone(),
                    quarter: q,
                    reason: format!("index level {v} is not positive"),
                });
            }
        }
        if m.series.len() < 2 {
            log::warn!("MSA {} has a single index level; no returns", m.msa.id);
            continue;
        }
        members.push(MsaSeries {
            msa: m.msa.clone(),
            series: QuarterSeries::new(m.series.start.succ(), log_returns_pct(&m.series.values)),
        });
    }
    ReturnPanel::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::parse_quarter;
    use proptest::prelude::*;

    fn q(s: &str) -> Quarter {
        parse_quarter(s).unwrap()
    }

    fn one(levels: Vec<f64>) -> IndexPanel {
        IndexPanel::new(vec![MsaSeries {
            msa: Msa::new("1", "A", "CA"),
            series: QuarterSeries::new(q("2000:Q1"), levels),
        }])
        .unwrap()
    }

    #[test]
    fn return_examples() {
        let r = compute_returns(&one(vec![100.0, 100.0])).unwrap();
        assert_eq!(r.members()[0].series.values, vec![0.0]);
        assert_eq!(r.members()[0].series.start, q("2000:Q2"));

        let r = compute_returns(&one(vec![100.0, 102.020134])).unwrap();
        assert!((r.members()[0].series.values[0] - 2.0).abs() < 1e-6);

        let r = compute_returns(&one(vec![100.0, 90.0, 100.0])).unwrap();
        let expected = 100.0 * (10.0f64 / 9.0).ln();
        assert!((r.members()[0].series.values[0] + expected).abs() < 1e-9);
        assert!((r.members()[0].series.values[1] - expected).abs() < 1e-9);
        assert!((expected - 10.536052).abs() < 1e-5);
    }

    #[test]
    fn nonpositive_level_rejected() {
        let err = IndexPanel::new(vec![MsaSeries {
            msa: Msa::new("7", "A", "CA"),
            series: QuarterSeries::new(q("2000:Q1"), vec![100.0, 0.0]),
        }])
        .unwrap_err();
        match err {
            TimeseriesError::Domain { msa, quarter, .. } => {
                assert_eq!(msa, "7");
                assert_eq!(quarter, q("2000:Q2"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_end_rejected() {
        let err = IndexPanel::new(vec![
            MsaSeries {
                msa: Msa::new("1", "A", "CA"),
                series: QuarterSeries::new(q("2000:Q1"), vec![1.0, 2.0, 3.0]),
            },
            MsaSeries {
                msa: Msa::new("2", "B", "CA"),
                series: QuarterSeries::new(q("2000:Q1"), vec![1.0, 2.0]),
            },
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn slice_clips() {
        let s = QuarterSeries::new(q("2000:Q1"), vec![1.0, 2.0, 3.0, 4.0]);
        let sub = s.slice(q("1999:Q1"), q("2000:Q2"));
        assert_eq!(sub.start, q("2000:Q1"));
        assert_eq!(sub.values, vec![1.0, 2.0]);
        assert!(s.slice(q("2001:Q1"), q("2002:Q1")).is_empty());
    }

    proptest! {
        #[test]
        fn returns_reconstruct_index(levels in prop::collection::vec(1.0f64..1000.0, 2..60)) {
            let r = compute_returns(&one(levels.clone())).unwrap();
            let mut level = levels[0];
            for (i, ret) in r.members()[0].series.values.iter().enumerate() {
                level *= (ret / 100.0).exp();
                let rel = (level - levels[i + 1]).abs() / levels[i + 1];
                prop_assert!(rel < 1e-9, "rel err {rel}");
            }
        }

        #[test]
        fn returns_scale_invariant(levels in prop::collection::vec(1.0f64..1000.0, 2..40), c in 0.01f64..100.0) {
            let panel = one(levels);
            let a = compute_returns(&panel).unwrap();
            let b = compute_returns(&panel.scaled(c).unwrap()).unwrap();
            for (x, y) in a.members()[0].series.values.iter().zip(&b.members()[0].series.values) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{x} vs {y}");
            }
        }
    }
}
