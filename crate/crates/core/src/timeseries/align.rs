use serde::Serialize;

use super::{FactorTable, Quarter, QuarterSeries, TimeseriesError};

/// Why a quarter in the common range was excluded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedRow {
    pub quarter: Quarter,
    pub cause: String,
}

/// One MSA's response paired row-wise with the factor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    pub msa_id: String,
    pub factor_ids: Vec<String>,
    pub quarters: Vec<Quarter>,
    pub response: Vec<f64>,
    /// `factors[f][row]`
    pub factors: Vec<Vec<f64>>,
    pub dropped: Vec<DroppedRow>,
}

impl AlignedDataset {
    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    /// Splits back into a response series and factor table over the rows'
    /// span. Rows must be contiguous.
    pub fn to_parts(&self, table: &FactorTable) -> Option<(QuarterSeries, FactorTable)> {
        let first = *self.quarters.first()?;
        if self
            .quarters
            .iter()
            .enumerate()
            .any(|(i, q)| *q != first.offset(i as i64))
        {
            return None;
        }
        let cols = self
            .factors
            .iter()
            .map(|c| c.iter().map(|&v| Some(v)).collect())
            .collect();
        let t = FactorTable::from_transformed(first, self.factor_ids.clone(), table.transforms().to_vec(), cols).ok()?;
        Some((QuarterSeries::new(first, self.response.clone()), t))
    }
}

/// Restricts `response` and `factors` to quarters where everything is present.
pub fn align(
    msa_id: &str,
    response: &QuarterSeries,
    factors: &FactorTable,
) -> Result<AlignedDataset, TimeseriesError> {
    let empty = || TimeseriesError::Alignment(format!("MSA {msa_id}: no overlap between returns and factors"));
    let (r_end, f_end) = (response.end().ok_or_else(empty)?, factors.end().ok_or_else(empty)?);
    let first = response.start.max(factors.start());
    let last = r_end.min(f_end);
    if first > last {
        return Err(empty());
    }
    let mut out = AlignedDataset {
        msa_id: msa_id.to_string(),
        factor_ids: factors.factor_ids().to_vec(),
        quarters: Vec::new(),
        response: Vec::new(),
        factors: vec![Vec::new(); factors.n_factors()],
        dropped: Vec::new(),
    };
    let mut row = Vec::with_capacity(factors.n_factors());
    for q in super::quarter_range(first, last) {
        let y = response.get(q).filter(|v| v.is_finite());
        row.clear();
        let mut missing = Vec::new();
        for f in 0..factors.n_factors() {
            match factors.value(f, q).filter(|v| v.is_finite()) {
                Some(v) => row.push(v),
                None => missing.push(factors.factor_ids()[f].as_str()),
            }
        }
        if y.is_none() {
            missing.insert(0, "return");
        }
        if !missing.is_empty() {
            log::debug!("MSA {msa_id}: dropping {q} (missing {})", missing.join(", "));
            out.dropped.push(DroppedRow {
                quarter: q,
                cause: format!("missing {}", missing.join(", ")),
            });
            continue;
        }
        out.quarters.push(q);
        out.response.push(y.expect("checked"));
        for (col, &v) in out.factors.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    if out.quarters.is_empty() {
        return Err(TimeseriesError::Alignment(format!(
            "MSA {msa_id}: every overlapping quarter has missing data"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{parse_quarter, TransformKind};

    fn q(s: &str) -> Quarter {
        parse_quarter(s).unwrap()
    }

    fn table(start: &str, cols: Vec<Vec<Option<f64>>>) -> FactorTable {
        let ids = (0..cols.len()).map(|i| format!("F{i}")).collect();
        let kinds = vec![TransformKind::LogLevel; cols.len()];
        FactorTable::from_transformed(q(start), ids, kinds, cols).unwrap()
    }

    #[test]
    fn full_overlap_drops_nothing() {
        let n = 4 * 31;
        let t = table("1975:Q1", vec![vec![Some(1.0); 4 * 36]; 3]);
        let r = QuarterSeries::new(q("1980:Q1"), vec![0.5; n]);
        let a = align("x", &r, &t).unwrap();
        assert!(a.dropped.is_empty());
        assert_eq!(a.n_rows(), n);
        assert_eq!(a.quarters[0], q("1980:Q1"));
    }

    #[test]
    fn leading_factor_missingness_is_logged() {
        // factor 1 missing 1975:Q1..1977:Q3 (11 quarters)
        let mut late = vec![None; 11];
        late.extend(vec![Some(2.0); 20]);
        let t = table("1975:Q1", vec![vec![Some(1.0); 31], late]);
        let r = QuarterSeries::new(q("1975:Q2"), vec![0.1; 30]);
        let a = align("x", &r, &t).unwrap();
        assert_eq!(a.quarters[0], q("1977:Q4"));
        assert_eq!(a.dropped.len(), 10);
        assert!(a.dropped.iter().all(|d| d.quarter < q("1977:Q4") && d.cause.contains("F1")));
        assert_eq!(a.n_rows(), 30 - 10);
    }

    #[test]
    fn disjoint_ranges_error() {
        let t = table("1975:Q1", vec![vec![Some(1.0); 4]]);
        let r = QuarterSeries::new(q("1990:Q1"), vec![0.1; 4]);
        assert!(matches!(align("x", &r, &t), Err(TimeseriesError::Alignment(_))));
    }

    #[test]
    fn align_is_idempotent() {
        let mut late = vec![None; 5];
        late.extend(vec![Some(2.0); 15]);
        let t = table("1975:Q1", vec![vec![Some(1.0); 20], late]);
        let r = QuarterSeries::new(q("1975:Q2"), (0..19).map(f64::from).collect());
        let a = align("x", &r, &t).unwrap();
        let (r2, t2) = a.to_parts(&t).unwrap();
        let b = align("x", &r2, &t2).unwrap();
        assert!(b.dropped.is_empty());
        assert_eq!(b.response, a.response);
        assert_eq!(b.factors, a.factors);
    }
}
