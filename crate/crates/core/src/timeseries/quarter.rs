use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TimeseriesError;

/// A calendar quarter. Ordered chronologically; formats as `YYYY:Qn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self, TimeseriesError> {
        if !(1..=4).contains(&quarter) {
            return Err(TimeseriesError::Parse {
                token: format!("{year}:Q{quarter}"),
                reason: "quarter must be in 1..4".into(),
            });
        }
        Ok(Self { year, quarter })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    /// Months-free linear index: `4 * year + (quarter - 1)`.
    pub fn ordinal(self) -> i64 {
        4 * i64::from(self.year) + i64::from(self.quarter - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(4) as i32;
        let quarter = ordinal.rem_euclid(4) as u8 + 1;
        Self { year, quarter }
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    pub fn pred(self) -> Self {
        self.offset(-1)
    }

    pub fn offset(self, quarters: i64) -> Self {
        Self::from_ordinal(self.ordinal() + quarters)
    }

    /// Signed number of quarters from `self` to `later`.
    pub fn quarters_until(self, later: Quarter) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

/// Parses `YYYY:Qn` or `YYYYQn`.
pub fn parse_quarter(text: &str) -> Result<Quarter, TimeseriesError> {
    let err = |reason: &str| TimeseriesError::Parse {
        token: text.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = text.trim();
    let (year_part, q_part) = match trimmed.split_once(':') {
        Some((y, q)) => (y, q),
        None => match trimmed.find('Q') {
            Some(pos) => trimmed.split_at(pos),
            None => return Err(err("expected YYYY:Qn or YYYYQn")),
        },
    };
    if year_part.len() != 4 || !year_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err("year must be four digits"));
    }
    let digits = q_part
        .strip_prefix('Q')
        .ok_or_else(|| err("missing 'Q' before quarter number"))?;
    if digits.len() != 1 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err("quarter must be a single digit"));
    }
    let year: i32 = year_part.parse().map_err(|_| err("bad year"))?;
    let quarter: u8 = digits.parse().map_err(|_| err("bad quarter"))?;
    if !(1..=4).contains(&quarter) {
        return Err(err("quarter must be in 1..4"));
    }
    Ok(Quarter { year, quarter })
}

impl FromStr for Quarter {
    type Err = TimeseriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_quarter(s)
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}:Q{}", self.year, self.quarter)
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_quarter(&text).map_err(serde::de::Error::custom)
    }
}

/// Inclusive range `first..=last` of quarters.
pub fn quarter_range(first: Quarter, last: Quarter) -> impl Iterator<Item = Quarter> {
    (first.ordinal()..=last.ordinal()).map(Quarter::from_ordinal)
}
