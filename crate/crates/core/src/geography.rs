//! Census-division map, California coastal/inland split and MSA lookup by
//! name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::timeseries::Msa;

/// Label for California, reported outside its census division.
pub const CALIFORNIA: &str = "CA";

/// States per division, with California removed from division 1.
pub const DIVISIONS: [(&str, &[&str]); 9] = [
    ("D1", &["AK", "HI", "OR", "WA"]),
    ("D2", &["AZ", "CO", "ID", "MT", "NM", "NV", "UT", "WY"]),
    ("D3", &["IA", "KS", "MN", "MO", "ND", "NE", "SD"]),
    ("D4", &["AR", "LA", "OK", "TX"]),
    ("D5", &["IL", "IN", "MI", "OH", "WI"]),
    ("D6", &["AL", "KY", "MS", "TN"]),
    ("D7", &["DC", "DE", "FL", "GA", "MD", "NC", "SC", "VA", "WV"]),
    ("D8", &["NJ", "NY", "PA"]),
    ("D9", &["CT", "MA", "ME", "NH", "RI", "VT"]),
];

/// Coastal California MSAs, matched against MSA names.
pub const CA_COASTAL: [&str; 10] = [
    "Los Angeles",
    "Oakland",
    "Oxnard",
    "San Diego",
    "San Francisco",
    "San Jose",
    "San Luis Obispo",
    "Santa Ana",
    "Santa Barbara",
    "Santa Cruz",
];

/// State → division label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionMap {
    pub states: BTreeMap<String, String>,
}

impl Default for DivisionMap {
    fn default() -> Self {
        let mut states = BTreeMap::new();
        for (div, members) in DIVISIONS {
            for s in members {
                states.insert(s.to_string(), div.to_string());
            }
        }
        states.insert(CALIFORNIA.into(), CALIFORNIA.into());
        Self { states }
    }
}

impl DivisionMap {
    pub fn division_of(&self, state: &str) -> Option<&str> {
        self.states.get(state).map(String::as_str)
    }

    /// Division labels in report order: D1..D9 then CA, then any extras.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (div, _) in DIVISIONS {
            if self.states.values().any(|v| v == div) {
                out.push(div.into());
            }
        }
        if self.states.values().any(|v| v == CALIFORNIA) {
            out.push(CALIFORNIA.into());
        }
        for v in self.states.values() {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase()
}

/// Whether `msa`'s name starts with `label` (case-insensitive). A name like
/// "Los Angeles-Long Beach-Glendale" matches "Los Angeles".
pub fn name_matches(msa: &Msa, label: &str) -> bool {
    let name = normalize(&msa.name);
    let label = normalize(label);
    name == label
        || name
            .strip_prefix(&label)
            .is_some_and(|rest| rest.starts_with(|c: char| !c.is_ascii_alphanumeric()))
}

/// Finds an MSA by exact id, else by name prefix within `state`.
pub fn resolve_msa<'a>(msas: impl IntoIterator<Item = &'a Msa> + Clone, key: &str, state: Option<&str>) -> Option<&'a Msa> {
    if let Some(m) = msas.clone().into_iter().find(|m| m.id == key) {
        return Some(m);
    }
    msas.into_iter()
        .find(|m| state.is_none_or(|s| m.state == s) && name_matches(m, key))
}

/// Whether a California MSA is on the coastal list.
pub fn is_ca_coastal(msa: &Msa, coastal: &[String]) -> bool {
    msa.state == CALIFORNIA && coastal.iter().any(|c| name_matches(msa, c))
}

pub fn default_coastal() -> Vec<String> {
    CA_COASTAL.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisions_cover_states_once() {
        let map = DivisionMap::default();
        let total: usize = DIVISIONS.iter().map(|(_, s)| s.len()).sum();
        assert_eq!(map.states.len(), total + 1);
        assert_eq!(map.division_of("TX"), Some("D4"));
        assert_eq!(map.division_of("CA"), Some("CA"));
        assert_eq!(map.division_of("PR"), None);
        assert_eq!(map.labels().len(), 10);
    }

    #[test]
    fn name_prefix_matching() {
        let la = Msa::new("31084", "Los Angeles-Long Beach-Glendale", "CA");
        let sb = Msa::new("42200", "Santa Barbara-Santa Maria-Goleta", "CA");
        let sa = Msa::new("11244", "Santa Ana-Anaheim-Irvine", "CA");
        assert!(name_matches(&la, "los angeles"));
        assert!(!name_matches(&sb, "Santa Barb"));
        assert!(name_matches(&sa, "Santa Ana"));
        let all = [la.clone(), sb.clone(), sa.clone()];
        assert_eq!(resolve_msa(&all, "Santa Barbara", Some("CA")).unwrap().id, "42200");
        assert_eq!(resolve_msa(&all, "11244", None).unwrap().id, "11244");
        assert!(resolve_msa(&all, "Santa Barbara", Some("NV")).is_none());
        let coastal = default_coastal();
        assert!(is_ca_coastal(&sa, &coastal));
        assert!(!is_ca_coastal(&Msa::new("1", "Fresno", "CA"), &coastal));
    }
}
