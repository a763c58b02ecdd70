//! Fixtures shared by the benchmarks.

use metrorisk_core::synth::{generate_panel, Loadings, MsaSpec, SyntheticPanel};
use metrorisk_core::timeseries::compute_returns;
use metrorisk_core::{ReturnPanel, ScenarioConfig};

pub fn panel(n_msas: usize, n_quarters: usize) -> (SyntheticPanel, ReturnPanel) {
    let cfg = ScenarioConfig {
        seed: 42,
        n_msas,
        n_quarters,
        template: MsaSpec {
            loadings: Some(Loadings::Uniform(0.5)),
            sigma: Some(1.0),
            phi: Some(0.3),
            mean: Some(0.2),
            ..MsaSpec::default()
        },
        ..ScenarioConfig::default()
    };
    let p = generate_panel(&cfg).expect("valid scenario");
    let r = compute_returns(&p.index).expect("returns");
    (p, r)
}
