use std::fs::File;

use metrorisk_core::contagion::{fit_menus, ContagionConfig, ContagionMenu, ResidualSource};
use metrorisk_core::correlations::{
    assign_divisions, cohort_correlation_report, jump_pair_correlations, return_pair_correlations, JumpPairConfig,
};
use metrorisk_core::geography::DivisionMap;
use metrorisk_core::integration::{integrate_panel, integration_summary, ChangeBase, Characteristic, IntegrationConfig};
use metrorisk_core::jumps::{lm_panel, FlagKind, JumpConfig};
use metrorisk_core::portfolio::{diversification_series, full_history_members};
use metrorisk_core::synth::{
    generate_panel, ground_truth_report, ContagionPlan, JumpPlan, Loadings, MsaSpec, SyntheticPanel,
};
use metrorisk_core::timeseries::io::{write_hpi_csv, write_raw_factors_csv};
use metrorisk_core::timeseries::{compute_returns, load_factor_table, load_hpi_panel};
use metrorisk_core::{Error, PairKind, ReturnPanel, ScenarioConfig, Timing};

fn spec(id: &str, name: &str, state: &str) -> MsaSpec {
    MsaSpec {
        id: Some(id.into()),
        name: Some(name.into()),
        state: Some(state.into()),
        ..MsaSpec::default()
    }
}

fn scenario(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        seed,
        n_quarters: 100,
        msas: vec![
            spec("1", "Los Angeles-Long Beach", "CA"),
            spec("2", "Riverside-San Bernardino", "CA"),
            spec("3", "Fresno", "CA"),
            spec("4", "Houston", "TX"),
            spec("5", "Dallas", "TX"),
            spec("6", "Seattle", "WA"),
        ],
        template: MsaSpec {
            loadings: Some(Loadings::Uniform(0.4)),
            loadings_end: Some(Loadings::Uniform(0.7)),
            sigma: Some(1.0),
            phi: Some(0.2),
            mean: Some(0.5),
            ..MsaSpec::default()
        },
        ..ScenarioConfig::default()
    }
}

fn generate(cfg: &ScenarioConfig) -> (SyntheticPanel, ReturnPanel) {
    let p = generate_panel(cfg).unwrap();
    let r = compute_returns(&p.index).unwrap();
    (p, r)
}

#[test]
fn synthetic_files_load_back_through_the_file_loaders() {
    let cfg = scenario(3);
    let (p, _) = generate(&cfg);
    let dir = tempfile::tempdir().unwrap();
    let hpi = dir.path().join("hpi.csv");
    let factors = dir.path().join("factors.csv");
    write_hpi_csv(File::create(&hpi).unwrap(), &p.index).unwrap();
    write_raw_factors_csv(File::create(&factors).unwrap(), &p.raw_factors).unwrap();

    let index = load_hpi_panel(&hpi).unwrap();
    assert_eq!(index, p.index);
    let table = load_factor_table(&factors, &cfg.transform_config()).unwrap();
    assert_eq!(table.start(), p.factors.start().pred());
    assert_eq!(table.factor_ids(), p.factors.factor_ids());
    for f in 0..table.n_factors() {
        for i in 0..p.factors.len() {
            let q = p.factors.start().offset(i as i64);
            let want = p.factors.value(f, q).unwrap();
            assert!((table.value(f, q).unwrap() - want).abs() < 1e-9);
        }
    }
}

#[test]
fn integration_summary_over_a_synthetic_panel() {
    let (p, r) = generate(&scenario(5));
    let (series, excluded) = integrate_panel(&r, &p.factors, &IntegrationConfig::default()).unwrap();
    assert!(excluded.is_empty());
    assert_eq!(series.len(), 6);
    let summary = integration_summary(&series, &r, ChangeBase::OwnFirst).unwrap();
    for c in Characteristic::ALL {
        let cs = summary.cross_section(c);
        let mut ranks: Vec<usize> = cs.ranks.iter().map(|r| r.unwrap()).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (1..=6).collect::<Vec<_>>(), "{c:?}");
        assert!(cs.quintile_minima.windows(2).all(|w| w[0] <= w[1]), "{c:?}");
        assert_eq!(cs.quintile_minima[0], cs.min);
    }
    for m in &summary.msas {
        assert!((0.0..=1.0).contains(&m.final_r_square));
    }
}

#[test]
fn noiseless_panel_is_fully_integrated() {
    let mut cfg = scenario(9);
    cfg.template.sigma = Some(0.0);
    cfg.template.phi = Some(0.0);
    cfg.template.loadings_end = None;
    let (p, r) = generate(&cfg);
    let icfg = IntegrationConfig {
        prewhiten: false,
        ..IntegrationConfig::default()
    };
    let (series, _) = integrate_panel(&r, &p.factors, &icfg).unwrap();
    for s in &series {
        assert!(s.r_square.iter().all(|&v| (v - 1.0).abs() < 1e-9), "{}", s.msa_id);
    }
}

#[test]
fn planted_jump_is_reported_and_flagged() {
    let mut cfg = scenario(11);
    cfg.template.loadings = Some(Loadings::Uniform(0.0));
    cfg.template.loadings_end = None;
    cfg.template.phi = Some(0.0);
    let quarter = cfg.start.offset(60);
    cfg.jumps = vec![JumpPlan {
        quarter,
        msas: vec!["3".into()],
        magnitude: 10.0,
    }];
    let (p, r) = generate(&cfg);
    let report = ground_truth_report(&p.truth);
    assert_eq!(report.jumps.len(), 1);
    assert_eq!((report.jumps[0].msa_id.as_str(), report.jumps[0].quarter), ("3", quarter));
    assert!(report.contagion.is_empty());

    let jumps = lm_panel(&r, &JumpConfig::default()).unwrap();
    let fresno = jumps.iter().find(|j| j.msa_id == "3").unwrap();
    let i = fresno.index_of(quarter).unwrap();
    assert!(fresno.flag(FlagKind::Big, i));
    assert!(fresno.flag(FlagKind::Jump, i));
}

#[test]
fn menus_resolve_by_name_and_recover_planted_contagion() {
    let mut cfg = scenario(13);
    cfg.n_quarters = 160;
    cfg.template.loadings = Some(Loadings::Uniform(0.0));
    cfg.template.loadings_end = None;
    cfg.template.phi = Some(0.0);
    cfg.contagion = vec![ContagionPlan {
        source: "1".into(),
        target: "2".into(),
        weights: vec![0.6, 0.3],
    }];
    let (p, r) = generate(&cfg);
    assert_eq!(ground_truth_report(&p.truth).contagion[0].weights, vec![0.6, 0.3]);
    let menus = vec![ContagionMenu {
        source: "Los Angeles".into(),
        targets: vec!["Riverside".into(), "Sacramento".into()],
    }];
    let results = fit_menus(&p.index, &r, &menus, ResidualSource::Coastal, &ContagionConfig::default());
    assert_eq!(results.len(), 2);
    let fit = results[0].base.as_ref().unwrap();
    assert_eq!((fit.source.as_str(), fit.target.as_str()), ("1", "2"));
    for (l, want) in [0.6, 0.3, 0.0, 0.0].into_iter().enumerate() {
        let t = &fit.lags[l];
        assert!((t.estimate - want).abs() < 3.0 * t.std_error, "lag {l}: {} vs {want}", t.estimate);
    }
    assert!(results[0].interacted.is_ok());
    assert!(results[1].base.is_err());
}

#[test]
fn division_report_counts_pairs_within_divisions() {
    let (_, r) = generate(&scenario(17));
    let mut pairs = return_pair_correlations(&r, Timing::Contemporaneous, 8);
    pairs.extend(return_pair_correlations(&r, Timing::Lead, 8));
    let jumps = lm_panel(&r, &JumpConfig::default()).unwrap();
    pairs.extend(jump_pair_correlations(&jumps, Timing::Contemporaneous, &JumpPairConfig::default()));
    let map = DivisionMap::default();
    let divisions = assign_divisions(r.msas(), &map).unwrap();
    let rows = cohort_correlation_report(&pairs, &divisions, &map, 5.0).unwrap();
    let row = |d: &str, timing| {
        rows.iter()
            .find(|x| x.division == d && x.kind == PairKind::Return && x.timing == timing)
            .unwrap()
    };
    assert_eq!(row("CA", Timing::Contemporaneous).n, 3);
    assert_eq!(row("CA", Timing::Lead).n, 9);
    assert_eq!(row("D4", Timing::Contemporaneous).n, 1);
    assert_eq!(row("D4", Timing::Lead).n, 4);
    assert_eq!(row("D1", Timing::Lead).n, 1);
}

#[test]
fn portfolio_of_full_history_members() {
    let (_, r) = generate(&scenario(19));
    let start = r.first_quarter().offset(40);
    let members = full_history_members(&r, start, 20);
    assert_eq!(members.len(), 6);
    let ids: Vec<&str> = members.iter().map(String::as_str).collect();
    let p = diversification_series(&r, &ids, 20).unwrap();
    assert_eq!(p.quarters.len(), r.members()[0].series.len() - 19);
    for i in 0..p.quarters.len() {
        assert!(p.port_sigma[i] <= p.avg_member_sigma[i] + 1e-10);
        assert!(p.diversification[i] > -1e-10 && p.diversification[i] < 1.0);
    }
}

#[test]
fn error_kinds() {
    let bad = ScenarioConfig {
        n_quarters: 1,
        ..ScenarioConfig::default()
    };
    let e: Error = generate_panel(&bad).unwrap_err().into();
    assert_eq!(e.kind(), "scenario");
    let e: Error = load_hpi_panel("/nonexistent/hpi.csv").unwrap_err().into();
    assert_eq!(e.kind(), "io");
    let e: Error = metrorisk_core::timeseries::read_hpi_panel("a,b\n".as_bytes()).unwrap_err().into();
    assert_eq!(e.kind(), "input");
}
