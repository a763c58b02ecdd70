//! Module-level CSV layouts.

use metrorisk_core::contagion::{ContagionError, MenuResult};
use metrorisk_core::integration::{Characteristic, CrossSection};
use metrorisk_core::{ContagionFit, IntegrationSummary};

use crate::output::{label, num, opt, Artifacts, Table};
use crate::pipeline::{Correlations, Dataset, Integration, Jumps, Portfolios};

pub(crate) type Stat = (&'static str, fn(&CrossSection) -> Option<f64>);

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

pub fn ingest(data: &Dataset, art: &mut Artifacts) {
    let mut t = Table::new(&["msa_id", "quarter", "return"]);
    for m in data.returns.members() {
        for (q, v) in m.series.iter() {
            t.push(vec![m.msa.id.clone(), s(q), num(v)]);
        }
    }
    art.table("returns.csv", &t);

    let mut header = vec!["quarter".to_string()];
    header.extend(data.factors.factor_ids().iter().cloned());
    let mut t = Table::with_header(header);
    for i in 0..data.factors.len() {
        let q = data.factors.start().offset(i as i64);
        let mut row = vec![s(q)];
        row.extend((0..data.factors.n_factors()).map(|f| opt(data.factors.column(f)[i])));
        t.push(row);
    }
    art.table("factors_transformed.csv", &t);

    let mut t = Table::new(&["msa_id", "msa_name", "state", "first_quarter", "last_quarter", "n_returns"]);
    for m in data.returns.members() {
        t.push(vec![
            m.msa.id.clone(),
            m.msa.name.clone(),
            m.msa.state.clone(),
            s(m.series.start),
            m.series.end().map(s).unwrap_or_default(),
            s(m.series.len()),
        ]);
    }
    art.table("panel_summary.csv", &t);
}

fn summary_rows(t: &mut Table, scope: &str, summary: &IntegrationSummary) {
    for (i, m) in summary.msas.iter().enumerate() {
        let mut row = vec![scope.to_string(), "msa".into(), m.msa.id.clone(), m.msa.name.clone()];
        for c in Characteristic::ALL {
            let cs = summary.cross_section(c);
            row.push(opt(c.of(m)));
            row.push(cs.ranks[i].map(s).unwrap_or_default());
            row.push(cs.quintiles[i].map(s).unwrap_or_default());
        }
        t.push(row);
    }
    let stats: [Stat; 8] = [
        ("mean", |c| Some(c.mean)),
        ("std_dev", |c| c.std_dev),
        ("quintile_1", |c| Some(c.quintile_minima[0])),
        ("quintile_2", |c| Some(c.quintile_minima[1])),
        ("quintile_3", |c| Some(c.quintile_minima[2])),
        ("quintile_4", |c| Some(c.quintile_minima[3])),
        ("quintile_5", |c| Some(c.quintile_minima[4])),
        ("max", |c| Some(c.max)),
    ];
    for (name, f) in stats {
        let mut row = vec![scope.to_string(), "statistic".into(), name.to_string(), String::new()];
        for c in Characteristic::ALL {
            let cs = summary.cross_section(c);
            row.push(if cs.n == 0 { String::new() } else { opt(f(cs)) });
            row.push(String::new());
            row.push(String::new());
        }
        t.push(row);
    }
}

pub fn integration(data: &Dataset, res: &Integration, art: &mut Artifacts) {
    let factor_ids = data.factors.factor_ids();
    let mut header = vec!["msa_id".to_string(), "quarter".into(), "r_square".into(), "beta_const".into()];
    header.extend(factor_ids.iter().map(|f| format!("beta_{f}")));
    let mut t = Table::with_header(header);
    for ser in &res.series {
        let idx: Vec<Option<usize>> = std::iter::once("const")
            .chain(factor_ids.iter().map(String::as_str))
            .map(|n| ser.coefficient_index(n))
            .collect();
        for (i, q) in ser.quarters.iter().enumerate() {
            let mut row = vec![ser.msa_id.clone(), s(q), num(ser.r_square[i])];
            row.extend(idx.iter().map(|j| opt(j.map(|j| ser.betas[i][j]))));
            t.push(row);
        }
    }
    art.table("integration_series.csv", &t);

    let mut header = vec!["scope".to_string(), "row".into(), "id".into(), "name".into()];
    for c in Characteristic::ALL {
        header.push(c.name().to_string());
        header.push(format!("{}_rank", c.name()));
        header.push(format!("{}_quintile", c.name()));
    }
    let mut t = Table::with_header(header);
    summary_rows(&mut t, "US", &res.us);
    if let Some(ca) = &res.ca {
        summary_rows(&mut t, "CA", ca);
    }
    art.table("integration_summary.csv", &t);

    let mut t = Table::new(&["msa_id", "reason"]);
    for e in res.excluded.iter().chain(&res.us.excluded) {
        t.push(vec![e.msa_id.clone(), e.reason.clone()]);
    }
    art.table("integration_exclusions.csv", &t);

    let mut t = Table::new(&["cohort", "quarter", "r_square", "n_members"]);
    for a in &res.averages {
        for (q, v, n) in &a.points {
            t.push(vec![a.name.clone(), s(q), num(*v), s(n)]);
        }
    }
    art.table("cohort_averages.csv", &t);

    let mut t = Table::new(&["scope", "factor", "quarter", "beta", "n_members"]);
    for b in &res.betas {
        for (q, v, n) in &b.points {
            t.push(vec![b.scope.clone(), b.factor.clone(), s(q), num(*v), s(n)]);
        }
    }
    art.table("beta_averages.csv", &t);
}

fn flag(b: bool) -> String {
    s(u8::from(b))
}

pub fn jumps(res: &Jumps, art: &mut Artifacts) {
    let mut t = Table::new(&["msa_id", "quarter", "L", "L_scaled", "jump_flag", "big_flag", "testable"]);
    for ser in &res.series {
        for i in 0..ser.len() {
            let (l, ls) = if ser.testable[i] {
                (num(ser.l[i]), num(ser.l_scaled[i]))
            } else {
                (String::new(), String::new())
            };
            t.push(vec![
                ser.msa_id.clone(),
                s(ser.quarters[i]),
                l,
                ls,
                flag(ser.jump_flag[i]),
                flag(ser.big_flag[i]),
                flag(ser.testable[i]),
            ]);
        }
    }
    art.table("jump_series.csv", &t);

    let mut t = Table::new(&["cohort", "flag", "quarter", "pct"]);
    for (cohort, kind, pts) in &res.incidence {
        for (q, v) in pts {
            t.push(vec![cohort.clone(), label(kind), s(q), num(*v)]);
        }
    }
    art.table("jump_incidence.csv", &t);
}

pub fn summary_table(res: &Correlations, contemporaneous_only: bool) -> Table {
    let mut t = Table::new(&["kind", "timing", "sample", "n", "mean", "sigma", "t_stat", "max", "min"]);
    for (kind, timing, rows) in &res.summaries {
        if contemporaneous_only && *timing != metrorisk_core::Timing::Contemporaneous {
            continue;
        }
        for r in rows {
            let sample = r.threshold.map_or("all".to_string(), |th| format!("t>{th}"));
            t.push(vec![
                label(kind),
                label(timing),
                sample,
                s(r.n),
                opt(r.mean),
                opt(r.sigma),
                opt(r.t_stat),
                opt(r.max),
                opt(r.min),
            ]);
        }
    }
    t
}

pub fn division_table(res: &Correlations) -> Table {
    let mut t = Table::new(&["division", "kind", "timing", "n", "n_significant", "pct_significant", "mean"]);
    for r in &res.divisions {
        t.push(vec![
            r.division.clone(),
            label(&r.kind),
            label(&r.timing),
            s(r.n),
            s(r.n_significant),
            opt(r.pct_significant),
            opt(r.mean),
        ]);
    }
    t
}

pub fn correlations(res: &Correlations, art: &mut Artifacts) {
    let mut t = Table::new(&["msa_i", "msa_j", "kind", "timing", "r", "n", "t"]);
    for p in &res.pairs {
        t.push(vec![
            p.msa_i.clone(),
            p.msa_j.clone(),
            label(&p.kind),
            label(&p.timing),
            num(p.r),
            s(p.n_effective),
            num(p.t_stat),
        ]);
    }
    art.table("pair_correlations.csv", &t);
    art.table("correlation_summary.csv", &summary_table(res, false));
    art.table("division_report.csv", &division_table(res));
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Base,
    Interacted,
}

fn fit_cells(fit: &Result<ContagionFit, ContagionError>, n_lags: usize, interacted: bool) -> Vec<String> {
    let width = 9 + 2 * (1 + (n_lags + 1) * if interacted { 2 } else { 1 });
    let f = match fit {
        Ok(f) => f,
        Err(e) => {
            let mut row = vec!["error".to_string()];
            row.extend(std::iter::repeat_n(String::new(), width - 2));
            row.push(e.to_string());
            return row;
        }
    };
    let mut row = vec!["ok".to_string(), s(f.n_obs), label(&f.method), opt(f.rho), flag(f.converged)];
    let mut term = |t: &metrorisk_core::contagion::Term| {
        row.push(num(t.estimate));
        row.push(num(t.t_stat));
    };
    term(&f.intercept);
    f.lags.iter().for_each(&mut term);
    if interacted {
        f.interactions.iter().flatten().for_each(&mut term);
    }
    row.push(num(f.r_square));
    row.push(num(f.durbin_watson));
    row.push(f.ols_dw_verdict.as_ref().map(label).unwrap_or_default());
    row.push(String::new());
    row
}

pub fn contagion_table(results: &[MenuResult], model: Option<Model>) -> Table {
    let n_lags = metrorisk_core::contagion::DEFAULT_LAGS;
    let interacted_cols = model != Some(Model::Base);
    let mut header: Vec<String> = ["source", "target", "model", "status", "n", "method", "rho", "converged", "const", "const_t"]
        .iter()
        .map(|x| x.to_string())
        .collect();
    for l in 0..=n_lags {
        header.push(format!("lag{l}"));
        header.push(format!("lag{l}_t"));
    }
    if interacted_cols {
        for l in 0..=n_lags {
            header.push(format!("lag{l}_x_resid"));
            header.push(format!("lag{l}_x_resid_t"));
        }
    }
    header.extend(["r_square", "durbin_watson", "ols_dw_verdict", "error"].map(String::from));
    let mut t = Table::with_header(header);
    for r in results {
        for (m, fit) in [(Model::Base, &r.base), (Model::Interacted, &r.interacted)] {
            if model.is_some_and(|x| x != m) {
                continue;
            }
            let mut row = vec![
                r.source.clone(),
                r.target.clone(),
                if m == Model::Base { "base" } else { "interacted" }.to_string(),
            ];
            let mut cells = fit_cells(fit, n_lags, m == Model::Interacted);
            if interacted_cols && m == Model::Base {
                let at = cells.len() - 4;
                cells.splice(at..at, std::iter::repeat_n(String::new(), 2 * (n_lags + 1)));
            }
            row.extend(cells);
            t.push(row);
        }
    }
    t
}

pub fn contagion(results: &[MenuResult], art: &mut Artifacts) {
    art.table("contagion_fits.csv", &contagion_table(results, None));
}

pub fn portfolio(res: &Portfolios, art: &mut Artifacts) {
    let mut t = Table::new(&[
        "portfolio",
        "quarter",
        "port_return",
        "port_sigma",
        "avg_member_sigma",
        "diversification",
        "integration",
        "n_members",
    ]);
    for p in &res.portfolios {
        let ser = &p.series;
        for i in 0..ser.quarters.len() {
            t.push(vec![
                p.name.clone(),
                s(ser.quarters[i]),
                num(ser.port_return[i]),
                num(ser.port_sigma[i]),
                num(ser.avg_member_sigma[i]),
                num(ser.diversification[i]),
                opt(p.integration[i]),
                s(ser.members.len()),
            ]);
        }
    }
    art.table("portfolio_series.csv", &t);

    let mut t = Table::new(&["portfolio", "x", "y", "from", "to", "r", "status"]);
    for c in &res.correlations {
        let (from, to) = c.range.map_or((String::new(), String::new()), |(a, b)| (s(a), s(b)));
        let (r, status) = match &c.r {
            Ok(r) => (num(*r), "ok".to_string()),
            Err(e) => (String::new(), e.clone()),
        };
        t.push(vec![c.portfolio.clone(), c.x.into(), c.y.into(), from, to, r, status]);
    }
    for (name, reason) in &res.skipped {
        t.push(vec![
            name.clone(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            reason.clone(),
        ]);
    }
    art.table("series_correlations.csv", &t);
}
