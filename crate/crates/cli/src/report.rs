//! Summary tables and long-format figure data.

use metrorisk_core::contagion::MenuResult;
use metrorisk_core::geography::CALIFORNIA;
use metrorisk_core::integration::Characteristic;
use metrorisk_core::jumps::FlagKind;
use metrorisk_core::Quarter;

use crate::output::{num, opt, Artifacts, Table};
use crate::pipeline::{Correlations, Integration, Jumps, Portfolios};
use crate::render::{contagion_table, division_table, summary_table, Model};

type Row<'a> = Box<dyn Fn(Characteristic) -> Option<f64> + 'a>;

const TABLE1_COLUMNS: [Characteristic; 5] = Characteristic::ALL;

fn table1(res: &Integration) -> Table {
    let mut header = vec!["statistic".to_string()];
    header.extend(TABLE1_COLUMNS.iter().map(|c| c.name().to_string()));
    let mut t = Table::with_header(header);
    let rows: [(&str, Row<'_>); 8] = [
        ("mean", Box::new(|c| Some(res.us.cross_section(c).mean))),
        ("std_dev", Box::new(|c| res.us.cross_section(c).std_dev)),
        ("min/quintile_1", Box::new(|c| Some(res.us.cross_section(c).quintile_minima[0]))),
        ("quintile_2", Box::new(|c| Some(res.us.cross_section(c).quintile_minima[1]))),
        ("quintile_3", Box::new(|c| Some(res.us.cross_section(c).quintile_minima[2]))),
        ("quintile_4", Box::new(|c| Some(res.us.cross_section(c).quintile_minima[3]))),
        ("quintile_5", Box::new(|c| Some(res.us.cross_section(c).quintile_minima[4]))),
        ("max", Box::new(|c| Some(res.us.cross_section(c).max))),
    ];
    for (name, f) in rows {
        let mut row = vec![name.to_string()];
        row.extend(TABLE1_COLUMNS.iter().map(|&c| {
            if res.us.cross_section(c).n == 0 {
                String::new()
            } else {
                opt(f(c))
            }
        }));
        t.push(row);
    }
    t
}

fn table2(res: &Integration) -> Table {
    let ranked = [Characteristic::Mean, Characteristic::Sigma, Characteristic::TrendTStat];
    let mut header = vec!["msa_id".to_string(), "msa_name".into()];
    for c in TABLE1_COLUMNS {
        header.push(c.name().to_string());
        if ranked.contains(&c) {
            header.push(format!("us_rank_{}", c.name()));
            header.push(format!("ca_rank_{}", c.name()));
        }
    }
    let width = header.len();
    let mut t = Table::with_header(header);
    let Some(ca) = &res.ca else { return t };
    let mut by_name: Vec<usize> = (0..ca.msas.len()).collect();
    by_name.sort_by(|&a, &b| ca.msas[a].msa.name.cmp(&ca.msas[b].msa.name).then(a.cmp(&b)));
    for i in by_name {
        let m = &ca.msas[i];
        let us_idx = res.us.msas.iter().position(|u| u.msa.id == m.msa.id);
        let mut row = vec![m.msa.id.clone(), m.msa.name.clone()];
        for c in TABLE1_COLUMNS {
            row.push(opt(c.of(m)));
            if ranked.contains(&c) {
                let us_rank = us_idx.and_then(|j| res.us.cross_section(c).ranks[j]);
                row.push(us_rank.map(|r| r.to_string()).unwrap_or_default());
                row.push(ca.cross_section(c).ranks[i].map(|r| r.to_string()).unwrap_or_default());
            }
        }
        t.push(row);
    }
    let stats: [crate::render::Stat; 4] = [
        ("mean", |c| Some(c.mean)),
        ("std_dev", |c| c.std_dev),
        ("min", |c| Some(c.min)),
        ("max", |c| Some(c.max)),
    ];
    for (name, f) in stats {
        let mut row = vec![name.to_string(), CALIFORNIA.to_string()];
        for c in TABLE1_COLUMNS {
            let cs = ca.cross_section(c);
            row.push(if cs.n == 0 { String::new() } else { opt(f(cs)) });
            if ranked.contains(&c) {
                row.push(String::new());
                row.push(String::new());
            }
        }
        debug_assert_eq!(row.len(), width);
        t.push(row);
    }
    t
}

fn long_table() -> Table {
    Table::new(&["series", "quarter", "value"])
}

fn push_points(t: &mut Table, name: &str, pts: impl IntoIterator<Item = (Quarter, f64)>) {
    for (q, v) in pts {
        t.push(vec![name.to_string(), q.to_string(), num(v)]);
    }
}

fn figure2(res: &Integration) -> Table {
    let mut t = long_table();
    for a in &res.averages {
        push_points(&mut t, &a.name, a.points.iter().map(|&(q, v, _)| (q, v)));
    }
    t
}

fn figure3(res: &Integration) -> Table {
    let mut t = long_table();
    for b in &res.betas {
        push_points(&mut t, &format!("{} {}", b.scope, b.factor), b.points.iter().map(|&(q, v, _)| (q, v)));
    }
    t
}

fn figure4(res: &Jumps) -> Table {
    let mut t = long_table();
    for (cohort, kind, pts) in &res.incidence {
        if *kind == FlagKind::Big {
            push_points(&mut t, cohort, pts.iter().copied());
        }
    }
    t
}

fn figure5(res: &Portfolios) -> Table {
    let mut t = long_table();
    for p in &res.portfolios {
        let q = &p.series.quarters;
        push_points(
            &mut t,
            &format!("{} integration", p.name),
            q.iter().zip(&p.integration).filter_map(|(q, v)| v.map(|v| (*q, v))),
        );
        push_points(&mut t, &format!("{} risk", p.name), q.iter().copied().zip(p.series.port_sigma.iter().copied()));
        push_points(
            &mut t,
            &format!("{} diversification", p.name),
            q.iter().copied().zip(p.series.diversification.iter().copied()),
        );
    }
    t
}

pub fn write(
    integration: &Integration,
    jumps: &Jumps,
    correlations: &Correlations,
    contagion: &[MenuResult],
    portfolios: &Portfolios,
    art: &mut Artifacts,
) {
    art.table("table1.csv", &table1(integration));
    art.table("table2.csv", &table2(integration));
    art.table("table3.csv", &summary_table(correlations, true));
    art.table("table4.csv", &division_table(correlations));
    art.table("table5.csv", &contagion_table(contagion, Some(Model::Base)));
    art.table("table6.csv", &contagion_table(contagion, Some(Model::Interacted)));
    art.table("figure2.csv", &figure2(integration));
    art.table("figure3.csv", &figure3(integration));
    art.table("figure4.csv", &figure4(jumps));
    art.table("figure5.csv", &figure5(portfolios));
}
