use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::grid::{AggregateSummary, CellSummary};
use super::reference::{ReferenceTable, GALAXY_REFERENCE};
use crate::error::{Error, Result};

/// Placeholder for a cell without results.
pub const EMPTY_CELL: &str = "-";

const SUMMARY_HEADER: [&str; 8] = [
    "scenario", "n", "prior", "prior_spec", "replicates", "failures", "avg_mode", "avg_lo",
];

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            position: p.byte() as usize,
            message: format!("line {}: {e}", p.line()),
        },
        None => Error::Io(e.to_string()),
    }
}

/// `summary.csv`: one row per cell, without per-replicate records.
pub fn summary_to_csv(summary: &AggregateSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &summary.cells {
        w.serialize(c).map_err(csv_err)?;
    }
    if summary.cells.is_empty() {
        let mut header = SUMMARY_HEADER.to_vec();
        header.push("avg_hi");
        w.write_record(header).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

pub fn summary_from_csv(text: &str) -> Result<AggregateSummary> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let cells = r
        .deserialize::<CellSummary>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    Ok(AggregateSummary { cells })
}

fn fmt_cell(c: Option<&CellSummary>) -> String {
    match c {
        Some(c) if c.replicates > 0 => {
            format!("{:.2} ({:.2}, {:.2})", c.avg_mode, c.avg_lo, c.avg_hi)
        }
        _ => EMPTY_CELL.to_string(),
    }
}

fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for row in std::iter::once(header).chain(rows.iter().map(|r| r.as_slice())) {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(|r| r.as_slice())) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            let pad = width[i] - cell.chars().count();
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            line.push_str(&" ".repeat(pad));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn priors_of(summary: &AggregateSummary, scenario: &str) -> Vec<String> {
    let mut priors: Vec<String> = Vec::new();
    for c in summary.cells.iter().filter(|c| c.scenario == scenario) {
        if !priors.contains(&c.prior) {
            priors.push(c.prior.clone());
        }
    }
    priors
}

fn sizes_of(summary: &AggregateSummary, scenario: &str) -> Vec<usize> {
    let mut ns: Vec<usize> = summary
        .cells
        .iter()
        .filter(|c| c.scenario == scenario)
        .map(|c| c.n)
        .collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Aligned text table for one scenario: a row per `n`, a column per
/// prior, each entry `mode (lo, hi)`.
pub fn scenario_table(summary: &AggregateSummary, scenario: &str, priors: &[String]) -> String {
    let priors = if priors.is_empty() {
        priors_of(summary, scenario)
    } else {
        priors.to_vec()
    };
    let mut header = vec!["n".to_string()];
    header.extend(priors.iter().cloned());
    let rows: Vec<Vec<String>> = sizes_of(summary, scenario)
        .into_iter()
        .map(|n| {
            let mut row = vec![n.to_string()];
            row.extend(priors.iter().map(|p| fmt_cell(summary.cell(scenario, n, p))));
            row
        })
        .collect();
    render(&header, &rows)
}

/// Like [`scenario_table`], with the reference values on a second line
/// under each sample size.
pub fn scenario_comparison(summary: &AggregateSummary, reference: &ReferenceTable) -> String {
    let scenario = reference.scenario;
    let priors = ["LB", "UN", "PO"].map(String::from);
    let mut header = vec!["n".to_string(), "source".to_string()];
    header.extend(priors.iter().cloned());
    let mut sizes = sizes_of(summary, scenario);
    for c in &reference.cells {
        if !sizes.contains(&c.n) {
            sizes.push(c.n);
        }
    }
    sizes.sort_unstable();
    let mut rows = Vec::new();
    for n in sizes {
        let mut ours = vec![n.to_string(), "this run".to_string()];
        ours.extend(priors.iter().map(|p| fmt_cell(summary.cell(scenario, n, p))));
        let mut theirs = vec![String::new(), "reference".to_string()];
        theirs.extend(priors.iter().map(|p| match reference.cell(n, p) {
            Some(c) => format!("{:.2} ({:.2}, {:.2})", c.mode, c.lo, c.hi),
            None => EMPTY_CELL.to_string(),
        }));
        rows.push(ours);
        rows.push(theirs);
    }
    format!("{}\n{}", reference.caption, render(&header, &rows))
}

/// Posterior over `k = 1..=10` as labelled rows, two decimals.
pub fn galaxy_table(rows: &[(String, Vec<f64>)]) -> String {
    let mut header = vec!["prior".to_string()];
    header.extend((1..=10).map(|k| k.to_string()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, pmf)| {
            let mut row = vec![label.clone()];
            row.extend((0..10).map(|i| match pmf.get(i) {
                Some(p) => format!("{p:.2}"),
                None => EMPTY_CELL.to_string(),
            }));
            row
        })
        .collect();
    render(&header, &body)
}

/// Galaxy rows interleaved with the reference rows of the same prior.
pub fn galaxy_comparison(rows: &[(String, Vec<f64>)]) -> String {
    let mut all = Vec::new();
    for (label, pmf) in rows {
        all.push((label.clone(), pmf.clone()));
        if let Some((_, r)) = GALAXY_REFERENCE.iter().find(|(l, _)| l == label) {
            all.push((format!("{label} (reference)"), r.to_vec()));
        }
    }
    galaxy_table(&all)
}

/// Writes `summary.csv`, and under `<dir>/<scenario>/<n>/<prior>/` one
/// `replicate-<i>.csv` pmf per successful replicate, a `replicates.csv`
/// index with seeds and summaries, and `failures.csv` if any failed.
pub fn write_results(summary: &AggregateSummary, dir: &Path) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("summary.csv"), summary_to_csv(summary)?).map_err(io)?;
    for c in &summary.cells {
        let cell_dir = dir.join(&c.scenario).join(c.n.to_string()).join(prior_dir(c));
        fs::create_dir_all(&cell_dir).map_err(io)?;
        let mut index = String::from("replicate,data_seed,chain_seed,mode,lo,hi,mean_t\n");
        for r in &c.records {
            let _ = writeln!(
                index,
                "{},{},{},{},{},{},{}",
                r.replicate, r.data_seed, r.chain_seed, r.mode, r.lo, r.hi, r.mean_t
            );
            let mut text = String::from("k,probability\n");
            for (i, p) in r.pmf.iter().enumerate() {
                let _ = writeln!(text, "{},{}", i + 1, p);
            }
            let _ = writeln!(text, "overflow,{}", r.overflow);
            fs::write(cell_dir.join(format!("replicate-{}.csv", r.replicate)), text).map_err(io)?;
        }
        fs::write(cell_dir.join("replicates.csv"), index).map_err(io)?;
        if !c.failed.is_empty() {
            let mut text = String::from("replicate,message\n");
            for f in &c.failed {
                let _ = writeln!(text, "{},\"{}\"", f.replicate, f.message.replace('"', "'"));
            }
            fs::write(cell_dir.join("failures.csv"), text).map_err(io)?;
        }
    }
    Ok(())
}

fn prior_dir(c: &CellSummary) -> String {
    c.prior_spec
        .chars()
        .filter_map(|ch| match ch {
            '(' | ',' => Some('_'),
            ')' | ' ' => None,
            c => Some(c),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(scenario: &str, n: usize, prior: &str, m: f64) -> CellSummary {
        CellSummary {
            scenario: scenario.into(),
            n,
            prior: prior.into(),
            prior_spec: prior.to_lowercase(),
            replicates: 10,
            failures: 0,
            avg_mode: m,
            avg_lo: m - 0.125,
            avg_hi: m + 1.0 / 3.0,
            records: Vec::new(),
            failed: Vec::new(),
        }
    }

    #[test]
    fn summary_round_trips() {
        let s = AggregateSummary {
            cells: vec![cell("M_2a", 50, "LB", 2.03), cell("M_2a", 100, "UN", 0.1 + 0.2)],
        };
        let back = summary_from_csv(&summary_to_csv(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let empty = AggregateSummary::default();
        assert_eq!(summary_from_csv(&summary_to_csv(&empty).unwrap()).unwrap(), empty);
    }

    #[test]
    fn missing_cell_is_a_dash() {
        let s = AggregateSummary {
            cells: vec![cell("M_1", 50, "LB", 1.0), cell("M_1", 100, "UN", 1.0)],
        };
        let t = scenario_table(&s, "M_1", &[]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("n"));
        assert!(lines[1].contains("1.00 (0.88, 1.33)") && lines[1].ends_with(EMPTY_CELL));
        assert!(lines[2].split_whitespace().any(|w| w == EMPTY_CELL));
    }

    #[test]
    fn galaxy_layout() {
        let rows = vec![("LB".to_string(), vec![0.0, 0.004, 0.18, 0.24, 0.22, 0.16, 0.1, 0.05, 0.03, 0.01])];
        let t = galaxy_table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0].split_whitespace().count(), 11);
        assert_eq!(lines[1].split_whitespace().nth(2), Some("0.00"));
        assert_eq!(lines[1].split_whitespace().nth(4), Some("0.24"));
    }
}
