//! Tables of Jordan types over ranges of `n` and `p`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::harness::enumerate_partitions;
use crate::jordan::{validate_partition_for_group, Family, GroupContext, JordanType};
use crate::operator::{oracle_type, ModuleSpec};
use crate::theorem::full_pipeline;

/// Which route computes a Jordan type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Closed rules on top of the block decomposition.
    Rules,
    /// Explicit matrices for the whole module.
    Oracle,
    /// Both; a disagreement is an error.
    Both,
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rules" => Ok(Engine::Rules),
            "oracle" => Ok(Engine::Oracle),
            "both" => Ok(Engine::Both),
            _ => Err(Error::Unknown {
                kind: "engine",
                input: s.to_string(),
            }),
        }
    }
}

impl Engine {
    pub fn compute(
        self,
        jt: &JordanType,
        ctx: &GroupContext,
        module: ModuleSpec,
    ) -> Result<JordanType> {
        match self {
            Engine::Rules => full_pipeline(jt, ctx, module),
            Engine::Oracle => oracle_type(jt, ctx, module),
            Engine::Both => {
                let rules = full_pipeline(jt, ctx, module)?;
                let oracle = oracle_type(jt, ctx, module)?;
                if rules == oracle {
                    Ok(rules)
                } else {
                    Err(Error::DecompositionViolated(format!(
                        "{jt} on {module} over {ctx}: rules give {rules}, oracle gives {oracle}"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub family: Family,
    pub n: usize,
    pub p: Prime,
    pub partition: JordanType,
    pub types: Vec<(ModuleSpec, JordanType)>,
}

#[derive(Debug, Clone)]
pub struct TableSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub primes: Vec<Prime>,
    pub family: Family,
    pub modules: Vec<ModuleSpec>,
    /// Keep only `p | n`.
    pub divisible_only: bool,
    pub engine: Engine,
}

impl TableSpec {
    /// `SL(V)`, `2 <= n <= 5`, `p | n`, types on `V ⊗ V*` and `psl(V)`.
    pub fn reference_table() -> Self {
        TableSpec {
            n_min: 2,
            n_max: 5,
            primes: [2, 3, 5].map(|p| Prime::new(p).unwrap()).to_vec(),
            family: Family::SL,
            modules: vec![ModuleSpec::TensorVVdual, ModuleSpec::PSL],
            divisible_only: true,
            engine: Engine::Rules,
        }
    }
}

/// Rows ordered by `n`, then `p`, then partition in enumeration order.
pub fn table_rows(spec: &TableSpec) -> Result<Vec<TableRow>> {
    if spec.n_min > spec.n_max {
        return Err(Error::InvalidGroup(format!(
            "empty range {}..={}",
            spec.n_min, spec.n_max
        )));
    }
    let mut rows = Vec::new();
    for n in spec.n_min..=spec.n_max {
        for &p in &spec.primes {
            if spec.divisible_only && !p.divides(n) {
                continue;
            }
            let Ok(ctx) = GroupContext::new(spec.family, n, p) else {
                continue;
            };
            for partition in enumerate_partitions(n) {
                if !validate_partition_for_group(&partition, &ctx)? {
                    continue;
                }
                let types = spec
                    .modules
                    .iter()
                    .map(|&m| Ok((m, spec.engine.compute(&partition, &ctx, m)?)))
                    .collect::<Result<_>>()?;
                rows.push(TableRow {
                    family: spec.family,
                    n,
                    p,
                    partition,
                    types,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "plain" => Ok(Format::Text),
            "tsv" => Ok(Format::Tsv),
            "json" | "jsonl" => Ok(Format::Json),
            _ => Err(Error::Unknown {
                kind: "format",
                input: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Tsv => "tsv",
            Format::Json => "json",
        })
    }
}

fn header(modules: &[ModuleSpec]) -> Vec<String> {
    let mut h: Vec<String> = ["group", "n", "p", "V"].map(String::from).to_vec();
    h.extend(modules.iter().map(|m| m.name().to_string()));
    h
}

fn cells(row: &TableRow) -> Vec<String> {
    let mut c = vec![
        row.family.to_string(),
        row.n.to_string(),
        row.p.to_string(),
        row.partition.to_string(),
    ];
    c.extend(row.types.iter().map(|(_, t)| t.to_string()));
    c
}

fn json_row(row: &TableRow) -> String {
    let mut s = format!(
        "{{\"family\":\"{}\",\"n\":{},\"p\":{},\"partition\":\"{}\",\"types\":{{",
        row.family, row.n, row.p, row.partition
    );
    for (i, (m, t)) in row.types.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("\"{}\":\"{}\"", m.name(), t));
    }
    s.push_str("}}");
    s
}

/// Renders rows; the output ends with a newline unless it is empty.
pub fn render_table(rows: &[TableRow], modules: &[ModuleSpec], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            for row in rows {
                out.push_str(&json_row(row));
                out.push('\n');
            }
        }
        Format::Tsv => {
            out.push_str(&header(modules).join("\t"));
            out.push('\n');
            for row in rows {
                out.push_str(&cells(row).join("\t"));
                out.push('\n');
            }
        }
        Format::Text => {
            let head = header(modules);
            let body: Vec<Vec<String>> = rows.iter().map(cells).collect();
            let mut widths: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
            for r in &body {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cols: &[String]| {
                let padded: Vec<String> = cols
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:<w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            out.push_str(&line(&head));
            out.push('\n');
            for r in &body {
                out.push_str(&line(r));
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_table_shape() {
        let spec = TableSpec::reference_table();
        let rows = table_rows(&spec).unwrap();
        let per_n: Vec<usize> = (2..=5)
            .map(|n| rows.iter().filter(|r| r.n == n).count())
            .collect();
        assert_eq!(per_n, [2, 3, 5, 7]);
        assert!(rows.iter().all(|r| r.p.divides(r.n)));
    }

    #[test]
    fn divisible_only_can_be_empty() {
        let spec = TableSpec {
            n_min: 2,
            n_max: 2,
            primes: vec![Prime::new(3).unwrap()],
            ..TableSpec::reference_table()
        };
        assert!(table_rows(&spec).unwrap().is_empty());
        assert_eq!(render_table(&[], &spec.modules, Format::Json), "");
    }

    #[test]
    fn json_rows_parse_back() {
        let rows = table_rows(&TableSpec::reference_table()).unwrap();
        let text = render_table(&rows, &TableSpec::reference_table().modules, Format::Json);
        for (line, row) in text.lines().zip(&rows) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let part: JordanType = v["partition"].as_str().unwrap().parse().unwrap();
            assert_eq!(part, row.partition);
            let psl: JordanType = v["types"]["psl"].as_str().unwrap().parse().unwrap();
            assert_eq!(psl, row.types[1].1);
        }
    }
}
