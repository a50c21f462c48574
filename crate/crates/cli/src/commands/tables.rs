use std::collections::BTreeMap;

use anyhow::Result;
use serde::Serialize;

use tetra_core::hypercube::{exchange_invariant_check, tables_as_map, ExchangeReport};
use tetra_core::EdgeChoiceTables;

use super::{emit_json, reject_flag};
use crate::config::SCHEMA_VERSION;
use crate::Flags;

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    command: &'static str,
    tables: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Table edges with the cube's fixed coordinate dropped.
    local: BTreeMap<String, Vec<String>>,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    exchange: ExchangeReport,
    pass: bool,
}

pub fn run(flags: &Flags) -> Result<bool> {
    reject_flag("config", flags.config.is_some(), "tables")?;
    reject_flag("seed", flags.seed.is_some(), "tables")?;
    reject_flag("grid", flags.grid.is_some(), "tables")?;
    reject_flag("convention", flags.convention.is_some(), "tables")?;
    let tables = EdgeChoiceTables::standard();
    let validation = tables.validate();
    let exchange = exchange_invariant_check(&tables);
    let local = tables
        .lte
        .iter()
        .chain(&tables.rte)
        .map(|(cube, es)| {
            let edges = es.iter().map(|e| e.localize(cube).map(|l| l.to_string())).collect::<Result<Vec<_>, _>>()?;
            Ok((cube.to_string(), edges))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let pass = validation.is_ok() && exchange.holds;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "tables",
        tables: tables_as_map(&tables),
        local,
        valid: validation.is_ok(),
        error: validation.err().map(|e| e.to_string()),
        exchange,
        pass,
    };
    emit_json(&report, flags.out.as_deref())?;
    Ok(pass)
}
