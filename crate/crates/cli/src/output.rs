use std::io::Write;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::sweep::{ResultRow, COLUMNS};

/// Writes `#` comment lines echoing the config text and the effective
/// overrides, then the header and one line per row.
pub fn write_csv<W: Write>(mut out: W, cfg: &ExperimentConfig, source_text: &str, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "# experiment: {}", cfg.name)?;
    writeln!(out, "# seed: {}", cfg.seed)?;
    writeln!(out, "# engine.samples: {}", cfg.engine.samples)?;
    if let Some(mi) = &cfg.mi {
        writeln!(out, "# mi.samples: {}", mi.samples)?;
    }
    writeln!(out, "# capacities in bits; NA marks a degenerate or failed value")?;
    writeln!(out, "# config:")?;
    for line in source_text.lines() {
        writeln!(out, "#   {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a ExperimentConfig,
    rows: &'a [ResultRow],
}

/// Pretty JSON document holding the parsed config and the rows.
pub fn write_json<W: Write>(mut out: W, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &JsonReport { config: cfg, rows })?;
    writeln!(out)?;
    Ok(())
}

/// Reads rows back from a CSV written by [`write_csv`], skipping comments.
pub fn read_csv(text: &str) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(crate::error::CliError::Plot(format!(
            "unexpected columns {:?}; expected {:?}",
            headers.iter().collect::<Vec<_>>(),
            COLUMNS
        )));
    }
    Ok(r.records().collect::<std::result::Result<_, _>>()?)
}
