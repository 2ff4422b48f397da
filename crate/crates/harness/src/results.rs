//! Result files of a benchmark run.

use std::fs;
use std::path::Path;

use unified_ipp::metrics::MetricsRecord;

use crate::benchmark::{BenchmarkRun, SummaryRow};
use crate::error::Result;

pub const SUMMARY_HEADER: &str = "planner,protocol,II,Unc,MLL,RMSE,mIoU,F1,replan_time_s";

fn metric_cells(v: &[Option<f64>; 6]) -> String {
    MetricsRecord::from_values(*v).csv_row()
}

/// `summary.csv`. Wall-clock time is left blank unless `with_timing`, so
/// the file is reproducible byte for byte by default.
pub fn summary_csv(rows: &[SummaryRow], with_timing: bool) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let t = if with_timing { r.replan_time_s.to_string() } else { String::new() };
        out.push_str(&format!("{},{},{},{}\n", r.planner.name(), r.protocol.name(), metric_cells(&r.mean), t));
    }
    out
}

pub fn summary_std_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("planner,protocol,II,Unc,MLL,RMSE,mIoU,F1,valid,invalid\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.planner.name(),
            r.protocol.name(),
            metric_cells(&r.std),
            r.valid,
            r.invalid
        ));
    }
    out
}

pub fn timing_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("planner,protocol,replan_time_s,replan_time_max_s\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.planner.name(), r.protocol.name(), r.replan_time_s, r.replan_time_max_s));
    }
    out
}

/// Writes `summary.csv`, `summary_std.csv`, `timing.csv`, `config.json`
/// and one `episodes/<planner>_<protocol>_r<repeat>_m<mission>.csv` per episode.
pub fn write_results(run: &BenchmarkRun, out_dir: impl AsRef<Path>, with_timing: bool) -> Result<()> {
    let dir = out_dir.as_ref();
    let episodes = dir.join("episodes");
    fs::create_dir_all(&episodes)?;
    fs::write(dir.join("summary.csv"), summary_csv(&run.summary, with_timing))?;
    fs::write(dir.join("summary_std.csv"), summary_std_csv(&run.summary))?;
    fs::write(dir.join("timing.csv"), timing_csv(&run.summary))?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&run.config)? + "\n")?;
    for (key, log) in &run.episodes {
        let mut text = log.steps_csv();
        if let Some(e) = &log.error {
            text.push_str(&format!("# invalid: {e}\n"));
        }
        fs::write(episodes.join(format!("{}.csv", key.file_stem(run.config.protocol))), text)?;
    }
    Ok(())
}
