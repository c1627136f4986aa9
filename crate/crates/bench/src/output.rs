//! CSV tables, box-plot data and gnuplot scripts.
//!
//! Floats are written with nine significant digits. Per-step tables hold
//! only values that are reproducible from the seed; wall-clock timings go to
//! a separate `*_timing.csv`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::runner::EpisodeRecord;
use crate::scores::{five_numbers, Summary};
use crate::sweep::SweepTable;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_VAR: &str = "BENCH_OUTPUT_DIR";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Command-line value, then the environment variable, then the config
/// file, then `bench_out`.
pub fn output_dir(cli: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_VAR).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("bench_out"))
}

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_episodes<W: Write>(out: W, records: &[EpisodeRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = records
        .iter()
        .flat_map(|r| r.rows.first())
        .map(|row| row.action.len())
        .next()
        .unwrap_or(0);
    let mut header: Vec<String> = ["env", "solver", "seed", "step", "iterations"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..dim).map(|a| format!("u{a}")));
    header.extend(
        [
            "cost",
            "stage_cost",
            "noise_strength",
            "step_size",
            "negative_updates",
            "nonfinite_costs",
            "violation",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        for row in &r.rows {
            let mut rec = vec![
                r.env.clone(),
                r.solver.clone(),
                r.seed.to_string(),
                row.step.to_string(),
                row.iterations.to_string(),
            ];
            rec.extend(row.action.iter().map(|u| fmt_float(*u)));
            rec.extend([
                fmt_float(row.cost),
                fmt_float(row.stage_cost),
                fmt_float(row.noise_strength),
                fmt_float(row.step_size),
                row.negative_updates.to_string(),
                row.nonfinite_costs.to_string(),
                u8::from(row.violation).to_string(),
            ]);
            w.write_record(&rec).map_err(csv_error)?;
        }
    }
    w.flush()
}

pub fn write_timing<W: Write>(out: W, records: &[EpisodeRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "env",
        "solver",
        "seed",
        "step",
        "iterations",
        "wall_time_s",
        "max_iteration_time_s",
    ])
    .map_err(csv_error)?;
    for r in records {
        for row in &r.rows {
            w.write_record([
                r.env.clone(),
                r.solver.clone(),
                r.seed.to_string(),
                row.step.to_string(),
                row.iterations.to_string(),
                fmt_float(row.wall_time),
                fmt_float(row.max_iteration_time),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()
}

/// One row per episode: seed and total reward.
pub fn write_totals<W: Write>(out: W, records: &[EpisodeRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["env", "solver", "seed", "total_reward", "violated"])
        .map_err(csv_error)?;
    for r in records {
        w.write_record([
            r.env.clone(),
            r.solver.clone(),
            r.seed.to_string(),
            fmt_float(r.total_reward),
            u8::from(r.violated()).to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_summary<W: Write>(out: W, rows: &[(String, Summary)]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "count", "mean", "std", "min", "max"])
        .map_err(csv_error)?;
    for (name, s) in rows {
        w.write_record([
            name.clone(),
            s.count.to_string(),
            fmt_float(s.mean),
            fmt_float(s.std),
            fmt_float(s.min),
            fmt_float(s.max),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// Whitespace-separated `index method min q1 median q3 max`, for gnuplot's
/// candlesticks style.
pub fn write_boxplot_data<W: Write>(mut out: W, groups: &[(String, Vec<f64>)]) -> io::Result<()> {
    writeln!(out, "# index method min q1 median q3 max")?;
    for (i, (name, values)) in groups.iter().enumerate() {
        let [lo, q1, med, q3, hi] = five_numbers(values);
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            i + 1,
            name,
            fmt_float(lo),
            fmt_float(q1),
            fmt_float(med),
            fmt_float(q3),
            fmt_float(hi)
        )?;
    }
    Ok(())
}

pub fn boxplot_script(data_file: &str, title: &str, ylabel: &str) -> String {
    format!(
        "set title \"{title}\"\n\
         set ylabel \"{ylabel}\"\n\
         set style fill empty\n\
         set boxwidth 0.5\n\
         set xtics nomirror\n\
         unset key\n\
         set terminal pngcairo size 800,500\n\
         set output \"{stem}.png\"\n\
         plot \"{data_file}\" using 1:4:3:7:6:xticlabels(2) with candlesticks whiskerbars 0.5, \\\n\
         \x20    \"{data_file}\" using 1:5:5:5:5 with candlesticks lt -1 notitle\n",
        stem = data_file.trim_end_matches(".dat"),
    )
}

pub fn write_sweep<W: Write>(out: W, table: &SweepTable) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "parameter",
        "value",
        "count",
        "mean",
        "std",
        "min",
        "max",
        "negative_updates",
    ])
    .map_err(csv_error)?;
    for p in &table.points {
        w.write_record([
            table.parameter.to_string(),
            fmt_float(p.value),
            p.totals.count.to_string(),
            fmt_float(p.totals.mean),
            fmt_float(p.totals.std),
            fmt_float(p.totals.min),
            fmt_float(p.totals.max),
            p.negative_updates.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// Write `contents` to `dir/name`, creating `dir`.
pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Per-step, timing and totals tables for one run, named after `stem`.
pub fn write_run(dir: &Path, stem: &str, records: &[EpisodeRecord]) -> io::Result<Vec<PathBuf>> {
    let mut steps = Vec::new();
    write_episodes(&mut steps, records)?;
    let mut timing = Vec::new();
    write_timing(&mut timing, records)?;
    let mut totals = Vec::new();
    write_totals(&mut totals, records)?;
    Ok(vec![
        write_file(dir, &format!("{stem}.csv"), &steps)?,
        write_file(dir, &format!("{stem}_timing.csv"), &timing)?,
        write_file(dir, &format!("{stem}_totals.csv"), &totals)?,
    ])
}
