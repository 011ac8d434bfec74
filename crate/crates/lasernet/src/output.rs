//! CSV result tables and plot series.
//!
//! `results.csv` starts with one `#` metadata line carrying the schema
//! version; the header row below it only changes together with that version.
//! Numbers use Rust's shortest round-trip scientific form, so a value read
//! back parses to the identical `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lasernet_core::linalg::Matrix;
use lasernet_core::link::RateModel;
use lasernet_core::sweep::{LensMode, Placement, PointResult, SweepRow};

pub const SCHEMA_VERSION: u32 = 1;

pub const RESULTS_HEADER: [&str; 9] = [
    "waist_m",
    "lens",
    "seed_count",
    "sum_rate_bps",
    "sum_rate_std",
    "ee_bpj",
    "ee_std",
    "min_user_snr_db",
    "p_max_w",
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("no sweep results to write")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// Run parameters recorded in the metadata line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInfo {
    pub placement: Placement,
    pub rate_model: RateModel,
    pub users: usize,
}

/// One plot figure: a y column drawn against waist, one series per lens mode.
struct Figure {
    stem: &'static str,
    y_label: &'static str,
    y: fn(&SweepRow) -> f64,
}

const FIGURES: [Figure; 2] = [
    Figure {
        stem: "sum_rate",
        y_label: "sum_rate_bps",
        y: |r| r.sum_rate,
    },
    Figure {
        stem: "energy_efficiency",
        y_label: "ee_bpj",
        y: |r| r.energy_efficiency,
    },
];

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(
    path: &Path,
    comment: Option<&str>,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    if let Some(c) = comment {
        writeln!(file, "# {c}").map_err(io_err(path))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn results_comment(info: &RunInfo) -> String {
    format!(
        "lasernet-results v{SCHEMA_VERSION}; placement={}; rate_model={}; users={}",
        info.placement, info.rate_model, info.users
    )
}

fn result_record(r: &SweepRow) -> Vec<String> {
    vec![
        num(r.waist),
        r.lens.to_string(),
        r.seed_count.to_string(),
        num(r.sum_rate),
        num(r.sum_rate_std),
        num(r.energy_efficiency),
        num(r.energy_efficiency_std),
        num(r.min_user_snr_db),
        num(r.p_max),
    ]
}

/// Writes `results.csv` and two-column series files named
/// `<figure>_lens-<mode>.csv`. Returns the paths in write order. Nothing is
/// created when `rows` is empty.
pub fn emit_outputs(
    rows: &[SweepRow],
    info: &RunInfo,
    dir: &Path,
) -> Result<Vec<PathBuf>, OutputError> {
    if rows.is_empty() {
        return Err(OutputError::Empty);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join("results.csv");
    write_csv(
        &path,
        Some(&results_comment(info)),
        &RESULTS_HEADER,
        rows.iter().map(result_record),
    )?;
    written.push(path);

    for fig in &FIGURES {
        for mode in [LensMode::On, LensMode::Off] {
            let series: Vec<&SweepRow> = rows.iter().filter(|r| r.lens == mode).collect();
            if series.is_empty() {
                continue;
            }
            let path = dir.join(format!("{}_lens-{mode}.csv", fig.stem));
            write_csv(
                &path,
                None,
                &["waist_m", fig.y_label],
                series.iter().map(|r| vec![num(r.waist), num((fig.y)(r))]),
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

fn matrix_records(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|&v| num(v)).collect())
        .collect()
}

fn point_tag(index: usize, p: &PointResult) -> String {
    format!("w{index:03}_lens-{}_seed{}", p.lens, p.seed)
}

/// Channel gains per sweep point: one row per user, one column per AP.
/// `index` is the waist index of the point.
pub fn dump_channel(p: &PointResult, index: usize, dir: &Path) -> Result<PathBuf, OutputError> {
    let h = p.channel.gains();
    let header: Vec<String> = (0..h.cols()).map(|a| format!("ap{a}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = dir.join(format!("channel_{}.csv", point_tag(index, p)));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_csv(
        &path,
        Some(&format!("waist_m={}", num(p.waist))),
        &header,
        matrix_records(h),
    )?;
    Ok(path)
}

/// Precoder weights in W per sweep point: one row per AP, one column per
/// served user.
pub fn dump_precoder(p: &PointResult, index: usize, dir: &Path) -> Result<PathBuf, OutputError> {
    let g = &p.precoder.weights;
    let header: Vec<String> = p.served.iter().map(|u| format!("user{u}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = dir.join(format!("precoder_{}.csv", point_tag(index, p)));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_csv(
        &path,
        Some(&format!(
            "waist_m={}; beta={}",
            num(p.waist),
            num(p.precoder.beta)
        )),
        &header,
        matrix_records(g),
    )?;
    Ok(path)
}
