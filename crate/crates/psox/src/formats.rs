//! CSV, text and binary file formats.
//!
//! Every CSV starts with a fixed header. Readers check the header column by
//! column and name the first offending column on mismatch. Floats are
//! written in the shortest form that parses back to the same value.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use psox_core::bbob::SampleSet;
use psox_core::bbob::{SampleProvenance, SamplingMethod};
use psox_core::config::{HyperParams, TopologyKind, PARAM_NAMES};
use psox_core::ela::{ElaVector, FEATURE_NAMES};
use psox_core::explain::{ShapTable, SURROGATE_FEATURES};
use psox_core::learner::ValidationReport;
use psox_core::metrics::{PerfStats, RunRecord};
use psox_core::topology::NeighborhoodGraph;

use crate::error::{Error, Result};

pub const RUNS_HEADER: [&str; 16] = [
    "topology",
    "fid",
    "iid",
    "dim",
    "rep",
    "config_index",
    "seed",
    "c1",
    "c2",
    "w",
    "n_particles",
    "k",
    "p",
    "r",
    "aocc",
    "final_regret",
];
pub const FAILURES_HEADER: [&str; 8] = ["topology", "fid", "iid", "dim", "rep", "config_index", "seed", "error"];
pub const STATS_HEADER: [&str; 11] =
    ["topology", "fid", "dim", "sbm", "sbs", "abm", "abs", "all_mean", "all_std", "sb_config", "ab_config"];
pub const SHAP_HEADER: [&str; 7] = ["topology", "fid", "dim", "feature", "feature_value", "shap_value", "record_id"];
pub const SURROGATE_HEADER: [&str; 5] = ["topology", "fid", "dim", "n_runs", "r2_train"];
pub const REPORT_HEADER: [&str; 7] =
    ["scheme", "fold", "method", "predicted_config", "achieved_aocc", "sbm", "aocc_loss"];
pub const TRAJECTORY_HEADER: [&str; 2] = ["iteration", "best_so_far"];
pub const GRAPH_HEADER: [&str; 2] = ["particle", "neighbor"];
pub const CONFIG_BLOCK_HEADER: [&str; 8] = ["c1", "c2", "w", "n_particles", "k", "p", "r", "topology"];
pub const ELA_KEY_COLUMNS: [&str; 4] = ["fid", "iid", "dim", "sample_seed"];
pub const ELA_WARNINGS_HEADER: [&str; 5] = ["fid", "iid", "dim", "sample_seed", "warning"];

/// Magic bytes of the packed trajectory block.
pub const TRAJECTORY_MAGIC: [u8; 4] = *b"PSOT";

/// Shortest round-trip decimal; `NaN`, `inf` and `-inf` for the rest.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

pub fn ela_header() -> Vec<&'static str> {
    ELA_KEY_COLUMNS.iter().chain(FEATURE_NAMES.iter()).copied().collect()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `header` and `rows` to `path`, replacing it.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Encodes one CSV line, newline included.
pub fn csv_line(fields: &[String]) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    w.into_inner().expect("writing to memory")
}

/// Parses CSV text whose first record must equal `header`.
pub fn parse_table(text: &str, header: &[&str], what: &str) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = rdr.records();
    let head = match records.next() {
        Some(r) => r?,
        None => return Err(Error::arg(format!("{what}: empty file, expected header {}", header.join(",")))),
    };
    check_header(&head, header, what)?;
    let mut out = Vec::new();
    for (i, r) in records.enumerate() {
        let r = r?;
        if r.len() != header.len() {
            return Err(Error::arg(format!("{what}: row {} has {} fields, expected {}", i + 1, r.len(), header.len())));
        }
        out.push(r);
    }
    Ok(out)
}

fn check_header(head: &csv::StringRecord, header: &[&str], what: &str) -> Result<()> {
    for (i, want) in header.iter().enumerate() {
        match head.get(i) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::arg(format!("{what}: column {} is '{got}', expected '{want}'", i + 1)));
            }
            None => return Err(Error::arg(format!("{what}: missing column '{want}'"))),
        }
    }
    if head.len() > header.len() {
        return Err(Error::arg(format!("{what}: unexpected column '{}'", &head[header.len()])));
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path).and_then(|mut f| f.read_to_string(&mut s)).map_err(|e| Error::io(path, e))?;
    Ok(s)
}

pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    parse_table(&read_text(path)?, header, &path.display().to_string())
}

/// Typed access to the fields of one record.
pub struct Fields<'a> {
    rec: &'a csv::StringRecord,
    header: &'a [&'a str],
    row: usize,
}

impl<'a> Fields<'a> {
    pub fn new(rec: &'a csv::StringRecord, header: &'a [&'a str], row: usize) -> Self {
        Fields { rec, header, row }
    }

    pub fn str(&self, col: usize) -> &'a str {
        &self.rec[col]
    }

    pub fn parse<T: std::str::FromStr>(&self, col: usize) -> Result<T> {
        let raw = &self.rec[col];
        raw.parse().map_err(|_| {
            Error::arg(format!("row {}: column '{}' has unparsable value '{raw}'", self.row, self.header[col]))
        })
    }

    pub fn topology(&self, col: usize) -> Result<TopologyKind> {
        self.str(col).parse().map_err(|e| Error::arg(format!("row {}: column '{}': {e}", self.row, self.header[col])))
    }
}

pub fn run_record_fields(r: &RunRecord) -> Vec<String> {
    let c = &r.config;
    vec![
        r.topology.as_str().into(),
        r.fid.to_string(),
        r.iid.to_string(),
        r.dim.to_string(),
        r.rep.to_string(),
        r.config_index.to_string(),
        r.seed.to_string(),
        fmt_f64(c.c1),
        fmt_f64(c.c2),
        fmt_f64(c.w),
        c.n_particles.to_string(),
        c.k.to_string(),
        c.p.to_string(),
        c.r.to_string(),
        fmt_f64(r.aocc),
        fmt_f64(r.final_regret),
    ]
}

pub fn parse_run_record(rec: &csv::StringRecord, row: usize) -> Result<RunRecord> {
    let f = Fields::new(rec, &RUNS_HEADER, row);
    Ok(RunRecord {
        topology: f.topology(0)?,
        fid: f.parse(1)?,
        iid: f.parse(2)?,
        dim: f.parse(3)?,
        rep: f.parse(4)?,
        config_index: f.parse(5)?,
        seed: f.parse(6)?,
        config: HyperParams {
            c1: f.parse(7)?,
            c2: f.parse(8)?,
            w: f.parse(9)?,
            n_particles: f.parse(10)?,
            k: f.parse(11)?,
            p: f.parse(12)?,
            r: f.parse(13)?,
        },
        aocc: f.parse(14)?,
        final_regret: f.parse(15)?,
    })
}

pub fn write_runs(path: &Path, runs: &[RunRecord]) -> Result<()> {
    write_csv(path, &RUNS_HEADER, runs.iter().map(run_record_fields))
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>> {
    let recs = read_table(path, &RUNS_HEADER)?;
    recs.iter()
        .enumerate()
        .map(|(i, r)| parse_run_record(r, i + 1).map_err(|e| Error::arg(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn stats_fields(key: (TopologyKind, u8, usize), s: &PerfStats) -> Vec<String> {
    vec![
        key.0.as_str().into(),
        key.1.to_string(),
        key.2.to_string(),
        fmt_f64(s.sbm),
        fmt_f64(s.sbs),
        fmt_f64(s.abm),
        fmt_f64(s.abs),
        fmt_f64(s.all_mean),
        fmt_f64(s.all_std),
        s.single_best_config.to_kv(),
        s.avg_best_config.to_kv(),
    ]
}

pub fn write_stats(path: &Path, table: &[((TopologyKind, u8, usize), PerfStats)]) -> Result<()> {
    write_csv(path, &STATS_HEADER, table.iter().map(|(k, s)| stats_fields(*k, s)))
}

/// SHAP rows of one surrogate; `ids[i]` is the run id of input record `i`.
pub fn shap_rows(topology: TopologyKind, fid: u8, dim: usize, table: &ShapTable, ids: &[usize]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for row in &table.rows {
        for (j, name) in SURROGATE_FEATURES.iter().enumerate() {
            out.push(vec![
                topology.as_str().into(),
                fid.to_string(),
                dim.to_string(),
                (*name).into(),
                fmt_f64(row.feature_values[j]),
                fmt_f64(row.shap_values[j]),
                ids[row.record_id].to_string(),
            ]);
        }
    }
    out
}

pub fn report_rows(report: &ValidationReport) -> Vec<Vec<String>> {
    report
        .folds
        .iter()
        .map(|f| {
            vec![
                report.scheme.as_str().into(),
                f.fold.to_string(),
                f.method.as_str().into(),
                f.predicted_config(),
                fmt_f64(f.achieved()),
                fmt_f64(f.sbm()),
                fmt_f64(f.aocc_loss()),
            ]
        })
        .collect()
}

pub fn ela_fields(v: &ElaVector) -> Result<Vec<String>> {
    let p = v.provenance.ok_or_else(|| Error::arg("feature vector without provenance"))?;
    let mut row = vec![p.fid.to_string(), p.iid.to_string(), p.dim.to_string(), p.sample_seed.to_string()];
    row.extend(v.values.iter().map(|x| fmt_f64(*x)));
    Ok(row)
}

pub fn write_ela(path: &Path, rows: &[ElaVector]) -> Result<()> {
    let fields = rows.iter().map(ela_fields).collect::<Result<Vec<_>>>()?;
    write_csv(path, &ela_header(), fields)
}

/// Reads a feature table. The sampling method is not stored and is
/// reported as Latin hypercube.
pub fn read_ela(path: &Path) -> Result<Vec<ElaVector>> {
    let header = ela_header();
    let recs = read_table(path, &header)?;
    recs.iter()
        .enumerate()
        .map(|(i, r)| {
            let f = Fields::new(r, &header, i + 1);
            let mut values = [0.0; 23];
            for (j, v) in values.iter_mut().enumerate() {
                *v = f.parse(4 + j)?;
            }
            Ok(ElaVector {
                values,
                provenance: Some(SampleProvenance {
                    fid: f.parse(0)?,
                    iid: f.parse(1)?,
                    dim: f.parse(2)?,
                    sample_seed: f.parse(3)?,
                    method: SamplingMethod::LatinHypercube,
                }),
                warnings: Vec::new(),
            })
        })
        .collect()
}

pub fn write_trajectory_csv(path: &Path, best_so_far: &[f64]) -> Result<()> {
    write_csv(
        path,
        &TRAJECTORY_HEADER,
        best_so_far.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt_f64(*v)]),
    )
}

/// Packed trajectory: `PSOT`, `u32` value count, `u32` budget, then the
/// values as `f64`, all little-endian.
pub fn encode_trajectory(values: &[f64], budget: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * values.len());
    out.extend_from_slice(&TRAJECTORY_MAGIC);
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    out.extend_from_slice(&budget.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_trajectory`]: `(values, budget)`.
pub fn decode_trajectory(bytes: &[u8]) -> Result<(Vec<f64>, u32)> {
    if bytes.len() < 12 || bytes[..4] != TRAJECTORY_MAGIC {
        return Err(Error::integrity("not a packed trajectory"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let n = word(4) as usize;
    let budget = word(8);
    if bytes.len() != 12 + 8 * n {
        return Err(Error::integrity(format!("packed trajectory declares {n} values but holds {} bytes", bytes.len())));
    }
    let values = bytes[12..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((values, budget))
}

/// `x1..xd,y` with 17 significant digits.
pub fn write_sample_set<W: Write>(w: W, s: &SampleSet) -> io::Result<()> {
    let mut w = csv_writer(w);
    let mut header: Vec<String> = (1..=s.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (row, y) in s.x.iter_rows().zip(&s.y) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        rec.push(format!("{y:.16e}"));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn write_graph<W: Write>(w: W, g: &NeighborhoodGraph) -> io::Result<()> {
    let mut w = csv_writer(w);
    w.write_record(GRAPH_HEADER)?;
    for (i, j) in g.edges() {
        w.write_record([i.to_string(), j.to_string()])?;
    }
    w.flush()
}

pub fn config_block_fields(c: &HyperParams, topology: TopologyKind) -> Vec<String> {
    vec![
        fmt_f64(c.c1),
        fmt_f64(c.c2),
        fmt_f64(c.w),
        c.n_particles.to_string(),
        c.k.to_string(),
        c.p.to_string(),
        c.r.to_string(),
        topology.as_str().into(),
    ]
}

/// Parses a configuration block; row order is the configuration index.
pub fn parse_config_block(text: &str, what: &str) -> Result<Vec<(HyperParams, TopologyKind)>> {
    parse_table(text, &CONFIG_BLOCK_HEADER, what)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let f = Fields::new(r, &CONFIG_BLOCK_HEADER, i + 1);
            let mut c = HyperParams { c1: 0.0, c2: 0.0, w: 0.0, n_particles: 0, k: 0, p: 0, r: 0 };
            for (j, name) in PARAM_NAMES.iter().enumerate() {
                let p = psox_core::config::Param::parse(name).expect("known parameter");
                let v: f64 = f.parse(j)?;
                c.set(p, v);
            }
            Ok((c, f.topology(7)?))
        })
        .collect()
}
