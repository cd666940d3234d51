//! Randomized DR-versus-MAP benchmark over subspace pairs with a nontrivial
//! intersection.
//!
//! Randomness comes from `ChaCha8Rng` seeded with [`ExperimentConfig::seed`].
//! All pairs and starting points are drawn sequentially from that single
//! stream before any iteration runs, so output does not depend on the number
//! of worker threads.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::iteration::{Method, RunOptions, StoppingRule, SubspacePair, TraceDetail};
use crate::subspace::{Subspace, Vector};

pub const RECORD_HEADER: [&str; 8] = [
    "pair_id",
    "start_id",
    "method",
    "criterion",
    "friedrichs_angle",
    "iterations",
    "final_true_error",
    "capped",
];

pub const MEDIAN_HEADER: [&str; 7] = [
    "method",
    "criterion",
    "bin",
    "angle_lo",
    "angle_hi",
    "count",
    "median_iterations",
];

const DRAW_ATTEMPTS: usize = 10_000;
const PAIR_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub ambient_dim: usize,
    pub num_pairs: usize,
    pub starts_per_pair: usize,
    pub start_norm: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub cap: usize,
    pub dim_u: RangeInclusive<usize>,
    pub dim_v: RangeInclusive<usize>,
    pub intersection_dim: RangeInclusive<usize>,
    /// Equal-width angle bins over `(0, pi/2]` for the medians.
    pub bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ambient_dim: 50,
            num_pairs: 100,
            starts_per_pair: 10,
            start_norm: 10.0,
            epsilon: 1e-3,
            seed: 0,
            cap: 1_000_000,
            dim_u: 5..=25,
            dim_v: 5..=25,
            intersection_dim: 1..=5,
            bins: 32,
        }
    }
}

impl ExperimentConfig {
    /// Defaults with dimension ranges scaled to `R^d`: subspaces of dimension
    /// `d/10..=d/2` sharing `1..=d/10` directions (at least one each).
    pub fn for_dimension(d: usize) -> Self {
        let tenth = (d / 10).max(1);
        Self {
            ambient_dim: d,
            dim_u: tenth..=(d / 2).max(tenth),
            dim_v: tenth..=(d / 2).max(tenth),
            intersection_dim: 1..=tenth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.ambient_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon {} must be positive", self.epsilon));
        }
        if !(self.start_norm > 0.0 && self.start_norm.is_finite()) {
            return bad(format!("start norm {} must be positive", self.start_norm));
        }
        if self.cap == 0 || self.bins == 0 {
            return bad("cap and bin count must be positive".into());
        }
        for (name, r) in [
            ("dim U", &self.dim_u),
            ("dim V", &self.dim_v),
            ("intersection dim", &self.intersection_dim),
        ] {
            if r.is_empty() || *r.start() == 0 {
                return bad(format!("{name} range {r:?} must be nonempty and positive"));
            }
        }
        let s = *self.intersection_dim.start();
        let du = s.max(*self.dim_u.start());
        let dv = s.max(*self.dim_v.start());
        if du > *self.dim_u.end() || dv > *self.dim_v.end() || du + dv - s > self.ambient_dim {
            return bad(format!(
                "no dimensions in U {:?}, V {:?}, intersection {:?} fit in R^{}",
                self.dim_u, self.dim_v, self.intersection_dim, self.ambient_dim
            ));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    TrueError,
    MaxDistance,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::TrueError, Criterion::MaxDistance];

    pub fn rule(self, epsilon: f64) -> StoppingRule {
        match self {
            Criterion::TrueError => StoppingRule::TrueError(epsilon),
            Criterion::MaxDistance => StoppingRule::MaxDistance(epsilon),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::TrueError => "TrueError",
            Criterion::MaxDistance => "MaxDistance",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "TrueError" => Ok(Criterion::TrueError),
            "MaxDistance" => Ok(Criterion::MaxDistance),
            _ => Err(format!("unknown criterion {s:?}")),
        }
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "DR" => Ok(Method::Dr),
        "MAP" => Ok(Method::Map),
        _ => Err(format!("unknown method {s:?}")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub pair_id: usize,
    pub start_id: usize,
    pub method: Method,
    pub criterion: Criterion,
    pub friedrichs_angle: f64,
    pub iterations: usize,
    pub final_true_error: f64,
    pub capped: bool,
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn draw_dims<R: Rng>(config: &ExperimentConfig, rng: &mut R) -> Result<(usize, usize, usize)> {
    for _ in 0..DRAW_ATTEMPTS {
        let s = rng.random_range(config.intersection_dim.clone());
        let u_lo = s.max(*config.dim_u.start());
        let v_lo = s.max(*config.dim_v.start());
        if u_lo > *config.dim_u.end() || v_lo > *config.dim_v.end() {
            continue;
        }
        let du = rng.random_range(u_lo..=*config.dim_u.end());
        let dv = rng.random_range(v_lo..=*config.dim_v.end());
        if du + dv - s <= config.ambient_dim {
            return Ok((du, dv, s));
        }
    }
    Err(Error::InvalidParameter(
        "could not draw admissible dimensions".into(),
    ))
}

/// Draws a shared Gaussian block `W`, extends it independently for `U` and
/// `V`, and rejects the (probability zero) draws whose intersection is larger
/// than `W`.
pub(crate) fn draw_pair<R: Rng>(config: &ExperimentConfig, rng: &mut R) -> Result<SubspacePair> {
    config.validate()?;
    let d = config.ambient_dim;
    for _ in 0..PAIR_ATTEMPTS {
        let (du, dv, s) = draw_dims(config, rng)?;
        let w = gaussian_matrix(d, s, rng);
        let gu = gaussian_matrix(d, du - s, rng);
        let gv = gaussian_matrix(d, dv - s, rng);
        let join = |g: &DMatrix<f64>| {
            DMatrix::from_fn(d, s + g.ncols(), |i, j| {
                if j < s {
                    w[(i, j)]
                } else {
                    g[(i, j - s)]
                }
            })
        };
        let u = Subspace::from_columns(&join(&gu))?;
        let v = Subspace::from_columns(&join(&gv))?;
        if u.dim() != du || v.dim() != dv {
            continue;
        }
        let pair = SubspacePair::new(u, v)?;
        if pair.spectrum().intersection_dim == s {
            return Ok(pair);
        }
    }
    Err(Error::InvalidParameter(
        "random pairs kept degenerating".into(),
    ))
}

pub fn random_subspace_pair<R: Rng>(
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<(Subspace, Subspace)> {
    let pair = draw_pair(config, rng)?;
    Ok((pair.u().clone(), pair.v().clone()))
}

/// Gaussian direction scaled to exactly `norm`.
pub fn random_start<R: Rng>(dim: usize, norm: f64, rng: &mut R) -> Result<Vector> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "start norm {norm} must be positive"
        )));
    }
    loop {
        let g = Vector::from_fn(dim, |_, _| rng.sample(StandardNormal));
        let len = g.norm();
        if len > 0.0 {
            return Ok(g * (norm / len));
        }
    }
}

fn run_instance(
    config: &ExperimentConfig,
    pair: &SubspacePair,
    pair_id: usize,
    start_id: usize,
    x0: &Vector,
) -> Result<Vec<BenchRecord>> {
    let opts = RunOptions {
        cap: config.cap,
        detail: TraceDetail::Final,
    };
    let angle = pair.spectrum().friedrichs_angle();
    let mut out = Vec::with_capacity(4);
    for method in [Method::Dr, Method::Map] {
        for criterion in Criterion::ALL {
            let rule = criterion.rule(config.epsilon);
            let trace = match method {
                Method::Dr => pair.run_dr(x0, rule, &opts)?,
                Method::Map => pair.run_map(x0, rule, &opts)?,
            };
            out.push(BenchRecord {
                pair_id,
                start_id,
                method,
                criterion,
                friedrichs_angle: angle,
                iterations: trace.iterations(),
                final_true_error: trace.last().true_error,
                capped: trace.capped(),
            });
        }
    }
    Ok(out)
}

/// Pairs and starts drawn in benchmark order: pair `i`, then its starts.
pub fn draw_instances(config: &ExperimentConfig) -> Result<Vec<(SubspacePair, Vec<Vector>)>> {
    config.validate()?;
    let mut rng = config.rng();
    (0..config.num_pairs)
        .map(|_| {
            let pair = draw_pair(config, &mut rng)?;
            let starts = (0..config.starts_per_pair)
                .map(|_| random_start(config.ambient_dim, config.start_norm, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            Ok((pair, starts))
        })
        .collect()
}

/// Four records per (pair, start): `{DR, MAP} x {TrueError, MaxDistance}`,
/// ordered by pair, start, method, criterion.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<Vec<BenchRecord>> {
    let instances = draw_instances(config)?;
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|p| (0..config.starts_per_pair).map(move |s| (p, s)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(p, s)| run_instance(config, &instances[p].0, p, s, &instances[p].1[s]))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianRow {
    pub method: Method,
    pub criterion: Criterion,
    pub bin: usize,
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub count: usize,
    pub median_iterations: f64,
}

/// Middle value, or the mean of the two middle values for even counts.
pub fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    })
}

/// Index of the equal-width bin of `(0, pi/2]` holding `angle`.
pub fn angle_bin(angle: f64, bins: usize) -> usize {
    let k = (angle / FRAC_PI_2 * bins as f64).floor();
    (k.max(0.0) as usize).min(bins - 1)
}

/// Median iterations per (method, criterion, angle bin); empty bins omitted.
pub fn aggregate_median(records: &[BenchRecord], bins: usize) -> Result<Vec<MedianRow>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to aggregate".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    let width = FRAC_PI_2 / bins as f64;
    let mut rows = Vec::new();
    for method in [Method::Dr, Method::Map] {
        for criterion in Criterion::ALL {
            let mut buckets = vec![Vec::new(); bins];
            for r in records
                .iter()
                .filter(|r| r.method == method && r.criterion == criterion)
            {
                buckets[angle_bin(r.friedrichs_angle, bins)].push(r.iterations);
            }
            for (bin, bucket) in buckets.iter_mut().enumerate() {
                if let Some(m) = median(bucket) {
                    rows.push(MedianRow {
                        method,
                        criterion,
                        bin,
                        angle_lo: bin as f64 * width,
                        angle_hi: (bin + 1) as f64 * width,
                        count: bucket.len(),
                        median_iterations: m,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: impl fmt::Display) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_records<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.pair_id.to_string(),
            r.start_id.to_string(),
            r.method.to_string(),
            r.criterion.to_string(),
            r.friedrichs_angle.to_string(),
            r.iterations.to_string(),
            r.final_true_error.to_string(),
            r.capped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    write_records(create(path)?, records).map_err(|e| csv_error(path, e))
}

fn parse_record(row: &csv::StringRecord) -> std::result::Result<BenchRecord, String> {
    if row.len() != RECORD_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            RECORD_HEADER.len(),
            row.len()
        ));
    }
    let field = |i: usize| &row[i];
    let num = |i: usize| {
        field(i)
            .parse::<usize>()
            .map_err(|e| format!("{}: {e}", RECORD_HEADER[i]))
    };
    let real = |i: usize| {
        field(i)
            .parse::<f64>()
            .map_err(|e| format!("{}: {e}", RECORD_HEADER[i]))
    };
    Ok(BenchRecord {
        pair_id: num(0)?,
        start_id: num(1)?,
        method: parse_method(field(2))?,
        criterion: field(3).parse()?,
        friedrichs_angle: real(4)?,
        iterations: num(5)?,
        final_true_error: real(6)?,
        capped: field(7).parse().map_err(|e| format!("capped: {e}"))?,
    })
}

/// Inverse of [`write_records`]; `origin` labels errors.
pub fn parse_records<R: Read>(input: R, origin: &Path) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| csv_error(origin, e))?;
    if header.iter().ne(RECORD_HEADER) {
        return Err(csv_error(origin, format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(|e| csv_error(origin, e))?;
            parse_record(&row).map_err(|m| csv_error(origin, format!("row {}: {m}", i + 1)))
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(file, path)
}

pub fn write_medians<W: Write>(out: W, rows: &[MedianRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MEDIAN_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.criterion.to_string(),
            r.bin.to_string(),
            r.angle_lo.to_string(),
            r.angle_hi.to_string(),
            r.count.to_string(),
            r.median_iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_medians_csv(path: &Path, rows: &[MedianRow]) -> Result<()> {
    write_medians(create(path)?, rows).map_err(|e| csv_error(path, e))
}

/// Label used when parsing from memory.
pub fn memory_origin() -> PathBuf {
    PathBuf::from("<memory>")
}
