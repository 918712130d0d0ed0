//! Problem data: dense column-major design matrix, response, cached column
//! statistics, file I/O and the correlated-Gaussian synthetic generator.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};

/// Name of the generator recorded in sidecar metadata.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

const RAW_MAGIC: &[u8; 4] = b"LSV1";

/// A Lasso problem `(X, y)` with `X` stored column-major.
///
/// Instances are immutable once built; column norms and `⟨x_j, y⟩` are cached
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    col_norms: Vec<f64>,
    xj_dot_y: Vec<f64>,
}

impl ProblemInstance {
    /// Builds an instance from column-major `x` (length `n * p`) and `y`.
    pub fn from_columns(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Dimension(format!("need n >= 1 and p >= 1, got n={n}, p={p}")));
        }
        if x.len() != n * p {
            return Err(Error::Dimension(format!(
                "X has {} entries, expected n*p = {}",
                x.len(),
                n * p
            )));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!("y has {} entries, X has {n} rows", y.len())));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k % n, col: k / n });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: p });
        }
        let col_norms = (0..p).map(|j| norm2(&x[j * n..(j + 1) * n])).collect();
        let xj_dot_y = (0..p).map(|j| dot(&x[j * n..(j + 1) * n], &y)).collect();
        Ok(Self { n, p, x, y, col_norms, xj_dot_y })
    }

    /// Builds an instance from row-major data.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension(format!(
                    "row {i} has {} values, expected {p}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                x[j * n + i] = *v;
            }
        }
        Self::from_columns(n, p, x, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    /// The whole matrix, column-major.
    pub fn data(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    pub fn xj_dot_y(&self) -> &[f64] {
        &self.xj_dot_y
    }

    pub fn y_norm(&self) -> f64 {
        norm2(&self.y)
    }

    /// Fails with [`Error::ZeroResponse`] when `y = 0`; every screening
    /// operation needs a nonzero response.
    pub fn require_nonzero_response(&self) -> Result<()> {
        if self.y.iter().all(|v| *v == 0.0) {
            Err(Error::ZeroResponse)
        } else {
            Ok(())
        }
    }

    /// `X β` for a full-length coefficient vector.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                crate::linalg::axpy(b, self.column(j), &mut out);
            }
        }
        out
    }

    /// `X^T v`.
    pub fn xt_times(&self, v: &[f64]) -> Vec<f64> {
        (0..self.p).map(|j| dot(self.column(j), v)).collect()
    }

    /// Copy with every nonzero column scaled to unit Euclidean norm.
    pub fn standardized(&self) -> Self {
        let mut x = self.x.clone();
        for j in 0..self.p {
            let norm = self.col_norms[j];
            if norm > 0.0 {
                x[j * self.n..(j + 1) * self.n].iter_mut().for_each(|v| *v /= norm);
            }
        }
        Self::from_columns(self.n, self.p, x, self.y.clone())
            .expect("scaling finite columns keeps them finite")
    }

    /// Writes the raw-f64 format: `LSV1`, u64 n, u64 p (little endian), then X
    /// column-major, then y.
    pub fn save_raw(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(RAW_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.p as u64).to_le_bytes())?;
        for v in self.x.iter().chain(&self.y) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes X as `# n p` followed by `n` comma-separated rows, and y as a
    /// single-column CSV with a `# n` header.
    pub fn save_csv(&self, x_path: &Path, y_path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(x_path)?);
        writeln!(w, "# {} {}", self.n, self.p)?;
        for i in 0..self.n {
            for j in 0..self.p {
                if j > 0 {
                    w.write_all(b",")?;
                }
                // `{:?}` prints the shortest representation that round-trips
                write!(w, "{:?}", self.x[j * self.n + i])?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        let mut w = BufWriter::new(fs::File::create(y_path)?);
        writeln!(w, "# {}", self.n)?;
        for v in &self.y {
            writeln!(w, "{v:?}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// On-disk layouts accepted by [`load_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceFormat {
    /// X in the given file, y in a separate single-column CSV.
    Csv { y_path: PathBuf },
    RawF64,
}

/// Loads an instance and checks that `y ≠ 0`.
pub fn load_instance(path: &Path, format: InstanceFormat) -> Result<ProblemInstance> {
    let inst = match format {
        InstanceFormat::Csv { y_path } => load_csv(path, &y_path)?,
        InstanceFormat::RawF64 => load_raw(path)?,
    };
    inst.require_nonzero_response()?;
    Ok(inst)
}

fn load_raw(path: &Path) -> Result<ProblemInstance> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 20 || &bytes[..4] != RAW_MAGIC {
        return Err(Error::Format("missing LSV1 header".into()));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let p = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let count = n
        .checked_mul(p)
        .and_then(|np| np.checked_add(n))
        .ok_or_else(|| Error::Format(format!("dimensions overflow: n={n}, p={p}")))?;
    let body = &bytes[20..];
    if body.len() != count * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            body.len(),
            count * 8
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>();
    let y = values.split_off(n * p);
    ProblemInstance::from_columns(n, p, values, y)
}

fn parse_header(path: &Path, line: &str, expected: usize) -> Result<Vec<usize>> {
    let bad = |msg: &str| Error::Parse { path: path.to_owned(), line: 1, msg: msg.to_owned() };
    let rest = line.trim().strip_prefix('#').ok_or_else(|| bad("expected '# ...' header"))?;
    let dims = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| bad("header dimensions must be integers")))
        .collect::<Result<Vec<_>>>()?;
    if dims.len() != expected {
        return Err(bad(&format!("header must list {expected} dimension(s)")));
    }
    Ok(dims)
}

fn parse_value(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_owned(),
        line,
        msg: format!("cannot parse {:?} as a number", tok.trim()),
    })
}

fn load_csv(x_path: &Path, y_path: &Path) -> Result<ProblemInstance> {
    let reader = BufReader::new(fs::File::open(x_path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { path: x_path.to_owned(), line: 1, msg: "empty file".into() })??;
    let dims = parse_header(x_path, &header, 2)?;
    let (n, p) = (dims[0], dims[1]);
    let mut x = vec![0.0; n * p];
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = k + 2;
        if rows == n {
            return Err(Error::Dimension(format!("{}: more than {n} data rows", x_path.display())));
        }
        let mut cols = 0;
        for (j, tok) in line.split(',').enumerate() {
            if j >= p {
                return Err(Error::Dimension(format!(
                    "{}:{lineno}: more than {p} values",
                    x_path.display()
                )));
            }
            let v = parse_value(x_path, lineno, tok)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: rows, col: j });
            }
            x[j * n + rows] = v;
            cols += 1;
        }
        if cols != p {
            return Err(Error::Dimension(format!(
                "{}:{lineno}: {cols} values, expected {p}",
                x_path.display()
            )));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Dimension(format!(
            "{}: {rows} data rows, header says {n}",
            x_path.display()
        )));
    }

    let reader = BufReader::new(fs::File::open(y_path)?);
    let mut y = Vec::with_capacity(n);
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || (k == 0 && t.starts_with('#')) {
            continue;
        }
        let v = parse_value(y_path, k + 1, t)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { row: y.len(), col: p });
        }
        y.push(v);
    }
    if y.len() != n {
        return Err(Error::Dimension(format!("y has {} entries, X has {n} rows", y.len())));
    }
    ProblemInstance::from_columns(n, p, x, y)
}

/// Parameters of the correlated-Gaussian regression generator
/// `y = X β* + σ ε` with `corr(x_i, x_j) = rho^|i-j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub p_bar: usize,
    pub rho: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidSpec("n and p must be positive".into()));
        }
        if self.p_bar > self.p {
            return Err(Error::InvalidSpec(format!(
                "p_bar = {} exceeds p = {}",
                self.p_bar, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!("rho = {} outside [0, 1)", self.rho)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("sigma = {} must be >= 0", self.sigma)));
        }
        Ok(())
    }
}

/// Output of [`generate_synthetic`]: the instance plus the ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub spec: SyntheticSpec,
    pub instance: ProblemInstance,
    pub true_beta: Vec<f64>,
    /// Sorted indices of the nonzero entries of `true_beta`.
    pub support: Vec<usize>,
}

/// JSON sidecar written next to a generated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticMetadata {
    #[serde(flatten)]
    pub spec: SyntheticSpec,
    pub prng: String,
    pub support: Vec<usize>,
    pub true_beta: Vec<f64>,
    pub standardized: bool,
}

impl SyntheticData {
    pub fn metadata(&self, standardized: bool) -> SyntheticMetadata {
        SyntheticMetadata {
            spec: self.spec.clone(),
            prng: PRNG_NAME.to_owned(),
            support: self.support.clone(),
            true_beta: self.support.iter().map(|&j| self.true_beta[j]).collect(),
            standardized,
        }
    }
}

/// Draws a synthetic instance.
///
/// Each row of `X` follows the AR(1) recursion `z_1 = e_1`,
/// `z_i = rho z_{i-1} + sqrt(1 - rho²) e_i`, which gives unit variances and
/// `cov(z_i, z_j) = rho^|i-j|`. The support of `β*` is a uniform `p_bar`-subset
/// and its values are uniform on `[-1, 1]`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let SyntheticSpec { n, p, p_bar, rho, sigma, seed } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut support = index::sample(&mut rng, p, p_bar).into_vec();
    support.sort_unstable();
    let mut true_beta = vec![0.0; p];
    for &j in &support {
        true_beta[j] = rng.random_range(-1.0..=1.0);
    }

    let innov = (1.0 - rho * rho).sqrt();
    let mut x = vec![0.0; n * p];
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            let z = if j == 0 { e } else { rho * prev + innov * e };
            x[j * n + i] = z;
            prev = z;
        }
    }

    let mut y = vec![0.0; n];
    for &j in &support {
        crate::linalg::axpy(true_beta[j], &x[j * n..(j + 1) * n], &mut y);
    }
    for yi in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *yi += sigma * e;
    }

    let instance = ProblemInstance::from_columns(n, p, x, y)?;
    Ok(SyntheticData { spec: spec.clone(), instance, true_beta, support })
}
