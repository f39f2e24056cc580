//! Datasets: libsvm and CSV readers, min-max scaling, k-fold splits and the
//! synthetic generators used in the experiments.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{DankError, Result};

/// Dense samples with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub feature_names: Option<Vec<String>>,
    /// Where the data came from (a path, `stdin` or a generator name).
    pub source: String,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, source: impl Into<String>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(DankError::Shape(format!("{} rows but {} targets", x.nrows(), y.len())));
        }
        if x.nrows() == 0 {
            return Err(DankError::Data("dataset has no rows".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(DankError::Data("dataset contains non-finite values".into()));
        }
        Ok(Dataset {
            x,
            y,
            feature_names: None,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.y[i])),
            feature_names: self.feature_names.clone(),
            source: self.source.clone(),
        }
    }

    /// Labels as `+-1`. Labels in `{0, 1}` are mapped to `{-1, +1}` and the
    /// second return value is `true`.
    pub fn binary_labels(&self) -> Result<(DVector<f64>, bool)> {
        if self.y.iter().all(|&v| v == 1.0 || v == -1.0) {
            return Ok((self.y.clone(), false));
        }
        if self.y.iter().all(|&v| v == 0.0 || v == 1.0) {
            return Ok((self.y.map(|v| if v == 1.0 { 1.0 } else { -1.0 }), true));
        }
        let bad = self.y.iter().find(|&&v| v != 1.0 && v != -1.0 && v != 0.0).copied();
        Err(DankError::Data(format!(
            "classification needs labels in {{-1, +1}} or {{0, 1}}, found {}",
            bad.unwrap_or(f64::NAN)
        )))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> DankError {
    DankError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_finite(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} '{tok}' is not finite")));
    }
    Ok(v)
}

/// Reads `<label> <index>:<value> ...` lines with 1-based ascending indices.
/// Missing indices are zero; blank lines and `#` comments are skipped.
pub fn parse_libsvm(reader: impl BufRead, source: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let label = parse_finite(toks.next().unwrap_or_default(), lineno, "label")?;
        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in toks {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index '{idx}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, format!("feature index {idx} does not ascend after {last}")));
            }
            last = idx;
            row.push((idx - 1, parse_finite(val, lineno, "feature value")?));
        }
        dim = dim.max(last);
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(DankError::Data(format!("{source}: no samples")));
    }
    let mut x = DMatrix::zeros(rows.len(), dim);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            x[(i, j)] = v;
        }
    }
    Dataset::new(x, DVector::from_vec(labels), source)
}

/// Writes libsvm lines, omitting zero entries. Values use 17 significant
/// digits so a round trip is exact.
pub fn write_libsvm(data: &Dataset, mut out: impl Write) -> Result<()> {
    for i in 0..data.len() {
        write!(out, "{}", fmt_exact(data.y[i]))?;
        for j in 0..data.dim() {
            let v = data.x[(i, j)];
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, fmt_exact(v))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_exact(v: f64) -> String {
    format!("{v:?}")
}

/// Reads comma-separated rows. A first row with any non-numeric field is a
/// header. The target sits in `label_column` (0-based), the last column when
/// `None`.
pub fn parse_csv(reader: impl Read, label_column: Option<usize>, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut header: Option<Vec<String>> = None;
    let mut x_rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    let mut width = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(k + 1);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cols = rec.len();
        if cols < 2 {
            return Err(parse_err(line, "need at least one feature column and a label column"));
        }
        if width.is_none() && header.is_none() && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(rec.iter().map(str::to_string).collect());
            width = Some(cols);
            continue;
        }
        match width {
            Some(w) if w != cols => {
                return Err(parse_err(line, format!("row has {cols} fields, expected {w}")));
            }
            _ => width = Some(cols),
        }
        let lc = label_column.unwrap_or(cols - 1);
        if lc >= cols {
            return Err(parse_err(line, format!("label column {} is out of range", lc + 1)));
        }
        let mut row = Vec::with_capacity(cols - 1);
        for (j, f) in rec.iter().enumerate() {
            let v = parse_finite(f, line, if j == lc { "label" } else { "feature value" })?;
            if j == lc {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        x_rows.push(row);
    }
    if x_rows.is_empty() {
        return Err(DankError::Data(format!("{source}: no samples")));
    }
    let d = x_rows[0].len();
    let x = DMatrix::from_fn(x_rows.len(), d, |i, j| x_rows[i][j]);
    let mut ds = Dataset::new(x, DVector::from_vec(y), source)?;
    if let Some(mut h) = header {
        let lc = label_column.unwrap_or(h.len() - 1);
        h.remove(lc);
        ds.feature_names = Some(h);
    }
    Ok(ds)
}

/// On-disk formats understood by [`load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Libsvm,
    Csv { label_column: Option<usize> },
}

impl Format {
    /// CSV for `.csv` paths, libsvm otherwise.
    pub fn from_path(path: &str, label_column: Option<usize>) -> Format {
        if path.to_ascii_lowercase().ends_with(".csv") {
            Format::Csv { label_column }
        } else {
            Format::Libsvm
        }
    }
}

/// Reads a dataset from a file, or from standard input when `path` is `-`.
pub fn load(path: &str, format: Format) -> Result<Dataset> {
    let reader: Box<dyn BufRead> = if path == "-" {
        Box::new(std::io::BufReader::new(std::io::stdin()))
    } else {
        let f = std::fs::File::open(Path::new(path))
            .map_err(|e| DankError::Data(format!("cannot open {path}: {e}")))?;
        Box::new(std::io::BufReader::new(f))
    };
    let source = if path == "-" { "stdin" } else { path };
    match format {
        Format::Libsvm => parse_libsvm(reader, source),
        Format::Csv { label_column } => parse_csv(reader, label_column, source),
    }
}

/// Per-feature min-max scaling to `[0, 1]`, fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &DMatrix<f64>) -> Result<Scaler> {
        if x.nrows() == 0 {
            return Err(DankError::Data("cannot fit a scaler on zero rows".into()));
        }
        let min = x.column_iter().map(|c| c.min()).collect();
        let max = x.column_iter().map(|c| c.max()).collect();
        Ok(Scaler { min, max })
    }

    /// The identity map on `d` features.
    pub fn identity(d: usize) -> Scaler {
        Scaler {
            min: vec![0.0; d],
            max: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    fn check(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(DankError::Shape(format!(
                "scaler was fitted on {} features, input has {}",
                self.dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// `(x - min) / (max - min)`; constant features map to 0. Test data may
    /// land outside `[0, 1]`.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            let span = self.max[j] - self.min[j];
            if span > 0.0 {
                (x[(i, j)] - self.min[j]) / span
            } else {
                0.0
            }
        }))
    }

    /// Inverse of [`Scaler::apply`]; constant features come back as their value.
    pub fn inverse(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            self.min[j] + x[(i, j)] * (self.max[j] - self.min[j])
        }))
    }
}

/// Shuffled `k`-fold split of `0..n`; fold sizes differ by at most one.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(DankError::Parameter(format!("need 2 <= folds <= n, got {k} folds for {n} samples")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    Ok(folds)
}

/// Indices outside `fold`, in ascending order.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in fold {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

/// Smoothed staircase with step height `s`, period `w` and smoothness `a`.
pub fn step_value(s: f64, w: f64, a: f64, x: f64) -> f64 {
    let fl = (x / w).floor();
    ((a * x / w - a * fl - a / 2.0).tanh() / (2.0 * (a / 2.0).tanh()) + 0.5 + fl) * s
}

/// The staircase evaluated at `grid`, one feature per row.
pub fn gen_step(s: f64, w: f64, a: f64, grid: &[f64]) -> Result<Dataset> {
    if !(w > 0.0) || !(a > 0.0) {
        return Err(DankError::Parameter(format!("step period and smoothness must be positive (w = {w}, a = {a})")));
    }
    let x = DMatrix::from_column_slice(grid.len(), 1, grid);
    let y = DVector::from_iterator(grid.len(), grid.iter().map(|&g| step_value(s, w, a, g)));
    Dataset::new(x, y, format!("step(s={s}, w={w}, a={a})"))
}

/// `n` points drawn uniformly from `[lo, hi]`, sorted.
pub fn uniform_grid(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub fn linspace(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Two-dimensional test surface.
pub fn surface_value(u: f64, v: f64) -> f64 {
    let (p, q) = (u - 0.5, v - 0.5);
    let g1 = p.powi(4) - 10.0 * p * p * q * q + 5.0 * q.powi(4);
    42.659 * (0.1 + p * (g1 + 0.05))
}

/// The surface on a `side x side` grid over `[-0.5, 0.5]^2` (400 points for
/// `side = 20`).
pub fn gen_2d(side: usize) -> Result<Dataset> {
    if side == 0 {
        return Err(DankError::Parameter("grid side must be positive".into()));
    }
    let g = linspace(side, -0.5, 0.5);
    let n = side * side;
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { g[i / side] } else { g[i % side] });
    let y = DVector::from_fn(n, |i, _| surface_value(x[(i, 0)], x[(i, 1)]));
    Dataset::new(x, y, format!("surface({side}x{side})"))
}

/// Two interleaved noisy arcs with balanced `+-1` labels (even rows `+1`).
pub fn gen_two_class_toy(n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(DankError::Parameter("the toy set needs at least 2 points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.12).expect("valid normal");
    let mut x = DMatrix::zeros(n, 2);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let t = rng.random_range(0.0..std::f64::consts::PI);
        let (px, py, label) = if i % 2 == 0 {
            (t.cos(), t.sin(), 1.0)
        } else {
            (1.0 - t.cos(), 0.5 - t.sin(), -1.0)
        };
        x[(i, 0)] = px + noise.sample(&mut rng);
        x[(i, 1)] = py + noise.sample(&mut rng);
        y[i] = label;
    }
    Dataset::new(x, y, format!("two-arc toy (n={n}, seed={seed})"))
}

/// Isotropic Gaussian blobs; row `i` comes from blob `i % centers.len()`.
/// Labels are `+1` when the first coordinate of the sample exceeds its
/// blob centre's, so every blob holds both classes.
pub fn gen_blobs(n: usize, centers: &[Vec<f64>], spread: f64, seed: u64) -> Result<Dataset> {
    if centers.is_empty() || n == 0 {
        return Err(DankError::Parameter("need at least one centre and one point".into()));
    }
    let d = centers[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).map_err(|e| DankError::Parameter(e.to_string()))?;
    let mut x = DMatrix::zeros(n, d);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let c = &centers[i % centers.len()];
        for j in 0..d {
            x[(i, j)] = c[j] + noise.sample(&mut rng);
        }
        y[i] = if x[(i, 0)] > c[0] { 1.0 } else { -1.0 };
    }
    Dataset::new(x, y, format!("blobs(n={n}, k={}, seed={seed})", centers.len()))
}

/// Two Gaussian classes in `d` dimensions whose means differ by `shift`
/// along every axis; rows alternate `+1`, `-1`.
pub fn gen_gaussian_classes(n: usize, d: usize, shift: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || d == 0 {
        return Err(DankError::Parameter("need n >= 2 and d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let y = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let x = DMatrix::from_fn(n, d, |i, _| y[i] * shift / 2.0 + noise.sample(&mut rng));
    Dataset::new(x, y, format!("gaussian classes(n={n}, d={d}, seed={seed})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn libsvm_basic_rows() {
        let ds = parse_libsvm("+1 1:0.5 3:2\n-1\n".as_bytes(), "t").unwrap();
        assert_eq!(ds.x, DMatrix::from_row_slice(2, 3, &[0.5, 0.0, 2.0, 0.0, 0.0, 0.0]));
        assert_eq!(ds.y, DVector::from_row_slice(&[1.0, -1.0]));
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        let e = parse_libsvm("1 1:0.5\n1 2:x\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 2, .. }), "{e}");
        let e = parse_libsvm("1 3:1 2:1\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 1, .. }));
        let e = parse_libsvm("\n\n1 1:nan\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 3, .. }));
        let e = parse_libsvm("1 0:1\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 1, .. }));
    }

    #[test]
    fn libsvm_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(7, 4, |_, _| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-5.0..5.0) });
        let mut x = x;
        x[(0, 3)] = 1.0; // keep the width
        let y = DVector::from_fn(7, |i, _| i as f64 * 0.37 - 1.0);
        let ds = Dataset::new(x, y, "r").unwrap();
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice(), "r").unwrap();
        assert!((back.x - &ds.x).amax() <= 1e-12);
        assert!((back.y - &ds.y).amax() <= 1e-12);
    }

    #[test]
    fn csv_header_label_column_and_ragged_rows() {
        let ds = parse_csv("a,b,label\n1,2,1\n3,4,-1\n".as_bytes(), None, "c").unwrap();
        assert_eq!(ds.x, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(ds.feature_names.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));

        let ds = parse_csv("1,5,6\n-1,7,8\n".as_bytes(), Some(0), "c").unwrap();
        assert_eq!(ds.y, DVector::from_row_slice(&[1.0, -1.0]));
        assert_eq!(ds.x, DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]));

        let e = parse_csv("1,2,3\n4,5\n".as_bytes(), None, "c").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 2, .. }), "{e}");
        let e = parse_csv("1,2,3\n4,inf,1\n".as_bytes(), None, "c").unwrap_err();
        assert!(matches!(e, DankError::Parse { line: 2, .. }));
    }

    #[test]
    fn zero_one_labels_are_coerced() {
        let ds = Dataset::new(DMatrix::zeros(3, 1), DVector::from_row_slice(&[0.0, 1.0, 0.0]), "z").unwrap();
        let (y, coerced) = ds.binary_labels().unwrap();
        assert!(coerced);
        assert_eq!(y, DVector::from_row_slice(&[-1.0, 1.0, -1.0]));
        let ds = Dataset::new(DMatrix::zeros(2, 1), DVector::from_row_slice(&[0.5, 1.0]), "z").unwrap();
        assert!(ds.binary_labels().is_err());
    }

    #[test]
    fn scaler_range_constant_column_and_inverse() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 7.0, 3.0, 7.0, 2.0, 7.0]);
        let s = Scaler::fit(&x).unwrap();
        let z = s.apply(&x).unwrap();
        assert!(z.column(0).iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(z.column(1).iter().all(|&v| v == 0.0));
        let back = s.inverse(&z).unwrap();
        assert!((back - x).amax() <= 1e-12);
        assert!(s.apply(&DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn kfold_partitions() {
        let folds = kfold(23, 5, 7).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(folds, kfold(23, 5, 7).unwrap());
        assert_ne!(folds, kfold(23, 5, 8).unwrap());
        assert!(kfold(3, 5, 0).is_err());
    }

    #[test]
    fn step_function_anchors() {
        for &(s, w, a) in &[(3.0, 2.0, 0.05), (1.5, 0.7, 4.0)] {
            assert_eq!(step_value(s, w, a, 0.0), 0.0);
            assert_relative_eq!(step_value(s, w, a, w), s, epsilon = 1e-12);
        }
        let grid = linspace(41, -5.0, 5.0);
        let ds = gen_step(3.0, 2.0, 0.05, &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let fl = (x / 2.0).floor();
            let inner = (0.05 * (x / 2.0 - fl) - 0.025).tanh();
            let expect = 3.0 * (fl + 0.5 + inner / (2.0 * 0.025f64.tanh()));
            assert_relative_eq!(ds.y[i], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn surface_anchors_and_symmetry() {
        for v in [-0.5, 0.0, 0.3] {
            assert_relative_eq!(surface_value(0.5, v), 4.2659, epsilon = 1e-12);
        }
        assert_relative_eq!(surface_value(0.0, 0.0), 8.5318, epsilon = 1e-12);
        let ds = gen_2d(20).unwrap();
        assert_eq!(ds.len(), 400);
        let g1 = |u: f64, v: f64| (u - 0.5).powi(4) - 10.0 * (u - 0.5).powi(2) * (v - 0.5).powi(2) + 5.0 * (v - 0.5).powi(4);
        for i in 0..400 {
            let (u, v) = (ds.x[(i, 0)], ds.x[(i, 1)]);
            assert_relative_eq!(g1(u, v), g1(u, 1.0 - v), epsilon = 1e-12);
        }
    }

    #[test]
    fn generators_are_seeded() {
        let a = gen_two_class_toy(50, 4).unwrap();
        assert_eq!(a, gen_two_class_toy(50, 4).unwrap());
        assert_ne!(a.x, gen_two_class_toy(50, 5).unwrap().x);
        assert_eq!(a.y.iter().filter(|&&v| v > 0.0).count(), 25);
    }

    proptest! {
        #[test]
        fn scaled_training_data_in_unit_box(vals in proptest::collection::vec(-1e3f64..1e3, 6..40)) {
            let n = vals.len() / 2;
            let x = DMatrix::from_column_slice(n, 2, &vals[..2 * n]);
            let z = Scaler::fit(&x).unwrap().apply(&x).unwrap();
            prop_assert!(z.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn kfold_covers(n in 2usize..80, k in 2usize..10, seed in 0u64..1000) {
            prop_assume!(k <= n);
            let folds = kfold(n, k, seed).unwrap();
            let mut all = folds.concat();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
