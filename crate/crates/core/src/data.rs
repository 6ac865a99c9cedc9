//! Datasets on the unit sphere.
//!
//! Generators for the eight-point ReLU-singular set, uniform sphere samples
//! and the two synthetic recipes, plus a CSV ingestion pipeline
//! (standardize → optional PCA → project onto the sphere).

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng;

/// Unit-norm tolerance for data points.
pub const NORM_TOL: f64 = 1e-12;

/// Minimum pairwise distance for points to count as distinct.
pub const DISTINCT_TOL: f64 = 1e-9;

/// Labelled points on `S^{d-1}`, one point per row of `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: DMatrix<f64>,
    labels: DVector<f64>,
    name: String,
    allow_duplicates: bool,
}

impl Dataset {
    /// Validates unit norms and pairwise distinctness.
    pub fn new(points: DMatrix<f64>, labels: DVector<f64>, name: impl Into<String>) -> Result<Self> {
        Self::build(points, labels, name.into(), false)
    }

    /// Like [`Dataset::new`] but tolerates repeated points.
    pub fn with_duplicates(points: DMatrix<f64>, labels: DVector<f64>, name: impl Into<String>) -> Result<Self> {
        Self::build(points, labels, name.into(), true)
    }

    fn build(points: DMatrix<f64>, labels: DVector<f64>, name: String, allow_duplicates: bool) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::Config("dataset has no points".into()));
        }
        if labels.len() != points.nrows() {
            return Err(Error::Config(format!(
                "{} labels for {} points",
                labels.len(),
                points.nrows()
            )));
        }
        if points.iter().chain(labels.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("dataset {name}")));
        }
        for (i, row) in points.row_iter().enumerate() {
            let norm = row.norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Domain(format!("point {i} has norm {norm}, expected 1")));
            }
        }
        if !allow_duplicates {
            if let Some((i, j, dist)) = closest_pair_below(&points, DISTINCT_TOL) {
                return Err(Error::Domain(format!(
                    "points {i} and {j} are not distinct (distance {dist:e})"
                )));
            }
        }
        Ok(Dataset {
            points,
            labels,
            name,
            allow_duplicates,
        })
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }
    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn allows_duplicates(&self) -> bool {
        self.allow_duplicates
    }
    pub fn n(&self) -> usize {
        self.points.nrows()
    }
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn with_labels(mut self, labels: DVector<f64>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Config(format!("{} labels for {} points", labels.len(), self.n())));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Gram matrix `X Xᵀ` of inner products.
    pub fn inner_products(&self) -> DMatrix<f64> {
        &self.points * self.points.transpose()
    }

    /// Largest singular value of the data matrix.
    pub fn sigma1(&self) -> f64 {
        let g = self.inner_products();
        SymmetricEigen::new(g).eigenvalues.max().max(0.0).sqrt()
    }

    /// Writes `x_0,..,x_{d-1},y`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        let header: Vec<String> = (0..self.dim()).map(|j| format!("x_{j}")).chain(["y".into()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for (row, y) in self.points.row_iter().zip(self.labels.iter()) {
            let mut fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            fields.push(fmt_f64(*y));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Reads a file produced by [`Dataset::write_csv`]; points must already be
    /// on the sphere.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let raw = RawTable::read(path)?;
        let label = raw.column_index("y")?;
        let (features, labels) = raw.split(label);
        let name = path.display().to_string();
        Dataset::with_duplicates(features, labels, name)
    }
}

/// First pair (in sweep order) closer than `tol`. Points are swept along the
/// first coordinate, so only neighbours within `tol` there are compared.
fn closest_pair_below(points: &DMatrix<f64>, tol: f64) -> Option<(usize, usize, f64)> {
    let n = points.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[(a, 0)].total_cmp(&points[(b, 0)]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if points[(j, 0)] - points[(i, 0)] > tol {
                break;
            }
            let dist = (points.row(i) - points.row(j)).norm();
            if dist <= tol {
                return Some((i.min(j), i.max(j), dist));
            }
        }
    }
    None
}

/// `s = 1/√3`, the coordinate magnitude of the bad point set.
pub fn bad_set_s() -> f64 {
    1.0 / 3f64.sqrt()
}

/// Sign patterns of the eight points, in order `x_1..x_8`.
const BAD_SIGNS: [[f64; 3]; 8] = [
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, -1.0, -1.0],
];

/// Null vector of every ReLU feature matrix on the bad set.
pub const BAD_SET_NULL_V: [f64; 8] = [1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0];

/// Null vector of the ReLU indicator matrix `1[w·x_j > 0]` on the bad set.
pub const BAD_SET_NULL_V_TILDE: [f64; 8] = [1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0, 1.0];

/// The eight points `(±s, ±s, ±s, 0, …, 0)` in dimension `d >= 3`, labels zero.
pub fn bad_point_set(d: usize) -> Result<Dataset> {
    if d < 3 {
        return Err(Error::Domain(format!("bad point set needs d >= 3, got {d}")));
    }
    let s = bad_set_s();
    let mut x = DMatrix::zeros(8, d);
    for (i, signs) in BAD_SIGNS.iter().enumerate() {
        for (j, sg) in signs.iter().enumerate() {
            x[(i, j)] = sg * s;
        }
    }
    Dataset::new(x, DVector::zeros(8), format!("bad-set(d={d})"))
}

/// Symbolic inner-product matrix of the bad set: 1 on the diagonal, `±1/3`
/// and `-1` (antipodes) elsewhere.
pub fn bad_set_gram() -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |i, j| {
        let dot: f64 = (0..3).map(|k| BAD_SIGNS[i][k] * BAD_SIGNS[j][k]).sum();
        dot / 3.0
    })
}

/// `n` i.i.d. uniform points on `S^{d-1}` (normalized Gaussian rows), labels zero.
pub fn uniform_sphere(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || d < 2 {
        return Err(Error::Domain(format!("uniform_sphere needs n >= 1 and d >= 2, got n={n}, d={d}")));
    }
    let mut rng = rng::stream(seed);
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng::normal(&mut rng)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (j, a) in v.iter().enumerate() {
                    x[(i, j)] = a / norm;
                }
                break;
            }
        }
    }
    Dataset::new(x, DVector::zeros(n), format!("uniform(n={n},d={d},seed={seed})"))
}

/// 500 uniform points on `S^9` labelled `y_i = x_i · (1, …, 1)`.
pub fn synthetic1(seed: u64) -> Result<Dataset> {
    let ds = uniform_sphere(500, 10, seed)?;
    let labels = DVector::from_iterator(ds.n(), ds.points().row_iter().map(|r| r.sum()));
    let mut ds = ds.with_labels(labels)?;
    ds.name = format!("synthetic1(seed={seed})");
    Ok(ds)
}

/// Bad point set (rows 0..8) followed by 92 uniform points on `S^2`.
/// The bad points and the first 42 uniform points are labelled `+1`, the
/// remaining 50 are `-1`.
pub fn synthetic2(seed: u64) -> Result<Dataset> {
    let bad = bad_point_set(3)?;
    let uni = uniform_sphere(92, 3, seed)?;
    let mut x = DMatrix::zeros(100, 3);
    x.rows_mut(0, 8).copy_from(bad.points());
    x.rows_mut(8, 92).copy_from(uni.points());
    let y = DVector::from_fn(100, |i, _| if i < 50 { 1.0 } else { -1.0 });
    Dataset::new(x, y, format!("synthetic2(seed={seed})"))
}

/// Raw table with the shape of the prostate regression data: 97 rows, 8
/// correlated clinical-style features and a log-scale target.
pub fn prostate_standin_raw(seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let (n, p) = (97, 8);
    let mut rng = rng::stream(seed);
    let latent = DMatrix::from_fn(n, 3, |_, _| rng::normal(&mut rng));
    let mix = DMatrix::from_fn(3, p, |_, _| rng::normal(&mut rng));
    let offsets = [1.35, 3.6, 63.9, 0.1, 0.2, -0.2, 6.8, 24.4];
    let scales = [1.2, 0.4, 7.4, 1.5, 0.4, 1.4, 0.7, 28.2];
    let mut x = &latent * &mix;
    for (j, mut col) in x.column_iter_mut().enumerate() {
        for v in col.iter_mut() {
            *v = offsets[j] + scales[j] * (*v + 0.5 * rng::normal(&mut rng));
        }
    }
    let y = DVector::from_fn(n, |i, _| {
        2.5 + 0.6 * latent[(i, 0)] - 0.3 * latent[(i, 1)] + 0.4 * rng::normal(&mut rng)
    });
    (x, y)
}

/// [`prostate_standin_raw`] standardized and projected onto `S^7`.
pub fn prostate_standin(seed: u64) -> Result<Dataset> {
    let (raw, y) = prostate_standin_raw(seed);
    let names: Vec<String> = (0..raw.ncols()).map(|j| format!("f{j}")).collect();
    let mut opts = IngestOptions::new("y");
    opts.standardize = true;
    let x = sphere_pipeline(raw, &names, &opts)?;
    Dataset::new(x, y, format!("prostate-standin(seed={seed})"))
}

/// Raw table with the shape of the two-class image subset: 250 + 250 rows of
/// 784 pixel intensities in `[0, 1]`, labels `+1` then `-1`.
pub fn fashion_standin_raw(seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let (per_class, p) = (250, 784);
    let mut rng = rng::stream(seed);
    let protos: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..p).map(|_| 0.5 + 0.25 * rng::normal(&mut rng)).collect())
        .collect();
    let n = 2 * per_class;
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let proto = &protos[i / per_class];
        let brightness = 1.0 + 0.2 * rng::normal(&mut rng);
        for j in 0..p {
            x[(i, j)] = (brightness * proto[j] + 0.15 * rng::normal(&mut rng)).clamp(0.0, 1.0);
        }
    }
    let y = DVector::from_fn(n, |i, _| if i < per_class { 1.0 } else { -1.0 });
    (x, y)
}

/// [`fashion_standin_raw`] reduced to 10 principal components and projected
/// onto `S^9`.
pub fn fashion_standin(seed: u64) -> Result<Dataset> {
    let (raw, y) = fashion_standin_raw(seed);
    let names: Vec<String> = (0..raw.ncols()).map(|j| format!("px{j}")).collect();
    let mut opts = IngestOptions::new("y");
    opts.pca_dims = Some(10);
    let x = sphere_pipeline(raw, &names, &opts)?;
    Dataset::new(x, y, format!("fashion-standin(seed={seed})"))
}

/// Options for [`ingest_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub label_col: String,
    pub standardize: bool,
    pub pca_dims: Option<usize>,
}

impl IngestOptions {
    pub fn new(label_col: impl Into<String>) -> Self {
        IngestOptions {
            label_col: label_col.into(),
            standardize: false,
            pca_dims: None,
        }
    }
}

/// Numeric table with a header row.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub header: Vec<String>,
    pub values: DMatrix<f64>,
}

impl RawTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() {
            return Err(Error::Parse {
                row: 0,
                column: String::new(),
                message: "missing header row".into(),
            });
        }
        let mut data = Vec::new();
        let mut rows = 0;
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    row: r + 1,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: header[c].clone(),
                    message: format!("not a number: {cell:?}"),
                })?;
                data.push(v);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::Config(format!("{} has no data rows", path.display())));
        }
        let values = DMatrix::from_row_slice(rows, header.len(), &data);
        Ok(RawTable { header, values })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column named {name:?}")))
    }

    /// Splits off the label column.
    pub fn split(&self, label: usize) -> (DMatrix<f64>, DVector<f64>) {
        let labels = self.values.column(label).into_owned();
        let features = self.values.clone().remove_column(label);
        (features, labels)
    }

    pub fn feature_names(&self, label: usize) -> Vec<String> {
        self.header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label)
            .map(|(_, h)| h.clone())
            .collect()
    }
}

/// Reads a numeric CSV and maps its rows onto the unit sphere.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<Dataset> {
    let raw = RawTable::read(path)?;
    let label = raw.column_index(&opts.label_col)?;
    let names = raw.feature_names(label);
    let (features, labels) = raw.split(label);
    let x = sphere_pipeline(features, &names, opts)?;
    let name = format!("csv:{}", path.display());
    let ds = Dataset::with_duplicates(x, labels, name)?;
    if let Some((i, j, _)) = closest_pair_below(ds.points(), DISTINCT_TOL) {
        log::warn!("ingested rows {i} and {j} coincide after projection");
    }
    Ok(ds)
}

/// Standardize (optional) → PCA (optional) → row normalization.
pub fn sphere_pipeline(mut x: DMatrix<f64>, names: &[String], opts: &IngestOptions) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if x.ncols() == 0 {
        return Err(Error::Config("no feature columns".into()));
    }
    if opts.standardize {
        if n < 2 {
            return Err(Error::Config("standardization needs at least two rows".into()));
        }
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sd = var.sqrt();
            if !(sd > 0.0) {
                return Err(Error::Domain(format!(
                    "column {:?} has zero variance",
                    names.get(j).map(String::as_str).unwrap_or("?")
                )));
            }
            col.apply(|v| *v = (*v - mean) / sd);
        }
    }
    if let Some(k) = opts.pca_dims {
        x = pca_project(&x, k)?;
    }
    for (i, mut row) in x.row_iter_mut().enumerate() {
        let norm = row.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain(format!("row {i} has zero norm")));
        }
        row /= norm;
    }
    Ok(x)
}

/// Centers `x` and projects onto the leading `k` principal directions. Each
/// direction's sign is fixed so its largest-magnitude entry is positive.
pub fn pca_project(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (n, p) = x.shape();
    if k == 0 || k > p {
        return Err(Error::Config(format!("pca_dims must be in 1..={p}, got {k}")));
    }
    if n < 2 {
        return Err(Error::Config("PCA needs at least two rows".into()));
    }
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut basis = DMatrix::zeros(p, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
        if pivot < 0.0 {
            v.neg_mut();
        }
        basis.set_column(c, &v);
    }
    Ok(centered * basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bad_set_first_point_and_antipode() {
        let ds = bad_point_set(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(ds.points().row(0).iter().copied().collect::<Vec<_>>(), vec![s, s, s]);
        let g = ds.inner_products();
        assert_relative_eq!(g[(0, 7)], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn bad_set_gram_matches_symbolic_matrix() {
        for d in [3, 5, 10] {
            let ds = bad_point_set(d).unwrap();
            let g = ds.inner_products();
            let sym = bad_set_gram();
            for (a, b) in g.iter().zip(sym.iter()) {
                assert!((a - b).abs() <= 4.0 * f64::EPSILON, "{a} vs {b}");
            }
            assert_eq!(sym[(0, 0)], 1.0);
            assert_eq!(sym[(0, 1)], 1.0 / 3.0);
            assert_eq!(sym[(1, 6)], -1.0);
            for row in ds.points().row_iter() {
                assert_relative_eq!(row.norm(), 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bad_set_signed_sum_vanishes() {
        let ds = bad_point_set(5).unwrap();
        let v = DVector::from_row_slice(&BAD_SET_NULL_V);
        let sum = ds.points().transpose() * v;
        assert!(sum.amax() <= 1e-15);
    }

    #[test]
    fn bad_set_rejects_small_dimension() {
        assert!(matches!(bad_point_set(2), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_sphere_is_reproducible_and_unit() {
        let a = uniform_sphere(50, 4, 11).unwrap();
        let b = uniform_sphere(50, 4, 11).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), uniform_sphere(50, 4, 12).unwrap().points());
        let one = uniform_sphere(1, 3, 0).unwrap();
        assert_relative_eq!(one.points().row(0).norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_sphere_has_zero_mean() {
        let ds = uniform_sphere(100_000, 3, 2024).unwrap();
        let mean = ds.points().row_mean();
        assert!(mean.amax() < 0.02, "{mean}");
    }

    #[test]
    fn synthetic1_labels_are_coordinate_sums() {
        let ds = synthetic1(3).unwrap();
        assert_eq!((ds.n(), ds.dim()), (500, 10));
        for (row, y) in ds.points().row_iter().zip(ds.labels().iter()) {
            assert_eq!(row.sum(), *y);
        }
    }

    #[test]
    fn synthetic2_recipe() {
        let ds = synthetic2(5).unwrap();
        assert_eq!((ds.n(), ds.dim()), (100, 3));
        assert_eq!(ds.labels().iter().filter(|&&y| y == 1.0).count(), 50);
        assert_eq!(ds.labels().iter().filter(|&&y| y == -1.0).count(), 50);
        let bad = bad_point_set(3).unwrap();
        for i in 0..8 {
            assert_eq!(ds.points().row(i), bad.points().row(i));
            assert_eq!(ds.labels()[i], 1.0);
        }
    }

    #[test]
    fn rejects_duplicates_and_off_sphere_points() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!(Dataset::new(x.clone(), DVector::zeros(2), "dup").is_err());
        assert!(Dataset::with_duplicates(x, DVector::zeros(2), "dup").is_ok());
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(Dataset::new(x, DVector::zeros(1), "off").is_err());
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn ingest_normalizes_rows() {
        let f = write_tmp("a,b,label\n1,0,3\n0,2,4\n");
        let ds = ingest_csv(f.path(), &IngestOptions::new("label")).unwrap();
        assert_eq!(ds.points(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        assert_eq!(ds.labels().as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn ingest_pca_of_collinear_points() {
        // Points on the line y = x; centred projections are -4/3, -1/3, 5/3 (times √2).
        let f = write_tmp("u,v,y\n0,0,0\n1,1,0\n3,3,0\n");
        let opts = IngestOptions {
            pca_dims: Some(1),
            ..IngestOptions::new("y")
        };
        let ds = ingest_csv(f.path(), &opts).unwrap();
        let vals: Vec<f64> = ds.points().column(0).iter().copied().collect();
        assert_eq!(vals, vec![-1.0, -1.0, 1.0]);
    }

    #[test]
    fn ingest_errors_name_their_location() {
        let f = write_tmp("a,b,y\n1,x,0\n");
        match ingest_csv(f.path(), &IngestOptions::new("y")) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (1, "b")),
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("a,b,y\n1,5,0\n2,5,1\n");
        let opts = IngestOptions {
            standardize: true,
            ..IngestOptions::new("y")
        };
        let err = ingest_csv(f.path(), &opts).unwrap_err().to_string();
        assert!(err.contains("\"b\""), "{err}");
        let f = write_tmp("a,b,y\n1,5,0\n0,0,1\n");
        let err = ingest_csv(f.path(), &IngestOptions::new("y")).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let f = write_tmp("a,b\n1,5\n");
        assert!(ingest_csv(f.path(), &IngestOptions::new("y")).is_err());
    }

    #[test]
    fn standardized_ingest_is_unit_and_reingest_is_identity() {
        let mut body = String::from("f0,f1,f2,target\n");
        let mut rng = rng::stream(9);
        for _ in 0..40 {
            let r: Vec<f64> = (0..4).map(|_| rng::normal(&mut rng)).collect();
            body.push_str(&format!("{},{},{},{}\n", 10.0 * r[0] + 3.0, 0.1 * r[1], r[2] - 7.0, r[3]));
        }
        let f = write_tmp(&body);
        let opts = IngestOptions {
            standardize: true,
            ..IngestOptions::new("target")
        };
        let ds = ingest_csv(f.path(), &opts).unwrap();
        for row in ds.points().row_iter() {
            assert_relative_eq!(row.norm(), 1.0, epsilon = 1e-14);
        }
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        let f2 = write_tmp(std::str::from_utf8(&out).unwrap());
        let again = ingest_csv(f2.path(), &IngestOptions::new("y")).unwrap();
        for (a, b) in again.points().iter().zip(ds.points().iter()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON, "{a} vs {b}");
        }
        assert_eq!(again.labels(), ds.labels());
        let read = Dataset::read_csv(f2.path()).unwrap();
        assert_eq!(read.points(), ds.points());
    }

    #[test]
    fn standins_have_the_published_shapes() {
        let p = prostate_standin(1).unwrap();
        assert_eq!((p.n(), p.dim()), (97, 8));
        let f = fashion_standin(1).unwrap();
        assert_eq!((f.n(), f.dim()), (500, 10));
        assert_eq!(f.labels().iter().filter(|&&v| v == 1.0).count(), 250);
        for ds in [&p, &f] {
            for row in ds.points().row_iter() {
                assert!((row.norm() - 1.0).abs() <= NORM_TOL);
            }
        }
        assert_eq!(prostate_standin(1).unwrap().points(), p.points());
    }
}
