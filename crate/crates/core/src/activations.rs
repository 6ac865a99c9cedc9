//! Scalar activation functions on `[-1, 1]`.
//!
//! An [`ActivationSpec`] is the dimension-free description used in configs and
//! on the command line (`relu`, `swish`, `wendland0:zeta=1.2`, ...). Building it
//! for an ambient dimension yields an [`Activation`], which carries its bound
//! `C = max |γ|` and a Lipschitz estimate `L` on `[-1, 1]`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs this far outside `[-1, 1]` are rejected; closer ones are clamped.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Points on the grid used for `C` and `L`.
pub const BOUND_GRID: usize = 100_001;

/// Minimum number of samples in a tabulated activation.
pub const MIN_TABLE_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Swish,
    Wendland0,
    Wendland2,
    Tabulated,
}

impl ActivationKind {
    pub fn is_wendland(self) -> bool {
        matches!(self, ActivationKind::Wendland0 | ActivationKind::Wendland2)
    }
}

/// Piecewise-linear activation sampled on a grid covering `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    z: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < MIN_TABLE_POINTS {
            return Err(Error::Config(format!(
                "tabulated activation needs at least {MIN_TABLE_POINTS} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(z, v)| !z.is_finite() || !v.is_finite()) {
            return Err(Error::NonFinite("activation table".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("activation table has repeated abscissae".into()));
        }
        let (lo, hi) = (points[0].0, points[points.len() - 1].0);
        if lo > -1.0 + DOMAIN_TOL || hi < 1.0 - DOMAIN_TOL {
            return Err(Error::Config(format!(
                "activation table must cover [-1, 1], covers [{lo}, {hi}]"
            )));
        }
        let (z, values) = points.into_iter().unzip();
        Ok(Table { z, values })
    }

    /// Samples `f` on `n` equispaced points of `[-1, 1]`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = n.max(2);
        let pts = (0..n)
            .map(|i| {
                let z = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                (z, f(z))
            })
            .collect();
        Table::new(pts)
    }

    /// Reads a two-column `z,value` CSV (header optional).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut pts = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse {
                    row,
                    column: "0".into(),
                    message: "expected two columns z,value".into(),
                });
            }
            let parse = |col: usize| -> Option<f64> { rec[col].parse::<f64>().ok() };
            match (parse(0), parse(1)) {
                (Some(z), Some(v)) => pts.push((z, v)),
                // A non-numeric first row is a header.
                _ if row == 0 => continue,
                (None, _) => {
                    return Err(Error::Parse {
                        row,
                        column: "0".into(),
                        message: format!("not a number: {:?}", &rec[0]),
                    })
                }
                (_, None) => {
                    return Err(Error::Parse {
                        row,
                        column: "1".into(),
                        message: format!("not a number: {:?}", &rec[1]),
                    })
                }
            }
        }
        Table::new(pts)
    }

    fn eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z <= self.z[0] {
            return self.values[0];
        }
        if z >= self.z[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.z.partition_point(|&t| t <= z);
        let lo = hi - 1;
        let w = (z - self.z[lo]) / (self.z[hi] - self.z[lo]);
        self.values[lo] + w * (self.values[hi] - self.values[lo])
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Dimension-free activation description, as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub zeta: f64,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<PathBuf>,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind) -> Self {
        ActivationSpec {
            kind,
            zeta: std::f64::consts::SQRT_2,
            scale: 1.0,
            table_path: None,
        }
    }

    pub fn relu() -> Self {
        Self::new(ActivationKind::Relu)
    }
    pub fn swish() -> Self {
        Self::new(ActivationKind::Swish)
    }
    pub fn wendland0() -> Self {
        Self::new(ActivationKind::Wendland0)
    }
    pub fn wendland2() -> Self {
        Self::new(ActivationKind::Wendland2)
    }

    /// Builds the activation for data in dimension `d`.
    pub fn build(&self, d: usize) -> Result<Activation> {
        let act = match self.kind {
            ActivationKind::Relu => Activation::relu(),
            ActivationKind::Swish => Activation::swish(),
            ActivationKind::Wendland0 => Activation::wendland0(d, self.zeta)?,
            ActivationKind::Wendland2 => Activation::wendland2(d, self.zeta)?,
            ActivationKind::Tabulated => {
                let path = self.table_path.as_ref().ok_or_else(|| {
                    Error::Config("tabulated activation without a table path".into())
                })?;
                Activation::tabulated(Table::from_csv(path)?)
            }
        };
        if self.scale == 1.0 {
            Ok(act)
        } else {
            act.scale(self.scale)
        }
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActivationKind::Relu => write!(f, "relu")?,
            ActivationKind::Swish => write!(f, "swish")?,
            ActivationKind::Wendland0 => write!(f, "wendland0")?,
            ActivationKind::Wendland2 => write!(f, "wendland2")?,
            ActivationKind::Tabulated => write!(
                f,
                "tabulated:{}",
                self.table_path
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default()
            )?,
        }
        if self.kind.is_wendland() && self.zeta != std::f64::consts::SQRT_2 {
            write!(f, ":zeta={}", self.zeta)?;
        }
        if self.scale != 1.0 {
            write!(f, ":scale={}", self.scale)?;
        }
        Ok(())
    }
}

impl FromStr for ActivationSpec {
    type Err = Error;

    /// `relu | swish | wendland0 | wendland2 | tabulated:<path>`, each
    /// optionally followed by `:zeta=<float>` and/or `:scale=<float>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut spec = match head.as_str() {
            "relu" => Self::relu(),
            "swish" => Self::swish(),
            "wendland0" => Self::wendland0(),
            "wendland2" => Self::wendland2(),
            "tabulated" => {
                let path = parts
                    .next()
                    .filter(|p| !p.is_empty())
                    .ok_or_else(|| Error::Config("tabulated:<path> requires a path".into()))?;
                let mut spec = Self::new(ActivationKind::Tabulated);
                spec.table_path = Some(PathBuf::from(path));
                spec
            }
            other => return Err(Error::Config(format!("unknown activation {other:?}"))),
        };
        for opt in parts {
            let (key, value) = opt
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed activation option {opt:?}")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Config(format!("option {key} is not a number: {value:?}")))?;
            match key {
                "zeta" if spec.kind.is_wendland() => spec.zeta = value,
                "scale" => spec.scale = value,
                _ => return Err(Error::Config(format!("unsupported activation option {key:?}"))),
            }
        }
        if !(spec.zeta > 0.0 && spec.zeta.is_finite()) {
            return Err(Error::Domain(format!("zeta must be positive, got {}", spec.zeta)));
        }
        if !(spec.scale > 0.0 && spec.scale.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {}", spec.scale)));
        }
        Ok(spec)
    }
}

/// A scalar activation γ ready to evaluate, with its constants on `[-1, 1]`.
///
/// Immutable after construction; cloning shares the table.
#[derive(Debug, Clone)]
pub struct Activation {
    kind: ActivationKind,
    d: Option<usize>,
    zeta: f64,
    /// Wendland exponent ℓ.
    ell: i32,
    scale: f64,
    table: Option<Arc<Table>>,
    bound_c: f64,
    lipschitz_l: f64,
}

impl Activation {
    fn finish(mut self) -> Self {
        let (c, l) = grid_constants(&self);
        self.bound_c = c;
        self.lipschitz_l = l;
        self
    }

    fn bare(kind: ActivationKind) -> Self {
        Activation {
            kind,
            d: None,
            zeta: std::f64::consts::SQRT_2,
            ell: 0,
            scale: 1.0,
            table: None,
            bound_c: f64::NAN,
            lipschitz_l: f64::NAN,
        }
    }

    pub fn relu() -> Self {
        let mut a = Self::bare(ActivationKind::Relu);
        a.bound_c = 1.0;
        a.lipschitz_l = 1.0;
        a
    }

    pub fn swish() -> Self {
        // Monotone on [-1, 1], so both constants sit at z = 1.
        let mut a = Self::bare(ActivationKind::Swish);
        a.bound_c = swish(1.0);
        let s = sigmoid(1.0);
        a.lipschitz_l = s + s * (1.0 - s);
        a
    }

    /// `γ(z) = (1 - r)_+^ℓ`, `r = sqrt(2 - 2z)/ζ`, `ℓ = ⌊d/2⌋ + 1`.
    pub fn wendland0(d: usize, zeta: f64) -> Result<Self> {
        check_wendland_args(d, zeta)?;
        let mut a = Self::bare(ActivationKind::Wendland0);
        a.d = Some(d);
        a.zeta = zeta;
        a.ell = (d / 2) as i32 + 1;
        Ok(a.finish())
    }

    /// `γ(z) = (1 - r)_+^{ℓ+2} [(ℓ²+4ℓ+3) r² + (3ℓ+6) r + 3]`, `ℓ = ⌊d/2⌋ + 3`.
    pub fn wendland2(d: usize, zeta: f64) -> Result<Self> {
        check_wendland_args(d, zeta)?;
        let mut a = Self::bare(ActivationKind::Wendland2);
        a.d = Some(d);
        a.zeta = zeta;
        a.ell = (d / 2) as i32 + 3;
        Ok(a.finish())
    }

    pub fn tabulated(table: Table) -> Self {
        let mut a = Self::bare(ActivationKind::Tabulated);
        a.table = Some(Arc::new(table));
        a.finish()
    }

    /// `z ↦ p·γ(z)`.
    pub fn scale(&self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {p}")));
        }
        let mut a = self.clone();
        a.scale *= p;
        a.bound_c *= p;
        a.lipschitz_l *= p;
        Ok(a)
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }
    pub fn dim(&self) -> Option<usize> {
        self.d
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    /// Wendland exponent ℓ (0 for other kinds).
    pub fn ell(&self) -> i32 {
        self.ell
    }
    pub fn scale_factor(&self) -> f64 {
        self.scale
    }
    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }
    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_l
    }

    /// γ(z) for `z ∈ [-1, 1]`; values within [`DOMAIN_TOL`] outside are clamped.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !z.is_finite() || z < -1.0 - DOMAIN_TOL || z > 1.0 + DOMAIN_TOL {
            return Err(Error::Domain(format!("activation argument {z} outside [-1, 1]")));
        }
        Ok(self.eval_unchecked(z.clamp(-1.0, 1.0)))
    }

    /// γ on the real line, for pre-activations that may leave `[-1, 1]`
    /// (Gaussian weights). Wendland kinds use `r = sqrt(max(2 - 2z, 0))/ζ`.
    #[inline]
    pub fn eval_unchecked(&self, z: f64) -> f64 {
        let v = match self.kind {
            ActivationKind::Relu => z.max(0.0),
            ActivationKind::Swish => swish(z),
            ActivationKind::Wendland0 => {
                let r = wendland_r(z, self.zeta);
                if r <= 1.0 {
                    (1.0 - r).powi(self.ell)
                } else {
                    0.0
                }
            }
            ActivationKind::Wendland2 => {
                let r = wendland_r(z, self.zeta);
                if r <= 1.0 {
                    let l = f64::from(self.ell);
                    (1.0 - r).powi(self.ell + 2)
                        * ((l * l + 4.0 * l + 3.0) * r * r + (3.0 * l + 6.0) * r + 3.0)
                } else {
                    0.0
                }
            }
            ActivationKind::Tabulated => self.table.as_ref().map_or(f64::NAN, |t| t.eval(z)),
        };
        self.scale * v
    }

    /// Recomputes `C` by grid search plus local refinement.
    pub fn compute_bound_c(&self) -> f64 {
        match self.kind {
            ActivationKind::Relu | ActivationKind::Swish => self.eval_unchecked(1.0),
            _ => grid_constants(self).0,
        }
    }
}

fn check_wendland_args(d: usize, zeta: f64) -> Result<()> {
    if d < 3 {
        return Err(Error::Domain(format!("Wendland activations need d >= 3, got {d}")));
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::Domain(format!("zeta must be positive, got {zeta}")));
    }
    Ok(())
}

#[inline]
fn wendland_r(z: f64, zeta: f64) -> f64 {
    (2.0 - 2.0 * z).max(0.0).sqrt() / zeta
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
fn swish(z: f64) -> f64 {
    z * sigmoid(z)
}

/// `(max |γ|, max secant slope)` over a dense grid of `[-1, 1]`, with the
/// maximizer of `|γ|` polished by golden-section search between its grid
/// neighbours.
fn grid_constants(act: &Activation) -> (f64, f64) {
    let n = BOUND_GRID;
    let h = 2.0 / (n - 1) as f64;
    let z = |i: usize| if i == n - 1 { 1.0 } else { -1.0 + i as f64 * h };
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut lip = 0.0f64;
    let mut prev = act.eval_unchecked(-1.0);
    for i in 0..n {
        let v = act.eval_unchecked(z(i));
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
        if i > 0 {
            lip = lip.max((v - prev).abs() / (z(i) - z(i - 1)));
        }
        prev = v;
    }
    let lo = z(best.0.saturating_sub(1));
    let hi = z((best.0 + 1).min(n - 1));
    let refined = golden_max(|t| act.eval_unchecked(t).abs(), lo, hi);
    (best.1.max(refined), lip)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}
