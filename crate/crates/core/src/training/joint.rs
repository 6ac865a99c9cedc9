//! Joint training of `(W, α)` with momentum SGD, tracking the condition
//! number of `γ(WᵀX)` after every epoch.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::activations::{Activation, ActivationKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::features::{sample_weights, WeightDistribution};
use crate::linalg::SpectralReport;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl std::str::FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" | "32" => Ok(Precision::F32),
            "f64" | "64" => Ok(Precision::F64),
            _ => Err(Error::Config(format!("unknown precision {s:?}, expected f32 or f64"))),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl Precision {
    #[inline]
    fn round(self, v: f64) -> f64 {
        match self {
            Precision::F32 => v as f32 as f64,
            Precision::F64 => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointHyper {
    pub batch: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr: f64,
    /// Multiplies the learning rate after each epoch.
    pub lr_decay: f64,
    pub epochs: usize,
    pub precision: Precision,
}

impl Default for JointHyper {
    fn default() -> Self {
        JointHyper {
            batch: 10,
            momentum: 0.9,
            weight_decay: 1e-5,
            lr: 0.1,
            lr_decay: 0.99,
            epochs: 50,
            precision: Precision::F32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// `σ_max/σ_min` of `γ(WᵀX)`.
    pub kappa: f64,
    /// Mean squared error over the whole dataset.
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct JointTrace {
    pub records: Vec<EpochRecord>,
    pub w: DMatrix<f64>,
    pub alpha: DVector<f64>,
}

impl JointTrace {
    pub fn initial_kappa(&self) -> f64 {
        self.records[0].kappa
    }
    pub fn final_kappa(&self) -> f64 {
        self.records[self.records.len() - 1].kappa
    }
}

/// `γ'(z)`; the ReLU subgradient at 0 is 0, other non-closed-form kinds use a
/// central difference.
fn slope(act: &Activation, z: f64) -> f64 {
    match act.kind() {
        ActivationKind::Relu => {
            if z > 0.0 {
                act.scale_factor()
            } else {
                0.0
            }
        }
        ActivationKind::Swish => {
            let s = 1.0 / (1.0 + (-z).exp());
            act.scale_factor() * (s + z * s * (1.0 - s))
        }
        _ => {
            let h = 1e-6;
            (act.eval_unchecked(z + h) - act.eval_unchecked(z - h)) / (2.0 * h)
        }
    }
}

/// Condition number of `γ(WᵀX)` and full-data MSE.
fn diagnostics(x: &DMatrix<f64>, y: &DVector<f64>, w: &DMatrix<f64>, alpha: &DVector<f64>, act: &Activation) -> Result<(f64, f64)> {
    let m = w.ncols() as f64;
    let mut g = x * w;
    g.apply(|v| *v = act.eval_unchecked(*v));
    let pred = &g * alpha / m.sqrt();
    let loss = (pred - y).norm_squared() / y.len() as f64;
    let (n, mm) = g.shape();
    let rep = if n <= mm {
        SpectralReport::of_symmetric(&(&g * g.transpose()))?
    } else {
        SpectralReport::of_symmetric(&(g.transpose() * &g))?
    };
    let kappa = if rep.singular { f64::INFINITY } else { rep.kappa.sqrt() };
    Ok((kappa, loss))
}

/// Minimizes the mean squared error of `x ↦ γ(xᵀW)α/√m` over mini-batches.
pub fn joint_train(x: &Dataset, y: &DVector<f64>, act: &Activation, m: usize, hyper: &JointHyper, seed: u64) -> Result<JointTrace> {
    let (n, d) = (x.n(), x.dim());
    if m == 0 || hyper.batch == 0 {
        return Err(Error::Config("width and batch size must be positive".into()));
    }
    if y.len() != n {
        return Err(Error::Config(format!("{} labels for {n} points", y.len())));
    }
    if !(hyper.lr >= 0.0 && hyper.lr.is_finite()) {
        return Err(Error::Config(format!("learning rate must be finite and nonnegative, got {}", hyper.lr)));
    }
    let p = hyper.precision;
    let xm = x.points().map(|v| p.round(v));
    let yv = y.map(|v| p.round(v));
    let mut w = sample_weights(d, m, WeightDistribution::UniformSphere, seed)?.w.map(|v| p.round(v));
    let mut alpha = DVector::zeros(m);
    let mut buf_w = DMatrix::zeros(d, m);
    let mut buf_a = DVector::zeros(m);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle = rng::stream(rng::splitmix64(seed ^ 0x6A6F_696E_7400));
    let inv_sqrt_m = p.round(1.0 / (m as f64).sqrt());

    let (kappa, loss) = diagnostics(&xm, &yv, &w, &alpha, act)?;
    let mut records = vec![EpochRecord { epoch: 0, kappa, loss }];
    let mut lr = hyper.lr;
    let mut pre = vec![0.0; m];
    let mut act_v = vec![0.0; m];
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut shuffle);
        for batch in order.chunks(hyper.batch) {
            let bsz = batch.len() as f64;
            let mut grad_w = DMatrix::<f64>::zeros(d, m);
            let mut grad_a = DVector::<f64>::zeros(m);
            for &i in batch {
                let xi = xm.row(i);
                for k in 0..m {
                    pre[k] = p.round(xi.iter().zip(w.column(k).iter()).map(|(a, b)| a * b).sum::<f64>());
                    act_v[k] = p.round(act.eval_unchecked(pre[k]));
                }
                let out = p.round(act_v.iter().zip(alpha.iter()).map(|(a, b)| a * b).sum::<f64>() * inv_sqrt_m);
                // d/d(out) of the batch-mean squared error.
                let r = p.round(2.0 * (out - yv[i]) / bsz);
                for k in 0..m {
                    grad_a[k] += r * act_v[k] * inv_sqrt_m;
                    let s = r * alpha[k] * slope(act, pre[k]) * inv_sqrt_m;
                    if s != 0.0 {
                        for (gw, xv) in grad_w.column_mut(k).iter_mut().zip(xi.iter()) {
                            *gw += s * xv;
                        }
                    }
                }
            }
            for k in 0..m {
                let g = p.round(grad_a[k] + hyper.weight_decay * alpha[k]);
                buf_a[k] = p.round(hyper.momentum * buf_a[k] + g);
                alpha[k] = p.round(alpha[k] - lr * buf_a[k]);
            }
            for ((wv, bv), gv) in w.iter_mut().zip(buf_w.iter_mut()).zip(grad_w.iter()) {
                let g = p.round(gv + hyper.weight_decay * *wv);
                *bv = p.round(hyper.momentum * *bv + g);
                *wv = p.round(*wv - lr * *bv);
            }
        }
        lr *= hyper.lr_decay;
        let (kappa, loss) = diagnostics(&xm, &yv, &w, &alpha, act)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "joint-training loss at epoch {epoch} (learning rate {lr:e}); try a smaller learning rate"
            )));
        }
        records.push(EpochRecord { epoch, kappa, loss });
    }
    Ok(JointTrace { records, w, alpha })
}
