//! Writer-independent dichotomizer: soft-margin RBF support vector machine
//! trained by sequential minimal optimization with second-order working set
//! selection. Scores are signed geometric distances to the separating
//! hyperplane in kernel space.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dichotomy::DissimilaritySample;
use crate::domain::FeatureMask;
use crate::error::{Error, Result};
use crate::prototype::sq_dist;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
    pub c: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            gamma: 2f64.powi(-11),
            c: 1.0,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Stopping rule of the dual solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Maximal violating pair gap accepted at convergence.
    pub tolerance: f64,
    /// Iteration budget: the solver gives up after `max_passes * n^2` pair
    /// updates on an `n`-sample problem.
    pub max_passes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok((-gamma * sq_dist(a, b)).exp())
}

/// Solution of the C-SVC dual for one training problem.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    /// Maximal violating pair gap at termination.
    pub kkt_gap: f64,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `y'a = 0`, `0 <= a <= C`, with
/// `Q_ij = y_i y_j K_ij`. `kernel` is the dense row-major `n x n` matrix and
/// `labels` are +-1.
pub fn solve_dual(
    kernel: &[f64],
    labels: &[f64],
    c: f64,
    config: &SolverConfig,
) -> Result<DualSolution> {
    let n = labels.len();
    if kernel.len() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            got: kernel.len(),
        });
    }
    if !labels.iter().any(|&y| y > 0.0) || !labels.iter().any(|&y| y < 0.0) {
        return Err(Error::Training("both classes are required".into()));
    }
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = config.max_passes.saturating_mul(n).saturating_mul(n).max(1);

    let mut iterations = 0;
    let kkt_gap = loop {
        // first index: maximal -y_t G_t over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if labels[t] > 0.0 {
                alpha[t] < c
            } else {
                alpha[t] > 0.0
            };
            let v = -labels[t] * grad[t];
            if in_up && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        // second index: largest second-order decrease over I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let in_low = if labels[t] > 0.0 {
                    alpha[t] > 0.0
                } else {
                    alpha[t] < c
                };
                if !in_low {
                    continue;
                }
                let v = labels[t] * grad[t];
                if v >= gmax2 {
                    gmax2 = v;
                }
                let grad_diff = gmax + v;
                if grad_diff > 0.0 {
                    let quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
                    let quad = if quad > 0.0 { quad } else { TAU };
                    let obj = -grad_diff * grad_diff / quad;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let gap = gmax + gmax2;
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if gap >= config.tolerance => (i, j),
            _ => break gap.max(0.0),
        };
        if iterations >= max_iter {
            return Err(Error::Convergence {
                worst_violation: gap,
                reason: format!("iteration budget of {max_iter} pair updates exhausted"),
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        let quad = if quad > 0.0 { quad } else { TAU };
        if labels[i] != labels[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let di = (alpha[i] - old_i) * labels[i];
        let dj = (alpha[j] - old_j) * labels[j];
        for t in 0..n {
            grad[t] += labels[t] * (k(i, t) * di + k(j, t) * dj);
        }
    };

    // bias from free multipliers, else midpoint of the feasible interval
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = labels[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper || at_lower {
            let upper_side = (at_upper && labels[t] < 0.0) || (at_lower && labels[t] > 0.0);
            if upper_side {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(DualSolution {
        alpha,
        bias: -rho,
        iterations,
        kkt_gap,
    })
}

/// Dense RBF Gram matrix of `points`.
pub fn rbf_gram(points: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = points.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in i + 1..n {
            let v = (-gamma * sq_dist(&points[i], &points[j])).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub samples: usize,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub bounded_support_vectors: usize,
    pub free_support_vectors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Support vectors in the masked space, row-major.
    sv_data: Vec<f64>,
    sv_dim: usize,
    /// `alpha_i * y_i` per support vector.
    dual_coefficients: Vec<f64>,
    bias: f64,
    weight_norm: f64,
    params: KernelParams,
    mask: FeatureMask,
    feature_indices: Vec<usize>,
    summary: TrainingSummary,
}

pub fn train(
    samples: &[DissimilaritySample],
    params: KernelParams,
    mask: &FeatureMask,
) -> Result<TrainedModel> {
    train_with(samples, params, mask, &SolverConfig::default())
}

/// Trains on `samples` restricted to the features selected by `mask`.
///
/// Samples are put in a canonical order (label, then lexicographic masked
/// vector) before solving, so the model does not depend on input order.
pub fn train_with(
    samples: &[DissimilaritySample],
    params: KernelParams,
    mask: &FeatureMask,
    solver: &SolverConfig,
) -> Result<TrainedModel> {
    params.validate()?;
    let dim = samples
        .first()
        .map(|s| s.u.len())
        .ok_or_else(|| Error::Training("no samples".into()))?;
    mask.validate(dim)?;
    let feature_indices = mask.indices();

    let mut rows: Vec<(f64, Vec<f64>)> = Vec::with_capacity(samples.len());
    for s in samples {
        if s.u.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: s.u.len(),
            });
        }
        rows.push((
            s.label.sign(),
            feature_indices.iter().map(|&f| s.u[f]).collect(),
        ));
    }
    rows.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let (labels, points): (Vec<f64>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    if !labels.iter().any(|&y| y > 0.0) || !labels.iter().any(|&y| y < 0.0) {
        return Err(Error::Training("training set holds a single class".into()));
    }

    let gram = rbf_gram(&points, params.gamma);
    let sol = solve_dual(&gram, &labels, params.c, solver)?;
    let n = labels.len();

    let sv: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
    let mut w2 = 0.0;
    for &i in &sv {
        for &j in &sv {
            w2 += sol.alpha[i] * sol.alpha[j] * labels[i] * labels[j] * gram[i * n + j];
        }
    }
    let alpha_sum: f64 = sv.iter().map(|&i| sol.alpha[i]).sum();
    if !(w2 > 1e-12 * alpha_sum * alpha_sum) {
        return Err(Error::Convergence {
            worst_violation: sol.kkt_gap,
            reason: format!("degenerate kernel: weight norm^2 {w2:.3e} vanishes"),
        });
    }

    let sv_dim = feature_indices.len();
    let mut sv_data = Vec::with_capacity(sv.len() * sv_dim);
    for &i in &sv {
        sv_data.extend_from_slice(&points[i]);
    }
    let summary = TrainingSummary {
        samples: n,
        iterations: sol.iterations,
        kkt_gap: sol.kkt_gap,
        bounded_support_vectors: sv.iter().filter(|&&i| sol.alpha[i] >= params.c).count(),
        free_support_vectors: sv.iter().filter(|&&i| sol.alpha[i] < params.c).count(),
    };
    Ok(TrainedModel {
        sv_data,
        sv_dim,
        dual_coefficients: sv.iter().map(|&i| sol.alpha[i] * labels[i]).collect(),
        bias: sol.bias,
        weight_norm: w2.sqrt(),
        params,
        mask: mask.clone(),
        feature_indices,
        summary,
    })
}

impl TrainedModel {
    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Kernel-space norm of the weight vector.
    pub fn weight_norm(&self) -> f64 {
        self.weight_norm
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn summary(&self) -> &TrainingSummary {
        &self.summary
    }

    pub fn support_vector_count(&self) -> usize {
        self.dual_coefficients.len()
    }

    pub fn support_vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.sv_data.chunks(self.sv_dim)
    }

    /// Full feature dimension the model expects as input.
    pub fn input_dim(&self) -> usize {
        self.mask.len()
    }

    fn masked_decision(&self, masked: &[f64]) -> f64 {
        let gamma = self.params.gamma;
        self.sv_data
            .chunks_exact(self.sv_dim)
            .zip(&self.dual_coefficients)
            .map(|(sv, &coef)| coef * (-gamma * sq_dist(sv, masked)).exp())
            .sum::<f64>()
            + self.bias
    }

    /// Raw decision value for a full-length dissimilarity vector.
    pub fn decision_value(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: u.len(),
            });
        }
        let masked: Vec<f64> = self.feature_indices.iter().map(|&f| u[f]).collect();
        Ok(self.masked_decision(&masked))
    }

    /// Signed distance of a full-length dissimilarity vector to the separating
    /// hyperplane; the mask is applied internally. Positive means the
    /// within-writer side.
    pub fn signed_distance(&self, u: &[f64]) -> Result<f64> {
        Ok(self.decision_value(u)? / self.weight_norm)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            dim: self.input_dim(),
            mask: self.mask.to_hex(),
            gamma: self.params.gamma,
            c: self.params.c,
            bias: self.bias,
            weight_norm: self.weight_norm,
            support_vectors: self.support_vectors().map(<[f64]>::to_vec).collect(),
            dual_coefficients: self.dual_coefficients.clone(),
            summary: self.summary,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let mask = FeatureMask::from_hex(&file.mask, file.dim)?;
        let params = KernelParams {
            gamma: file.gamma,
            c: file.c,
        };
        params.validate()?;
        let sv_dim = mask.count();
        if file.support_vectors.len() != file.dual_coefficients.len()
            || file.support_vectors.is_empty()
        {
            return Err(Error::Data(
                "support vector and coefficient counts disagree".into(),
            ));
        }
        let mut sv_data = Vec::with_capacity(file.support_vectors.len() * sv_dim);
        for sv in &file.support_vectors {
            if sv.len() != sv_dim {
                return Err(Error::Dimension {
                    expected: sv_dim,
                    got: sv.len(),
                });
            }
            sv_data.extend_from_slice(sv);
        }
        Ok(Self {
            sv_data,
            sv_dim,
            dual_coefficients: file.dual_coefficients,
            bias: file.bias,
            weight_norm: file.weight_norm,
            params,
            feature_indices: mask.indices(),
            mask,
            summary: file.summary,
        })
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        serde_json::to_writer(
            std::io::BufWriter::new(File::create(path)?),
            &self.to_file(),
        )?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_file(serde_json::from_reader(std::io::BufReader::new(
            File::open(path)?,
        ))?)
    }
}

/// On-disk model: support vectors in the masked space, mask as hex bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub mask: String,
    pub gamma: f64,
    pub c: f64,
    pub bias: f64,
    pub weight_norm: f64,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefficients: Vec<f64>,
    pub summary: TrainingSummary,
}
