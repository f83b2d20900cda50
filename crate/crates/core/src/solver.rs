//! The two-stage solver: an alternating closed-form solver for the convex
//! subproblem (confusion weight zero), whose result seeds a full-batch
//! Adam loop over the complete objective. Target pseudo-labels, the
//! balance factor and the alignment matrix `V` are refreshed every outer
//! iteration of both stages.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::alignment::{
    conditional_pairs, estimate_mu_with_marginal, a_distance, marginal_pair, MmcdPair,
};
use crate::data_io::{build_label_structures, LabelMatrix, LabelVector, Preprocess, TaskPair};
use crate::kernel_graph::{
    build_graph, centering_matrix, linear_kernel, median_bandwidth, rbf_kernel, GraphLaplacian,
    KernelKind, KernelMatrix,
};
use crate::objective::{gradient, total_objective, ObjectiveBreakdown, ObjectiveParams};
use crate::{Error, Result};

/// Exponential-decay rates and the denominator offset of the Adam update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamParams {
    pub theta1: f64,
    pub theta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            theta1: 0.9,
            theta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// RBF bandwidth selection: the median pairwise-distance heuristic or a
/// fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Median,
    Fixed(f64),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Median
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Median => s.serialize_str("median"),
            Bandwidth::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bandwidth::Fixed(v)),
            Raw::Text(s) if s == "median" => Ok(Bandwidth::Median),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "unknown bandwidth {s:?}: use \"median\" or a positive number"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
}

/// Base classifier used to produce the very first target pseudo-labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseClassifier {
    #[default]
    Nn1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub params: ObjectiveParams,
    /// Adam outer iterations.
    pub t: usize,
    /// Closed-form initializer outer iterations.
    pub t_v: usize,
    /// Adam learning rate.
    pub alpha: f64,
    pub adam: AdamParams,
    /// Nearest-neighbor count of the cosine affinity graph.
    pub neighbors: usize,
    pub kernel: KernelConfig,
    pub base_classifier: BaseClassifier,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            params: ObjectiveParams::default(),
            t: 100,
            t_v: 10,
            alpha: 0.0005,
            adam: AdamParams::default(),
            neighbors: 10,
            kernel: KernelConfig::default(),
            base_classifier: BaseClassifier::Nn1,
        }
    }
}

impl SolverConfig {
    /// Boundary validation for user-supplied configurations.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.t < 1 || self.t_v < 1 {
            return Err(Error::InvalidDimensions(format!(
                "iteration counts must be at least 1, got t={} t_v={}",
                self.t, self.t_v
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidDimensions(format!(
                "learning rate must be positive, got {}",
                self.alpha
            )));
        }
        let AdamParams {
            theta1,
            theta2,
            epsilon,
        } = self.adam;
        if !(theta1 > 0.0 && theta1 < 1.0 && theta2 > 0.0 && theta2 < 1.0) {
            return Err(Error::InvalidDimensions(format!(
                "adam decay rates must lie in (0,1), got theta1={theta1} theta2={theta2}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidDimensions(format!(
                "adam epsilon must be positive, got {epsilon}"
            )));
        }
        if self.neighbors == 0 {
            return Err(Error::InvalidNeighborCount {
                p: 0,
                n: usize::MAX,
            });
        }
        if let Bandwidth::Fixed(b) = self.kernel.bandwidth {
            if !(b > 0.0) {
                return Err(Error::NonPositiveBandwidth(b));
            }
        }
        Ok(())
    }
}

/// Per-iteration solver telemetry. Each row is a coherent snapshot: the
/// coefficients after the update, the pseudo-labels they induce, and the
/// balance factor / objective recomputed from those labels. The
/// mean/covariance distances use ground-truth target labels when the task
/// carries them (verification only), otherwise the current pseudo-labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iteration: usize,
    pub objective: ObjectiveBreakdown,
    pub mmd_distance: f64,
    pub mmcd_distance: f64,
    pub target_accuracy: Option<f64>,
    pub mu: f64,
}

/// Final coefficients plus the per-iteration history of one solver run.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub beta: DMatrix<f64>,
    pub pseudo_labels: LabelVector,
    pub history: Vec<Diagnostics>,
    pub final_mu: f64,
}

/// Everything derived from a task that stays fixed across solver
/// iterations: preprocessed features, kernel, graph Laplacian, centering
/// and label structures, the marginal alignment part, and the cached
/// marginal A-distance.
pub struct PreparedTask {
    pub features: DMatrix<f64>,
    pub n_source: usize,
    pub n_target: usize,
    pub num_classes: usize,
    pub source_y: Vec<usize>,
    pub truth_t: Option<Vec<usize>>,
    pub kernel: KernelMatrix,
    pub graph: GraphLaplacian,
    pub h: DMatrix<f64>,
    pub labels: LabelMatrix,
    source_features: DMatrix<f64>,
    target_features: DMatrix<f64>,
    marginal: MmcdPair,
    v_marginal: DMatrix<f64>,
    d_marginal: f64,
    truth_conditionals: Option<Vec<Option<MmcdPair>>>,
}

impl PreparedTask {
    pub fn prepare(task: &TaskPair, scheme: Preprocess, config: &SolverConfig) -> Result<Self> {
        let joint = task.preprocessed_features(scheme)?;
        let n_source = task.n_source();
        let n_target = task.n_target();
        let features = joint.into_matrix();

        let kernel = match config.kernel.kind {
            KernelKind::Rbf => {
                let bandwidth = match config.kernel.bandwidth {
                    Bandwidth::Median => {
                        median_bandwidth(&crate::data_io::FeatureMatrix::new(features.clone())?)?
                    }
                    Bandwidth::Fixed(b) => b,
                };
                rbf_kernel(
                    &crate::data_io::FeatureMatrix::new(features.clone())?,
                    bandwidth,
                )?
            }
            KernelKind::Linear => {
                linear_kernel(&crate::data_io::FeatureMatrix::new(features.clone())?)
            }
        };
        let graph = build_graph(
            &crate::data_io::FeatureMatrix::new(features.clone())?,
            config.neighbors,
        )?;
        let h = centering_matrix(n_source + n_target).matrix().clone();
        let labels = build_label_structures(task);

        let source_features = features.rows(0, n_source).into_owned();
        let target_features = features.rows(n_source, n_target).into_owned();
        let marginal = marginal_pair(n_source, n_target)?;
        let v_marginal = marginal.v_part_dense(kernel.matrix());
        let d_marginal = a_distance(&source_features, &target_features);

        let source_y = task.source_y.as_slice().to_vec();
        let truth_t = task
            .target_y_truth
            .as_ref()
            .map(|t| t.as_slice().to_vec());
        let truth_conditionals = truth_t.as_ref().map(|truth| {
            conditional_pairs(&source_y, truth, task.num_classes).0
        });

        Ok(Self {
            features,
            n_source,
            n_target,
            num_classes: task.num_classes,
            source_y,
            truth_t,
            kernel,
            graph,
            h,
            labels,
            source_features,
            target_features,
            marginal,
            v_marginal,
            d_marginal,
            truth_conditionals,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_source + self.n_target
    }

    /// 1-nearest-neighbor pseudo-labels of the target samples in the
    /// preprocessed feature space.
    pub fn nn1_pseudo_labels(&self) -> Vec<usize> {
        nn1_labels(
            &self.features,
            self.n_source,
            self.n_target,
            &self.source_y,
        )
    }
}

/// Euclidean 1NN from source rows to the target rows of `features`;
/// distance ties resolve to the lower source index.
pub fn nn1_labels(
    features: &DMatrix<f64>,
    n_source: usize,
    n_target: usize,
    source_y: &[usize],
) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_target);
    for t in 0..n_target {
        let row = features.row(n_source + t);
        let mut best_d2 = f64::INFINITY;
        let mut best_idx = 0usize;
        for s in 0..n_source {
            let d2 = (row - features.row(s)).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best_idx = s;
            }
        }
        out.push(source_y[best_idx]);
    }
    out
}

/// First pseudo-labels per the configured base classifier.
pub fn initial_pseudo_labels(
    task: &TaskPair,
    scheme: Preprocess,
    base: BaseClassifier,
) -> Result<LabelVector> {
    let joint = task.preprocessed_features(scheme)?.into_matrix();
    let labels = match base {
        BaseClassifier::Nn1 => nn1_labels(
            &joint,
            task.n_source(),
            task.n_target(),
            task.source_y.as_slice(),
        ),
    };
    LabelVector::from_zero_based(labels, task.num_classes)
}

/// Classifier scores `beta^T K` restricted to a column range, plus the
/// argmax labels (ties resolve to the lower class index).
pub fn predict(
    beta: &DMatrix<f64>,
    k: &DMatrix<f64>,
    cols: Range<usize>,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if beta.nrows() != k.nrows() || cols.end > k.ncols() || cols.start > cols.end {
        return Err(Error::DimensionMismatch(format!(
            "predict: beta {}x{}, kernel {}x{}, columns {}..{}",
            beta.nrows(),
            beta.ncols(),
            k.nrows(),
            k.ncols(),
            cols.start,
            cols.end
        )));
    }
    let sub = k.columns(cols.start, cols.end - cols.start);
    let scores = beta.tr_mul(&sub);
    let labels = (0..scores.ncols())
        .map(|j| {
            let col = scores.column(j);
            let mut best = 0usize;
            for c in 1..col.len() {
                if col[c] > col[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    Ok((scores, labels))
}

/// Balance factor, per-class alignment pairs, and the assembled dense `V`
/// for one pseudo-label state.
struct AlignmentState {
    mu: f64,
    v: DMatrix<f64>,
    conditionals: Vec<Option<MmcdPair>>,
}

fn alignment_state(prepared: &PreparedTask, pseudo: &[usize]) -> AlignmentState {
    let mu = estimate_mu_with_marginal(
        prepared.d_marginal,
        &prepared.source_features,
        &prepared.target_features,
        &prepared.source_y,
        pseudo,
        prepared.num_classes,
    );
    let (conditionals, _) = conditional_pairs(&prepared.source_y, pseudo, prepared.num_classes);
    let n = prepared.n_total();
    let mut v_cond = DMatrix::zeros(n, n);
    for pair in conditionals.iter().flatten() {
        v_cond += pair.v_part_dense(prepared.kernel.matrix());
    }
    let v = &prepared.v_marginal * (1.0 - mu) + v_cond * mu;
    AlignmentState {
        mu,
        v,
        conditionals,
    }
}

/// Aggregate mean / mean+covariance discrepancies of the induced scores,
/// using the supplied conditional pairs (truth-based when available).
fn score_discrepancies(
    prepared: &PreparedTask,
    fhat: &DMatrix<f64>,
    conditionals: &[Option<MmcdPair>],
) -> (f64, f64) {
    let mut mmd = prepared.marginal.mean_discrepancy(fhat);
    let mut cov = prepared.marginal.covariance_discrepancy(fhat);
    for pair in conditionals.iter().flatten() {
        mmd += pair.mean_discrepancy(fhat);
        cov += pair.covariance_discrepancy(fhat);
    }
    (mmd, mmd + cov)
}

fn pseudo_accuracy(pseudo: &[usize], truth: &[usize]) -> f64 {
    let hits = pseudo.iter().zip(truth).filter(|(p, t)| p == t).count();
    100.0 * hits as f64 / truth.len() as f64
}

fn diagnostics_row(
    prepared: &PreparedTask,
    beta: &DMatrix<f64>,
    pseudo: &[usize],
    state: &AlignmentState,
    params: &ObjectiveParams,
    iteration: usize,
) -> Result<Diagnostics> {
    let objective = total_objective(
        beta,
        prepared.kernel.matrix(),
        &prepared.labels.y,
        &prepared.labels.a,
        &state.v,
        &prepared.graph.l,
        &prepared.h,
        params,
    )?;
    let fhat = (prepared.kernel.matrix() * beta).transpose();
    let distance_pairs: &[Option<MmcdPair>] = match &prepared.truth_conditionals {
        Some(pairs) => pairs,
        None => &state.conditionals,
    };
    let (mmd, mmcd) = score_discrepancies(prepared, &fhat, distance_pairs);
    let target_accuracy = prepared
        .truth_t
        .as_ref()
        .map(|truth| pseudo_accuracy(pseudo, truth));
    Ok(Diagnostics {
        iteration,
        objective,
        mmd_distance: mmd,
        mmcd_distance: mmcd,
        target_accuracy,
        mu: state.mu,
    })
}

/// Solves `((A + lambda V + rho L + delta H) K + eta I) beta = A Y^T`,
/// adding a tiny diagonal jitter and escalating it tenfold on singularity,
/// up to three retries.
fn closed_form_solve(
    prepared: &PreparedTask,
    state: &AlignmentState,
    params: &ObjectiveParams,
) -> Result<DMatrix<f64>> {
    let n = prepared.n_total();
    let k = prepared.kernel.matrix();
    let mut left = &state.v * params.lambda;
    left += &prepared.graph.l * params.rho;
    left += &prepared.h * params.delta;
    for i in 0..n {
        left[(i, i)] += prepared.labels.a[i];
    }
    let mut system = left * k;
    for i in 0..n {
        system[(i, i)] += params.eta;
    }
    let mut rhs = prepared.labels.y.transpose();
    for i in 0..n {
        if prepared.labels.a[i] == 0.0 {
            rhs.row_mut(i).fill(0.0);
        }
    }

    let diag_mean = system.diagonal().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    let mut jitter = 1e-10 * if diag_mean > 0.0 { diag_mean } else { 1.0 };
    for _attempt in 0..4 {
        let mut jittered = system.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Some(solution) = jittered.lu().solve(&rhs) {
            if solution.iter().all(|v| v.is_finite()) {
                return Ok(solution);
            }
        }
        jitter *= 10.0;
    }
    Err(Error::SingularSystem { retries: 3 })
}

/// Shared alternating loop of the closed-form stage. Returns the final
/// coefficients, pseudo-labels, history, and the alignment state matching
/// the final labels (so the Adam stage can continue from it).
fn run_closed_form_stage(
    prepared: &PreparedTask,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, Vec<usize>, Vec<Diagnostics>, AlignmentState)> {
    let params = config.params.without_confusion();
    let mut pseudo = prepared.nn1_pseudo_labels();
    let mut state = alignment_state(prepared, &pseudo);
    let mut history = Vec::with_capacity(config.t_v);
    let mut beta = DMatrix::zeros(prepared.n_total(), prepared.num_classes);
    for iteration in 1..=config.t_v {
        beta = closed_form_solve(prepared, &state, &params)?;
        let (_, labels) = predict(
            &beta,
            prepared.kernel.matrix(),
            prepared.n_source..prepared.n_total(),
        )?;
        pseudo = labels;
        state = alignment_state(prepared, &pseudo);
        history.push(diagnostics_row(
            prepared, &beta, &pseudo, &state, &params, iteration,
        )?);
    }
    Ok((beta, pseudo, history, state))
}

/// Alternating closed-form solver: refreshes the balance factor, `V` and
/// the pseudo-labels around the linear solve for `t_v` iterations. The
/// confusion weight is treated as zero throughout.
pub fn solve_tfdf_v(prepared: &PreparedTask, config: &SolverConfig) -> Result<SolveOutcome> {
    let (beta, pseudo, history, state) = run_closed_form_stage(prepared, config)?;
    Ok(SolveOutcome {
        beta,
        pseudo_labels: LabelVector::from_zero_based(pseudo, prepared.num_classes)?,
        history,
        final_mu: state.mu,
    })
}

/// Full-batch Adam state over a coefficient matrix.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: DMatrix<f64>,
    v: DMatrix<f64>,
    step: usize,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            m: DMatrix::zeros(rows, cols),
            v: DMatrix::zeros(rows, cols),
            step: 0,
        }
    }

    /// One bias-corrected update; the epsilon offset sits inside the
    /// square root.
    pub fn update(
        &mut self,
        beta: &mut DMatrix<f64>,
        grad: &DMatrix<f64>,
        alpha: f64,
        params: &AdamParams,
    ) {
        self.step += 1;
        let t = self.step as i32;
        let AdamParams {
            theta1,
            theta2,
            epsilon,
        } = *params;
        let m_corr = 1.0 - theta1.powi(t);
        let v_corr = 1.0 - theta2.powi(t);
        for i in 0..grad.nrows() {
            for j in 0..grad.ncols() {
                let g = grad[(i, j)];
                self.m[(i, j)] = theta1 * self.m[(i, j)] + (1.0 - theta1) * g;
                self.v[(i, j)] = theta2 * self.v[(i, j)] + (1.0 - theta2) * g * g;
                let m_hat = self.m[(i, j)] / m_corr;
                let v_hat = self.v[(i, j)] / v_corr;
                beta[(i, j)] -= alpha * m_hat / (v_hat + epsilon).sqrt();
            }
        }
    }

    /// Second-moment estimate, entrywise nonnegative by construction.
    pub fn second_moment(&self) -> &DMatrix<f64> {
        &self.v
    }
}

/// Full solver: closed-form initialization followed by `t` Adam
/// iterations on the complete objective, refreshing pseudo-labels, the
/// balance factor and `V` after every step.
pub fn solve_tfdf(prepared: &PreparedTask, config: &SolverConfig) -> Result<SolveOutcome> {
    let (mut beta, mut pseudo, _init_history, mut state) =
        run_closed_form_stage(prepared, config)?;
    let mut adam = AdamState::new(beta.nrows(), beta.ncols());
    let mut history = Vec::with_capacity(config.t);
    for iteration in 1..=config.t {
        let grad = gradient(
            &beta,
            prepared.kernel.matrix(),
            &prepared.labels.y,
            &prepared.labels.a,
            &state.v,
            &prepared.graph.l,
            &prepared.h,
            &config.params,
        )?;
        adam.update(&mut beta, &grad, config.alpha, &config.adam);
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIterate { iteration });
        }
        let (_, labels) = predict(
            &beta,
            prepared.kernel.matrix(),
            prepared.n_source..prepared.n_total(),
        )?;
        pseudo = labels;
        state = alignment_state(prepared, &pseudo);
        history.push(diagnostics_row(
            prepared,
            &beta,
            &pseudo,
            &state,
            &config.params,
            iteration,
        )?);
    }
    Ok(SolveOutcome {
        beta,
        pseudo_labels: LabelVector::from_zero_based(pseudo, prepared.num_classes)?,
        history,
        final_mu: state.mu,
    })
}
