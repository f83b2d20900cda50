//! Distribution-alignment matrices and the balance factor.
//!
//! The discrepancy between the two domains is measured jointly through a
//! mean part (rank-one matrices `M`) and a covariance part (diagonal plus
//! rank-two matrices `Z`), once for the whole domains (marginal) and once
//! per class over pseudo-labeled sub-domains (conditional). The quadratic
//! form actually minimized is `tr(beta^T K V K beta)` with
//!
//! `V = (1-mu) (M0 + Z0 K K Z0) + mu * sum_c (Mc + Zc K K Zc)`
//!
//! where `mu` trades marginal against conditional alignment and is
//! estimated from proxy A-distances.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::{Error, Result};

/// One mean/covariance matrix pair over a (sub-)domain split, stored in
/// factored form: the mean part is `v v^T` and the covariance part is
/// `diag(d) - a^2 1_s 1_s^T + b^2 1_t 1_t^T` with `a = 1/n_s`, `b = 1/n_t`
/// over the member indices.
#[derive(Debug, Clone)]
pub struct MmcdPair {
    n: usize,
    source_idx: Vec<usize>,
    target_idx: Vec<usize>,
}

impl MmcdPair {
    /// Both index sets must be nonempty and within `0..n`.
    pub fn new(n: usize, source_idx: Vec<usize>, target_idx: Vec<usize>) -> Result<Self> {
        if source_idx.is_empty() || target_idx.is_empty() {
            return Err(Error::EmptyDomain);
        }
        debug_assert!(source_idx.iter().chain(&target_idx).all(|&i| i < n));
        Ok(Self {
            n,
            source_idx,
            target_idx,
        })
    }

    fn coeffs(&self) -> (f64, f64) {
        (
            1.0 / self.source_idx.len() as f64,
            1.0 / self.target_idx.len() as f64,
        )
    }

    /// Mean-difference coefficient vector `v` with `M = v v^T`.
    pub fn mean_vector(&self) -> DVector<f64> {
        let (a, b) = self.coeffs();
        let mut v = DVector::zeros(self.n);
        for &i in &self.source_idx {
            v[i] = a;
        }
        for &i in &self.target_idx {
            v[i] = -b;
        }
        v
    }

    /// Dense mean matrix `M`.
    pub fn m_dense(&self) -> DMatrix<f64> {
        let v = self.mean_vector();
        &v * v.transpose()
    }

    /// Dense covariance matrix `Z`.
    pub fn z_dense(&self) -> DMatrix<f64> {
        let (a, b) = self.coeffs();
        let mut z = DMatrix::zeros(self.n, self.n);
        for &i in &self.source_idx {
            z[(i, i)] = a;
        }
        for &i in &self.target_idx {
            z[(i, i)] = -b;
        }
        for &i in &self.source_idx {
            for &j in &self.source_idx {
                z[(i, j)] -= a * a;
            }
        }
        for &i in &self.target_idx {
            for &j in &self.target_idx {
                z[(i, j)] += b * b;
            }
        }
        z
    }

    /// `Z * G` for an n-column matrix `G`, using the factored form.
    pub fn z_times(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let (a, b) = self.coeffs();
        let mut out = DMatrix::zeros(self.n, g.ncols());
        for &i in &self.source_idx {
            out.row_mut(i).copy_from(&(g.row(i) * a));
        }
        for &i in &self.target_idx {
            out.row_mut(i).copy_from(&(g.row(i) * (-b)));
        }
        // rank-one corrections: -a^2 over source block, +b^2 over target
        let mut src_sum = nalgebra::RowDVector::zeros(g.ncols());
        for &i in &self.source_idx {
            src_sum += g.row(i);
        }
        let mut tgt_sum = nalgebra::RowDVector::zeros(g.ncols());
        for &i in &self.target_idx {
            tgt_sum += g.row(i);
        }
        for &i in &self.source_idx {
            let update = out.row(i) - &src_sum * (a * a);
            out.row_mut(i).copy_from(&update);
        }
        for &i in &self.target_idx {
            let update = out.row(i) + &tgt_sum * (b * b);
            out.row_mut(i).copy_from(&update);
        }
        out
    }

    /// Dense `Z K K Z`, exploiting that `Z` is supported on the member
    /// rows/columns only: the product is `B^T B` with `B = K Z` restricted
    /// to the support columns.
    pub fn zkkz_dense(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        let support: Vec<usize> = self
            .source_idx
            .iter()
            .chain(&self.target_idx)
            .copied()
            .collect();
        let (a, b) = self.coeffs();
        let n_src = self.source_idx.len();
        // B~ columns follow `support` order: source members then target
        let mut b_tilde = DMatrix::zeros(self.n, support.len());
        for (col, &idx) in support.iter().enumerate() {
            let scale = if col < n_src { a } else { -b };
            b_tilde.column_mut(col).copy_from(&(k.column(idx) * scale));
        }
        let k_src: DVector<f64> = self
            .source_idx
            .iter()
            .fold(DVector::zeros(self.n), |acc, &i| acc + k.column(i));
        let k_tgt: DVector<f64> = self
            .target_idx
            .iter()
            .fold(DVector::zeros(self.n), |acc, &i| acc + k.column(i));
        for col in 0..support.len() {
            if col < n_src {
                let update = b_tilde.column(col) - &k_src * (a * a);
                b_tilde.column_mut(col).copy_from(&update);
            } else {
                let update = b_tilde.column(col) + &k_tgt * (b * b);
                b_tilde.column_mut(col).copy_from(&update);
            }
        }
        // explicit transpose so the product takes the fast gemm path
        let small = b_tilde.transpose() * &b_tilde;
        let mut out = DMatrix::zeros(self.n, self.n);
        for (ci, &i) in support.iter().enumerate() {
            for (cj, &j) in support.iter().enumerate() {
                out[(i, j)] = small[(ci, cj)];
            }
        }
        out
    }

    /// Dense contribution `M + Z K K Z` of this pair to `V`.
    pub fn v_part_dense(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        self.m_dense() + self.zkkz_dense(k)
    }

    /// `tr(F M F^T) = ||F v||^2` for a classes-by-samples score matrix —
    /// the squared mean-embedding distance of the induced predictions.
    pub fn mean_discrepancy(&self, fhat: &DMatrix<f64>) -> f64 {
        (fhat * self.mean_vector()).norm_squared()
    }

    /// `||F Z F^T||_F^2` — the squared covariance discrepancy of the
    /// induced predictions.
    pub fn covariance_discrepancy(&self, fhat: &DMatrix<f64>) -> f64 {
        let fz = self.z_times(&fhat.transpose()).transpose() * fhat.transpose();
        fz.norm_squared()
    }
}

/// Marginal pair over the source-first sample layout.
pub fn marginal_pair(n_s: usize, n_t: usize) -> Result<MmcdPair> {
    if n_s == 0 || n_t == 0 {
        return Err(Error::EmptyDomain);
    }
    MmcdPair::new(
        n_s + n_t,
        (0..n_s).collect(),
        (n_s..n_s + n_t).collect(),
    )
}

/// Dense marginal matrices `(M0, Z0)`.
pub fn build_marginal_matrices(n_s: usize, n_t: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let pair = marginal_pair(n_s, n_t)?;
    Ok((pair.m_dense(), pair.z_dense()))
}

/// Per-class conditional matrices plus the class occupancy counts.
/// Classes missing from either domain contribute zero matrices.
#[derive(Debug, Clone)]
pub struct ConditionalMatrices {
    pub mc: Vec<DMatrix<f64>>,
    pub zc: Vec<DMatrix<f64>>,
    pub class_counts: Vec<(usize, usize)>,
}

/// Structured per-class pairs; `None` marks classes with an empty source
/// or target sub-domain.
pub fn conditional_pairs(
    source_y: &[usize],
    pseudo_t: &[usize],
    num_classes: usize,
) -> (Vec<Option<MmcdPair>>, Vec<(usize, usize)>) {
    let n_s = source_y.len();
    let n = n_s + pseudo_t.len();
    let mut pairs = Vec::with_capacity(num_classes);
    let mut counts = Vec::with_capacity(num_classes);
    for c in 0..num_classes {
        let src: Vec<usize> = (0..n_s).filter(|&i| source_y[i] == c).collect();
        let tgt: Vec<usize> = (0..pseudo_t.len())
            .filter(|&i| pseudo_t[i] == c)
            .map(|i| n_s + i)
            .collect();
        counts.push((src.len(), tgt.len()));
        if src.is_empty() || tgt.is_empty() {
            pairs.push(None);
        } else {
            pairs.push(Some(MmcdPair::new(n, src, tgt).expect("nonempty")));
        }
    }
    (pairs, counts)
}

/// Dense conditional matrices for all classes (0-based labels).
pub fn build_conditional_matrices(
    source_y: &[usize],
    pseudo_t: &[usize],
    num_classes: usize,
) -> ConditionalMatrices {
    let n = source_y.len() + pseudo_t.len();
    let (pairs, class_counts) = conditional_pairs(source_y, pseudo_t, num_classes);
    let mut mc = Vec::with_capacity(num_classes);
    let mut zc = Vec::with_capacity(num_classes);
    for pair in &pairs {
        match pair {
            Some(p) => {
                mc.push(p.m_dense());
                zc.push(p.z_dense());
            }
            None => {
                mc.push(DMatrix::zeros(n, n));
                zc.push(DMatrix::zeros(n, n));
            }
        }
    }
    ConditionalMatrices {
        mc,
        zc,
        class_counts,
    }
}

/// Dense `V = (1-mu)(M0 + Z0 K K Z0) + mu sum_c (Mc + Zc K K Zc)` from
/// dense parts. Reference implementation; the solver assembles the same
/// matrix from the factored pairs.
pub fn assemble_v(
    m0: &DMatrix<f64>,
    z0: &DMatrix<f64>,
    mc: &[DMatrix<f64>],
    zc: &[DMatrix<f64>],
    mu: f64,
    k: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    if m0.nrows() != n || z0.nrows() != n || mc.len() != zc.len() {
        return Err(Error::DimensionMismatch(format!(
            "V assembly: K is {n}x{n}, M0 {}x{}, Z0 {}x{}",
            m0.nrows(),
            m0.ncols(),
            z0.nrows(),
            z0.ncols()
        )));
    }
    if mc.iter().chain(zc).any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::DimensionMismatch(
            "conditional matrix with wrong shape".into(),
        ));
    }
    let sandwich = |z: &DMatrix<f64>| {
        let kz = k * z;
        kz.tr_mul(&kz)
    };
    let mut v = (m0 + sandwich(z0)) * (1.0 - mu);
    for (m, z) in mc.iter().zip(zc) {
        v += (m + sandwich(z)) * mu;
    }
    Ok(v)
}

/// Proxy A-distance `2 (1 - 2 eps)` where `eps` is the training error of a
/// ridge-regularized linear discriminator labeling source 0 and target 1,
/// clipped to `[0, 1/2]`. Rows are samples; both domains must be nonempty.
pub fn a_distance(xs: &DMatrix<f64>, xt: &DMatrix<f64>) -> f64 {
    assert!(
        xs.nrows() > 0 && xt.nrows() > 0,
        "a_distance requires nonempty domains"
    );
    assert_eq!(xs.ncols(), xt.ncols(), "feature dimensions must agree");
    let m = xs.nrows() + xt.nrows();
    let d = xs.ncols() + 1; // bias column
    let mut design = DMatrix::zeros(m, d);
    for i in 0..xs.nrows() {
        design.row_mut(i).columns_mut(0, xs.ncols()).copy_from(&xs.row(i));
        design[(i, d - 1)] = 1.0;
    }
    for i in 0..xt.nrows() {
        let r = xs.nrows() + i;
        design.row_mut(r).columns_mut(0, xt.ncols()).copy_from(&xt.row(i));
        design[(r, d - 1)] = 1.0;
    }
    let labels = DVector::from_fn(m, |i, _| if i < xs.nrows() { 0.0 } else { 1.0 });

    const RIDGE: f64 = 1e-3;
    let scores = if d <= m {
        // primal: w = (X^T X + r I)^{-1} X^T y
        let mut gram = design.transpose() * &design;
        for i in 0..d {
            gram[(i, i)] += RIDGE;
        }
        let rhs = design.transpose() * &labels;
        let w = solve_spd(gram, rhs);
        &design * w
    } else {
        // dual: w = X^T (X X^T + r I)^{-1} y, scores = X w
        let mut gram = &design * design.transpose();
        for i in 0..m {
            gram[(i, i)] += RIDGE;
        }
        let alpha = solve_spd(gram, labels.clone());
        &design * (design.transpose() * &alpha)
    };

    let errors = (0..m)
        .filter(|&i| {
            let predicted_target = scores[i] >= 0.5;
            predicted_target != (labels[i] == 1.0)
        })
        .count();
    let eps = (errors as f64 / m as f64).clamp(0.0, 0.5);
    2.0 * (1.0 - 2.0 * eps)
}

fn solve_spd(gram: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    match Cholesky::new(gram.clone()) {
        Some(chol) => chol.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .unwrap_or_else(|| DVector::zeros(rhs.len())),
    }
}

/// Balance factor `mu = d_M / (d_M + sum_c d_c)` over classes with both
/// sub-domains nonempty, defaulting to 1/2 when every distance vanishes.
pub fn estimate_mu(
    xs: &DMatrix<f64>,
    xt: &DMatrix<f64>,
    source_y: &[usize],
    pseudo_t: &[usize],
    num_classes: usize,
) -> f64 {
    let d_marginal = a_distance(xs, xt);
    estimate_mu_with_marginal(d_marginal, xs, xt, source_y, pseudo_t, num_classes)
}

/// Same as [`estimate_mu`] with the (pseudo-label independent) marginal
/// distance supplied by the caller, so iterative solvers can reuse it.
pub fn estimate_mu_with_marginal(
    d_marginal: f64,
    xs: &DMatrix<f64>,
    xt: &DMatrix<f64>,
    source_y: &[usize],
    pseudo_t: &[usize],
    num_classes: usize,
) -> f64 {
    let mut conditional_sum = 0.0;
    for c in 0..num_classes {
        let src: Vec<usize> = (0..source_y.len()).filter(|&i| source_y[i] == c).collect();
        let tgt: Vec<usize> = (0..pseudo_t.len()).filter(|&i| pseudo_t[i] == c).collect();
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let xs_c = select_rows(xs, &src);
        let xt_c = select_rows(xt, &tgt);
        conditional_sum += a_distance(&xs_c, &xt_c);
    }
    let denom = d_marginal + conditional_sum;
    if denom < 1e-12 {
        return 0.5;
    }
    (d_marginal / denom).clamp(0.0, 1.0)
}

pub(crate) fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), m.ncols());
    for (r, &i) in rows.iter().enumerate() {
        out.row_mut(r).copy_from(&m.row(i));
    }
    out
}
