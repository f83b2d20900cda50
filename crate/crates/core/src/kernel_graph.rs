//! Gram matrices, the centering matrix, and the p-nearest-neighbor cosine
//! graph with its normalized Laplacian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data_io::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Rbf,
    Linear,
}

/// Symmetric positive semi-definite Gram matrix over all samples.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    k: DMatrix<f64>,
    kind: KernelKind,
    bandwidth: Option<f64>,
}

impl KernelMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// RBF bandwidth, absent for linear kernels.
    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }
}

/// Gaussian kernel `K_ij = exp(-||x_i - x_j||^2 / (2 b^2))`. Entries are
/// mirrored from the upper triangle so the result is exactly symmetric
/// with a unit diagonal.
pub fn rbf_kernel(x: &FeatureMatrix, bandwidth: f64) -> Result<KernelMatrix> {
    if !(bandwidth > 0.0) {
        return Err(Error::NonPositiveBandwidth(bandwidth));
    }
    let m = x.as_matrix();
    let n = m.nrows();
    let denom = 2.0 * bandwidth * bandwidth;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let d2 = (m.row(i) - m.row(j)).norm_squared();
            let v = (-d2 / denom).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(KernelMatrix {
        k,
        kind: KernelKind::Rbf,
        bandwidth: Some(bandwidth),
    })
}

/// Linear kernel `K = X X^T`, mirrored to exact symmetry.
pub fn linear_kernel(x: &FeatureMatrix) -> KernelMatrix {
    let m = x.as_matrix();
    let n = m.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = m.row(i).dot(&m.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    KernelMatrix {
        k,
        kind: KernelKind::Linear,
        bandwidth: None,
    }
}

/// Median of all pairwise Euclidean distances over `i < j`; the usual
/// bandwidth heuristic. Even pair counts take the mean of the two middle
/// order statistics.
pub fn median_bandwidth(x: &FeatureMatrix) -> Result<f64> {
    let m = x.as_matrix();
    let n = m.nrows();
    if n < 2 {
        return Err(Error::DegenerateData(
            "need at least 2 samples for the median distance".into(),
        ));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((m.row(i) - m.row(j)).norm());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if median <= 0.0 {
        return Err(Error::DegenerateData(
            "median pairwise distance is zero (all points identical)".into(),
        ));
    }
    Ok(median)
}

/// Centering matrix `H = I - (1/n) 1 1^T`.
#[derive(Debug, Clone)]
pub struct CenteringMatrix {
    h: DMatrix<f64>,
}

impl CenteringMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }
}

pub fn centering_matrix(n: usize) -> CenteringMatrix {
    let frac = 1.0 / n as f64;
    let mut h = DMatrix::from_element(n, n, -frac);
    for i in 0..n {
        h[(i, i)] += 1.0;
    }
    CenteringMatrix { h }
}

/// Symmetric affinity over mutual/one-sided p-nearest cosine neighbors:
/// `W_ij = max(cos(z_i, z_j), 0)` when either sample is among the other's
/// p nearest by cosine similarity, zero otherwise, zero diagonal.
/// Negative cosines are clamped so the normalized Laplacian stays PSD.
/// Similarity ties are broken toward the lower sample index.
pub fn knn_cosine_graph(z: &FeatureMatrix, p: usize) -> Result<DMatrix<f64>> {
    let m = z.as_matrix();
    let n = m.nrows();
    if p == 0 || p >= n {
        return Err(Error::InvalidNeighborCount { p, n });
    }
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let norm = m.row(i).norm();
        if norm == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        norms.push(norm);
    }
    let cos = |i: usize, j: usize| m.row(i).dot(&m.row(j)) / (norms[i] * norms[j]);

    // neighbor[i] = indices of the p most cosine-similar samples to i
    let mut neighbor = vec![Vec::with_capacity(p); n];
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        let sims: Vec<f64> = (0..n).map(|j| if j == i { f64::MIN } else { cos(i, j) }).collect();
        order.sort_by(|&a, &b| {
            sims[b]
                .partial_cmp(&sims[a])
                .unwrap()
                .then_with(|| a.cmp(&b))
        });
        neighbor[i].extend(order.iter().take(p).copied());
    }

    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in &neighbor[i] {
            let value = cos(i, j).max(0.0);
            w[(i, j)] = value;
            w[(j, i)] = value;
        }
    }
    Ok(w)
}

/// Normalized graph Laplacian `L = I - G^{-1/2} W G^{-1/2}` where
/// `G_ii = sum_j W_ij`. Isolated nodes (zero degree) keep an identity row.
#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    pub w: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub degrees: DVector<f64>,
    /// Neighbor count the affinity was built with, when known.
    pub neighbors: Option<usize>,
}

/// Cosine kNN affinity followed by the normalized Laplacian.
pub fn build_graph(z: &FeatureMatrix, p: usize) -> Result<GraphLaplacian> {
    let w = knn_cosine_graph(z, p)?;
    let mut gl = laplacian(&w)?;
    gl.neighbors = Some(p);
    Ok(gl)
}

pub fn laplacian(w: &DMatrix<f64>) -> Result<GraphLaplacian> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "affinity matrix is {}x{}",
            n,
            w.ncols()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-10 {
                return Err(Error::AsymmetricInput);
            }
        }
    }
    let degrees = DVector::from_fn(n, |i, _| w.row(i).sum());
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&g| if g > 0.0 { 1.0 / g.sqrt() } else { 0.0 })
        .collect();
    let mut l = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] -= inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
        }
    }
    Ok(GraphLaplacian {
        w: w.clone(),
        l,
        degrees,
        neighbors: None,
    })
}

/// Zero Laplacian, used when the manifold term is switched off entirely.
pub fn zero_laplacian(n: usize) -> GraphLaplacian {
    GraphLaplacian {
        w: DMatrix::zeros(n, n),
        l: DMatrix::zeros(n, n),
        degrees: DVector::zeros(n),
        neighbors: None,
    }
}
