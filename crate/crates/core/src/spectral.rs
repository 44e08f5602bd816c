//! Symmetric matrices, their eigendecomposition, and the log-sum-exp
//! smoothing of the largest eigenvalue
//!
//! ```text
//! f_ε(X) = ε ln Σ_i exp(λ_i(X)/ε)
//! ∇f_ε(X) = Σ_i p_i u_i u_iᵀ,   p_i = exp(λ_i/ε) / Σ_j exp(λ_j/ε)
//! ```
//!
//! Both are evaluated with the exponent shifted by `λ_max`, so no term ever
//! overflows; terms that underflow are simply dropped.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 10_000;

/// Components smaller than this are treated as zero when fixing eigenvector signs.
const SIGN_THRESHOLD: f64 = 1e-12;

/// Dense real symmetric matrix. Construction symmetrizes `(X + Xᵀ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Panics if `m` is not square.
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetric matrix must be square");
        let sym = (&m + m.transpose()) * 0.5;
        SymmetricMatrix(sym)
    }

    pub fn zeros(order: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(order, order))
    }

    pub fn identity(order: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(order, order))
    }

    /// The all-ones matrix `𝟙 = 1·1ᵀ`.
    pub fn ones(order: usize) -> Self {
        SymmetricMatrix(DMatrix::from_element(order, order, 1.0))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds a matrix from `f(p, q)` evaluated on the upper triangle.
    pub fn from_upper_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(order, order);
        for p in 0..order {
            for q in p..order {
                let value = f(p, q);
                m[(p, q)] = value;
                m[(q, p)] = value;
            }
        }
        SymmetricMatrix(m)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.0[(p, q)]
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(AB)`.
    pub fn inner(&self, other: &SymmetricMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &SymmetricMatrix) {
        self.0 += &other.0 * alpha;
    }

    pub fn eigen(&self) -> Result<EigenDecomposition> {
        symmetric_eigendecomposition(self)
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn mul(self, rhs: f64) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 * rhs)
    }
}

/// Eigenvalues in ascending order; column `i` of `eigenvectors` pairs with
/// `eigenvalues[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Reassembles `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let u = &self.eigenvectors;
        SymmetricMatrix::new(u * DMatrix::from_diagonal(&self.eigenvalues) * u.transpose())
    }
}

/// Full decomposition (implicit symmetric QR via nalgebra).
///
/// Deterministic: eigenvalues ascending (ties keep the solver's order)
/// and each eigenvector's first non-negligible component is nonnegative.
pub fn symmetric_eigendecomposition(x: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !x.is_finite() {
        return Err(Error::NonFinite("symmetric_eigendecomposition input"));
    }
    let n = x.order();
    let eig =
        x.0.clone()
            .try_symmetric_eigen(f64::EPSILON, MAX_ITERATIONS)
            .ok_or_else(|| Error::InvalidParameter("eigendecomposition did not converge".into()))?;
    let (values, vectors) = (eig.eigenvalues, eig.eigenvectors);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut u = vectors.column(src).into_owned();
        if let Some(first) = u.iter().find(|c| c.abs() > SIGN_THRESHOLD) {
            if *first < 0.0 {
                u.neg_mut();
            }
        }
        eigenvectors.set_column(col, &u);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "smoothing parameter must be positive, got {eps}"
        )))
    }
}

/// Softmax weights `p_i ∝ exp((λ_i - λ_max)/ε)` and the log of their
/// normalizer, `ln Σ_i exp((λ_i - λ_max)/ε)`.
fn softmax_weights(eigenvalues: &DVector<f64>, eps: f64) -> (Vec<f64>, f64) {
    let top = eigenvalues.max();
    let raw: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| ((l - top) / eps).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    (raw.iter().map(|r| r / total).collect(), total.ln())
}

/// `ε ln Σ_i exp(λ_i/ε)` from an existing decomposition.
pub fn smoothed_max_eig_from(decomp: &EigenDecomposition, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let (_, log_total) = softmax_weights(&decomp.eigenvalues, eps);
    Ok(decomp.max_eigenvalue() + eps * log_total)
}

/// Gradient `Σ_i p_i u_i u_iᵀ` from an existing decomposition.
pub fn smoothed_max_eig_grad_from(
    decomp: &EigenDecomposition,
    eps: f64,
) -> Result<SymmetricMatrix> {
    check_eps(eps)?;
    let (weights, _) = softmax_weights(&decomp.eigenvalues, eps);
    let n = decomp.eigenvalues.len();
    let mut g = DMatrix::zeros(n, n);
    for (i, &p) in weights.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let u = decomp.eigenvectors.column(i);
        g.ger(p, &u, &u, 1.0);
    }
    Ok(SymmetricMatrix::new(g))
}

/// Smooth upper bound on `λ_max(X)`: `λ_max ≤ f_ε(X) ≤ λ_max + ε ln N`.
pub fn smoothed_max_eig(x: &SymmetricMatrix, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    smoothed_max_eig_from(&x.eigen()?, eps)
}

/// Matrix gradient of [`smoothed_max_eig`]: symmetric, PSD, unit trace.
pub fn smoothed_max_eig_grad(x: &SymmetricMatrix, eps: f64) -> Result<SymmetricMatrix> {
    check_eps(eps)?;
    smoothed_max_eig_grad_from(&x.eigen()?, eps)
}
