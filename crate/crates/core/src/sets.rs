//! Simple closed convex sets with closed-form projections.
//!
//! Besides the Euclidean projection `P_K(x)`, every set provides the
//! projection of a velocity `v` onto the tangent cone `T_K(x)` at a point
//! `x ∈ K`. That second operation is what the projected flow needs; it is
//! computed in closed form, never through a limit.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// Band used to decide whether a coordinate sits on a bound:
/// `|x_i - bound| <= ACTIVITY_TOL * (1 + |bound|)`.
pub const ACTIVITY_TOL: f64 = 1e-9;

/// Slack accepted by operations whose precondition is `x ∈ K`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimpleSet {
    /// All of `R^n`.
    FreeSpace(usize),
    /// `{x : x_i >= 0}`.
    NonnegativeOrthant(usize),
    /// `{x : lower_i <= x_i <= upper_i}`; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : ||x - center|| <= radius}`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Cartesian product; component `k` owns the next `dim(k)` coordinates.
    Product(Vec<SimpleSet>),
}

fn is_active(x: f64, bound: f64) -> bool {
    bound.is_finite() && (x - bound).abs() <= ACTIVITY_TOL * (1.0 + bound.abs())
}

impl SimpleSet {
    pub fn free(dim: usize) -> Self {
        SimpleSet::FreeSpace(dim)
    }

    pub fn nonnegative(dim: usize) -> Self {
        SimpleSet::NonnegativeOrthant(dim)
    }

    /// Box with per-coordinate bounds. Use `f64::INFINITY` / `f64::NEG_INFINITY`
    /// for missing bounds.
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let set = SimpleSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let set = SimpleSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn product(components: Vec<SimpleSet>) -> Result<Self> {
        let set = SimpleSet::Product(components);
        set.validate()?;
        Ok(set)
    }

    /// Checks the structural invariants of the variant (and of every
    /// component for products).
    pub fn validate(&self) -> Result<()> {
        match self {
            SimpleSet::FreeSpace(_) | SimpleSet::NonnegativeOrthant(_) => Ok(()),
            SimpleSet::Box { lower, upper } => {
                check_dim("box bounds", lower.len(), upper.len())?;
                for (i, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
                    if lo.is_nan() || hi.is_nan() {
                        return Err(Error::InvalidParameter(format!("box bound {i} is NaN")));
                    }
                    if lo > hi {
                        return Err(Error::InvalidParameter(format!(
                            "box bound {i}: lower {lo} exceeds upper {hi}"
                        )));
                    }
                    if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                        return Err(Error::InvalidParameter(format!("box bound {i} is empty")));
                    }
                }
                Ok(())
            }
            SimpleSet::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("ball center"));
                }
                Ok(())
            }
            SimpleSet::Product(components) => components.iter().try_for_each(Self::validate),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SimpleSet::FreeSpace(n) | SimpleSet::NonnegativeOrthant(n) => *n,
            SimpleSet::Box { lower, .. } => lower.len(),
            SimpleSet::Ball { center, .. } => center.len(),
            SimpleSet::Product(components) => components.iter().map(Self::dim).sum(),
        }
    }

    /// Euclidean projection `argmin_{y ∈ K} ||x - y||`.
    pub fn project_point(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("project_point", self.dim(), x.len())?;
        let mut out = x.clone();
        self.project_in_place(out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        match self {
            SimpleSet::FreeSpace(_) => {}
            SimpleSet::NonnegativeOrthant(_) => {
                for xi in x.iter_mut() {
                    *xi = xi.max(0.0);
                }
            }
            SimpleSet::Box { lower, upper } => {
                for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
                    if *xi < lo {
                        *xi = lo;
                    } else if *xi > hi {
                        *xi = hi;
                    }
                }
            }
            SimpleSet::Ball { center, radius } => {
                let dist = offset_norm(x, center);
                // Points already radially scaled sit within rounding of the
                // sphere; leaving them alone keeps the projection idempotent.
                if dist > radius + ball_slack(center, *radius) {
                    let scale = radius / dist;
                    for (xi, &ci) in x.iter_mut().zip(center) {
                        *xi = ci + (*xi - ci) * scale;
                    }
                }
            }
            SimpleSet::Product(components) => {
                let mut rest = x;
                for component in components {
                    let (head, tail) = rest.split_at_mut(component.dim());
                    component.project_in_place(head);
                    rest = tail;
                }
            }
        }
    }

    /// `||P_K(x) - x|| <= tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((self.project_point(x)? - x).norm())
    }

    /// Projection of the velocity `v` onto the tangent cone `T_K(x)`.
    ///
    /// Inside the set this is the identity. On the boundary, the components
    /// of `v` that point out of the set through an active constraint are
    /// removed.
    pub fn project_tangent_cone(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("project_tangent_cone", self.dim(), x.len())?;
        check_dim("project_tangent_cone", self.dim(), v.len())?;
        self.ensure_member(x)?;
        let mut out = v.clone();
        self.tangent_in_place(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn ensure_member(&self, x: &DVector<f64>) -> Result<()> {
        let distance = self.distance(x)?;
        if distance <= MEMBERSHIP_TOL * (1.0 + x.amax()) {
            Ok(())
        } else {
            Err(Error::NotInSet { distance })
        }
    }

    pub(crate) fn tangent_in_place(&self, x: &[f64], v: &mut [f64]) {
        match self {
            SimpleSet::FreeSpace(_) => {}
            SimpleSet::NonnegativeOrthant(_) => {
                for (&xi, vi) in x.iter().zip(v.iter_mut()) {
                    if is_active(xi, 0.0) {
                        *vi = vi.max(0.0);
                    }
                }
            }
            SimpleSet::Box { lower, upper } => {
                for (((&xi, vi), &lo), &hi) in x.iter().zip(v.iter_mut()).zip(lower).zip(upper) {
                    if is_active(xi, lo) {
                        *vi = vi.max(0.0);
                    }
                    if is_active(xi, hi) {
                        *vi = vi.min(0.0);
                    }
                }
            }
            SimpleSet::Ball { center, radius } => {
                let dist = offset_norm(x, center);
                if (dist - radius).abs() <= ACTIVITY_TOL * (1.0 + radius) && dist > 0.0 {
                    // Outward unit normal u = (x - c)/||x - c||.
                    let outward: f64 = x
                        .iter()
                        .zip(center)
                        .zip(v.iter())
                        .map(|((&xi, &ci), &vi)| (xi - ci) / dist * vi)
                        .sum();
                    if outward > 0.0 {
                        for ((vi, &xi), &ci) in v.iter_mut().zip(x).zip(center) {
                            *vi -= outward * (xi - ci) / dist;
                        }
                    }
                }
            }
            SimpleSet::Product(components) => {
                let mut offset = 0;
                for component in components {
                    let n = component.dim();
                    component.tangent_in_place(&x[offset..offset + n], &mut v[offset..offset + n]);
                    offset += n;
                }
            }
        }
    }

    /// Difference quotient `(P_K(x + δv) - x)/δ`, the limit definition of the
    /// tangent-cone projection. Intended as a test oracle.
    pub fn limit_quotient_check(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        delta: f64,
    ) -> Result<DVector<f64>> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {delta}"
            )));
        }
        check_dim("limit_quotient_check", self.dim(), v.len())?;
        let moved = self.project_point(&(x + v * delta))?;
        Ok((moved - x) / delta)
    }
}

fn ball_slack(center: &[f64], radius: f64) -> f64 {
    let scale = center.iter().fold(radius, |acc, c| acc.max(c.abs()));
    8.0 * f64::EPSILON * scale
}

fn offset_norm(x: &[f64], center: &[f64]) -> f64 {
    x.iter()
        .zip(center)
        .map(|(&xi, &ci)| (xi - ci) * (xi - ci))
        .sum::<f64>()
        .sqrt()
}
