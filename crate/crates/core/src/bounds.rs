//! Discretization error bounds and per-resource operation counts.

use std::f64::consts::{E, PI, SQRT_2};

use crate::dmpa::DiscretizationParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub degree: usize,
    pub w: f64,
    pub nwid: f64,
    /// Real-field noise variance.
    pub sigma2: f64,
    /// Complex noise variance.
    pub n0: f64,
}

impl BoundInputs {
    fn checked(self) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if self.degree == 0 || !ok(self.w) || !ok(self.nwid) || !ok(self.sigma2) || !ok(self.n0) {
            return Err(Error::InvalidParameter(format!(
                "bound inputs must be positive: {self:?}"
            )));
        }
        Ok(self)
    }

    /// Real-split path: `N0 = 2 sigma^2`.
    pub fn real(degree: usize, w: f64, nwid: f64, sigma2: f64) -> Result<Self> {
        Self {
            degree,
            w,
            nwid,
            sigma2,
            n0: 2.0 * sigma2,
        }
        .checked()
    }

    /// Complex path: `sigma^2 = N0 / 2`.
    pub fn complex(degree: usize, w: f64, nwid: f64, n0: f64) -> Result<Self> {
        Self {
            degree,
            w,
            nwid,
            sigma2: n0 / 2.0,
            n0,
        }
        .checked()
    }

    pub fn with_w(self, w: f64) -> Self {
        Self { w, ..self }
    }
}

/// Absolute per-entry bound, real field: `d_f w e^{-1/2} / (2 sigma^2 sqrt(2 pi))`.
pub fn abs_error_bound(b: &BoundInputs) -> f64 {
    b.degree as f64 * b.w * (-0.5f64).exp() / (2.0 * b.sigma2 * (2.0 * PI).sqrt())
}

/// Relative per-entry bound, real field: `w d_f nWid / (2 sigma^2)`.
pub fn rel_error_bound(b: &BoundInputs) -> f64 {
    b.w * b.degree as f64 * b.nwid / (2.0 * b.sigma2)
}

/// `d_f w / (N0^2 pi) * sqrt(N0 / e)`.
pub fn abs_error_bound_complex(b: &BoundInputs) -> f64 {
    b.degree as f64 * b.w / (b.n0 * b.n0 * PI) * (b.n0 / E).sqrt()
}

/// `sqrt(2) d_f w nWid / (pi^2 N0^3)`.
pub fn rel_error_bound_complex(b: &BoundInputs) -> f64 {
    SQRT_2 * b.degree as f64 * b.w * b.nwid / (PI * PI * b.n0.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Largest `w` whose relative bound does not exceed `target`, before snapping.
pub fn max_w_for(target_rel: f64, b: &BoundInputs, field: Field) -> Result<f64> {
    if !(target_rel.is_finite() && target_rel > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target must be positive, got {target_rel}"
        )));
    }
    let per_unit_w = match field {
        Field::Real => rel_error_bound(&b.with_w(1.0)),
        Field::Complex => rel_error_bound_complex(&b.with_w(1.0)),
    };
    Ok(target_rel / per_unit_w)
}

const SNAP_SEARCH: u64 = 10_000_000;

/// [`max_w_for`] snapped down so that `wid / w` and `nWid / w` are integers.
pub fn suggest_w(target_rel: f64, b: &BoundInputs, field: Field, wid: f64) -> Result<f64> {
    let raw = max_w_for(target_rel, b, field)?;
    if !(wid.is_finite() && wid >= 0.0) {
        return Err(Error::InvalidParameter(format!("wid must be non-negative, got {wid}")));
    }
    let is_int = |x: f64| (x - x.round()).abs() < 1e-9 * x.abs().max(1.0);
    // w = nWid / n; take the smallest admissible n
    let first = (b.nwid / raw - 1e-9).ceil().max(1.0) as u64;
    (first..first + SNAP_SEARCH)
        .map(|n| b.nwid / n as f64)
        .find(|&w| is_int(wid / w))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no common divisor of wid={wid} and nWid={} below {raw}",
                b.nwid
            ))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityPath {
    Mpa,
    MpaSplit,
    Dmpa1d,
    Dmpa2d,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate {
    /// Operation count per resource node.
    pub operations: f64,
    /// Transform side length, for discretized paths.
    pub transform_len: Option<usize>,
    /// Forward plus inverse transforms per resource node.
    pub transforms: usize,
    /// Pointwise spectrum products per resource node.
    pub products: usize,
}

/// Per-resource-node work. Exhaustive paths count `d_f M^{d_f}` (or
/// `d_f M^{d_f/2}` split); discretized paths count `2 d_f + 1` transforms of
/// `N log2 N` (2-D: `2 N^2 log2 N`) plus `3 d_f - 4` spectrum products.
pub fn estimate_complexity(
    degree: usize,
    codewords: usize,
    params: Option<&DiscretizationParams>,
    path: ComplexityPath,
) -> Result<ComplexityEstimate> {
    if degree == 0 || codewords == 0 {
        return Err(Error::InvalidParameter("degree and M must be positive".into()));
    }
    let d = degree as f64;
    let m = codewords as f64;
    let exhaustive = |operations| ComplexityEstimate {
        operations,
        transform_len: None,
        transforms: 0,
        products: 0,
    };
    let grid = |dims: i32| -> Result<ComplexityEstimate> {
        let p = params.ok_or_else(|| Error::InvalidParameter("discretized paths need grid parameters".into()))?;
        if p.degree() != degree {
            return Err(Error::InvalidParameter(format!(
                "grid parameters are for d_f={}, not {degree}",
                p.degree()
            )));
        }
        let n = p.padded_length();
        let nf = n as f64;
        let points = nf.powi(dims);
        let transforms = 2 * degree + 1;
        let products = (3 * degree).saturating_sub(4);
        Ok(ComplexityEstimate {
            operations: transforms as f64 * dims as f64 * points * nf.log2() + products as f64 * points,
            transform_len: Some(n),
            transforms,
            products,
        })
    };
    match path {
        ComplexityPath::Mpa => Ok(exhaustive(d * m.powf(d))),
        ComplexityPath::MpaSplit => Ok(exhaustive(d * m.powf(d / 2.0))),
        ComplexityPath::Dmpa1d => grid(1),
        ComplexityPath::Dmpa2d => grid(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn real_bounds() {
        let b = BoundInputs::real(3, 0.05, 5.0, 0.1).unwrap();
        assert!(close(abs_error_bound(&b), 0.18149, 1e-4));
        assert!(close(rel_error_bound(&b), 3.75, 1e-12));
        assert!(close(abs_error_bound(&b.with_w(0.1)), 2.0 * abs_error_bound(&b), 1e-12));
        let b6 = BoundInputs { degree: 6, ..b };
        assert!(close(abs_error_bound(&b6), 2.0 * abs_error_bound(&b), 1e-12));
        assert!(abs_error_bound(&b.with_w(1e-12)) < 1e-10);
        let big = BoundInputs::real(3, 0.05, 5.0, 1e12).unwrap();
        assert!(rel_error_bound(&big) < 1e-10);
    }

    #[test]
    fn recommended_w_gives_one_percent() {
        let sigma2 = 0.1;
        let (df, nwid) = (3, 5.0);
        let w = 0.02 * sigma2 / (df as f64 * nwid);
        let b = BoundInputs::real(df, w, nwid, sigma2).unwrap();
        assert!(close(rel_error_bound(&b), 0.01, 1e-12));
    }

    #[test]
    fn complex_bounds() {
        let b = BoundInputs::complex(3, 0.05, 5.0, 0.2).unwrap();
        assert!(close(abs_error_bound_complex(&b), 0.3237, 1e-3));
        assert!(close(rel_error_bound_complex(&b), 13.43, 1e-3));
        let b2 = b.with_w(0.1);
        assert!(close(
            abs_error_bound_complex(&b2),
            2.0 * abs_error_bound_complex(&b),
            1e-12
        ));
        assert!(close(
            rel_error_bound_complex(&b2),
            2.0 * rel_error_bound_complex(&b),
            1e-12
        ));
        let b6 = BoundInputs { degree: 6, ..b };
        assert!(close(
            rel_error_bound_complex(&b6),
            2.0 * rel_error_bound_complex(&b),
            1e-12
        ));
    }

    #[test]
    fn bounds_increase_on_lattice() {
        for df in 1..6 {
            for i in 1..20 {
                let w = i as f64 * 0.01;
                let b = BoundInputs::complex(df, w, 5.0, 0.1).unwrap();
                let bw = b.with_w(w + 0.01);
                let bd = BoundInputs { degree: df + 1, ..b };
                for f in [
                    abs_error_bound,
                    rel_error_bound,
                    abs_error_bound_complex,
                    rel_error_bound_complex,
                ] {
                    assert!(f(&bw) > f(&b) && f(&bd) > f(&b));
                }
            }
        }
    }

    #[test]
    fn suggested_w() {
        let b = BoundInputs::real(3, 1.0, 5.0, 0.1).unwrap();
        let raw = max_w_for(0.01, &b, Field::Real).unwrap();
        assert!(close(raw, 1.333_333e-4, 1e-6));
        let w = suggest_w(0.01, &b, Field::Real, 1.0).unwrap();
        assert!(w <= raw);
        assert!(((1.0 / w) - (1.0 / w).round()).abs() < 1e-6);
        assert!(((5.0 / w) - (5.0 / w).round()).abs() < 1e-6);

        let c = BoundInputs::complex(3, 1.0, 5.0, 0.2).unwrap();
        let raw = max_w_for(0.1, &c, Field::Complex).unwrap();
        assert!(close(raw, 3.72e-4, 2e-3));
        assert!(suggest_w(0.1, &c, Field::Complex, 1.0).unwrap() <= raw);

        // target equal to the bound at w0 returns w0 or less
        let w0 = 0.05;
        let target = rel_error_bound(&b.with_w(w0));
        let w = suggest_w(target, &b, Field::Real, 1.0).unwrap();
        assert!(w <= w0 * (1.0 + 1e-12));
        assert!(close(w, w0, 1e-9));
        assert!(suggest_w(0.0, &b, Field::Real, 1.0).is_err());
    }

    #[test]
    fn complexity_counts() {
        let mpa = estimate_complexity(5, 16, None, ComplexityPath::Mpa).unwrap();
        assert_eq!(mpa.operations, 5_242_880.0);
        let split = estimate_complexity(5, 16, None, ComplexityPath::MpaSplit).unwrap();
        assert!(close(split.operations, 5120.0, 1e-12));
        assert_eq!(
            estimate_complexity(2, 16, None, ComplexityPath::Mpa)
                .unwrap()
                .operations,
            2.0 * 256.0
        );
        let p = DiscretizationParams::new(0.05, 1.0, 5.0, 3).unwrap();
        let d = estimate_complexity(3, 16, Some(&p), ComplexityPath::Dmpa1d).unwrap();
        assert_eq!(d.transform_len, Some(512));
        assert_eq!((d.transforms, d.products), (7, 5));
        assert!(estimate_complexity(3, 16, None, ComplexityPath::Dmpa1d).is_err());
        assert!(estimate_complexity(4, 16, Some(&p), ComplexityPath::Dmpa2d).is_err());
    }
}
