//! Real roots of the low-degree stationarity polynomials.
//!
//! Roots come from the eigenvalues of the companion matrix of a rescaled,
//! monic copy of the polynomial, followed by Newton polishing against the
//! original coefficients. Rescaling the variable first matters here: the
//! optimizer's coefficients routinely span thirty orders of magnitude.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("polynomial coefficients must be finite")]
    NonFinite,
    #[error("empty search interval: lo > hi")]
    EmptyInterval,
}

/// Dense real polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming exact trailing zeros.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `a + b·x`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `Σ|cᵢ||x|ⁱ`, the magnitude against which a residual at `x` is judged.
    pub fn eval_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(0.0);
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect::<Vec<_>>())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect::<Vec<_>>())
    }

    fn newton_polish(&self, mut x: f64) -> f64 {
        let d = self.derivative();
        let mut best = (self.eval(x).abs(), x);
        for _ in 0..8 {
            let slope = d.eval(x);
            if slope == 0.0 || !slope.is_finite() {
                break;
            }
            let next = x - self.eval(x) / slope;
            if !next.is_finite() {
                break;
            }
            x = next;
            let r = self.eval(x).abs();
            if r < best.0 {
                best = (r, x);
            }
            if r == 0.0 {
                break;
            }
        }
        best.1
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
        Polynomial::new((0..n).map(|i| get(&self.coeffs, i) + get(&rhs.coeffs, i)).collect::<Vec<_>>())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// All real roots, ascending, each with `|p(r)| ≤ tol·Σ|cᵢ||r|ⁱ`, merged when
/// closer than `tol·|r|`. The merge test is relative so that clusters of
/// roots far below unit magnitude stay distinct.
pub fn real_roots(p: &Polynomial, tol: f64) -> Result<Vec<f64>, PolyError> {
    if p.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(PolyError::NonFinite);
    }
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut roots = Vec::new();
    // Peel off exact roots at zero so the rescaling below stays well defined.
    let lead_zeros = p.coeffs.iter().take_while(|&&c| c == 0.0).count();
    if lead_zeros > 0 {
        roots.push(0.0);
    }
    let q = Polynomial::new(p.coeffs[lead_zeros..].to_vec());
    let n = q.degree();
    if n >= 1 {
        let c = &q.coeffs;
        let s = (c[0].abs() / c[n].abs()).powf(1.0 / n as f64);
        // Coefficients in y = x/s, made monic.
        let scaled: Vec<f64> = c.iter().enumerate().map(|(i, &ci)| ci * s.powi(i as i32)).collect();
        let lead = scaled[n];
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -scaled[i] / lead;
        }
        let eig = comp.complex_eigenvalues();
        for z in eig.iter() {
            if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                continue;
            }
            let r = q.newton_polish(z.re * s);
            if q.eval(r).abs() <= tol * q.eval_scale(r) {
                roots.push(r);
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&last) if (r - last).abs() <= tol * r.abs().max(last.abs()) => {}
            _ => out.push(r),
        }
    }
    Ok(out)
}

/// Among the roots inside `[lo, hi]`, the one maximizing `objective`.
pub fn best_feasible_root(
    roots: &[f64],
    lo: f64,
    hi: f64,
    objective: impl Fn(f64) -> f64,
) -> Result<Option<f64>, PolyError> {
    if lo > hi {
        return Err(PolyError::EmptyInterval);
    }
    let mut best: Option<(f64, f64)> = None;
    for &r in roots.iter().filter(|&&r| r >= lo && r <= hi) {
        let v = objective(r);
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, r));
        }
    }
    Ok(best.map(|(_, r)| r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn tiny_roots_stay_distinct() {
        let want = [-6e-5, -3e-7, -6e-11, 7e-7];
        let p = want.iter().fold(Polynomial::constant(-1e-26), |acc, &r| &acc * &Polynomial::linear(-r, 1.0));
        let r = real_roots(&p, 1e-6).unwrap();
        assert!(close(&r, &want, 1e-6), "{r:?}");
    }

    #[test]
    fn quadratic_and_quintic() {
        let r = real_roots(&Polynomial::new(vec![-1.0, 0.0, 1.0]), 1e-10).unwrap();
        assert!(close(&r, &[-1.0, 1.0], 1e-12), "{r:?}");
        let r = real_roots(&Polynomial::new(vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-10).unwrap();
        assert!(close(&r, &[1.0], 1e-12), "{r:?}");
    }

    #[test]
    fn errors() {
        assert_eq!(real_roots(&Polynomial::new(vec![0.0, 0.0]), 1e-9), Err(PolyError::ZeroPolynomial));
        assert_eq!(real_roots(&Polynomial::new(vec![1.0, f64::NAN]), 1e-9), Err(PolyError::NonFinite));
        assert_eq!(best_feasible_root(&[0.5], 1.0, 0.0, |x| x), Err(PolyError::EmptyInterval));
    }

    #[test]
    fn zero_root_and_constant() {
        let r = real_roots(&Polynomial::new(vec![0.0, -4.0, 0.0, 1.0]), 1e-10).unwrap();
        assert!(close(&r, &[-2.0, 0.0, 2.0], 1e-12), "{r:?}");
        assert!(real_roots(&Polynomial::constant(3.0), 1e-10).unwrap().is_empty());
    }

    #[test]
    fn badly_scaled_roots_are_found() {
        // (x − 1e-4)(x − 3e-9)(x + 2) with coefficients spanning many decades.
        let p = &(&Polynomial::linear(-1e-4, 1.0) * &Polynomial::linear(-3e-9, 1.0)) * &Polynomial::linear(2.0, 1.0);
        let r = real_roots(&p.scale(1e-30), 1e-10).unwrap();
        assert!(close(&r, &[-2.0, 3e-9, 1e-4], 1e-9), "{r:?}");
    }

    #[test]
    fn double_root_is_kept_once() {
        let p = &Polynomial::new(vec![1.0, -2.0, 1.0]) * &Polynomial::linear(3.0, 1.0);
        let r = real_roots(&p, 1e-7).unwrap();
        assert!(close(&r, &[-3.0, 1.0], 1e-6), "{r:?}");
    }

    #[test]
    fn best_root_selection() {
        assert_eq!(best_feasible_root(&[-1.0, 0.5, 2.0], 0.0, 1.0, |x| x).unwrap(), Some(0.5));
        assert_eq!(best_feasible_root(&[-1.0, 2.0], 0.0, 1.0, |x| x).unwrap(), None);
        let obj = |x: f64| -(x - 0.7).powi(2);
        assert_eq!(best_feasible_root(&[0.2, 0.6, 0.95], 0.0, 1.0, obj).unwrap(), Some(0.6));
    }

    /// Roots located independently by sign changes on a fine grid, then bisection.
    fn bisection_roots(p: &Polynomial, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let step = (hi - lo) / n as f64;
        for i in 0..n {
            let (mut a, mut b) = (lo + i as f64 * step, lo + (i + 1) as f64 * step);
            let (fa, fb) = (p.eval(a), p.eval(b));
            if fa == 0.0 {
                out.push(a);
                continue;
            }
            if fa * fb > 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if p.eval(a) * p.eval(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }

    proptest! {
        #[test]
        fn matches_bisection_oracle(roots in prop::collection::vec(-4.0f64..4.0, 1..=5), lead in 0.5f64..3.0,
                                    extra in prop::option::of((0.1f64..2.0, -3.0f64..3.0))) {
            // Well separated real roots, optionally one complex pair.
            let mut rs = roots.clone();
            rs.sort_by(|a, b| a.total_cmp(b));
            prop_assume!(rs.windows(2).all(|w| w[1] - w[0] > 0.05));
            let mut p = Polynomial::constant(lead);
            for &r in &rs {
                p = &p * &Polynomial::linear(-r, 1.0);
            }
            if let Some((im, re)) = extra {
                if rs.len() <= 3 {
                    p = &p * &Polynomial::new(vec![re * re + im * im, -2.0 * re, 1.0]);
                }
            }
            let found = real_roots(&p, 1e-9).unwrap();
            let oracle = bisection_roots(&p, -5.0, 5.0, 20_000);
            prop_assert!(close(&found, &oracle, 1e-7), "found {:?} oracle {:?}", found, oracle);
            let cmax = p.coeffs().iter().fold(1f64, |m, c| m.max(c.abs()));
            for r in &found {
                prop_assert!(p.eval(*r).abs() <= 1e-9 * cmax * 5f64.powi(5));
            }
            prop_assert!(found.len() <= p.degree());
        }
    }
}
