//! Matrices of jets and Laurent series in ζ with such coefficients.

use num_traits::Zero;
use rayon::prelude::*;

use crate::exact_core::{int, RatMatrix, Rational};
use crate::jet::Jet;

/// Number of variables and certified window shared by a family of jets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetShape {
    pub nvars: usize,
    pub degree: i32,
    pub aux: i32,
}

impl JetShape {
    pub fn zero(&self) -> Jet {
        Jet::zero(self.nvars, self.degree, self.aux)
    }

    pub fn constant(&self, c: Rational) -> Jet {
        Jet::constant(self.nvars, self.degree, self.aux, c)
    }
}

/// Dense matrix of jets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetMat {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMat {
    pub fn zero(rows: usize, cols: usize, shape: JetShape) -> Self {
        Self { rows, cols, data: vec![shape.zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rat(m: &RatMatrix, shape: JetShape) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| shape.constant(m.get(i, j).clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Jet::is_zero)
    }

    /// First nonzero entry, as `(row, col, jet)`.
    pub fn first_nonzero(&self) -> Option<(usize, usize, &Jet)> {
        self.data.iter().enumerate().find(|(_, j)| !j.is_zero()).map(|(k, j)| (k / self.cols, k % self.cols, j))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|j| j.scale(c))
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc: Option<Jet> = None;
            for k in 0..self.cols {
                let p = self.get(i, k).mul(other.get(k, j));
                acc = Some(match acc {
                    None => p,
                    Some(a) => a.add(&p),
                });
            }
            acc.expect("nonempty inner dimension")
        })
    }

    /// `m · self` for a constant matrix `m`.
    pub fn lmul_rat(&self, m: &RatMatrix) -> Self {
        assert_eq!(m.cols(), self.rows, "shape mismatch");
        Self::from_fn(m.rows(), self.cols, |i, j| {
            let mut acc = self.get(0, j).scale(&Rational::zero());
            for k in 0..self.rows {
                let c = m.get(i, k);
                if !c.is_zero() {
                    acc = acc.add(&self.get(k, j).scale(c));
                }
            }
            acc
        })
    }

    /// `self · m` for a constant matrix `m`.
    pub fn rmul_rat(&self, m: &RatMatrix) -> Self {
        self.transpose().lmul_rat(&m.transpose()).transpose()
    }
}

/// `Σ_{lo ≤ n ≤ hi} c_n ζ^n`. When `finite` is false the true series may
/// continue below `lo`; only the listed coefficients are certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentJetSeries {
    lo: i32,
    hi: i32,
    finite: bool,
    coeffs: Vec<JetMat>,
}

impl LaurentJetSeries {
    pub fn new(lo: i32, finite: bool, coeffs: Vec<JetMat>) -> Self {
        assert!(!coeffs.is_empty(), "empty series");
        let hi = lo + coeffs.len() as i32 - 1;
        Self { lo, hi, finite, coeffs }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// Coefficient of `ζ^n`; `None` when `n` lies below the certified window.
    pub fn coeff(&self, n: i32) -> Option<&JetMat> {
        if n < self.lo || n > self.hi {
            return None;
        }
        Some(&self.coeffs[(n - self.lo) as usize])
    }

    pub fn powers(&self) -> impl Iterator<Item = (i32, &JetMat)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.lo + i as i32, c))
    }

    fn zero_like(&self) -> JetMat {
        self.coeffs[0].scale(&Rational::zero())
    }

    /// `ζ ↦ -ζ`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .powers()
            .map(|(n, c)| if n.rem_euclid(2) == 1 { c.scale(&int(-1)) } else { c.clone() })
            .collect();
        Self { coeffs, ..*self }
    }

    pub fn map(&self, f: impl Fn(&JetMat) -> JetMat + Sync + Send) -> Self {
        Self { coeffs: self.coeffs.par_iter().map(f).collect(), ..*self }
    }

    /// Multiplication by `ζ^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self { lo: self.lo + k, hi: self.hi + k, finite: self.finite, coeffs: self.coeffs.clone() }
    }

    /// `d/dζ`.
    pub fn d_zeta(&self) -> Self {
        let coeffs = self.powers().map(|(n, c)| c.scale(&int(n as i64))).collect();
        Self { lo: self.lo - 1, hi: self.hi - 1, finite: self.finite, coeffs }
    }

    fn combine(&self, other: &Self, f: impl Fn(&JetMat, &JetMat) -> JetMat) -> Self {
        let lo = match (self.finite, other.finite) {
            (true, true) => self.lo.min(other.lo),
            (true, false) => other.lo,
            (false, true) => self.lo,
            (false, false) => self.lo.max(other.lo),
        };
        let hi = self.hi.max(other.hi);
        let zero = self.zero_like();
        let coeffs = (lo..=hi)
            .map(|n| {
                let a = self.coeff(n).unwrap_or(&zero);
                let b = other.coeff(n).unwrap_or(&zero);
                f(a, b)
            })
            .collect();
        Self { lo, hi, finite: self.finite && other.finite, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, JetMat::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, JetMat::sub)
    }

    /// Cauchy product; coefficients are computed in parallel.
    pub fn mul(&self, other: &Self) -> Self {
        let mut lo = i32::MIN;
        if !self.finite {
            lo = lo.max(self.lo + other.hi);
        }
        if !other.finite {
            lo = lo.max(other.lo + self.hi);
        }
        if self.finite && other.finite {
            lo = self.lo + other.lo;
        }
        let hi = self.hi + other.hi;
        let lo = lo.min(hi);
        let coeffs: Vec<JetMat> = (lo..=hi)
            .into_par_iter()
            .map(|n| {
                let mut acc: Option<JetMat> = None;
                for i in self.lo..=self.hi {
                    let Some(b) = other.coeff(n - i) else { continue };
                    let p = self.coeff(i).expect("in range").mul(b);
                    acc = Some(match acc {
                        None => p,
                        Some(a) => a.add(&p),
                    });
                }
                acc.unwrap_or_else(|| {
                    let z = self.coeffs[0].mul(&other.coeffs[0]);
                    z.scale(&Rational::zero())
                })
            })
            .collect();
        Self { lo, hi, finite: self.finite && other.finite, coeffs }
    }

    /// Inverse of a series `I + (negative powers)`, certified down to `lo`.
    pub fn inverse_unipotent(&self) -> Self {
        assert_eq!(self.hi, 0, "leading power must be ζ⁰");
        let id = self.coeff(0).expect("constant term").clone();
        let mut out: Vec<JetMat> = vec![id];
        for n in (self.lo..0).rev() {
            // X[n] = -Σ_{i=n+1}^{0} X[i] Θ[n-i]
            let mut acc: Option<JetMat> = None;
            for i in (n + 1)..=0 {
                let xi = &out[(-i) as usize];
                let p = xi.mul(self.coeff(n - i).expect("in window"));
                acc = Some(match acc {
                    None => p,
                    Some(a) => a.add(&p),
                });
            }
            out.push(acc.expect("nonempty").scale(&int(-1)));
        }
        out.reverse();
        Self { lo: self.lo, hi: 0, finite: false, coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(c: i64) -> JetMat {
        let shape = JetShape { nvars: 1, degree: 3, aux: 0 };
        JetMat::from_fn(1, 1, |_, _| shape.constant(int(c)))
    }

    #[test]
    fn geometric_inverse() {
        // 1 - ζ⁻¹ inverts to Σ ζ⁻ⁿ.
        let s = LaurentJetSeries::new(-4, false, vec![scalar(0), scalar(0), scalar(0), scalar(-1), scalar(1)]);
        let inv = s.inverse_unipotent();
        for n in -4..=0 {
            assert_eq!(inv.coeff(n).unwrap(), &scalar(1));
        }
        let prod = s.mul(&inv);
        assert_eq!(prod.lo(), -4);
        assert_eq!(prod.coeff(0).unwrap(), &scalar(1));
        assert!(prod.coeff(-3).unwrap().is_zero());
    }

    #[test]
    fn reflect_and_derivative() {
        let s = LaurentJetSeries::new(-1, true, vec![scalar(2), scalar(3), scalar(5)]);
        let r = s.reflect();
        assert_eq!(r.coeff(-1).unwrap(), &scalar(-2));
        assert_eq!(r.coeff(1).unwrap(), &scalar(-5));
        let d = s.d_zeta();
        assert_eq!(d.coeff(-2).unwrap(), &scalar(-2));
        assert_eq!(d.coeff(0).unwrap(), &scalar(5));
    }
}
