use num_traits::Zero;

use super::{BasisClass, CohModel};
use crate::error::{Error, Result};
use crate::exact_core::{binomial, int, RatMatrix};

const NAMES: [&str; 8] = ["point", "P1", "P2", "P3", "P4", "C2", "K3", "P1xP1"];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Built-in models by name; `AxB` builds a product.
pub fn builtin(name: &str) -> Result<CohModel> {
    if let Some((a, b)) = name.split_once('x') {
        if !a.is_empty() && !b.is_empty() {
            return Ok(product(&builtin(a)?, &builtin(b)?));
        }
    }
    match name {
        "point" => Ok(projective_space(0)),
        "C2" => Ok(curve(2)),
        "K3" => Ok(k3_surface()),
        _ => {
            let r = name
                .strip_prefix('P')
                .and_then(|r| r.parse::<u32>().ok())
                .filter(|&r| r <= 8)
                .ok_or_else(|| Error::InvalidModel(format!("unknown builtin `{name}`")))?;
            Ok(projective_space(r))
        }
    }
}

/// `ℙ^r` with basis `1, H, …, H^r`, `c(T) = (1+H)^{r+1}`.
pub fn projective_space(r: u32) -> CohModel {
    let n = r as usize + 1;
    let basis = (0..n)
        .map(|i| {
            let label = match i {
                0 => "1".to_string(),
                1 => "H".to_string(),
                _ => format!("H^{i}"),
            };
            BasisClass::new(label, i as u32, i as u32)
        })
        .collect();
    let eta = RatMatrix::from_fn(n, n, |a, b| if a + b == r as usize { int(1) } else { int(0) });
    let c1 = RatMatrix::from_fn(n, n, |b, a| if b == a + 1 { int(r as i64 + 1) } else { int(0) });
    let name = if r == 0 { "point".to_string() } else { format!("P{r}") };
    CohModel {
        name,
        dim: r,
        basis,
        eta,
        c1,
        chi: int(r as i64 + 1),
        c1_crm1: int(r as i64 + 1) * binomial(r as i64 + 1, 2),
    }
}

/// Curve of genus `g` with a symplectic basis `a_i, b_i` of `H¹`.
pub fn curve(g: u32) -> CohModel {
    let g = g as usize;
    let n = 2 * g + 2;
    let mut basis = vec![BasisClass::new("1", 0, 0)];
    for i in 1..=g {
        basis.push(BasisClass::new(format!("a{i}"), 1, 0));
    }
    for i in 1..=g {
        basis.push(BasisClass::new(format!("b{i}"), 0, 1));
    }
    basis.push(BasisClass::new("pt", 1, 1));
    let mut eta = RatMatrix::zeros(n, n);
    eta.set(0, n - 1, int(1));
    eta.set(n - 1, 0, int(1));
    for i in 0..g {
        eta.set(1 + i, 1 + g + i, int(1));
        eta.set(1 + g + i, 1 + i, int(-1));
    }
    let euler = 2 - 2 * g as i64;
    let mut c1 = RatMatrix::zeros(n, n);
    c1.set(n - 1, 0, int(euler));
    CohModel { name: format!("C{g}"), dim: 1, basis, eta, c1, chi: int(euler), c1_crm1: int(euler) }
}

/// Surface with `h^{2,0} = h^{0,2} = 1`, `h^{1,1} = 20` and `c₁ = 0`; the
/// pairing on `H^{1,1}` is taken diagonal of signature `(1, 19)`.
pub fn k3_surface() -> CohModel {
    let n = 24;
    let mut basis = vec![BasisClass::new("1", 0, 0), BasisClass::new("w", 2, 0)];
    for i in 1..=20 {
        basis.push(BasisClass::new(format!("h{i}"), 1, 1));
    }
    basis.push(BasisClass::new("wbar", 0, 2));
    basis.push(BasisClass::new("pt", 2, 2));
    let mut eta = RatMatrix::zeros(n, n);
    eta.set(0, 23, int(1));
    eta.set(23, 0, int(1));
    eta.set(1, 22, int(1));
    eta.set(22, 1, int(1));
    for i in 2..22 {
        eta.set(i, i, int(if i == 2 { 1 } else { -1 }));
    }
    CohModel {
        name: "K3".into(),
        dim: 2,
        basis,
        eta,
        c1: RatMatrix::zeros(n, n),
        chi: int(24),
        c1_crm1: int(0),
    }
}

/// Künneth product with the Koszul sign on the pairing.
pub fn product(v: &CohModel, w: &CohModel) -> CohModel {
    let (nv, nw) = (v.rank(), w.rank());
    let n = nv * nw;
    let idx = |a: usize, b: usize| a * nw + b;
    let mut basis = Vec::with_capacity(n);
    for a in &v.basis {
        for b in &w.basis {
            basis.push(BasisClass::new(format!("{}*{}", a.label, b.label), a.p + b.p, a.q + b.q));
        }
    }
    let mut eta = RatMatrix::zeros(n, n);
    let mut c1 = RatMatrix::zeros(n, n);
    for a in 0..nv {
        for b in 0..nw {
            for c in 0..nv {
                for d in 0..nw {
                    let x = v.eta.get(a, c) * w.eta.get(b, d);
                    if !x.is_zero() {
                        let sign = if w.parity(b) && v.parity(c) { int(-1) } else { int(1) };
                        eta.set(idx(a, b), idx(c, d), sign * x);
                    }
                    let mut r = int(0);
                    if b == d {
                        r += v.c1.get(c, a);
                    }
                    if a == c {
                        r += w.c1.get(d, b);
                    }
                    if !r.is_zero() {
                        c1.set(idx(c, d), idx(a, b), r);
                    }
                }
            }
        }
    }
    CohModel {
        name: format!("{}x{}", v.name, w.name),
        dim: v.dim + w.dim,
        basis,
        eta,
        c1,
        chi: &v.chi * &w.chi,
        c1_crm1: &v.c1_crm1 * &w.chi + &v.chi * &w.c1_crm1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_core::rat;

    #[test]
    fn product_formulas() {
        let models = ["point", "P1", "P2"].map(|n| builtin(n).unwrap());
        for v in &models {
            for w in &models {
                let p = product(v, w);
                assert!(p.validate().is_empty(), "{}: {:?}", p.name, p.validate());
                let expect = v.rho() * &w.chi + &v.chi * w.rho() - rat(1, 16) * &v.chi * &w.chi;
                assert_eq!(p.rho(), expect, "{}", p.name);
                assert_eq!(p.rho_tilde(), v.rho_tilde() * &w.chi + &v.chi * w.rho_tilde());
                assert!(p.libgober_check().2);
            }
        }
        let pp = product(&models[0], &models[0]);
        assert_eq!(pp.rho(), rat(1, 16));
        assert_eq!(pp.rho_tilde(), int(0));
    }

    #[test]
    fn projective_family() {
        let c = [2, 9, 24, 50];
        for r in 1..=4u32 {
            let m = projective_space(r);
            assert_eq!(m.c1_crm1, int(c[r as usize - 1]));
            assert!(m.libgober_check().2);
            assert!(m.validate().is_empty());
        }
    }

    #[test]
    fn curve_product_validates() {
        let m = builtin("C2xP1").unwrap();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        assert!(m.libgober_check().2);
    }
}
