use num_traits::{One, Zero};
use proptest::prelude::*;

use vircore::diffalg::{DiffMono, DiffPoly};
use vircore::exact_core::{bracket, bracket_poly, rat, RatMatrix, Rational};
use vircore::jet::{Jet, JetMono};
use vircore::virasoro_symbols::{MatPoly, PsiSymbol};

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..12).prop_map(|(p, q)| rat(p, q))
}

fn diffpoly() -> impl Strategy<Value = DiffPoly> {
    let term = (rational(), 0u32..2, prop::collection::vec(0u32..4, 0..3));
    prop::collection::vec(term, 0..4).prop_map(|ts| {
        let mut p = DiffPoly::zero();
        for (c, h, jets) in ts {
            p.add_term(DiffMono::new(h, jets), c);
        }
        p
    })
}

fn matrix(n: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(-3i64..4, n * n).prop_map(move |v| RatMatrix::from_fn(n, n, |i, j| rat(v[i * n + j], 1)))
}

fn symbol(n: usize) -> impl Strategy<Value = PsiSymbol> {
    let term = (-2i32..3, prop::collection::vec(matrix(n), 1..3));
    prop::collection::vec(term, 1..3).prop_map(move |ts| {
        let mut s = PsiSymbol::zero(n);
        for (k, coeffs) in ts {
            s.add_term(k, MatPoly::from_coeffs(n, coeffs));
        }
        s
    })
}

fn jet() -> impl Strategy<Value = Jet> {
    let term = (rational(), prop::collection::vec(0u8..3, 2));
    prop::collection::vec(term, 0..5).prop_map(|ts| {
        let mut j = Jet::zero(2, 3, 0);
        for (c, exps) in ts {
            if exps.iter().map(|&e| e as i32).sum::<i32>() <= 3 {
                j.add_term(JetMono { aux: 0, exps }, c);
            }
        }
        j
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_form_a_field(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &a * &b + &a * &c);
        if !a.is_zero() {
            prop_assert_eq!(&a * a.recip(), Rational::one());
        }
    }

    #[test]
    fn bracket_steps_by_one_factor(x in rational(), k in 0i64..6, i in 0i64..7) {
        prop_assume!(i <= k + 1);
        // (s+x)...(s+x+k) = (s+x)...(s+x+k-1) · (s+x+k)
        let prev = |j: i64| if j < 0 || j > k { Rational::zero() } else { bracket(&x, k - 1, j).unwrap() };
        let want = prev(i - 1) + (&x + rat(k, 1)) * prev(i);
        prop_assert_eq!(bracket(&x, k, i).unwrap(), want);
        let poly = bracket_poly(k, i).unwrap();
        let at_x = poly.iter().rev().fold(Rational::zero(), |acc, c| acc * &x + c);
        prop_assert_eq!(at_x, bracket(&x, k, i).unwrap());
    }

    #[test]
    fn integration_undoes_derivation(p in diffpoly()) {
        let dp = p.derive();
        let back = dp.integrate().unwrap();
        prop_assert_eq!(back.derive(), dp);
        prop_assert!((&back - &p).derive().is_zero());
    }

    #[test]
    fn derivation_obeys_leibniz(p in diffpoly(), q in diffpoly()) {
        let lhs = (&p * &q).derive();
        let rhs = &(&p.derive() * &q) + &(&p * &q.derive());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn symbols_compose_associatively(a in symbol(2), b in symbol(2), c in symbol(2)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn symbol_brackets_satisfy_jacobi(a in symbol(2), b in symbol(2), c in symbol(2)) {
        let j = a.commutator(&b.commutator(&c))
            .add(&b.commutator(&c.commutator(&a)))
            .add(&c.commutator(&a.commutator(&b)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn jet_products_commute_and_differentiate(a in jet(), b in jet()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        let lhs = a.mul(&b).derivative(0);
        let rhs = a.derivative(0).mul(&b).add(&a.mul(&b.derivative(0)));
        prop_assert_eq!(lhs.restrict(2, 0), rhs.restrict(2, 0));
    }
}
