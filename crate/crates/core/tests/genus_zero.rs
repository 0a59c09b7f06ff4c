use std::time::Instant;

use vircore::constraint_eval::{point_table, GwTable};
use vircore::exact_core::int;
use vircore::genus_zero::*;
use vircore::report::all_pass;

fn p1_table() -> GwTable {
    GwTable::parse(include_str!("data/p1_genus0.gw")).unwrap()
}

#[test]
fn point_suite_at_five_five() {
    let g0 = Genus0::point(G0Truncation::new(5, 5)).unwrap();
    for c in Genus0Check::ALL {
        let start = Instant::now();
        let lines = run_check(&g0, c).unwrap();
        eprintln!("{c}: {:?}", start.elapsed());
        for l in &lines {
            assert!(l.pass, "{l}");
        }
    }
}

#[test]
fn invert_at_four_four() {
    let g0 = Genus0::point(G0Truncation::new(4, 4)).unwrap();
    assert!(all_pass(&invert_check(&g0).unwrap()));
}

#[test]
fn table_route_matches_closed_form() {
    let table = point_table(0, 14);
    let trunc = G0Truncation { degree: 3, indices: 3, depth: 5 };
    let from_table = Genus0::from_table(&table, trunc).unwrap();
    let closed = Genus0::point(trunc).unwrap();
    for fixed in [vec![(0, 0)], vec![(2, 0)], vec![(0, 0), (0, 0)], vec![(1, 0), (3, 0), (0, 0)]] {
        assert_eq!(from_table.corr(&fixed).unwrap(), closed.corr(&fixed).unwrap());
    }
    for c in [Genus0Check::Invert, Genus0Check::Trr, Genus0Check::Wdvv, Genus0Check::Uv] {
        assert!(all_pass(&run_check(&from_table, c).unwrap()), "{c}");
    }
}

#[test]
fn corrupted_table_is_flagged() {
    let mut table = point_table(0, 16);
    // <τ_1 τ_0^3>_0 = 1 becomes 2.
    table.insert(0, vec![], &[(1, 0), (0, 0), (0, 0), (0, 0)], int(2));
    let trunc = G0Truncation::new(3, 3);
    let g0 = Genus0::from_table(&table, trunc).unwrap();
    for c in [Genus0Check::Invert, Genus0Check::Trr, Genus0Check::GVanish] {
        let lines = run_check(&g0, c).unwrap();
        assert!(!all_pass(&lines), "{c} missed the corruption");
    }
}

#[test]
fn p1_sample_table() {
    let table = p1_table();
    let g0 = Genus0::from_table(&table, G0Truncation::new(3, 1)).unwrap();
    let (u, v) = uv_matrices(&g0).unwrap();
    let zeros = vec![0u8; 2];
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(u.get(i, j).coeff_of(0, &zeros), Some(int(0)));
            assert_eq!(v.get(i, j).coeff_of(0, &zeros).unwrap(), *g0.model().c1.get(i, j));
        }
    }
    // Quantum product: H*H = q, so U^0_1 carries q at t = 0.
    assert_eq!(u.get(0, 1).coeff_of(1, &zeros), Some(int(1)));
    assert!(all_pass(&wdvv_check(&g0, 1).unwrap()));
    assert!(all_pass(&amat_check(&g0, 4).unwrap()));
}

#[test]
fn too_shallow_window_is_an_error() {
    let g0 = Genus0::point(G0Truncation { degree: 2, indices: 3, depth: 3 }).unwrap();
    assert!(g_vanish_check(&g0, -4).is_err());
}
