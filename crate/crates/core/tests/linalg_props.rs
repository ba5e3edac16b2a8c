mod common;

use common::gen::{check_hermite, check_minors, check_smith, matrix};
use lowterm::linalg::{int, smith_normal_form, solve_integer, solve_mod, Int, IntMatrix};
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_is_a_factorization(m in matrix(5, 9)) {
        prop_assert_eq!(check_smith(&m), Ok(()));
    }

    #[test]
    fn divisors_match_minors(m in matrix(4, 6)) {
        prop_assert_eq!(check_minors(&m), Ok(()));
    }

    #[test]
    fn hermite_form_conventions(m in matrix(5, 9)) {
        prop_assert_eq!(check_hermite(&m), Ok(()));
    }

    #[test]
    fn solve_finds_planted_solutions(m in matrix(4, 7), x in proptest::collection::vec(-5i64..=5, 4)) {
        let x: Vec<Int> = x.into_iter().take(m.cols()).map(int).collect();
        let b = m.mul_vec(&x);
        let y = solve_integer(&m, &b).unwrap().expect("planted solution");
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn solve_none_agrees_with_box_search(m in matrix(2, 3), b in proptest::collection::vec(-4i64..=4, 2)) {
        let b: Vec<Int> = b.into_iter().take(m.rows()).map(int).collect();
        let found = solve_integer(&m, &b).unwrap();
        if let Some(y) = &found {
            prop_assert_eq!(m.mul_vec(y), b.clone());
        } else {
            // no solution may show up in the box either
            let c = m.cols() as u32;
            let hit = (0..17i64.pow(c)).any(|code| {
                let mut k = code;
                let x: Vec<Int> = (0..c).map(|_| { let v = k % 17 - 8; k /= 17; int(v) }).collect();
                m.mul_vec(&x) == b
            });
            prop_assert!(!hit);
        }
    }

    #[test]
    fn solve_mod_respects_moduli(m in matrix(3, 5), x in proptest::collection::vec(-5i64..=5, 3), mods in proptest::collection::vec(0i64..=6, 3)) {
        let x: Vec<Int> = x.into_iter().take(m.cols()).map(int).collect();
        let r = IntMatrix::diagonal(&mods.iter().take(m.rows()).map(|&v| int(v)).collect::<Vec<_>>());
        let b = m.mul_vec(&x);
        let y = solve_mod(&m, &b, &r).unwrap().expect("planted solution");
        let diff: Vec<Int> = m.mul_vec(&y).iter().zip(&b).map(|(a, c)| a - c).collect();
        for (i, d) in diff.iter().enumerate() {
            let md = &r[(i, i)];
            let ok = if md.is_zero() { d.is_zero() } else { d.is_multiple_of(md) };
            prop_assert!(ok);
        }
    }
}

#[test]
fn known_smith_forms() {
    let m = IntMatrix::from_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]);
    let s = smith_normal_form(&m);
    assert_eq!(s.divisors, vec![int(2), int(6), int(12)]);
    assert_eq!(smith_normal_form(&IntMatrix::zeros(2, 3)).rank(), 0);
}
