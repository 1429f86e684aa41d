use proptest::prelude::*;

use qdelab_core::arith::parse::parse_rf;
use qdelab_core::arith::{parse_exp, Exp};
use qdelab_core::models::partition::{partitions, Partition};
use qdelab_core::wall::farey::{farey_in, Interval};

fn exp() -> impl Strategy<Value = Exp> {
    (-40i64..=40, 1i64..=12).prop_map(|(a, b)| Exp::new(a, b))
}

/// Partition numbers from Euler's pentagonal recurrence.
fn partition_count(n: usize) -> usize {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[m] += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                p[m] += sign * p[m - g2];
            }
            k += 1;
        }
    }
    p[n] as usize
}

proptest! {
    #[test]
    fn farey_matches_brute_force(lo in -6i64..=6, width in 0i64..=3, maxden in 1i64..=9) {
        let iv = Interval::half_open(Exp::from_integer(lo), Exp::from_integer(lo + width));
        let got = farey_in(&iv, maxden).unwrap();
        let mut want: Vec<Exp> = (1..=maxden)
            .flat_map(|b| (lo * b..(lo + width) * b).map(move |a| Exp::new(a, b)))
            .collect();
        want.sort();
        want.dedup();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn exp_display_round_trips(e in exp()) {
        prop_assert_eq!(parse_exp(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn rf_display_round_trips(a in -4i64..=4, b in 1u32..=3, c in -2i64..=2, h in exp()) {
        let src = format!("({a}-z^{b}*q)/(1+{c}*z*hbar)*hbar^({h})");
        let r = parse_rf(&src).unwrap();
        prop_assert_eq!(parse_rf(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn transpose_is_involution(mut parts in proptest::collection::vec(1u32..=6, 0..6)) {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let l = Partition::new(parts).unwrap();
        prop_assert_eq!(l.transpose().transpose(), l.clone());
        prop_assert_eq!(l.transpose().size(), l.size());
        prop_assert_eq!(l.boxes().count() as u32, l.size());
    }
}

#[test]
fn partition_enumeration() {
    for n in 0..=12u32 {
        let ps = partitions(n);
        assert_eq!(ps.len(), partition_count(n as usize), "n = {n}");
        assert!(ps.iter().all(|p| p.size() == n));
        let mut sorted = ps.clone();
        sorted.sort_by(|a, b| a.parts().cmp(b.parts()));
        sorted.dedup();
        assert_eq!(sorted.len(), ps.len());
    }
}
