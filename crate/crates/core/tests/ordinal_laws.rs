use opindex::ordinal::Ordinal;
use proptest::prelude::*;

/// Ordinals below ω^ω: coefficient list indexed by exponent.
fn below_omega_omega() -> impl Strategy<Value = Ordinal> {
    prop::collection::vec(0u64..4, 0..4).prop_map(|coeffs| {
        coeffs.iter().enumerate().rev().fold(Ordinal::zero(), |acc, (k, &c)| {
            if c == 0 {
                acc
            } else {
                &acc + &(&Ordinal::omega_pow(Ordinal::from(k as u64)) * &Ordinal::from(c))
            }
        })
    })
}

/// Ordinals below ω^(ω+1), to exercise infinite exponents.
fn below_omega_omega_plus() -> impl Strategy<Value = Ordinal> {
    (below_omega_omega(), 0u64..3).prop_map(|(low, c)| {
        let top = &Ordinal::omega_pow(Ordinal::omega()) * &Ordinal::from(c);
        &top + &low
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn addition_is_associative(a in below_omega_omega_plus(), b in below_omega_omega_plus(), c in below_omega_omega_plus()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn multiplication_is_associative(a in below_omega_omega(), b in below_omega_omega(), c in below_omega_omega()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn left_distributive(a in below_omega_omega_plus(), b in below_omega_omega_plus(), c in below_omega_omega_plus()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn omega_powers_add_exponents(a in below_omega_omega(), b in below_omega_omega()) {
        prop_assert_eq!(
            &Ordinal::omega_pow(a.clone()) * &Ordinal::omega_pow(b.clone()),
            Ordinal::omega_pow(&a + &b)
        );
    }

    #[test]
    fn strictly_monotone_on_the_right(a in below_omega_omega_plus(), b in below_omega_omega_plus(), d in below_omega_omega_plus()) {
        // Every c > b is b + d for some d > 0.
        let d = d.successor();
        let c = &b + &d;
        prop_assert!(b < c);
        prop_assert!(&a + &b < &a + &c);
        if !a.is_zero() {
            prop_assert!(&a * &b < &a * &c);
        }
    }

    #[test]
    fn order_is_total_and_consistent(a in below_omega_omega_plus(), b in below_omega_omega_plus()) {
        let lt = a < b;
        let gt = a > b;
        let eq = a == b;
        prop_assert_eq!(lt as u8 + gt as u8 + eq as u8, 1);
        prop_assert!(a <= &a + &b);
    }

    #[test]
    fn display_round_trips(a in below_omega_omega_plus()) {
        prop_assert_eq!(a.to_string().parse::<Ordinal>().unwrap(), a);
    }

    #[test]
    fn fundamental_sequences_increase_below_the_limit(b in below_omega_omega_plus(), e in 1u64..4, infinite in any::<bool>(), n in 1u64..20) {
        let e = if infinite { Ordinal::omega() } else { Ordinal::from(e) };
        let a = &b + &Ordinal::omega_pow(e);
        prop_assert!(a.is_limit());
        let x = a.fundamental(n).unwrap();
        let y = a.fundamental(n + 1).unwrap();
        prop_assert!(x < y && y < a);
        prop_assert!(!x.is_limit());
    }

    #[test]
    fn indecomposables_absorb_on_the_left(alpha in below_omega_omega(), k in 1u64..1000) {
        let omega = Ordinal::omega();
        prop_assert_eq!(&Ordinal::from(k) * &omega, omega.clone());
        let a = Ordinal::omega_pow(omega);
        let alpha = alpha.successor();
        prop_assert_eq!(&alpha * &a, a.clone());
        prop_assert!(a.is_multiplicatively_indecomposable());
    }
}

/// Every ordinal below ω³ with coefficients at most 3.
fn below_omega_cubed() -> Vec<Ordinal> {
    let mut out = Vec::new();
    for c2 in 0..=3u64 {
        for c1 in 0..=3u64 {
            for c0 in 0..=3u64 {
                out.push(format!("w^(2)*{c2} + w*{c1} + {c0}").parse().unwrap());
            }
        }
    }
    out
}

#[test]
fn fundamental_sequences_are_cofinal() {
    let limits: Vec<Ordinal> = ["w", "w*2", "w^(2)", "w^(2)*2 + w", "w^(3)", "w^(w)"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for a in &limits {
        for b in below_omega_cubed().into_iter().filter(|b| b < a) {
            assert!((1..=16).any(|n| b < a.fundamental(n).unwrap()), "{b} not below a[n] for {a}");
        }
    }
}
