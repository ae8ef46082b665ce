use opindex::families::{
    cb_index_restricted, gasparis_prefix_search, iota_symbolic, member_expr, member_with, restrict, validate_prefix,
    FamilyExpr, FinSet, PrefixSearch, Strategy as Split,
};
use opindex::ordinal::Ordinal;
use proptest::prelude::*;

const BATTERY: [&str; 8] = ["S0", "S(1)", "S(2)", "A(3)", "A(2)[A(3)]", "S(1)[A(2)]", "A(2)[S(1)]", "S(w)"];

fn battery() -> Vec<FamilyExpr> {
    BATTERY.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn membership_agrees_with_restriction() {
    for f in battery() {
        let r = restrict(&f, 12).unwrap();
        for mask in 0u32..1 << 12 {
            let e = FinSet::from_mask(mask);
            assert_eq!(member_expr(&f, &e), r.contains(&e), "{f} {e}");
        }
    }
}

#[test]
fn restrictions_are_hereditary() {
    for f in battery() {
        let r = restrict(&f, 12).unwrap();
        assert!(r.is_hereditary(), "{f}");
        for e in r.sets() {
            let m = e.to_mask();
            let mut sub = m;
            while sub != 0 {
                sub = (sub - 1) & m;
                assert!(r.contains(&FinSet::from_mask(sub)), "{f}: {e} member, subset missing");
            }
        }
    }
}

#[test]
fn greedy_split_agrees_with_exhaustive_split() {
    for f in battery() {
        for mask in 0u32..1 << 14 {
            let e = FinSet::from_mask(mask);
            assert_eq!(member_with(&f, &e, Split::Greedy), member_with(&f, &e, Split::Exhaustive), "{f} {e}");
        }
    }
}

#[test]
fn cb_index_is_monotone_and_stabilizes() {
    for f in battery() {
        let mut prev = 0;
        for n in 1..=12 {
            let c = cb_index_restricted(&restrict(&f, n).unwrap());
            assert!(c >= prev, "{f}: index drops at n = {n}");
            prev = c;
        }
        if let Some(v) = iota_symbolic(&f).unwrap().as_finite() {
            assert_eq!(prev as u64, v, "{f}");
        }
    }
    for k in 1..=6u32 {
        for n in k..=12 {
            assert_eq!(cb_index_restricted(&restrict(&FamilyExpr::Ak(k), n).unwrap()), k as usize);
        }
    }
}

#[test]
fn infinite_index_grows() {
    // The largest member of S_1 inside {1..n} is {k, …, 2k-1} with 2k - 1 ≤ n,
    // and a hereditary family loses one level per derivative.
    let s1 = FamilyExpr::schreier(Ordinal::one());
    for n in 1..=16u32 {
        assert_eq!(cb_index_restricted(&restrict(&s1, n).unwrap()), n.div_ceil(2) as usize, "n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_search_successes_revalidate(fi in 0usize..BATTERY.len(), gi in 0usize..BATTERY.len(), depth in 1u32..5) {
        let fams = battery();
        let (f, g) = (&fams[fi], &fams[gi]);
        if let Ok(PrefixSearch::Found(prefix)) = gasparis_prefix_search(f, g, depth, 24, 200_000) {
            prop_assert_eq!(prefix.len(), depth as usize);
            prop_assert!(validate_prefix(f, g, &prefix).unwrap());
            // Independent re-check of every image.
            let r = restrict(f, depth).unwrap();
            for e in r.sets() {
                let img: Vec<u32> = e.elems().iter().map(|&i| prefix[i as usize - 1]).collect();
                prop_assert!(member_expr(g, &FinSet::new(img).unwrap()));
            }
        }
    }

    #[test]
    fn spreads_of_members_are_members(fi in 0usize..BATTERY.len(), mask in 0u32..1 << 10, shift in prop::collection::vec(0u32..3, 10)) {
        let f = &battery()[fi];
        let e = FinSet::from_mask(mask);
        prop_assume!(member_expr(f, &e));
        // Push each element right while keeping the order.
        let mut spread = Vec::new();
        let mut floor = 0;
        for (i, &x) in e.elems().iter().enumerate() {
            let y = (x + shift[i]).max(floor + 1);
            spread.push(y);
            floor = y;
        }
        prop_assert!(member_expr(f, &FinSet::new(spread).unwrap()));
    }
}
