//! Brute-force oracles shared by the acceptance suite. Independent of
//! the solver path: translate sets are materialized literally and every
//! candidate family S ⊆ G is enumerated.

use packing_lab::group::{DenseSet, Group};

/// Literal bitmask of {x + a : a ∈ A}.
fn translate_mask(group: &Group, a: &DenseSet, x: usize) -> u32 {
    let mut mask = 0u32;
    for m in a.iter_indices() {
        mask |= 1 << group.add_index(x, m);
    }
    mask
}

/// Max |S| over all S ⊆ G with |（x+A) ∩ (y+A)| ≤ t pairwise, by direct
/// enumeration of all 2^|G| subsets.
pub fn brute_force_packing_index(a: &DenseSet, t: u64) -> u64 {
    let group = a.group();
    let n = group.size();
    assert!(n <= 20, "oracle is exponential in |G|");
    let translates: Vec<u32> = (0..n).map(|x| translate_mask(group, a, x)).collect();
    let conflict: Vec<u32> = (0..n)
        .map(|i| {
            let mut c = 0u32;
            for j in 0..n {
                if i != j && (translates[i] & translates[j]).count_ones() as u64 > t {
                    c |= 1 << j;
                }
            }
            c
        })
        .collect();
    let mut best = 0u64;
    for s in 1u32..(1u32 << n) {
        if u64::from(s.count_ones()) <= best {
            continue;
        }
        let mut ok = true;
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if s & conflict[i] != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            best = u64::from(s.count_ones());
        }
    }
    best
}

/// All nonempty subsets of a group as dense sets, by ascending mask.
pub fn all_subsets(group: &Group) -> impl Iterator<Item = (u32, DenseSet)> + '_ {
    let n = group.size();
    assert!(n <= 20);
    (1u32..(1u32 << n)).map(move |mask| {
        let set = DenseSet::from_indices(
            group.clone(),
            (0..n).filter(move |&i| mask >> i & 1 == 1),
        );
        (mask, set)
    })
}
