//! Packing indices: exact values by clique search, heuristic lower
//! bounds, the structural almost-packing index, sharp indices and
//! exhaustive spectrum scans.
//!
//! The exact solver reduces to maximum clique on a Cayley graph. A family
//! {x+A} with pairwise intersections ≤ t is described by its difference
//! structure alone: S is valid iff S−S∖{0} lands in the connection set
//! F_t = {g ≠ 0 : |A ∩ (g+A)| ≤ t}. Translation invariance pins 0 ∈ S, so
//! the answer is 1 + ω(Cay(G, F_t) restricted to F_t).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{autocorrelation, counting_bound, neighborhood_bound, Method};
use crate::group::{DenseSet, Elem, Group};
use crate::{Error, Result};

/// Default vertex-count guard for the exact solver.
pub const DEFAULT_EXACT_LIMIT: usize = 4096;
/// Subset-enumeration guards for spectrum scans.
pub const SPECTRUM_LIMIT: usize = 16;
pub const SPECTRUM_LIMIT_REDUCED: usize = 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMethod {
    Exact,
    Heuristic,
}

/// Upper bounds for the t = 0 index, reported with every computation.
#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub counting: u64,
    pub neighborhood: u64,
}

/// Certified output of a packing-index computation.
#[derive(Clone, Debug, Serialize)]
pub struct PackingReport {
    pub set_descriptor: String,
    pub threshold: u64,
    pub value: u64,
    pub sharp: u64,
    pub witness: Vec<Elem>,
    pub method: IndexMethod,
    pub bounds: Bounds,
}

/// True iff all pairs of translates {x+A}, x ∈ S intersect in ≤ t points.
/// For t = 0 this is the disjoint-family condition.
pub fn disjointness_witness_check(a: &DenseSet, s: &[Elem], t: u64) -> Result<bool> {
    let group = a.group();
    let mut idx = Vec::with_capacity(s.len());
    for e in s {
        let i = group.index_of(&group.elem(e.coords.clone())?);
        if idx.contains(&i) {
            return Err(Error::Input(format!("witness element {e} repeated")));
        }
        idx.push(i);
    }
    let members: Vec<usize> = a.iter_indices().collect();
    let pair_cost = idx.len() as u64 * idx.len() as u64 * members.len().max(1) as u64;
    if pair_cost > 1 << 26 {
        // Large witnesses: the pairwise condition depends only on the set
        // of differences, so test |A ∩ (g+A)| ≤ t over S − S ∖ {0}.
        let s_set = DenseSet::from_indices(group.clone(), idx.iter().copied());
        let diffs = crate::correlation::difference_set(&s_set)?;
        let ac = autocorrelation(a, Method::Auto)?;
        for g in diffs.iter_indices() {
            if g != 0 && ac.value_at(g) > t as i64 {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    for (k, &x) in idx.iter().enumerate() {
        for &y in &idx[..k] {
            let g = group.sub_index(y, x);
            // |(x+A) ∩ (y+A)| = |A ∩ ((y−x)+A)|
            let mut count = 0u64;
            for &m in &members {
                if a.contains_index(group.sub_index(m, g)) {
                    count += 1;
                    if count > t {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Maximum clique by branch and bound with greedy-coloring upper bounds.
/// Vertex order and tie-breaks are fixed, so value and witness are
/// deterministic.
struct CliqueSolver {
    n: usize,
    adj: Vec<Vec<u64>>,
}

impl CliqueSolver {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        CliqueSolver { n, adj: vec![vec![0u64; words]; n] }
    }

    fn connect(&mut self, i: usize, j: usize) {
        self.adj[i][j / 64] |= 1 << (j % 64);
        self.adj[j][i / 64] |= 1 << (i % 64);
    }

    fn solve(&self) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        let words = self.adj[0].len();
        // Greedy clique over ascending vertex index seeds the bound.
        let mut best: Vec<usize> = Vec::new();
        let mut mask = vec![!0u64; words];
        mask_tail(&mut mask, self.n);
        for v in 0..self.n {
            if get_bit(&mask, v) {
                and_into(&mut mask, &self.adj[v]);
                best.push(v);
            }
        }
        let mut cur = Vec::new();
        let mut all = vec![!0u64; words];
        mask_tail(&mut all, self.n);
        self.expand(&mut cur, all, &mut best);
        best.sort_unstable();
        best
    }

    fn expand(&self, cur: &mut Vec<usize>, p: Vec<u64>, best: &mut Vec<usize>) {
        if is_empty(&p) {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
            return;
        }
        // Greedy coloring in ascending index order; the class number of a
        // vertex bounds any clique inside the candidates up to it.
        let mut order: Vec<usize> = Vec::new();
        let mut colors: Vec<usize> = Vec::new();
        let mut classes: Vec<Vec<u64>> = Vec::new();
        let mut class_members: Vec<Vec<usize>> = Vec::new();
        for v in iter_bits(&p) {
            let mut placed = false;
            for (c, class) in classes.iter_mut().enumerate() {
                if !intersects(class, &self.adj[v]) {
                    set_bit(class, v);
                    class_members[c].push(v);
                    placed = true;
                    break;
                }
            }
            if !placed {
                let mut class = vec![0u64; p.len()];
                set_bit(&mut class, v);
                classes.push(class);
                class_members.push(vec![v]);
            }
        }
        for (c, members) in class_members.iter().enumerate() {
            for &v in members {
                order.push(v);
                colors.push(c + 1);
            }
        }
        let mut rem = p;
        for i in (0..order.len()).rev() {
            let v = order[i];
            if cur.len() + colors[i] <= best.len() {
                return;
            }
            clear_bit(&mut rem, v);
            let mut np = rem.clone();
            and_into(&mut np, &self.adj[v]);
            cur.push(v);
            self.expand(cur, np, best);
            cur.pop();
        }
    }
}

fn get_bit(w: &[u64], i: usize) -> bool {
    w[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(w: &mut [u64], i: usize) {
    w[i / 64] |= 1 << (i % 64);
}

fn clear_bit(w: &mut [u64], i: usize) {
    w[i / 64] &= !(1 << (i % 64));
}

fn and_into(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x &= y;
    }
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn is_empty(a: &[u64]) -> bool {
    a.iter().all(|&x| x == 0)
}

fn mask_tail(w: &mut [u64], n: usize) {
    if !n.is_multiple_of(64) {
        let last = w.len() - 1;
        w[last] &= (1u64 << (n % 64)) - 1;
    }
}

fn iter_bits(w: &[u64]) -> impl Iterator<Item = usize> + '_ {
    w.iter().enumerate().flat_map(|(k, &bits)| {
        let mut bits = bits;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(k * 64 + b)
            }
        })
    })
}

fn describe(a: &DenseSet) -> String {
    format!("{} |A|={}", a.group(), a.cardinality())
}

fn report_bounds(a: &DenseSet) -> Result<Bounds> {
    Ok(Bounds { counting: counting_bound(a)?, neighborhood: neighborhood_bound(a)? })
}

fn finish_report(
    a: &DenseSet,
    t: u64,
    witness_idx: Vec<usize>,
    method: IndexMethod,
) -> Result<PackingReport> {
    let group = a.group();
    let mut idx = witness_idx;
    idx.sort_unstable();
    let witness: Vec<Elem> = idx.iter().map(|&i| group.elem_at(i)).collect();
    if !disjointness_witness_check(a, &witness, t)? {
        return Err(Error::Verification(
            "computed witness fails the disjointness check".into(),
        ));
    }
    Ok(PackingReport {
        set_descriptor: describe(a),
        threshold: t,
        value: witness.len() as u64,
        sharp: witness.len() as u64 + 1,
        witness,
        method,
        bounds: report_bounds(a)?,
    })
}

/// Exact thresholded packing index with a maximum witness.
pub fn packing_index_exact(a: &DenseSet, t: u64) -> Result<PackingReport> {
    packing_index_exact_with_limit(a, t, DEFAULT_EXACT_LIMIT)
}

pub fn packing_index_exact_with_limit(a: &DenseSet, t: u64, limit: usize) -> Result<PackingReport> {
    if a.is_empty() {
        return Err(Error::Input("packing index of the empty set".into()));
    }
    let group = a.group().clone();
    if group.size() > limit {
        return Err(Error::SizeGuard(format!(
            "|G| = {} exceeds the exact-solver guard {limit}; use packing_index_lower",
            group.size()
        )));
    }
    let ac = autocorrelation(a, Method::Auto)?;
    let f: Vec<usize> = (1..group.size()).filter(|&g| ac.value_at(g) <= t as i64).collect();
    if f.is_empty() {
        return finish_report(a, t, vec![0], IndexMethod::Exact);
    }
    let in_f = DenseSet::from_indices(group.clone(), f.iter().copied());
    let mut solver = CliqueSolver::new(f.len());
    for i in 0..f.len() {
        for j in 0..i {
            if in_f.contains_index(group.sub_index(f[i], f[j])) {
                solver.connect(i, j);
            }
        }
    }
    let clique = solver.solve();
    let mut witness: Vec<usize> = vec![0];
    witness.extend(clique.iter().map(|&v| f[v]));
    finish_report(a, t, witness, IndexMethod::Exact)
}

/// Greedy lower bound with seeded randomized restarts. The first pass
/// scans candidates by ascending (norm, index); each restart reshuffles.
/// The returned witness is always re-verified.
pub fn packing_index_lower(a: &DenseSet, t: u64, effort: u32, seed: u64) -> Result<PackingReport> {
    if a.is_empty() {
        return Err(Error::Input("packing index of the empty set".into()));
    }
    let group = a.group().clone();
    let ac = autocorrelation(a, Method::Auto)?;
    let f_t = DenseSet::from_indices(
        group.clone(),
        (1..group.size()).filter(|&g| ac.value_at(g) <= t as i64),
    );
    let mut candidates: Vec<usize> = f_t.iter_indices().collect();
    candidates.sort_by_key(|&g| (group.norm_index(g), g));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<usize> = Vec::new();
    let passes = effort.max(1);
    for pass in 0..passes {
        if pass > 0 {
            candidates.shuffle(&mut rng);
        }
        // compat holds exactly the g compatible with everything chosen so
        // far; each acceptance intersects it with the translated F_t.
        let mut s: Vec<usize> = vec![0];
        let mut compat = f_t.clone();
        for &g in &candidates {
            if compat.contains_index(g) {
                s.push(g);
                compat = compat.intersect(&f_t.translate_index(g));
            }
        }
        if s.len() > best.len() {
            best = s;
        }
    }
    finish_report(a, t, best, IndexMethod::Heuristic)
}

/// |G| / |Per(A)|: the literal finite reading of the almost-packing
/// index. For finite A, |xA ∩ yA| < |A| is the same as xA ≠ yA, i.e.
/// y − x outside the period subgroup, so the largest almost-disjoint
/// family is one translate per Per(A)-coset. This is also the exact
/// value of the thresholded index at t = |A| − 1.
pub fn almost_index_structural(a: &DenseSet) -> Result<u64> {
    let per = crate::correlation::period_subgroup(a)?;
    Ok(a.group().size() as u64 / per.cardinality() as u64)
}

/// Successor of the maximum: on a finite group the supremum is attained.
pub fn sharp_index(a: &DenseSet, t: u64) -> Result<u64> {
    Ok(packing_index_exact(a, t)?.value + 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub count: u64,
    /// Canonical indices of the first subset achieving the value.
    pub example: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionInfo {
    /// `|[G]₂|` where `[G]₂ = {x : 2x = 0}`.
    pub order2_subgroup: u64,
    /// `|[G]₃|`.
    pub order3_subgroup: u64,
    /// `|G / [G]₂|`.
    pub quotient2: u64,
    /// G = `[G]₃`?
    pub all_order3: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub group: String,
    pub threshold: u64,
    pub reduce_symmetry: bool,
    pub subsets_scanned: u64,
    pub histogram: BTreeMap<u64, SpectrumEntry>,
    pub torsion: TorsionInfo,
    /// Sharp values expected absent from torsion structure (4 when
    /// `|G/[G]₂|` ≤ 2, 3 when G = `[G]₃`).
    pub expected_absent: Vec<u64>,
    /// Expected-absent values that the scan nevertheless achieved.
    pub counterexamples: Vec<u64>,
}

fn torsion_info(group: &Group) -> TorsionInfo {
    let mut n2 = 0u64;
    let mut n3 = 0u64;
    for i in 0..group.size() {
        if group.add_index(i, i) == 0 {
            n2 += 1;
        }
        if group.add_index(group.add_index(i, i), i) == 0 {
            n3 += 1;
        }
    }
    TorsionInfo {
        order2_subgroup: n2,
        order3_subgroup: n3,
        quotient2: group.size() as u64 / n2,
        all_order3: n3 == group.size() as u64,
    }
}

/// Exhaustively enumerate nonempty subsets of G, compute each sharp
/// index and aggregate the achieved-value histogram. `reduce_symmetry`
/// keeps only subsets containing 0 (sharp indices are translation
/// invariant, and every subset translates to one of these).
pub fn spectrum_scan(group: &Group, t: u64, reduce_symmetry: bool) -> Result<SpectrumReport> {
    let n = group.size();
    let limit = if reduce_symmetry { SPECTRUM_LIMIT_REDUCED } else { SPECTRUM_LIMIT };
    if n > limit {
        return Err(Error::SizeGuard(format!(
            "spectrum scan over 2^{n} subsets refused (limit |G| = {limit})"
        )));
    }
    let masks: Vec<u64> = (1..(1u64 << n))
        .filter(|m| !reduce_symmetry || m & 1 == 1)
        .collect();
    let partial: Vec<(u64, u64)> = masks
        .par_iter()
        .map(|&mask| {
            let a = DenseSet::from_indices(
                group.clone(),
                (0..n).filter(|&i| mask >> i & 1 == 1),
            );
            let sharp = sharp_index(&a, t).expect("small scan stays within guards");
            (mask, sharp)
        })
        .collect();
    let mut histogram: BTreeMap<u64, SpectrumEntry> = BTreeMap::new();
    for (mask, sharp) in partial {
        let entry = histogram.entry(sharp).or_insert_with(|| SpectrumEntry {
            count: 0,
            example: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
        });
        entry.count += 1;
    }
    let torsion = torsion_info(group);
    let mut expected_absent = Vec::new();
    if torsion.quotient2 <= 2 {
        expected_absent.push(4);
    }
    if torsion.all_order3 {
        expected_absent.push(3);
    }
    let counterexamples: Vec<u64> = expected_absent
        .iter()
        .copied()
        .filter(|v| histogram.contains_key(v))
        .collect();
    Ok(SpectrumReport {
        group: group.to_string(),
        threshold: t,
        reduce_symmetry,
        subsets_scanned: masks.len() as u64,
        histogram,
        torsion,
        expected_absent,
        counterexamples,
    })
}
