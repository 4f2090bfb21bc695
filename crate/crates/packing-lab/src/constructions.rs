//! Finite truncations of two constructions: a binary-product generator of
//! 2^depth pairwise-disjoint translates driven by holes in the difference
//! set, and the two-sided scale construction Σ₀/Σ₁ whose pieces each pack
//! exponentially many disjoint translates while their union meets every
//! translate of itself.
//!
//! Every inequality the constructions rely on is asserted at build time,
//! and every produced witness ships with a directly verified certificate;
//! an inductive argument that is only valid in the limit is never trusted
//! at finite scale.

use serde::Serialize;

use crate::correlation::{
    covers, cross_correlation, difference_set, dilate, sumset, Method,
};
use crate::group::{DenseSet, Elem, Group, GroupSpec, MetricKind, Norm};
use crate::{Error, Result};

/// Scale ratio between consecutive levels, exactly 2^6.
pub const SCALE_RATIO: u64 = 64;
/// m = BASE_FACTOR · ratio^(levels−1), which makes the finest scale 1.
pub const BASE_FACTOR: u64 = 16;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalMode {
    /// Keep the last level separated; coverage holds up to δ = 7·`eps[last]`.
    Sparse,
    /// Replace the last level by its full ball; coverage becomes exact.
    Dense,
}

impl std::str::FromStr for TerminalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(TerminalMode::Sparse),
            "dense" => Ok(TerminalMode::Dense),
            other => Err(Error::Input(format!("unknown terminal mode `{other}`"))),
        }
    }
}

/// A named machine-checked fact attached to a report.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Certificate {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Certificate { name: name.into(), ok, detail: detail.into() }
    }
}

/// The geometry driving the scale construction: `eps[n] = m / (16·64^n)`,
/// so consecutive scales have exact ratio 64 and eps[levels−1] = 1.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSchedule {
    pub dim: usize,
    pub levels: usize,
    pub m: u64,
    pub eps: Vec<u64>,
    pub terminal: TerminalMode,
    #[serde(skip)]
    element_limit: usize,
}

pub fn make_schedule(dim: usize, levels: usize, terminal: TerminalMode) -> Result<ScaleSchedule> {
    make_schedule_limited(dim, levels, terminal, crate::group::DEFAULT_ELEMENT_LIMIT)
}

pub fn make_schedule_limited(
    dim: usize,
    levels: usize,
    terminal: TerminalMode,
    element_limit: usize,
) -> Result<ScaleSchedule> {
    if dim < 1 {
        return Err(Error::Input("schedule needs dim ≥ 1".into()));
    }
    if levels < 1 {
        return Err(Error::Input("schedule needs levels ≥ 1".into()));
    }
    let m = SCALE_RATIO
        .checked_pow(levels as u32 - 1)
        .and_then(|p| p.checked_mul(BASE_FACTOR))
        .ok_or_else(|| Error::SizeGuard("schedule modulus overflows".into()))?;
    let mut eps = Vec::with_capacity(levels);
    let mut e = m / BASE_FACTOR;
    for _ in 0..levels {
        eps.push(e);
        e /= SCALE_RATIO;
    }
    let sched = ScaleSchedule { dim, levels, m, eps, terminal, element_limit };
    sched.group()?; // runs the size guard
    let certs = sched.inequality_certificates();
    let failed: Vec<&Certificate> = certs.iter().filter(|c| !c.ok).collect();
    if !failed.is_empty() {
        return Err(Error::Verification(format!(
            "schedule inequality failed: {}",
            failed.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(sched)
}

impl ScaleSchedule {
    pub fn group(&self) -> Result<Group> {
        Group::with_element_limit(GroupSpec::cyclic(vec![self.m; self.dim]), self.element_limit)
    }

    /// Exact integer form of every inequality the construction's
    /// correctness argument uses, instantiated with ratio 64.
    pub fn inequality_certificates(&self) -> Vec<Certificate> {
        let mut certs = Vec::new();
        certs.push(Certificate::new(
            "finest-scale-is-one",
            self.eps[self.levels - 1] == 1,
            format!("eps[{}] = {}", self.levels - 1, self.eps[self.levels - 1]),
        ));
        for n in 1..self.levels {
            certs.push(Certificate::new(
                format!("ratio-exact-{n}"),
                self.eps[n] * SCALE_RATIO == self.eps[n - 1],
                format!("64·eps[{n}] = {} vs eps[{}] = {}", 64 * self.eps[n], n - 1, self.eps[n - 1]),
            ));
            certs.push(Certificate::new(
                format!("annulus-nonempty-{n}"),
                33 * self.eps[n] < self.eps[n - 1],
                format!("33·eps[{n}] = {} < eps[{}] = {}", 33 * self.eps[n], n - 1, self.eps[n - 1]),
            ));
        }
        // Same-parity geometric tails: 2·Σ_{k≥n, k≡n (2)} 8·eps[k] ≤ 32·eps[n].
        for n in 0..self.levels {
            let tail: u64 = (n..self.levels).step_by(2).map(|k| self.eps[k]).sum();
            certs.push(Certificate::new(
                format!("parity-tail-{n}"),
                16 * tail <= 32 * self.eps[n],
                format!("16·Σ eps[{n}::2] = {} ≤ 32·eps[{n}] = {}", 16 * tail, 32 * self.eps[n]),
            ));
        }
        for n in 0..self.levels - 1 {
            // 2·eps[n] − 32·eps[n+1] ≥ (3/2)·eps[n], as integers.
            let lhs = 2 * self.eps[n] - 32 * self.eps[n + 1];
            certs.push(Certificate::new(
                format!("separation-survives-tail-{n}"),
                2 * lhs >= 3 * self.eps[n],
                format!("2·(2·eps[{n}] − 32·eps[{}]) = {} ≥ 3·eps[{n}] = {}", n + 1, 2 * lhs, 3 * self.eps[n]),
            ));
            certs.push(Certificate::new(
                format!("branch-sums-distinct-{n}"),
                self.eps[n] > 32 * self.eps[n + 1],
                format!("eps[{n}] = {} > 32·eps[{}] = {}", self.eps[n], n + 1, 32 * self.eps[n + 1]),
            ));
        }
        certs
    }
}

/// Per-level separated sets `H[n]` and the norm-5·`eps[n]` shift elements.
#[derive(Clone, Debug)]
pub struct LevelSets {
    pub sets: Vec<DenseSet>,
    /// `shifts[n]` for n ≥ 1 is the canonical element (5·`eps[n]`, 0, …, 0).
    pub shifts: Vec<Option<Elem>>,
}

pub fn build_levels(sched: &ScaleSchedule) -> Result<LevelSets> {
    let group = sched.group()?;
    let mut sets = Vec::with_capacity(sched.levels);
    let mut shifts = Vec::with_capacity(sched.levels);
    for n in 0..sched.levels {
        let region = if n == 0 {
            group.full_set()
        } else {
            group.ball(Norm(8 * sched.eps[n - 1]))
        };
        let shift = if n == 0 {
            None
        } else {
            let mut coords = vec![0u64; sched.dim];
            coords[0] = 5 * sched.eps[n];
            Some(group.elem(coords)?)
        };
        let dense_terminal = sched.terminal == TerminalMode::Dense && n == sched.levels - 1;
        let set = if dense_terminal {
            region
        } else {
            let mut seeds = vec![group.identity()];
            if let Some(h) = &shift {
                seeds.push(h.clone());
            }
            group.maximal_separated(&region, Norm(2 * sched.eps[n]), &seeds)?
        };
        sets.push(set);
        shifts.push(shift);
    }
    Ok(LevelSets { sets, shifts })
}

/// Σ₀ = sums over even levels, Σ₁ = −(sums over odd levels), C = Σ₀ ∪ Σ₁.
/// Construction verifies the annulus-avoidance invariants before
/// returning; a violation means a schedule or constants bug.
#[derive(Clone, Debug)]
pub struct SigmaPair {
    pub schedule: ScaleSchedule,
    pub levels: LevelSets,
    pub a: DenseSet,
    pub b: DenseSet,
    pub c: DenseSet,
    /// Π `|H[even]|` and Π `|H[odd]|`; equality with |A| (resp. |B|) says all
    /// level sums are distinct.
    pub even_product: u64,
    pub odd_product: u64,
    pub certificates: Vec<Certificate>,
}

pub fn sigma_sets(sched: &ScaleSchedule, levels: &LevelSets) -> Result<SigmaPair> {
    let group = sched.group()?;
    let mut a = DenseSet::from_indices(group.clone(), [0usize]);
    let mut even_product = 1u64;
    for n in (0..sched.levels).step_by(2) {
        a = sumset(&a, &levels.sets[n])?;
        even_product *= levels.sets[n].cardinality() as u64;
    }
    let mut b_raw = DenseSet::from_indices(group.clone(), [0usize]);
    let mut odd_product = 1u64;
    for n in (1..sched.levels).step_by(2) {
        b_raw = sumset(&b_raw, &levels.sets[n])?;
        odd_product *= levels.sets[n].cardinality() as u64;
    }
    let b = b_raw.negate();
    let c = a.union(&b);

    let mut certificates = sched.inequality_certificates();
    let da = difference_set(&a)?;
    let mut k = 0;
    while 2 * k < sched.levels - 1 {
        let ann = group.annulus(Norm(33 * sched.eps[2 * k + 1]), Norm(sched.eps[2 * k]))?;
        let hits = da.intersection_count(&ann);
        certificates.push(Certificate::new(
            format!("even-annulus-avoidance-{k}"),
            hits == 0,
            format!(
                "|(Σ₀−Σ₀) ∩ [{}, {})| = {hits}, annulus size {}",
                33 * sched.eps[2 * k + 1],
                sched.eps[2 * k],
                ann.cardinality()
            ),
        ));
        if ann.is_empty() {
            return Err(Error::Verification(format!("even annulus {k} is empty")));
        }
        if hits != 0 {
            return Err(Error::Verification(format!(
                "difference set of Σ₀ meets its annulus {k} in {hits} points"
            )));
        }
        k += 1;
    }
    if sched.levels >= 2 {
        let db = difference_set(&b)?;
        let mut k = 0;
        while 2 * k + 2 < sched.levels {
            let ann = group.annulus(Norm(33 * sched.eps[2 * k + 2]), Norm(sched.eps[2 * k + 1]))?;
            let hits = db.intersection_count(&ann);
            certificates.push(Certificate::new(
                format!("odd-annulus-avoidance-{k}"),
                hits == 0,
                format!(
                    "|(Σ₁−Σ₁) ∩ [{}, {})| = {hits}",
                    33 * sched.eps[2 * k + 2],
                    sched.eps[2 * k + 1]
                ),
            ));
            if hits != 0 {
                return Err(Error::Verification(format!(
                    "difference set of Σ₁ meets its annulus {k} in {hits} points"
                )));
            }
            k += 1;
        }
    }
    Ok(SigmaPair {
        schedule: sched.clone(),
        levels: levels.clone(),
        a,
        b,
        c,
        even_product,
        odd_product,
        certificates,
    })
}

/// The full labeled binary tree of one inductive walk toward `g`,
/// together with its certified witness set D0 ⊆ Σ₀ ∩ (g + Σ₁ [+ ball]).
#[derive(Clone, Debug)]
pub struct TreeWitness {
    pub g: Elem,
    pub depth: usize,
    /// `nodes[n][p]` is the level-n point on the path encoded by p's bits
    /// (most significant bit first).
    pub nodes: Vec<Vec<Elem>>,
    /// Even-level branch sums over completed branches (terminal bit 0).
    pub d0: DenseSet,
    /// Largest ‖g − Σ x‖ over completed branches; 0 in dense terminal mode.
    pub max_leaf_remainder: Norm,
    pub conditions_checked: usize,
}

fn nearest_in_level(group: &Group, level: &[usize], level_set: &DenseSet, target: usize) -> usize {
    if level_set.contains_index(target) {
        return target;
    }
    let mut best = usize::MAX;
    let mut best_dist = Norm(u64::MAX);
    for &x in level {
        let d = group.dist_index(x, target);
        if d < best_dist || (d == best_dist && x < best) {
            best = x;
            best_dist = d;
        }
    }
    best
}

pub fn tree_walk(g: &Elem, pair: &SigmaPair) -> Result<TreeWitness> {
    let sched = &pair.schedule;
    let group = sched.group()?;
    let gi = group.index_of(&group.elem(g.coords.clone())?);
    let l = sched.levels;
    let level_indices: Vec<Vec<usize>> =
        pair.levels.sets.iter().map(|s| s.iter_indices().collect()).collect();
    let mut checked = 0usize;
    let mut check = |ok: bool, what: String| -> Result<()> {
        checked += 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Verification(what))
        }
    };

    // Level 0: one node within 2·eps[0] of g, which maximality guarantees.
    let x0 = nearest_in_level(&group, &level_indices[0], &pair.levels.sets[0], gi);
    check(
        group.dist_index(x0, gi) < Norm(2 * sched.eps[0]),
        format!("no level-0 point within 2·eps[0] of {g}"),
    )?;
    let mut nodes_idx: Vec<Vec<usize>> = vec![vec![x0]];
    let mut rem: Vec<usize> = vec![group.sub_index(gi, x0)];
    check(
        group.norm_index(rem[0]) < Norm(7 * sched.eps[0]),
        "condition (3) fails at the root".into(),
    )?;

    for n in 1..l {
        let h = pair.levels.shifts[n].as_ref().expect("levels ≥ 1 have shifts");
        let hi = group.index_of(h);
        let eps_n = sched.eps[n];
        let mut new_nodes = Vec::with_capacity(2 * nodes_idx[n - 1].len());
        let mut new_rem = Vec::with_capacity(2 * rem.len());
        for (p, &r) in rem.iter().enumerate() {
            let t0 = r;
            let t1 = group.add_index(r, hi);
            let x_left = nearest_in_level(&group, &level_indices[n], &pair.levels.sets[n], t0);
            let x_right = nearest_in_level(&group, &level_indices[n], &pair.levels.sets[n], t1);
            check(
                group.dist_index(x_left, t0) < Norm(2 * eps_n),
                format!("no level-{n} point within 2·eps of remainder (node {p})"),
            )?;
            check(
                group.dist_index(x_right, t1) < Norm(2 * eps_n),
                format!("no level-{n} point within 2·eps of shifted remainder (node {p})"),
            )?;
            // condition (1): nodes live in the level ball
            check(
                group.norm_index(x_left) < Norm(8 * sched.eps[n - 1])
                    && group.norm_index(x_right) < Norm(8 * sched.eps[n - 1]),
                format!("condition (1) fails at level {n}"),
            )?;
            // condition (2): sibling separation
            check(
                group.dist_index(x_left, x_right) > Norm(eps_n),
                format!("condition (2) fails at level {n}, node {p}"),
            )?;
            for x in [x_left, x_right] {
                let r_child = group.sub_index(r, x);
                // condition (3): remainder bound
                check(
                    group.norm_index(r_child) < Norm(7 * eps_n),
                    format!("condition (3) fails at level {n}, node {p}"),
                )?;
                new_nodes.push(x);
                new_rem.push(r_child);
            }
        }
        nodes_idx.push(new_nodes);
        rem = new_rem;
    }

    // Completed branches end with terminal bit 0; the bit-1 sibling exists
    // to witness condition (2) at the last level. Their even-level sums
    // form D0, landing in Σ₀ exactly and in g + Σ₁ up to the remainder.
    let leaves = nodes_idx[l - 1].len();
    let mut d0 = DenseSet::empty(group.clone());
    let mut distinct = 0usize;
    let mut max_final = Norm(0);
    for leaf in 0..leaves {
        if l >= 2 && leaf & 1 == 1 {
            continue;
        }
        let mut even_sum = 0usize;
        let mut odd_sum = 0usize;
        for n in 0..l {
            let x = nodes_idx[n][leaf >> (l - 1 - n)];
            if n % 2 == 0 {
                even_sum = group.add_index(even_sum, x);
            } else {
                odd_sum = group.add_index(odd_sum, x);
            }
        }
        check(pair.a.contains_index(even_sum), "branch even-sum escapes Σ₀".into())?;
        check(
            pair.b.contains_index(group.neg_index(odd_sum)),
            "negated branch odd-sum escapes Σ₁".into(),
        )?;
        let r_leaf = rem[leaf];
        if sched.terminal == TerminalMode::Dense {
            check(r_leaf == 0, "completed branch has nonzero remainder in dense mode".into())?;
        }
        max_final = max_final.max(group.norm_index(r_leaf));
        if !d0.contains_index(even_sum) {
            distinct += 1;
        }
        d0.insert_index(even_sum);
    }
    let expected = if l >= 2 { 1usize << (l - 2) } else { 1 };
    check(
        distinct == expected,
        format!("D0 has {distinct} distinct branch sums, expected {expected}"),
    )?;

    let nodes = nodes_idx
        .into_iter()
        .map(|lvl| lvl.into_iter().map(|i| group.elem_at(i)).collect())
        .collect();
    Ok(TreeWitness {
        g: g.clone(),
        depth: l,
        nodes,
        d0,
        max_leaf_remainder: max_final,
        conditions_checked: checked,
    })
}

/// Output of the binary-product generator: branch points b₀ > b₁ > …,
/// their radii chain, and S = all subset sums with a verified pairwise
/// disjointness certificate.
#[derive(Clone, Debug)]
pub struct PerfectTree {
    pub branch_points: Vec<Elem>,
    /// (v, u) per accepted depth with 3u ≤ v ≤ previous u.
    pub radii: Vec<(u64, u64)>,
    pub s: DenseSet,
    pub pairs_verified: usize,
}

impl PerfectTree {
    pub fn depth(&self) -> usize {
        self.branch_points.len()
    }
}

/// Radius of ball(v) + ball(v) under each metric.
fn double_ball_radius(group: &Group, v: u64) -> u64 {
    match group.metric() {
        MetricKind::CyclicQuotient => 2 * v - 1,
        MetricKind::DyadicUltrametric => v,
    }
}

/// At each depth, searches the current ball for a branch point b with
/// (b + ball(v) + ball(v)) ∩ (A−A) = ∅ and ‖b‖ ≥ 2v, for the largest
/// admissible v; then recurses into ball(⌊v/3⌋). The candidate of maximal
/// norm (ties: smallest canonical index) is taken, so the output is
/// deterministic. The final disjointness check on all 2^depth subset sums
/// is ground truth; the radius chain alone is only sufficient in the limit.
pub fn perfect_tree_generator(a: &DenseSet, max_depth: usize) -> Result<PerfectTree> {
    if a.is_empty() {
        return Err(Error::Input("perfect_tree_generator of the empty set".into()));
    }
    let group = a.group().clone();
    let d = difference_set(a)?;
    let mut u = group.diameter().0 + 1;
    let mut branch: Vec<usize> = Vec::new();
    let mut radii: Vec<(u64, u64)> = Vec::new();

    while branch.len() < max_depth && u >= 1 {
        let ball_u = group.ball(Norm(u));
        let candidates = |v: u64| -> DenseSet {
            let blocked = dilate(&d, Norm(double_ball_radius(&group, v)));
            ball_u.minus(&group.ball(Norm(2 * v))).minus(&blocked)
        };
        if candidates(1).is_empty() {
            break;
        }
        let mut lo = 1u64;
        let mut hi = u;
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if candidates(mid).is_empty() {
                hi = mid - 1;
            } else {
                lo = mid;
            }
        }
        let v = lo;
        let cand = candidates(v);
        let mut best = usize::MAX;
        let mut best_norm = Norm(0);
        for i in cand.iter_indices() {
            let n = group.norm_index(i);
            if n > best_norm {
                best_norm = n;
                best = i;
            }
        }
        branch.push(best);
        radii.push((v, v / 3));
        u = v / 3;
    }

    let mut sums: Vec<usize> = vec![0];
    for &b in &branch {
        let shifted: Vec<usize> = sums.iter().map(|&s| group.add_index(s, b)).collect();
        sums.extend(shifted);
    }
    let s = DenseSet::from_indices(group.clone(), sums.iter().copied());
    if s.cardinality() != 1 << branch.len() {
        return Err(Error::Verification(format!(
            "subset sums collide: {} distinct of {} expected",
            s.cardinality(),
            1 << branch.len()
        )));
    }
    // Ground-truth certificate: every pair of translates checked directly.
    let members: Vec<usize> = a.iter_indices().collect();
    let mut pairs = 0usize;
    for (k, &x) in sums.iter().enumerate() {
        for &y in &sums[..k] {
            pairs += 1;
            let diff = group.sub_index(y, x);
            if diff == 0 {
                continue;
            }
            for &m in &members {
                if a.contains_index(group.sub_index(m, diff)) {
                    return Err(Error::Verification(format!(
                        "translates at {} and {} share a point",
                        group.elem_at(x),
                        group.elem_at(y)
                    )));
                }
            }
        }
    }
    Ok(PerfectTree {
        branch_points: branch.iter().map(|&i| group.elem_at(i)).collect(),
        radii,
        s,
        pairs_verified: pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Densities {
    pub group_size: u64,
    pub a_count: u64,
    pub b_count: u64,
    pub c_count: u64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub size: u64,
    pub depth: usize,
    pub branch_points: Vec<Elem>,
    pub elements: Vec<Elem>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Coverage {
    pub delta: u64,
    pub ok: bool,
}

/// Full report of the union pipeline: disjoint-translate witnesses for
/// both sides, coverage of the correlation support, and the collapse of
/// the union's packing index to 1.
#[derive(Clone, Debug, Serialize)]
pub struct UnionReport {
    pub schedule: ScaleSchedule,
    pub mode: TerminalMode,
    pub ratio: u64,
    pub densities: Densities,
    pub witness_a: WitnessSummary,
    pub witness_b: WitnessSummary,
    pub coverage: Coverage,
    /// min over g of |Σ₀ ∩ (g + Σ₁)|.
    pub theta: i64,
    /// Exact t = 0 packing index of C, known once C−C = G.
    pub ind_c: Option<u64>,
    /// Ind^(t)(C) = 1 for every t ≤ this threshold (dense mode, θ ≥ 1).
    pub almost_threshold: Option<u64>,
    pub certificates: Vec<Certificate>,
}

fn witness_summary(tree: &PerfectTree) -> WitnessSummary {
    WitnessSummary {
        size: tree.s.cardinality() as u64,
        depth: tree.depth(),
        branch_points: tree.branch_points.clone(),
        elements: tree.s.elems(),
    }
}

pub fn union_demo(sched: &ScaleSchedule, max_depth: usize) -> Result<UnionReport> {
    if sched.levels < 3 {
        return Err(Error::Input("union demo needs levels ≥ 3".into()));
    }
    let levels = build_levels(sched)?;
    let pair = sigma_sets(sched, &levels)?;
    let mut certificates = pair.certificates.clone();

    let tree_a = perfect_tree_generator(&pair.a, max_depth)?;
    certificates.push(Certificate::new(
        "witness-a-disjoint",
        true,
        format!("|S_A| = {} over {} verified pairs", tree_a.s.cardinality(), tree_a.pairs_verified),
    ));
    let tree_b = perfect_tree_generator(&pair.b, max_depth)?;
    certificates.push(Certificate::new(
        "witness-b-disjoint",
        true,
        format!("|S_B| = {} over {} verified pairs", tree_b.s.cardinality(), tree_b.pairs_verified),
    ));

    let corr = cross_correlation(&pair.a, &pair.b, Method::Auto)?;
    let theta = corr.min();
    let group = sched.group()?;
    let (coverage, ind_c, almost_threshold) = match sched.terminal {
        TerminalMode::Dense => {
            let ok = theta >= 1;
            if !ok {
                return Err(Error::Verification(
                    "dense-terminal coverage failed: some translate misses Σ₀".into(),
                ));
            }
            certificates.push(Certificate::new(
                "coverage-exact",
                ok,
                format!("min_g |Σ₀ ∩ (g+Σ₁)| = {theta}"),
            ));
            let dc = difference_set(&pair.c)?;
            let full = dc.is_full();
            certificates.push(Certificate::new(
                "difference-set-of-union-covers",
                full,
                format!("|C−C| = {} of {}", dc.cardinality(), group.size()),
            ));
            if !full {
                return Err(Error::Verification("C−C is not the whole group".into()));
            }
            (Coverage { delta: 0, ok }, Some(1), Some(theta as u64 - 1))
        }
        TerminalMode::Sparse => {
            let delta = 7 * sched.eps[sched.levels - 1];
            let support = corr.support();
            let ok = covers(&support, Norm(delta));
            certificates.push(Certificate::new(
                "coverage-within-delta",
                ok,
                format!("support of the correlation covers G at δ = {delta}"),
            ));
            if !ok {
                return Err(Error::Verification(format!(
                    "sparse-terminal coverage failed at δ = {delta}"
                )));
            }
            (Coverage { delta, ok }, None, None)
        }
    };

    Ok(UnionReport {
        schedule: sched.clone(),
        mode: sched.terminal,
        ratio: SCALE_RATIO,
        densities: Densities {
            group_size: group.size() as u64,
            a_count: pair.a.cardinality() as u64,
            b_count: pair.b.cardinality() as u64,
            c_count: pair.c.cardinality() as u64,
            a: pair.a.density(),
            b: pair.b.density(),
            c: pair.c.density(),
        },
        witness_a: witness_summary(&tree_a),
        witness_b: witness_summary(&tree_b),
        coverage,
        theta,
        ind_c,
        almost_threshold,
        certificates,
    })
}
