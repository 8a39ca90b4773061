//! Agglomerative hierarchical clustering.
//!
//! [`linkage`] runs single, complete or average linkage on a dissimilarity
//! matrix. [`charged_ward`] runs Ward-type clustering where the point metric is
//! an attraction-repulsion dissimilarity evaluated at cluster means, using
//! Lance-Williams style updates for `delta1`..`delta3` and exact re-evaluation
//! from maintained means for `delta4`.
//!
//! Both share one merge loop that caches, for every active cluster, its nearest
//! active cluster with a larger slot index. Ties resolve to the
//! lexicographically smallest slot pair.

use serde::{Deserialize, Serialize};

use crate::dissim::{DissimMatrix, Evaluator};
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::matrix::{sq_euclidean, Matrix};
use crate::types::{Dataset, DissimParams, Family, Partition};
use crate::wide::Wide;

/// Upper-triangle storage for pairwise values between slots.
#[derive(Clone, Debug)]
struct Condensed<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> Condensed<T> {
    fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                data.push(f(i, j));
            }
        }
        Condensed { n, data }
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.data[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = self.index(i, j);
        self.data[idx] = v;
    }
}

/// One agglomeration step. Cluster ids follow the usual convention: leaves are
/// `0..n`, the cluster created by merge `t` has id `n + t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
    /// Positivity shift added to the initial dissimilarities; heights are
    /// reported with it subtracted.
    #[serde(default)]
    shift: f64,
}

impl Dendrogram {
    pub fn new(n: usize, merges: Vec<Merge>, shift: f64) -> Result<Self> {
        let d = Dendrogram { n, merges, shift };
        d.validate()?;
        Ok(d)
    }

    /// Checks `n − 1` merges, each consuming two live clusters exactly once.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.merges.len() != self.n - 1 {
            return Err(invalid_input(format!(
                "a dendrogram over {} leaves needs {} merges, found {}",
                self.n,
                self.n.saturating_sub(1),
                self.merges.len()
            )));
        }
        let mut used = vec![false; 2 * self.n - 1];
        let mut size = vec![1usize; 2 * self.n - 1];
        for (t, m) in self.merges.iter().enumerate() {
            let id = self.n + t;
            for c in [m.a, m.b] {
                if c >= id || used[c] {
                    return Err(invalid_input(format!(
                        "merge {t} reuses or forwards cluster {c}"
                    )));
                }
                used[c] = true;
            }
            size[id] = size[m.a] + size[m.b];
            if size[id] != m.size {
                return Err(invalid_input(format!(
                    "merge {t} has wrong size {}",
                    m.size
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Merge matrix in the 1-based convention where leaves are negative
    /// (`-(leaf + 1)`) and earlier merges positive (`t + 1`).
    pub fn signed_merge_table(&self) -> Vec<(i64, i64)> {
        let conv = |c: usize| -> i64 {
            if c < self.n {
                -(c as i64 + 1)
            } else {
                (c - self.n) as i64 + 1
            }
        };
        self.merges.iter().map(|m| (conv(m.a), conv(m.b))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

/// State the merge loop drives: pairwise dissimilarities between active slots
/// and an in-place merge of slot `b` into slot `a`.
trait Agglomerable {
    fn dissimilarity(&self, a: usize, b: usize) -> f64;
    fn merge(&mut self, a: usize, b: usize, others: &[usize]);
}

struct RawMerge {
    a: usize,
    b: usize,
    value: f64,
}

struct NearestCache {
    nn: Vec<Option<usize>>,
    dist: Vec<f64>,
}

impl NearestCache {
    fn rescan<A: Agglomerable>(&mut self, state: &A, i: usize, active: &[usize]) {
        let mut best: Option<usize> = None;
        let mut best_d = f64::INFINITY;
        for &j in active.iter().filter(|&&j| j > i) {
            let d = state.dissimilarity(i, j);
            if best.is_none() || d < best_d {
                best = Some(j);
                best_d = d;
            }
        }
        self.nn[i] = best;
        self.dist[i] = best_d;
    }
}

fn agglomerate<A: Agglomerable>(state: &mut A, n: usize) -> Vec<RawMerge> {
    let mut active: Vec<usize> = (0..n).collect();
    let mut cache = NearestCache {
        nn: vec![None; n],
        dist: vec![f64::INFINITY; n],
    };
    for &i in &active {
        cache.rescan(state, i, &active);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut others = Vec::with_capacity(n);
    while active.len() > 1 {
        let mut a = usize::MAX;
        for &i in &active {
            if cache.nn[i].is_some() && (a == usize::MAX || cache.dist[i] < cache.dist[a]) {
                a = i;
            }
        }
        let b = cache.nn[a].expect("active slot with a neighbour");
        let value = cache.dist[a];

        others.clear();
        others.extend(active.iter().copied().filter(|&k| k != a && k != b));
        state.merge(a, b, &others);
        active.retain(|&k| k != b);
        merges.push(RawMerge { a, b, value });

        for &k in &active {
            if k == a {
                continue;
            }
            let stale = cache.nn[k] == Some(b) || (k < a && cache.nn[k] == Some(a));
            if stale {
                cache.rescan(state, k, &active);
            } else if k < a {
                let d = state.dissimilarity(k, a);
                let current = cache.nn[k].expect("k < a has a neighbour");
                if d < cache.dist[k] || (d == cache.dist[k] && a < current) {
                    cache.nn[k] = Some(a);
                    cache.dist[k] = d;
                }
            }
        }
        cache.rescan(state, a, &active);
    }
    merges
}

fn to_dendrogram(n: usize, raw: Vec<RawMerge>, shift: f64) -> Dendrogram {
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let merges = raw
        .into_iter()
        .enumerate()
        .map(|(t, r)| {
            let (ia, ib) = (id[r.a], id[r.b]);
            size[r.a] += size[r.b];
            id[r.a] = n + t;
            Merge {
                a: ia.min(ib),
                b: ia.max(ib),
                height: r.value - shift,
                size: size[r.a],
            }
        })
        .collect();
    Dendrogram { n, merges, shift }
}

struct LinkageState {
    table: Condensed,
    sizes: Vec<usize>,
    method: Linkage,
}

impl Agglomerable for LinkageState {
    fn dissimilarity(&self, a: usize, b: usize) -> f64 {
        self.table.get(a, b)
    }

    fn merge(&mut self, a: usize, b: usize, others: &[usize]) {
        let (na, nb) = (self.sizes[a] as f64, self.sizes[b] as f64);
        for &k in others {
            let (da, db) = (self.table.get(a, k), self.table.get(b, k));
            let v = match self.method {
                Linkage::Single => da.min(db),
                Linkage::Complete => da.max(db),
                Linkage::Average => (na * da + nb * db) / (na + nb),
            };
            self.table.set(a, k, v);
        }
        self.sizes[a] += self.sizes[b];
    }
}

/// Single, complete or average linkage on a (possibly shifted) dissimilarity matrix.
pub fn linkage(m: &DissimMatrix, method: Linkage) -> Result<Dendrogram> {
    let n = m.n();
    if n < 2 {
        return Err(invalid_input(
            "hierarchical clustering needs at least 2 points",
        ));
    }
    let mut state = LinkageState {
        table: Condensed::from_fn(n, |i, j| m.get(i, j)),
        sizes: vec![1; n],
        method,
    };
    let raw = agglomerate(&mut state, n);
    Ok(to_dendrogram(n, raw, 0.0))
}

/// Cluster state for charged Ward clustering.
///
/// Holds, per active slot, the cluster size and the means of the unprotected
/// and protected attributes, plus pairwise tables of the charged dissimilarity,
/// the Ward-weighted squared distance of unprotected means and (for `delta2`)
/// the squared distance of protected means. Merges update the tables with the
/// recursions; the state can be driven by any merge order.
#[derive(Clone, Debug)]
pub struct ChargedWard {
    eval: Evaluator,
    family: Family,
    sizes: Vec<usize>,
    active: Vec<bool>,
    x_mean: Matrix,
    s_mean: Matrix,
    delta: Condensed<Wide>,
    ward_x: Condensed<Wide>,
    s_sq: Option<Condensed<Wide>>,
    shift: f64,
}

impl ChargedWard {
    /// Singleton clusters with `δ_W(i, j) = ½·δ(pointᵢ, pointⱼ)`, no shift.
    pub fn new(data: &Dataset, params: &DissimParams) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(invalid_input(
                "hierarchical clustering needs at least 2 points",
            ));
        }
        params.check_dim(data.s_dim())?;
        let eval = Evaluator::new(params);
        let (x, s) = (data.x(), data.s());
        let ward_x = Condensed::from_fn(n, |i, j| Wide::sq_distance(x.row(i), x.row(j)).scale(0.5));
        let delta = Condensed::from_fn(n, |i, j| {
            eval.eval_wide(ward_x.get(i, j).scale(2.0), s.row(i), s.row(j))
                .scale(0.5)
        });
        if delta.data.iter().any(|v| !v.value().is_finite()) {
            return Err(Error::NonFinite("charged dissimilarities".into()));
        }
        let s_sq = (params.family() == Family::Delta2)
            .then(|| Condensed::from_fn(n, |i, j| Wide::sq_distance(s.row(i), s.row(j))));
        Ok(ChargedWard {
            eval,
            family: params.family(),
            sizes: vec![1; n],
            active: vec![true; n],
            x_mean: x.clone(),
            s_mean: s.clone(),
            delta,
            ward_x,
            s_sq,
            shift: 0.0,
        })
    }

    /// Adds `|min| + ε` to every initial dissimilarity when the minimum is
    /// `<= 0` (families `delta1`..`delta3`). Must be called before any merge.
    pub fn with_positivity_shift(mut self, epsilon: Option<f64>) -> Result<Self> {
        if self.active.iter().any(|a| !a) {
            return Err(invalid_input("positivity shift after merging"));
        }
        if self.family == Family::Delta4 {
            return Ok(self);
        }
        let lo = self
            .delta
            .data
            .iter()
            .map(|v| v.value())
            .reduce(f64::min)
            .unwrap_or(0.0);
        if lo <= 0.0 {
            let hi = self.delta.data.iter().map(|v| v.value()).fold(lo, f64::max);
            let eps = match epsilon {
                Some(e) if e > 0.0 => e,
                Some(e) => return Err(invalid_param(format!("epsilon must be > 0, got {e}"))),
                None => (1e-8 * (hi - lo)).max(1e-12),
            };
            self.shift = lo.abs() + eps;
            let shift = self.shift;
            let shift = Wide::new(shift);
            self.delta.data.iter_mut().for_each(|v| *v = v.add(shift));
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_active(&self, slot: usize) -> bool {
        self.active[slot]
    }

    pub fn active_slots(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.active[i]).collect()
    }

    pub fn size(&self, slot: usize) -> usize {
        self.sizes[slot]
    }

    pub fn x_mean(&self, slot: usize) -> &[f64] {
        self.x_mean.row(slot)
    }

    pub fn s_mean(&self, slot: usize) -> &[f64] {
        self.s_mean.row(slot)
    }

    /// Current charged dissimilarity between two active slots.
    pub fn dissimilarity(&self, a: usize, b: usize) -> f64 {
        self.delta.get(a, b).value()
    }

    /// `nₐn_b/(nₐ+n_b)·‖x̄ₐ − x̄_b‖²` as maintained by the Ward recursion.
    pub fn ward_x(&self, a: usize, b: usize) -> f64 {
        self.ward_x.get(a, b).value()
    }

    /// `‖s̄ₐ − s̄_b‖²` as maintained by its recursion (`delta2` only).
    pub fn s_mean_sq(&self, a: usize, b: usize) -> Option<f64> {
        self.s_sq.as_ref().map(|t| t.get(a, b).value())
    }

    /// Merges slot `b` into slot `a`; `b` becomes inactive.
    pub fn merge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b || !self.active[a] || !self.active[b] {
            return Err(invalid_input(format!("cannot merge slots {a} and {b}")));
        }
        let others: Vec<usize> = (0..self.n())
            .filter(|&k| k != a && k != b && self.active[k])
            .collect();
        self.merge_slots(a, b, &others);
        Ok(())
    }

    fn merge_slots(&mut self, a: usize, b: usize, others: &[usize]) {
        let (na, nb) = (self.sizes[a] as f64, self.sizes[b] as f64);
        let nab = na + nb;

        for row in [&mut self.x_mean, &mut self.s_mean] {
            let merged: Vec<f64> = row
                .row(a)
                .iter()
                .zip(row.row(b))
                .map(|(ma, mb)| (na * ma + nb * mb) / nab)
                .collect();
            row.row_mut(a).copy_from_slice(&merged);
        }

        // Numerators use integer weights and are divided once; the tables are
        // double-double because the subtraction can cancel most digits.
        let wx_ab = self.ward_x.get(a, b);
        let delta_ab = self.delta.get(a, b);
        let s_ab = self.s_sq.as_ref().map(|t| t.get(a, b));
        for &k in others {
            let nk = self.sizes[k] as f64;
            let total = nab + nk;
            let combine = |ak: Wide, bk: Wide, ab: Wide| {
                ak.scale(na + nk)
                    .add(bk.scale(nb + nk))
                    .sub(ab.scale(nk))
                    .div(total)
            };
            let wx = combine(self.ward_x.get(a, k), self.ward_x.get(b, k), wx_ab);
            let delta = match self.family {
                Family::Delta1 => combine(self.delta.get(a, k), self.delta.get(b, k), wx_ab),
                Family::Delta2 => {
                    let table = self
                        .s_sq
                        .as_mut()
                        .expect("delta2 keeps protected distances");
                    let s_new = table
                        .get(a, k)
                        .scale(na * nab)
                        .add(table.get(b, k).scale(nb * nab))
                        .sub(s_ab.expect("delta2").scale(na * nb))
                        .div(nab * nab);
                    table.set(a, k, s_new);
                    wx.scale(self.eval.delta2_factor(s_new.value()))
                }
                Family::Delta3 => combine(self.delta.get(a, k), self.delta.get(b, k), delta_ab),
                Family::Delta4 => {
                    let sq = sq_euclidean(self.x_mean.row(a), self.x_mean.row(k));
                    let weight = nab * nk / total;
                    Wide::new(weight * self.eval.eval(sq, self.s_mean.row(a), self.s_mean.row(k)))
                }
            };
            self.ward_x.set(a, k, wx);
            self.delta.set(a, k, delta);
        }
        self.sizes[a] += self.sizes[b];
        self.active[b] = false;
    }
}

impl Agglomerable for ChargedWard {
    fn dissimilarity(&self, a: usize, b: usize) -> f64 {
        self.delta.get(a, b).value()
    }

    fn merge(&mut self, a: usize, b: usize, others: &[usize]) {
        self.merge_slots(a, b, others);
    }
}

/// Charged Ward clustering of a dataset.
///
/// For `delta1`..`delta3` the initial dissimilarities receive the positivity
/// shift when their minimum is `<= 0`; the shift is applied once, to initial
/// values only. Heights are reported with the shift subtracted and may be
/// non-monotone.
pub fn charged_ward(data: &Dataset, params: &DissimParams) -> Result<Dendrogram> {
    let n = data.len();
    let mut state = ChargedWard::new(data, params)?.with_positivity_shift(None)?;
    let raw = agglomerate(&mut state, n);
    Ok(to_dendrogram(n, raw, state.shift))
}

/// The partition formed by the `k` clusters alive after `n − k` merges.
/// Labels are numbered by first appearance in leaf order.
pub fn cut(dend: &Dendrogram, k: usize) -> Result<Partition> {
    let n = dend.n;
    if k < 1 || k > n {
        return Err(invalid_param(format!(
            "cannot cut {n} leaves into {k} clusters"
        )));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (t, m) in dend.merges.iter().take(n - k).enumerate() {
        parent[m.a] = n + t;
        parent[m.b] = n + t;
    }
    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let raw: Vec<usize> = (0..n).map(root).collect();
    Partition::from_raw_labels(&raw)
}
