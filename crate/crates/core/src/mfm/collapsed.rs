//! Allocation moves with cluster parameters integrated out.

use rand::Rng;

use crate::component::{ClusterStats, CollapsedLikelihood};
use crate::data::Dataset;
use crate::error::Result;
use crate::special::{ln_rising, sample_log_weights};

use super::state::{AllocationState, Cluster};
use super::vn::VnTable;

/// Fresh state with every observation in one cluster.
pub fn initial_collapsed_state<L: CollapsedLikelihood>(
    data: &Dataset,
    model: &L,
) -> AllocationState<L::Cache> {
    AllocationState::single_cluster(data, |s| model.cache(s))
}

fn refresh<L: CollapsedLikelihood>(state: &mut AllocationState<L::Cache>, slot: usize, model: &L) {
    let c = state.cluster_mut(slot);
    model.refresh_cache(&c.stats, &mut c.payload);
}

/// One systematic-scan collapsed Gibbs pass over all observations.
///
/// Observation `i` joins existing cluster `c` with weight
/// `(n_c + γ) m(x_i | c)` or a new cluster with weight
/// `γ V_n(t+1)/V_n(t) m(x_i)`, where `t` counts clusters without `i`.
pub fn gibbs_allocation_sweep<L: CollapsedLikelihood, R: Rng + ?Sized>(
    state: &mut AllocationState<L::Cache>,
    data: &Dataset,
    vn: &mut VnTable,
    model: &L,
    rng: &mut R,
) -> Result<()> {
    let g = vn.gamma();
    let ln_g = g.ln();
    let empty = model.cache(&ClusterStats::new(data.dim()));
    let mut weights = Vec::new();
    let mut slots = Vec::new();
    // cache of the point's cluster before removal, restored if it returns
    let mut saved = empty.clone();
    for i in 0..state.n() {
        let x = data.row(i);
        let (old, emptied) = state.remove_point(i, x);
        let kept = emptied.is_none();
        if kept {
            let c = state.cluster_mut(old);
            std::mem::swap(&mut c.payload, &mut saved);
            model.refresh_cache(&c.stats, &mut c.payload);
        }
        let t = state.num_clusters();
        vn.ensure(t + 1)?;
        weights.clear();
        slots.clear();
        for &s in state.live_slots() {
            let c = state.cluster(s);
            weights.push((c.stats.count() as f64 + g).ln() + model.log_predictive_cached(&c.payload, x));
            slots.push(s);
        }
        let ln_new = if t == 0 { 0.0 } else { ln_g + vn.ln_ratio(t) };
        weights.push(ln_new + model.log_predictive_cached(&empty, x));
        let choice = sample_log_weights(&mut weights, rng.random());
        if choice == slots.len() {
            let stats = ClusterStats::from_points(data.dim(), [x]);
            let cache = model.cache(&stats);
            state.open_cluster(i, x, cache);
        } else {
            let slot = slots[choice];
            state.add_point(i, slot, x);
            if kept && slot == old {
                std::mem::swap(&mut state.cluster_mut(slot).payload, &mut saved);
            } else {
                refresh(state, slot, model);
            }
        }
    }
    Ok(())
}

/// What a split-merge attempt did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMergeOutcome {
    pub attempted: bool,
    pub proposed_split: bool,
    pub accepted: bool,
}

// Restricted Gibbs scan of `others` between the two anchor clusters. With a
// target, the assignments are forced and only their probability is returned.
#[allow(clippy::too_many_arguments)]
fn restricted_scan<L: CollapsedLikelihood, R: Rng + ?Sized>(
    others: &[usize],
    with_i: &mut [bool],
    si: &mut ClusterStats,
    sj: &mut ClusterStats,
    data: &Dataset,
    model: &L,
    gamma: f64,
    target: Option<&[bool]>,
    rng: &mut R,
) -> f64 {
    let mut ln_q = 0.0;
    let mut ci = model.cache(si);
    let mut cj = model.cache(sj);
    let mut spare = ci.clone();
    for (pos, &k) in others.iter().enumerate() {
        let x = data.row(k);
        let was_i = with_i[pos];
        // only the side that lost x changes; keep its old cache in `spare`
        if was_i {
            si.remove(x);
            std::mem::swap(&mut ci, &mut spare);
            model.refresh_cache(si, &mut ci);
        } else {
            sj.remove(x);
            std::mem::swap(&mut cj, &mut spare);
            model.refresh_cache(sj, &mut cj);
        }
        let wi = (si.count() as f64 + gamma).ln() + model.log_predictive_cached(&ci, x);
        let wj = (sj.count() as f64 + gamma).ln() + model.log_predictive_cached(&cj, x);
        // log P(join i) and log P(join j), stably
        let m = wi.max(wj);
        let ln_norm = m + ((wi - m).exp() + (wj - m).exp()).ln();
        let to_i = match target {
            Some(t) => t[pos],
            None => rng.random::<f64>() < (wi - ln_norm).exp(),
        };
        ln_q += if to_i { wi - ln_norm } else { wj - ln_norm };
        with_i[pos] = to_i;
        match (was_i, to_i) {
            (true, true) => {
                si.insert(x);
                std::mem::swap(&mut ci, &mut spare);
            }
            (false, false) => {
                sj.insert(x);
                std::mem::swap(&mut cj, &mut spare);
            }
            (false, true) => {
                si.insert(x);
                model.refresh_cache(si, &mut ci);
            }
            (true, false) => {
                sj.insert(x);
                model.refresh_cache(sj, &mut cj);
            }
        }
    }
    ln_q
}

/// One split-merge Metropolis-Hastings attempt with a launch state refined
/// by `scans` restricted Gibbs scans.
pub fn split_merge_move<L: CollapsedLikelihood, R: Rng + ?Sized>(
    state: &mut AllocationState<L::Cache>,
    data: &Dataset,
    vn: &mut VnTable,
    model: &L,
    rng: &mut R,
    scans: usize,
) -> Result<SplitMergeOutcome> {
    let n = state.n();
    if n < 2 {
        return Ok(SplitMergeOutcome {
            attempted: false,
            proposed_split: false,
            accepted: false,
        });
    }
    let g = vn.gamma();
    let d = data.dim();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let (ci, cj) = (state.label(i), state.label(j));
    let same = ci == cj;
    let others: Vec<usize> = (0..n)
        .filter(|&k| k != i && k != j && (state.label(k) == ci || state.label(k) == cj))
        .collect();

    let mut si = ClusterStats::from_points(d, [data.row(i)]);
    let mut sj = ClusterStats::from_points(d, [data.row(j)]);
    let mut with_i = Vec::with_capacity(others.len());
    for &k in &others {
        let side = rng.random_bool(0.5);
        with_i.push(side);
        if side {
            si.insert(data.row(k));
        } else {
            sj.insert(data.row(k));
        }
    }
    for _ in 0..scans {
        restricted_scan(&others, &mut with_i, &mut si, &mut sj, data, model, g, None, rng);
    }

    let t = state.num_clusters();
    let ln_acc;
    if same {
        vn.ensure(t + 1)?;
        let ln_q = restricted_scan(&others, &mut with_i, &mut si, &mut sj, data, model, g, None, rng);
        let whole = &state.cluster(ci).stats;
        ln_acc = vn.ln_ratio(t)
            + ln_rising(g, si.count() as f64)
            + ln_rising(g, sj.count() as f64)
            - ln_rising(g, whole.count() as f64)
            + model.log_marginal(&si)
            + model.log_marginal(&sj)
            - model.log_marginal(whole)
            - ln_q;
    } else {
        let target: Vec<bool> = others.iter().map(|&k| state.label(k) == ci).collect();
        let ln_q = restricted_scan(
            &others,
            &mut with_i,
            &mut si,
            &mut sj,
            data,
            model,
            g,
            Some(&target),
            rng,
        );
        let (a, b) = (&state.cluster(ci).stats, &state.cluster(cj).stats);
        let merged = ClusterStats::from_points(
            d,
            std::iter::once(i)
                .chain(std::iter::once(j))
                .chain(others.iter().copied())
                .map(|k| data.row(k)),
        );
        ln_acc = -vn.ln_ratio(t - 1) + ln_rising(g, merged.count() as f64)
            - ln_rising(g, a.count() as f64)
            - ln_rising(g, b.count() as f64)
            + model.log_marginal(&merged)
            - model.log_marginal(a)
            - model.log_marginal(b)
            + ln_q;
        si = merged;
    }

    let accepted = rng.random::<f64>().ln() < ln_acc;
    if accepted {
        if same {
            let cache_i = model.cache(&si);
            let cache_j = model.cache(&sj);
            let c = state.cluster_mut(ci);
            c.stats = si;
            c.payload = cache_i;
            let new = state.insert_cluster(Cluster {
                stats: sj,
                payload: cache_j,
            });
            state.relabel(j, new);
            for (pos, &k) in others.iter().enumerate() {
                if !with_i[pos] {
                    state.relabel(k, new);
                }
            }
        } else {
            state.close_slot(cj);
            let cache = model.cache(&si);
            let c = state.cluster_mut(ci);
            c.stats = si;
            c.payload = cache;
            state.relabel(j, ci);
            for &k in &others {
                state.relabel(k, ci);
            }
        }
    }
    Ok(SplitMergeOutcome {
        attempted: true,
        proposed_split: same,
        accepted,
    })
}
