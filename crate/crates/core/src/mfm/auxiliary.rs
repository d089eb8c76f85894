//! Allocation updates with instantiated component parameters, using
//! auxiliary components drawn from the prior to represent new clusters.

use rand::Rng;

use crate::component::{ln_gamma_density, ClusterStats, NormalParams, RichardsonGreenModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::special::{ln_rising, sample_log_weights};

use super::collapsed::SplitMergeOutcome;
use super::state::{AllocationState, Cluster};
use super::vn::VnTable;

/// One cluster holding everything, parameters from their full conditional
/// and `b` from its prior.
pub fn initial_auxiliary_state<R: Rng + ?Sized>(
    data: &Dataset,
    model: &RichardsonGreenModel,
    rng: &mut R,
) -> Result<AllocationState<NormalParams>> {
    if data.dim() != 1 {
        return Err(Error::domain("the instantiated-parameter model is univariate"));
    }
    let b = model.sample_b(rng);
    let start = model.sample_params(b, rng);
    let mut state = AllocationState::single_cluster(data, |_| start);
    let c = state.cluster_mut(0);
    c.payload = model.gibbs_update_params(&c.stats, c.payload, b, rng);
    state.shared_rate = Some(b);
    Ok(state)
}

/// Allocation pass followed by Gibbs updates of every cluster's parameters
/// and of the shared rate `b`.
///
/// Observation `i` joins existing cluster `c` with weight
/// `(n_c + γ) N(x_i | μ_c, λ_c⁻¹)` or auxiliary component `j` with weight
/// `γ V_n(t+1)/V_n(t) N(x_i | μ_j, λ_j⁻¹) / m`. When `i` was alone, its
/// parameters become the first auxiliary component.
pub fn aux_allocation_sweep<R: Rng + ?Sized>(
    state: &mut AllocationState<NormalParams>,
    data: &Dataset,
    vn: &mut VnTable,
    model: &RichardsonGreenModel,
    rng: &mut R,
    m_aux: usize,
) -> Result<()> {
    if m_aux == 0 {
        return Err(Error::config("at least one auxiliary component is required"));
    }
    let mut b = state
        .shared_rate
        .ok_or_else(|| Error::Internal("instantiated state without a shared rate".into()))?;
    let g = vn.gamma();
    let ln_g = g.ln();
    let ln_m = (m_aux as f64).ln();
    let mut aux = Vec::with_capacity(m_aux);
    let mut weights = Vec::new();
    let mut slots = Vec::new();
    for i in 0..state.n() {
        let row = data.row(i);
        let x = row[0];
        let (_, emptied) = state.remove_point(i, row);
        aux.clear();
        if let Some(c) = emptied {
            aux.push(c.payload);
        }
        while aux.len() < m_aux {
            aux.push(model.sample_params(b, rng));
        }
        let t = state.num_clusters();
        vn.ensure(t + 1)?;
        weights.clear();
        slots.clear();
        for &s in state.live_slots() {
            let c = state.cluster(s);
            weights.push((c.stats.count() as f64 + g).ln() + c.payload.ln_density(x));
            slots.push(s);
        }
        let ln_new = if t == 0 { 0.0 } else { ln_g + vn.ln_ratio(t) } - ln_m;
        for p in &aux {
            weights.push(ln_new + p.ln_density(x));
        }
        let choice = sample_log_weights(&mut weights, rng.random());
        if choice < slots.len() {
            state.add_point(i, slots[choice], row);
        } else {
            state.open_cluster(i, row, aux[choice - slots.len()]);
        }
    }

    let mut lambdas = Vec::with_capacity(state.num_clusters());
    for pos in 0..state.num_clusters() {
        let slot = state.live_slots()[pos];
        let c = state.cluster_mut(slot);
        c.payload = model.gibbs_update_params(&c.stats, c.payload, b, rng);
        lambdas.push(c.payload.lambda);
    }
    b = model.gibbs_update_b(&lambdas, rng);
    state.shared_rate = Some(b);
    Ok(())
}

// Σ_{k ∈ c} ln N(x_k | μ, 1/λ) from the cluster statistics.
fn cluster_log_lik(stats: &ClusterStats, p: &NormalParams) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    let n = stats.count() as f64;
    0.5 * n * (p.lambda.ln() - LN_2PI) - 0.5 * p.lambda * stats.scatter_about(0, p.mu)
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

// Log density of moving `from` to `to` by one `gibbs_update_params` pass.
fn ln_gibbs_transition(
    model: &RichardsonGreenModel,
    stats: &ClusterStats,
    from: &NormalParams,
    to: &NormalParams,
    b: f64,
) -> f64 {
    let (m, v) = model.mu_conditional(stats, from.lambda);
    let (shape, rate) = model.lambda_conditional(stats, to.mu, b);
    let mu_part = NormalParams { mu: m, lambda: 1.0 / v }.ln_density(to.mu);
    mu_part + ln_gamma_density(to.lambda, shape, rate)
}

// Restricted allocation pass of `others` between two instantiated
// components. With a target the moves are forced and only their log
// probability is returned.
#[allow(clippy::too_many_arguments)]
fn restricted_allocation<R: Rng + ?Sized>(
    others: &[usize],
    with_i: &mut [bool],
    si: &mut ClusterStats,
    sj: &mut ClusterStats,
    pi: &NormalParams,
    pj: &NormalParams,
    data: &Dataset,
    gamma: f64,
    target: Option<&[bool]>,
    rng: &mut R,
) -> f64 {
    let mut ln_q = 0.0;
    for (pos, &k) in others.iter().enumerate() {
        let row = data.row(k);
        let x = row[0];
        if with_i[pos] {
            si.remove(row);
        } else {
            sj.remove(row);
        }
        let wi = (si.count() as f64 + gamma).ln() + pi.ln_density(x);
        let wj = (sj.count() as f64 + gamma).ln() + pj.ln_density(x);
        let m = wi.max(wj);
        let ln_norm = m + ((wi - m).exp() + (wj - m).exp()).ln();
        let to_i = match target {
            Some(t) => t[pos],
            None => rng.random::<f64>() < (wi - ln_norm).exp(),
        };
        ln_q += if to_i { wi - ln_norm } else { wj - ln_norm };
        with_i[pos] = to_i;
        if to_i {
            si.insert(row);
        } else {
            sj.insert(row);
        }
    }
    ln_q
}

/// Split-merge Metropolis-Hastings move for instantiated components.
///
/// Both the split launch (random allocation, parameters from the prior,
/// then `scans` restricted scans of allocations and parameters) and the
/// merge launch (parameters from the prior, then `scans` parameter
/// updates) are built every time. The proposal density of the final scan
/// covers allocations and parameter transitions, and the reverse move is
/// scored against the current parameters. The shared rate `b` is held
/// fixed.
pub fn aux_split_merge_move<R: Rng + ?Sized>(
    state: &mut AllocationState<NormalParams>,
    data: &Dataset,
    vn: &mut VnTable,
    model: &RichardsonGreenModel,
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
    let b = state
        .shared_rate
        .ok_or_else(|| Error::Internal("instantiated state without a shared rate".into()))?;
    let g = vn.gamma();
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

    // split launch
    let mut si = ClusterStats::from_points(1, [data.row(i)]);
    let mut sj = ClusterStats::from_points(1, [data.row(j)]);
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
    let mut pi = model.sample_params(b, rng);
    let mut pj = model.sample_params(b, rng);
    for _ in 0..scans {
        restricted_allocation(&others, &mut with_i, &mut si, &mut sj, &pi, &pj, data, g, None, rng);
        pi = model.gibbs_update_params(&si, pi, b, rng);
        pj = model.gibbs_update_params(&sj, pj, b, rng);
    }

    // merge launch
    let merged = ClusterStats::from_points(
        1,
        [i, j].into_iter().chain(others.iter().copied()).map(|k| data.row(k)),
    );
    let mut pm = model.sample_params(b, rng);
    for _ in 0..scans {
        pm = model.gibbs_update_params(&merged, pm, b, rng);
    }

    let t = state.num_clusters();
    let ln_acc;
    let (new_i, new_j, new_m);
    if same {
        vn.ensure(t + 1)?;
        let ln_q_alloc =
            restricted_allocation(&others, &mut with_i, &mut si, &mut sj, &pi, &pj, data, g, None, rng);
        let ni = model.gibbs_update_params(&si, pi, b, rng);
        let nj = model.gibbs_update_params(&sj, pj, b, rng);
        let ln_q_fwd = ln_q_alloc
            + ln_gibbs_transition(model, &si, &pi, &ni, b)
            + ln_gibbs_transition(model, &sj, &pj, &nj, b);
        let whole = state.cluster(ci);
        let ln_q_rev = ln_gibbs_transition(model, &whole.stats, &pm, &whole.payload, b);
        ln_acc = vn.ln_ratio(t)
            + ln_rising(g, si.count() as f64)
            + ln_rising(g, sj.count() as f64)
            - ln_rising(g, whole.stats.count() as f64)
            + model.ln_prior_params(&ni, b)
            + model.ln_prior_params(&nj, b)
            - model.ln_prior_params(&whole.payload, b)
            + cluster_log_lik(&si, &ni)
            + cluster_log_lik(&sj, &nj)
            - cluster_log_lik(&whole.stats, &whole.payload)
            + ln_q_rev
            - ln_q_fwd;
        (new_i, new_j, new_m) = (ni, nj, pm);
    } else {
        let nm = model.gibbs_update_params(&merged, pm, b, rng);
        let ln_q_fwd = ln_gibbs_transition(model, &merged, &pm, &nm, b);
        let target: Vec<bool> = others.iter().map(|&k| state.label(k) == ci).collect();
        let ln_q_alloc = restricted_allocation(
            &others,
            &mut with_i,
            &mut si,
            &mut sj,
            &pi,
            &pj,
            data,
            g,
            Some(&target),
            rng,
        );
        let (a, c) = (state.cluster(ci), state.cluster(cj));
        let ln_q_rev = ln_q_alloc
            + ln_gibbs_transition(model, &si, &pi, &a.payload, b)
            + ln_gibbs_transition(model, &sj, &pj, &c.payload, b);
        ln_acc = -vn.ln_ratio(t - 1) + ln_rising(g, merged.count() as f64)
            - ln_rising(g, a.stats.count() as f64)
            - ln_rising(g, c.stats.count() as f64)
            + model.ln_prior_params(&nm, b)
            - model.ln_prior_params(&a.payload, b)
            - model.ln_prior_params(&c.payload, b)
            + cluster_log_lik(&merged, &nm)
            - cluster_log_lik(&a.stats, &a.payload)
            - cluster_log_lik(&c.stats, &c.payload)
            + ln_q_rev
            - ln_q_fwd;
        (new_i, new_j, new_m) = (pi, pj, nm);
    }

    let accepted = rng.random::<f64>().ln() < ln_acc;
    if accepted {
        if same {
            let c = state.cluster_mut(ci);
            c.stats = si;
            c.payload = new_i;
            let slot = state.insert_cluster(Cluster {
                stats: sj,
                payload: new_j,
            });
            state.relabel(j, slot);
            for (pos, &k) in others.iter().enumerate() {
                if !with_i[pos] {
                    state.relabel(k, slot);
                }
            }
        } else {
            state.close_slot(cj);
            let c = state.cluster_mut(ci);
            c.stats = merged;
            c.payload = new_m;
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
