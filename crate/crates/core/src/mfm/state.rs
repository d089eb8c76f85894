use crate::component::ClusterStats;
use crate::data::Dataset;
use crate::special::ln_rising;

use super::vn::VnTable;

const UNASSIGNED: usize = usize::MAX;

/// One occupied cluster: its sufficient statistics and a per-cluster
/// payload (a predictive cache or instantiated parameters).
#[derive(Debug, Clone)]
pub struct Cluster<P> {
    pub stats: ClusterStats,
    pub payload: P,
}

/// A partition of the observations into occupied clusters.
///
/// Clusters live in slots that are recycled through a free list, so labels
/// are stable while a cluster is occupied.
#[derive(Debug, Clone)]
pub struct AllocationState<P> {
    labels: Vec<usize>,
    slots: Vec<Option<Cluster<P>>>,
    free: Vec<usize>,
    live: Vec<usize>,
    live_pos: Vec<usize>,
    /// Shared gamma rate of the component precisions, when instantiated.
    pub shared_rate: Option<f64>,
}

impl<P> AllocationState<P> {
    /// All observations in a single cluster.
    pub fn single_cluster(data: &Dataset, payload: impl FnOnce(&ClusterStats) -> P) -> Self {
        let stats = ClusterStats::from_points(data.dim(), data.rows());
        let payload = payload(&stats);
        Self {
            labels: vec![0; data.len()],
            slots: vec![Some(Cluster { stats, payload })],
            free: Vec::new(),
            live: vec![0],
            live_pos: vec![0],
            shared_rate: None,
        }
    }

    /// Builds a state from cluster labels, which may be arbitrary integers.
    pub fn from_labels(
        data: &Dataset,
        labels: &[usize],
        mut payload: impl FnMut(&ClusterStats) -> P,
    ) -> Self {
        assert_eq!(labels.len(), data.len());
        let canon = canonical(labels);
        let t = canon.iter().copied().max().map_or(0, |m| m + 1);
        let mut stats = vec![ClusterStats::new(data.dim()); t];
        for (i, &c) in canon.iter().enumerate() {
            stats[c].insert(data.row(i));
        }
        let slots = stats
            .into_iter()
            .map(|s| {
                let p = payload(&s);
                Some(Cluster { stats: s, payload: p })
            })
            .collect();
        Self {
            labels: canon,
            slots,
            free: Vec::new(),
            live: (0..t).collect(),
            live_pos: (0..t).collect(),
            shared_rate: None,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of occupied clusters.
    pub fn num_clusters(&self) -> usize {
        self.live.len()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Slots of the occupied clusters, in a deterministic order.
    pub fn live_slots(&self) -> &[usize] {
        &self.live
    }

    pub fn cluster(&self, slot: usize) -> &Cluster<P> {
        self.slots[slot].as_ref().expect("live slot")
    }

    pub fn cluster_mut(&mut self, slot: usize) -> &mut Cluster<P> {
        self.slots[slot].as_mut().expect("live slot")
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster<P>> {
        self.live.iter().map(|&s| self.cluster(s))
    }

    pub fn members(&self, slot: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i] == slot).collect()
    }

    /// Takes observation `i` out of its cluster. Returns its former slot and,
    /// if the cluster became empty, the removed cluster.
    pub fn remove_point(&mut self, i: usize, x: &[f64]) -> (usize, Option<Cluster<P>>) {
        let slot = self.labels[i];
        debug_assert_ne!(slot, UNASSIGNED);
        self.labels[i] = UNASSIGNED;
        let cluster = self.cluster_mut(slot);
        cluster.stats.remove(x);
        if cluster.stats.is_empty() {
            (slot, Some(self.close_slot(slot)))
        } else {
            (slot, None)
        }
    }

    pub fn add_point(&mut self, i: usize, slot: usize, x: &[f64]) {
        debug_assert_eq!(self.labels[i], UNASSIGNED);
        self.labels[i] = slot;
        self.cluster_mut(slot).stats.insert(x);
    }

    /// Opens a new cluster holding only observation `i`.
    pub fn open_cluster(&mut self, i: usize, x: &[f64], payload: P) -> usize {
        let mut stats = ClusterStats::new(x.len());
        stats.insert(x);
        let slot = self.insert_cluster(Cluster { stats, payload });
        self.labels[i] = slot;
        slot
    }

    /// Adds a cluster whose members are assigned afterwards through
    /// [`Self::relabel`].
    pub(crate) fn insert_cluster(&mut self, cluster: Cluster<P>) -> usize {
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s] = Some(cluster);
                s
            }
            None => {
                self.slots.push(Some(cluster));
                self.live_pos.push(0);
                self.slots.len() - 1
            }
        };
        self.live_pos[slot] = self.live.len();
        self.live.push(slot);
        slot
    }

    pub(crate) fn close_slot(&mut self, slot: usize) -> Cluster<P> {
        let pos = self.live_pos[slot];
        self.live.swap_remove(pos);
        if pos < self.live.len() {
            let moved = self.live[pos];
            self.live_pos[moved] = pos;
        }
        self.free.push(slot);
        self.slots[slot].take().expect("live slot")
    }

    pub(crate) fn relabel(&mut self, i: usize, slot: usize) {
        self.labels[i] = slot;
    }

    /// Labels renumbered by order of first appearance.
    pub fn canonical_labels(&self) -> Vec<usize> {
        canonical(&self.labels)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters().map(|c| c.stats.count()).collect()
    }

    /// Largest discrepancy between the stored statistics and a recomputation
    /// from the data, or `None` if the bookkeeping is inconsistent.
    pub fn stats_discrepancy(&self, data: &Dataset) -> Option<f64> {
        let mut worst: f64 = 0.0;
        let mut seen = 0;
        for &slot in &self.live {
            let members = self.members(slot);
            if members.is_empty() {
                return None;
            }
            seen += members.len();
            let fresh = ClusterStats::from_points(data.dim(), members.iter().map(|&i| data.row(i)));
            worst = worst.max(self.cluster(slot).stats.max_discrepancy(&fresh));
        }
        (seen == self.n()).then_some(worst)
    }
}

fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// `ln p(C) = ln V_n(t) + Σ_c ln γ^(|c|)`.
pub fn partition_log_prior<P>(state: &AllocationState<P>, vn: &VnTable) -> f64 {
    let g = vn.gamma();
    vn.ln_v(state.num_clusters())
        + state
            .clusters()
            .map(|c| ln_rising(g, c.stats.count() as f64))
            .sum::<f64>()
}

/// Same as [`partition_log_prior`] for a list of cluster sizes.
pub fn partition_log_prior_sizes(sizes: &[usize], vn: &VnTable) -> f64 {
    let g = vn.gamma();
    vn.ln_v(sizes.len()) + sizes.iter().map(|&s| ln_rising(g, s as f64)).sum::<f64>()
}
