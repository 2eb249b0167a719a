//! Event loop of a single simulation run.
//!
//! A run is strictly single-threaded and a pure function of the scenario:
//! every random draw comes from a seeded per-purpose stream, events are
//! ordered by `(time, sequence number)`, and cache victims are chosen with a
//! total order.

mod cache;
mod events;

use std::collections::VecDeque;

pub use self::cache::{Admission, NodeCache};
pub use self::events::{Event, EventKind, EventQueue};
use crate::energy::{
    device_download_energy_with_mode, transport_storage_energy, DecodeEnergy, EnergyClass, EnergyLedger,
    TransportBreakdown, TransportContext,
};
use crate::report::{ContentSummary, HitCounts, RequestRecord, RunMetadata, SimulationReport, TimePoint};
use crate::scenario::{ClusterIdx, NodeIdx, Scenario, Tier, Topology};
use crate::workload::{
    build_catalog, pick_weighted, popularity_at, stream_rng, Content, ContentId, PopularityPredictor, RequestProcess,
    SimRng, Stream,
};

/// Window of the trailing download-rate estimate (s).
const DOWNLOAD_RATE_WINDOW_S: f64 = 3600.0;
/// Floor of the download-rate estimate (downloads/hr).
const MIN_DOWNLOADS_PER_HR: f64 = 1.0;
const TOP_CONTENTS: usize = 10;
const CONSERVATION_TOL: f64 = 1e-9;

/// Result of charging one delivery.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestOutcome {
    pub serving_node: NodeIdx,
    pub tier: Tier,
    pub hops: u32,
    pub downloads_per_hr: f64,
    pub transport: TransportBreakdown,
    pub transport_wh: f64,
    pub device_wh: f64,
    pub decode_wh: f64,
    pub duration_s: f64,
}

impl RequestOutcome {
    pub fn total_wh(&self) -> f64 {
        self.transport_wh + self.device_wh + self.decode_wh
    }
}

/// Nearest node on the cluster's root path (edge first) whose cache holds
/// `content`; the origin when no surrogate does.
pub fn route_request(topology: &Topology, caches: &[NodeCache], cluster: ClusterIdx, content: ContentId) -> NodeIdx {
    let origin = topology.origin();
    topology
        .root_path(topology.cluster(cluster).edge)
        .find(|&n| n == origin || caches[n.0].contains(content))
        .unwrap_or(origin)
}

/// Energy of delivering `content` from `serving` to `cluster`: transport and
/// storage, the wireless device (zero for wired clusters) and decoding.
pub fn charge_request(
    scenario: &Scenario,
    cluster: ClusterIdx,
    content: &Content,
    serving: NodeIdx,
    downloads_per_hr: f64,
) -> RequestOutcome {
    let topo = &scenario.topology;
    let hops = topo.hops_to_cluster(serving, cluster).expect("serving node lies on the cluster's root path");
    let size = content.size_bits as f64;
    let ctx = TransportContext::new(
        size,
        hops,
        scenario.content_space.replication_count,
        downloads_per_hr,
        &scenario.equipment,
    )
    .expect("validated transport inputs");
    let (transport_wh, transport) = transport_storage_energy(&ctx);
    let duration_s = size / content.bitrate_bps;
    let device_wh = match &topo.cluster(cluster).device_profile {
        None => 0.0,
        Some(p) => {
            device_download_energy_with_mode(p, size, content.bitrate_bps, scenario.device_energy_mode)
                .expect("bitrate validated against PHY rate")
                .0
        }
    };
    RequestOutcome {
        serving_node: serving,
        tier: topo.node(serving).tier,
        hops,
        downloads_per_hr,
        transport,
        transport_wh,
        device_wh,
        decode_wh: content.decode.decode_energy_wh(size),
        duration_s,
    }
}

pub fn run(scenario: &Scenario) -> SimulationReport {
    Simulation::new(scenario).run()
}

struct Simulation<'a> {
    scenario: &'a Scenario,
    catalog: Vec<Content>,
    alive: Vec<bool>,
    caches: Vec<NodeCache>,
    queue: EventQueue,
    processes: Vec<RequestProcess>,
    rngs: Vec<SimRng>,
    predictor: PopularityPredictor,
    recent_downloads: Vec<VecDeque<f64>>,
    aggregate: EnergyLedger,
    cluster_ledgers: Vec<EnergyLedger>,
    replication: EnergyLedger,
    replication_pushes: u64,
    hits: HitCounts,
    per_content: Vec<(u64, f64)>,
    timeseries: Vec<TimePoint>,
    requests: Vec<RequestRecord>,
    weights: Vec<f64>,
}

impl<'a> Simulation<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let topo = &scenario.topology;
        let catalog = build_catalog(
            &scenario.content_space,
            scenario.horizon_s,
            &mut stream_rng(scenario.seed, Stream::Catalog),
            &mut stream_rng(scenario.seed, Stream::Lifecycle),
        );
        let n = catalog.len();
        let caches = topo
            .nodes()
            .iter()
            .map(|node| {
                let cap = if node.tier == Tier::Origin { 0 } else { node.cache_capacity_bits };
                NodeCache::new(node.cache_policy, cap)
            })
            .collect();
        let processes = topo.clusters().iter().map(RequestProcess::for_cluster).collect();
        let rngs = (0..topo.clusters().len()).map(|i| stream_rng(scenario.seed, Stream::Cluster(i))).collect();
        let rep = &scenario.replication;
        Simulation {
            scenario,
            catalog,
            alive: vec![false; n],
            caches,
            queue: EventQueue::new(),
            processes,
            rngs,
            predictor: PopularityPredictor::new(rep.smoothing, rep.window_s),
            recent_downloads: vec![VecDeque::new(); n],
            aggregate: EnergyLedger::new(),
            cluster_ledgers: vec![EnergyLedger::new(); topo.clusters().len()],
            replication: EnergyLedger::new(),
            replication_pushes: 0,
            hits: HitCounts::default(),
            per_content: vec![(0, 0.0); n],
            timeseries: Vec::new(),
            requests: Vec::new(),
            weights: vec![0.0; n],
        }
    }

    fn schedule_initial(&mut self) {
        let horizon = self.scenario.horizon_s;
        for c in &self.catalog {
            self.queue.push(c.publish_s, EventKind::Publish { content: c.id });
        }
        for c in &self.catalog {
            if c.expiry_s() <= horizon {
                self.queue.push(c.expiry_s(), EventKind::Expire { content: c.id });
            }
        }
        let interval = self.scenario.report_interval_s;
        let ticks = (horizon / interval).floor() as u64;
        for k in 1..=ticks {
            self.queue.push(k as f64 * interval, EventKind::ReportTick);
        }
        if self.scenario.replication.threshold_per_hr.is_some() {
            let period = self.scenario.replication.period_s;
            let mut k = 1u64;
            while k as f64 * period <= horizon {
                self.queue.push(k as f64 * period, EventKind::ReplicationTick);
                k += 1;
            }
        }
        for i in 0..self.processes.len() {
            self.schedule_arrival(ClusterIdx(i), 0.0);
        }
    }

    fn schedule_arrival(&mut self, cluster: ClusterIdx, after: f64) {
        let horizon = self.scenario.horizon_s;
        if let Some(t) = self.processes[cluster.0].next_arrival(after, horizon, &mut self.rngs[cluster.0]) {
            self.queue.push(t, EventKind::Request { cluster });
        }
    }

    fn run(mut self) -> SimulationReport {
        self.schedule_initial();
        let horizon = self.scenario.horizon_s;
        while self.queue.peek_time().is_some_and(|t| t <= horizon) {
            let event = self.queue.pop().expect("peeked");
            let t = event.time_s;
            match event.kind {
                EventKind::Publish { content } => self.alive[content.0 as usize] = true,
                EventKind::Expire { content } => {
                    self.alive[content.0 as usize] = false;
                    for cache in &mut self.caches {
                        cache.remove(content);
                    }
                }
                EventKind::Request { cluster } => {
                    self.handle_request(cluster, t);
                    self.schedule_arrival(cluster, t);
                }
                EventKind::ReplicationTick => self.replicate(t),
                EventKind::ReportTick => self.timeseries.push(TimePoint {
                    t_s: t,
                    ledger: self.aggregate.clone(),
                    hit_rate: self.hits.hit_rate(),
                }),
            }
        }
        self.finish()
    }

    /// Downloads of `content` in the trailing window ending at `t`, floored.
    fn downloads_per_hr(&self, content: ContentId, t: f64) -> f64 {
        let q = &self.recent_downloads[content.0 as usize];
        let start = q.partition_point(|&x| x < t - DOWNLOAD_RATE_WINDOW_S);
        ((q.len() - start) as f64).max(MIN_DOWNLOADS_PER_HR)
    }

    fn record_download(&mut self, content: ContentId, t: f64) {
        let q = &mut self.recent_downloads[content.0 as usize];
        q.push_back(t);
        while q.front().is_some_and(|&x| x < t - DOWNLOAD_RATE_WINDOW_S) {
            q.pop_front();
        }
    }

    fn handle_request(&mut self, cluster: ClusterIdx, t: f64) {
        for (i, c) in self.catalog.iter().enumerate() {
            self.weights[i] = if self.alive[i] { popularity_at(c, t) } else { 0.0 };
        }
        let rng = &mut self.rngs[cluster.0];
        let Some(idx) = pick_weighted(&self.weights, rng) else {
            return;
        };
        let _user = self.processes[cluster.0].pick_user(rng);
        let content_id = self.catalog[idx].id;
        let topo = &self.scenario.topology;

        let serving = route_request(topo, &self.caches, cluster, content_id);
        if serving != topo.origin() {
            self.caches[serving.0].touch(content_id);
        }
        // Inclusive fill of every surrogate below the serving node.
        let size = self.catalog[idx].size_bits;
        for n in topo.root_path(topo.cluster(cluster).edge).take_while(|&n| n != serving) {
            self.caches[n.0].admit(content_id, size);
            let cache = &self.caches[n.0];
            assert!(cache.used_bits() <= cache.capacity_bits(), "cache capacity invariant violated");
        }

        self.record_download(content_id, t);
        let d = self.downloads_per_hr(content_id, t);
        let outcome = charge_request(self.scenario, cluster, &self.catalog[idx], serving, d);
        self.predictor.update(content_id, t);

        match outcome.tier {
            Tier::Edge => self.hits.edge += 1,
            Tier::Regional => self.hits.regional += 1,
            Tier::Origin => self.hits.origin += 1,
        }
        for ledger in [&mut self.aggregate, &mut self.cluster_ledgers[cluster.0]] {
            post(ledger, &outcome);
        }
        let pc = &mut self.per_content[idx];
        pc.0 += 1;
        pc.1 += outcome.total_wh();

        let content = &self.catalog[idx];
        self.requests.push(RequestRecord {
            t_s: t,
            cluster_id: topo.cluster(cluster).id.clone(),
            content: content_id,
            serving_node: topo.node(serving).id.clone(),
            tier: outcome.tier,
            hops: outcome.hops,
            size_bits: content.size_bits,
            transport_wh: outcome.transport_wh,
            device_wh: outcome.device_wh,
            decode_wh: outcome.decode_wh,
            replicas: self.scenario.content_space.replication_count,
            downloads_per_hr: d,
            bitrate_bps: content.bitrate_bps,
            duration_s: outcome.duration_s,
        });
    }

    /// Pushes content whose forecast exceeds the threshold into every edge
    /// cache that has free room for it, charging transport from the nearest
    /// holder above the edge.
    fn replicate(&mut self, t: f64) {
        let Some(threshold) = self.scenario.replication.threshold_per_hr else {
            return;
        };
        let topo = &self.scenario.topology;
        let edges: Vec<NodeIdx> = topo.edge_nodes().collect();
        for idx in 0..self.catalog.len() {
            if !self.alive[idx] {
                continue;
            }
            let id = self.catalog[idx].id;
            if self.predictor.score(id, t) <= threshold {
                continue;
            }
            let size = self.catalog[idx].size_bits;
            for &edge in &edges {
                let cache = &self.caches[edge.0];
                if cache.contains(id) || cache.free_bits() < size {
                    continue;
                }
                let holder = topo
                    .root_path(edge)
                    .skip(1)
                    .find(|&n| n == topo.origin() || self.caches[n.0].contains(id))
                    .unwrap_or(topo.origin());
                let hops = topo.path_hops(holder, edge).expect("holder is an ancestor");
                let d = self.downloads_per_hr(id, t);
                let ctx = TransportContext::new(
                    size as f64,
                    hops,
                    self.scenario.content_space.replication_count,
                    d,
                    &self.scenario.equipment,
                )
                .expect("validated transport inputs");
                let (_, breakdown) = transport_storage_energy(&ctx);
                for ledger in [&mut self.aggregate, &mut self.replication] {
                    ledger.add_transport(&breakdown).expect("non-negative transport energy");
                }
                let admitted = self.caches[edge.0].admit(id, size);
                debug_assert_eq!(admitted, Admission::Admitted { evicted: vec![] });
                self.replication_pushes += 1;
            }
        }
    }

    fn finish(self) -> SimulationReport {
        let topo = &self.scenario.topology;
        let mut merged = self.replication.clone();
        for l in &self.cluster_ledgers {
            merged.merge_from(l);
        }
        assert!(self.aggregate.is_conserved(CONSERVATION_TOL), "ledger conservation violated: total != sum of classes");
        assert!(
            self.aggregate.approx_eq(&merged, CONSERVATION_TOL),
            "ledger conservation violated: aggregate != clusters + replication"
        );

        let mut top: Vec<ContentSummary> = self
            .per_content
            .iter()
            .enumerate()
            .filter(|(_, (n, _))| *n > 0)
            .map(|(i, &(requests, total_wh))| ContentSummary {
                id: self.catalog[i].id,
                rank: self.catalog[i].rank,
                requests,
                total_wh,
            })
            .collect();
        top.sort_by(|a, b| b.total_wh.total_cmp(&a.total_wh).then(a.id.cmp(&b.id)));
        top.truncate(TOP_CONTENTS);

        SimulationReport {
            metadata: RunMetadata {
                seed: self.scenario.seed,
                scenario_hash: self.scenario.hash.clone(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                horizon_s: self.scenario.horizon_s,
                report_interval_s: self.scenario.report_interval_s,
            },
            aggregate: self.aggregate,
            clusters: topo.clusters().iter().zip(self.cluster_ledgers).map(|(c, l)| (c.id.clone(), l)).collect(),
            replication: self.replication,
            replication_pushes: self.replication_pushes,
            hits: self.hits,
            top_contents: top,
            timeseries: self.timeseries,
            requests: self.requests,
        }
    }
}

fn post(ledger: &mut EnergyLedger, outcome: &RequestOutcome) {
    ledger.add_transport(&outcome.transport).expect("non-negative transport energy");
    ledger.add(EnergyClass::WirelessDevice, outcome.device_wh).expect("non-negative device energy");
    ledger.add(EnergyClass::Decoding, outcome.decode_wh).expect("non-negative decode energy");
    ledger.record_request();
}
