//! Seeded synthetic topologies. The same parameters always produce the same
//! graph.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::node_types::{AMPLIFIER, ODF, PATCH_PANEL, SERVER, SPLICE_BOX, SWITCH};
use super::ScenarioError;
use crate::graph::{NodeId, PropertyBag, PropertyValue, TypedGraph, COORDINATES, NODE_TYPE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TelcoGenParams {
    pub seed: u64,
    pub sites: usize,
    pub odfs_per_site: usize,
    /// Probability that a site hosts an amplifier on its inter-site fibers.
    pub amplifier_fraction: f64,
    /// Inter-site chords added on top of the ring.
    pub extra_links: usize,
    /// Probability that an ODF's patch to the site splice box is documented.
    pub documented_fraction: f64,
    /// Probability that an ODF uses a non-standard fiber type.
    pub odd_fiber_fraction: f64,
    pub segment_length_km: (f64, f64),
    pub attenuation_db_per_km: (f64, f64),
    /// Ring radius on which sites are placed.
    pub site_spread_m: f64,
    /// Maximum offset of a device from its site center, per axis.
    pub site_radius_m: f64,
}

impl Default for TelcoGenParams {
    fn default() -> Self {
        TelcoGenParams {
            seed: 1,
            sites: 8,
            odfs_per_site: 3,
            amplifier_fraction: 0.25,
            extra_links: 3,
            documented_fraction: 0.7,
            odd_fiber_fraction: 0.1,
            segment_length_km: (4.0, 20.0),
            attenuation_db_per_km: (0.2, 0.35),
            site_spread_m: 30_000.0,
            site_radius_m: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatacenterGenParams {
    pub seed: u64,
    pub rooms: usize,
    pub rows_per_room: usize,
    pub racks_per_row: usize,
    pub panels_per_rack: usize,
    pub servers_per_rack: usize,
    /// Client racks per distribution rack within a row.
    pub client_per_distribution: usize,
    /// Probability that a client rack has a documented trunk to its row's
    /// distribution rack.
    pub trunk_fraction: f64,
    /// Probability that a row is cabled to the next row of the same room.
    pub cross_row_fraction: f64,
}

impl Default for DatacenterGenParams {
    fn default() -> Self {
        DatacenterGenParams {
            seed: 1,
            rooms: 1,
            rows_per_room: 2,
            racks_per_row: 4,
            panels_per_rack: 2,
            servers_per_rack: 2,
            client_per_distribution: 3,
            trunk_fraction: 0.8,
            cross_row_fraction: 0.5,
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<(), ScenarioError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ScenarioError::InvalidParams(format!("{name} must be in [0, 1], got {v}")))
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<(), ScenarioError> {
    if lo > 0.0 && lo <= hi && hi.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::InvalidParams(format!("{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")))
    }
}

fn check_positive(name: &str, v: usize) -> Result<(), ScenarioError> {
    if v >= 1 {
        Ok(())
    } else {
        Err(ScenarioError::InvalidParams(format!("{name} must be at least 1")))
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<(NodeId, PropertyBag)>,
    edges: Vec<(NodeId, NodeId, PropertyBag)>,
    linked: BTreeSet<(NodeId, NodeId)>,
}

impl Builder {
    fn node(&mut self, id: &NodeId, props: PropertyBag) {
        self.nodes.push((id.clone(), props));
    }

    /// Adds both directions; returns false if the pair is already linked.
    fn link(&mut self, a: &NodeId, b: &NodeId, props: PropertyBag) -> bool {
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if a == b || !self.linked.insert(key) {
            return false;
        }
        self.edges.push((a.clone(), b.clone(), props.clone()));
        self.edges.push((b.clone(), a.clone(), props));
        true
    }

    fn finish(self) -> Result<TypedGraph, ScenarioError> {
        Ok(TypedGraph::build(self.nodes, self.edges)?)
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn fiber(length_m: f64, attenuation_db: f64, fiber_type: &str) -> PropertyBag {
    let mut p = PropertyBag::new();
    p.insert("length_m".into(), PropertyValue::with_unit(round3(length_m), "m"));
    p.insert("attenuation_db".into(), PropertyValue::with_unit(round3(attenuation_db), "dB"));
    p.insert("fiber_type".into(), PropertyValue::text(fiber_type));
    p
}

/// Optical network: sites on a ring with extra chords. Each site has ODFs
/// patched to a splice box (some patches undocumented), and optionally an
/// amplifier that terminates the inter-site fibers.
pub fn generate_telco(params: &TelcoGenParams) -> Result<TypedGraph, ScenarioError> {
    check_positive("sites", params.sites)?;
    check_positive("odfs_per_site", params.odfs_per_site)?;
    check_fraction("amplifier_fraction", params.amplifier_fraction)?;
    check_fraction("documented_fraction", params.documented_fraction)?;
    check_fraction("odd_fiber_fraction", params.odd_fiber_fraction)?;
    check_range("segment_length_km", params.segment_length_km)?;
    check_range("attenuation_db_per_km", params.attenuation_db_per_km)?;
    if !(params.site_radius_m >= 0.0 && params.site_spread_m >= 0.0) {
        return Err(ScenarioError::InvalidParams("site distances must be >= 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = Builder::default();
    let mut trunk_end = Vec::with_capacity(params.sites);

    for s in 0..params.sites {
        let site = format!("S{:02}", s + 1);
        let angle = std::f64::consts::TAU * s as f64 / params.sites as f64;
        let center = [params.site_spread_m * angle.cos(), params.site_spread_m * angle.sin()];
        let place = |rng: &mut ChaCha8Rng| {
            let r = params.site_radius_m;
            let dx = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
            let dy = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
            [round3(center[0] + dx), round3(center[1] + dy)]
        };
        let device = |kind: &str, pos: [f64; 2], fiber_type: &str| {
            let mut p = PropertyBag::new();
            p.insert(NODE_TYPE.into(), PropertyValue::text(kind));
            p.insert("site".into(), PropertyValue::text(site.as_str()));
            p.insert(COORDINATES.into(), PropertyValue::Coordinates(pos));
            p.insert("fiber_type".into(), PropertyValue::text(fiber_type));
            p
        };

        let splice = NodeId::new(format!("{site}-SPL"));
        let splice_pos = place(&mut rng);
        b.node(&splice, device(SPLICE_BOX, splice_pos, "G652"));

        for o in 0..params.odfs_per_site {
            let id = NodeId::new(format!("{site}-ODF{}", o + 1));
            let pos = place(&mut rng);
            let ft = if rng.random_bool(params.odd_fiber_fraction) { "G655" } else { "G652" };
            b.node(&id, device(ODF, pos, ft));
            if rng.random_bool(params.documented_fraction) {
                let len = crate::graph::euclidean(pos, splice_pos) + 2.0;
                b.link(&id, &splice, fiber(len, 0.5, ft));
            }
        }

        let end = if rng.random_bool(params.amplifier_fraction) {
            let amp = NodeId::new(format!("{site}-AMP"));
            let pos = place(&mut rng);
            b.node(&amp, device(AMPLIFIER, pos, "G652"));
            let len = crate::graph::euclidean(pos, splice_pos) + 2.0;
            b.link(&amp, &splice, fiber(len, 0.3, "G652"));
            amp
        } else {
            splice
        };
        trunk_end.push(end);
    }

    let segment = |rng: &mut ChaCha8Rng| {
        let (lo, hi) = params.segment_length_km;
        let km = rng.random_range(lo..=hi);
        let (alo, ahi) = params.attenuation_db_per_km;
        let per_km = rng.random_range(alo..=ahi);
        let splices = rng.random_range(0.1..=0.5);
        fiber(km * 1000.0, km * per_km + splices, "G652")
    };

    let k = params.sites;
    if k > 1 {
        let ring = if k == 2 { 1 } else { k };
        for s in 0..ring {
            let p = segment(&mut rng);
            b.link(&trunk_end[s].clone(), &trunk_end[(s + 1) % k].clone(), p);
        }
        let possible_chords = k * (k - 1) / 2 - ring;
        let mut added = 0;
        let mut attempts = 0;
        while added < params.extra_links.min(possible_chords) && attempts < 100 * (params.extra_links + 1) {
            attempts += 1;
            let a = rng.random_range(0..k);
            let c = rng.random_range(0..k);
            let p = segment(&mut rng);
            if b.link(&trunk_end[a].clone(), &trunk_end[c].clone(), p) {
                added += 1;
            }
        }
    }

    b.finish()
}

/// Datacenter: rooms of rows of racks. Client racks hold servers and patch
/// panels; every `client_per_distribution + 1`-th rack of a row is a
/// distribution rack with an upstream switch. A row of two or more racks
/// always gets at least one, at its end.
pub fn generate_datacenter(params: &DatacenterGenParams) -> Result<TypedGraph, ScenarioError> {
    check_positive("rooms", params.rooms)?;
    check_positive("rows_per_room", params.rows_per_room)?;
    check_positive("racks_per_row", params.racks_per_row)?;
    check_positive("panels_per_rack", params.panels_per_rack)?;
    check_fraction("trunk_fraction", params.trunk_fraction)?;
    check_fraction("cross_row_fraction", params.cross_row_fraction)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = Builder::default();
    let cable = PropertyBag::new;

    for m in 0..params.rooms {
        let room = format!("M{}", m + 1);
        let mut first_panels = Vec::new();
        for w in 0..params.rows_per_room {
            let row = format!("{room}-W{}", w + 1);
            let mut racks: Vec<(Vec<NodeId>, bool)> = Vec::new();
            for k in 0..params.racks_per_row {
                let rack = format!("{row}-K{}", k + 1);
                let last_chance = k + 1 == params.racks_per_row
                    && k >= 1
                    && !racks.iter().any(|(_, d)| *d);
                let distribution = (k + 1) % (params.client_per_distribution + 1) == 0 || last_chance;
                let pos = [m as f64 * 50.0 + k as f64 * 0.6, w as f64 * 3.0];
                let device = |kind: &str, ports: f64, upstream: bool| {
                    let mut p = PropertyBag::new();
                    p.insert(NODE_TYPE.into(), PropertyValue::text(kind));
                    p.insert("room".into(), PropertyValue::text(room.as_str()));
                    p.insert("row".into(), PropertyValue::text(row.as_str()));
                    p.insert("rack".into(), PropertyValue::text(rack.as_str()));
                    p.insert(COORDINATES.into(), PropertyValue::Coordinates(pos));
                    p.insert("available_ports".into(), PropertyValue::number(ports));
                    p.insert("upstream".into(), PropertyValue::Bool(upstream));
                    p
                };

                let mut panels = Vec::new();
                for p in 0..params.panels_per_rack {
                    let id = NodeId::new(format!("{rack}-PP{}", p + 1));
                    let ports = if rng.random_bool(0.8) { rng.random_range(1..=4) as f64 } else { 0.0 };
                    b.node(&id, device(PATCH_PANEL, ports, false));
                    panels.push(id);
                }
                if distribution {
                    let sw = NodeId::new(format!("{rack}-SW"));
                    b.node(&sw, device(SWITCH, rng.random_range(1..=8) as f64, true));
                    for p in &panels {
                        b.link(p, &sw, cable());
                    }
                } else {
                    for s in 0..params.servers_per_rack {
                        let id = NodeId::new(format!("{rack}-SRV{}", s + 1));
                        let ports = rng.random_range(0..=1) as f64;
                        b.node(&id, device(SERVER, ports, false));
                        let p = &panels[rng.random_range(0..panels.len())];
                        b.link(&id, p, cable());
                    }
                }
                racks.push((panels, distribution));
            }

            // Structured cabling from client racks to the nearest distribution rack.
            let dist: Vec<usize> = (0..racks.len()).filter(|&i| racks[i].1).collect();
            for i in 0..racks.len() {
                if racks[i].1 || dist.is_empty() || !rng.random_bool(params.trunk_fraction) {
                    continue;
                }
                let j = *dist.iter().min_by_key(|&&j| j.abs_diff(i)).unwrap();
                let from = racks[i].0[rng.random_range(0..racks[i].0.len())].clone();
                let to = racks[j].0[rng.random_range(0..racks[j].0.len())].clone();
                b.link(&from, &to, cable());
            }
            first_panels.push(racks[0].0[0].clone());
        }
        for w in 1..first_panels.len() {
            if rng.random_bool(params.cross_row_fraction) {
                b.link(&first_panels[w - 1].clone(), &first_panels[w].clone(), cable());
            }
        }
    }
    b.finish()
}
