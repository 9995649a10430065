//! Randomised invariant battery over small 3-connected graphs.

use std::sync::Arc;

use crate::decomposition::{decompose, decompose_with, Quasi4Options};
use crate::defined::{nd_minimals_and_crossedges, nd_structure_exhaustive, tangle_from_separation};
use crate::embedding::{are_isomorphic, find_embedding};
use crate::generators::th4;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::io::to_json;
use crate::mincut::is_k_connected;
use crate::oracle::{check_axioms, enumerate_tangles, enumerate_tangles_with, OracleOptions};
use crate::quasi4::{
    canonical_q4_tangle, check_region, faithful_torso_model, is_exceptional, is_quasi_4_connected,
    is_quasi_4_connected_exhaustive, region_of_tangle, tangle_of_region, PipelineState, Survivor,
};
use crate::random::{random_small_3connected, rng};
use crate::separation::{enumerate_separations, fault, Separation};
use crate::tangle::{is_matching, Tangle};
use crate::validate::validate_decomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub count: usize,
    pub max_n: usize,
    pub seed: u64,
    /// Cross-check the oracle against the unreduced triple axiom.
    pub raw_t2: bool,
    /// Run with a deliberately broken separation meet.
    pub faulty_meet: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { count: 500, max_n: 12, seed: 0, raw_t2: false, faulty_meet: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub check: &'static str,
    pub detail: String,
}

/// Counters over a battery run, used to confirm coverage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Coverage {
    pub tangles: usize,
    pub torso_models: usize,
    pub degenerate_refusals: usize,
    pub crossing_tangles: usize,
    pub contractions: usize,
}

impl Coverage {
    pub fn add(&mut self, o: &Coverage) {
        self.tangles += o.tangles;
        self.torso_models += o.torso_models;
        self.degenerate_refusals += o.degenerate_refusals;
        self.crossing_tangles += o.crossing_tangles;
        self.contractions += o.contractions;
    }
}

#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub index: usize,
    pub graph: Graph,
    pub findings: Vec<Finding>,
    pub coverage: Coverage,
}

/// Instance `index` of a seeded run; independent of the other instances.
pub fn instance(seed: u64, max_n: usize, index: usize) -> Graph {
    let mut r = rng(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    random_small_3connected(max_n.max(5), &mut r)
}

pub fn run_instance(cfg: &FuzzConfig, index: usize) -> InstanceOutcome {
    let graph = instance(cfg.seed, cfg.max_n, index);
    let g = Arc::new(graph.clone());
    let (findings, coverage) = if cfg.faulty_meet {
        fault::with_faulty_meet(|| battery(&g, cfg.raw_t2))
    } else {
        battery(&g, cfg.raw_t2)
    };
    InstanceOutcome { index, graph, findings, coverage }
}

pub fn run(cfg: &FuzzConfig) -> Vec<InstanceOutcome> {
    (0..cfg.count).map(|i| run_instance(cfg, i)).collect()
}

struct Battery {
    findings: Vec<Finding>,
    coverage: Coverage,
}

impl Battery {
    fn fail(&mut self, check: &'static str, detail: impl Into<String>) {
        self.findings.push(Finding { check, detail: detail.into() });
    }

    /// Runs one check; errors become findings under the same name.
    fn check(&mut self, check: &'static str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.fail(check, e.to_string());
        }
    }
}

/// Every invariant check on one 3-connected graph at oracle scale.
pub fn battery(g: &Arc<Graph>, raw_t2: bool) -> (Vec<Finding>, Coverage) {
    let mut b = Battery { findings: Vec::new(), coverage: Coverage::default() };
    if !is_k_connected(g, 3) {
        b.fail("input-3-connected", format!("{g:?}"));
        return (b.findings, b.coverage);
    }
    let tangles = match enumerate_tangles(g, 4) {
        Ok(t) => t,
        Err(e) => {
            b.fail("oracle", e.to_string());
            return (b.findings, b.coverage);
        }
    };
    b.coverage.tangles = tangles.len();

    b.check("oracle-axioms", |b| {
        for t in &tangles {
            let bad = check_axioms(t)?;
            if !bad.is_empty() {
                b.fail("oracle-axioms", format!("{:?}", bad[0]));
            }
        }
        Ok(())
    });
    if raw_t2 {
        b.check("raw-triple-axiom", |b| {
            for k in 1..=4 {
                let fast = enumerate_tangles(g, k)?;
                let raw = enumerate_tangles_with(g, k, OracleOptions { prune: false, raw_t2: true })?;
                let same = fast.len() == raw.len()
                    && fast.iter().zip(&raw).map(|(x, y)| x.same_choices(y)).collect::<Result<Vec<_>>>()?.into_iter().all(|x| x);
                if !same {
                    b.fail("raw-triple-axiom", format!("order {k}: {} reduced vs {} raw", fast.len(), raw.len()));
                }
            }
            Ok(())
        });
    }
    b.check("meet-join", |b| meet_join(b, g, &tangles));
    b.check("quasi-4-connected", |b| {
        let flow = is_quasi_4_connected(g);
        if flow != is_quasi_4_connected_exhaustive(g) {
            b.fail("quasi-4-connected", "flow test and exhaustive test disagree");
        }
        if flow {
            let want = usize::from(!is_exceptional(g)?);
            if tangles.len() != want {
                b.fail("quasi-4-connected", format!("{} tangles, expected {want}", tangles.len()));
            }
            if let (Some(t), Some(c)) = (tangles.first(), canonical_q4_tangle(g)?) {
                if !t.same_choices(&c)? {
                    b.fail("quasi-4-connected", "tangle is not the small-side tangle");
                }
            }
        }
        Ok(())
    });
    b.check("correspondence", |b| correspondence(b, g, &tangles));
    b.check("crossedges", |b| crossedges(b, &tangles));
    b.check("torso-model", |b| torso_models(b, g));
    b.check("decomposition", |b| decomposition(b, g, &tangles));
    (b.findings, b.coverage)
}

fn meet_join(b: &mut Battery, g: &Arc<Graph>, tangles: &[Tangle]) -> Result<()> {
    let all: Vec<Separation> = enumerate_separations(g, 4)?.collect();
    let seps: Vec<Separation> = all.iter().step_by(all.len() / 80 + 1).cloned().collect();
    for x in &seps {
        for y in &seps {
            let (m, j) = (x.meet(y), x.join(y));
            if m.validate(g).is_err() || j.validate(g).is_err() {
                b.fail("meet-join", format!("meet or join of {x:?} and {y:?} is not a separation"));
                return Ok(());
            }
            if m.order() + j.order() != x.order() + y.order() {
                b.fail("meet-join", format!("orders of {x:?} and {y:?} are not modular"));
                return Ok(());
            }
            // In the order (A,B) ≤ (A',B') iff A ⊆ A' and B ⊇ B' with A = Z∪S.
            let below = |a: &Separation, b: &Separation| a.sz().is_subset(&b.sz()) && b.ys().is_subset(&a.ys());
            if !(below(&m, x) && below(&m, y) && below(x, &j) && below(y, &j)) {
                b.fail("meet-join", format!("meet/join of {x:?} and {y:?} are not bounds"));
                return Ok(());
            }
        }
    }
    for t in tangles {
        let canon: Vec<Separation> = t.canonical_separations()?.into_iter().take(40).collect();
        for x in &canon {
            for y in &canon {
                let m = x.meet(y);
                if m.order() < t.order() && m.validate(g).is_ok() && !t.contains(&m)? {
                    b.fail("meet-join", format!("tangle not closed under meet of {x:?} and {y:?}"));
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

fn correspondence(b: &mut Battery, g: &Arc<Graph>, tangles: &[Tangle]) -> Result<()> {
    for t in tangles {
        let region = region_of_tangle(t)?;
        check_region(g, region.vertices())?;
        let back = tangle_of_region(&region)?;
        if !back.same_choices(t)? {
            b.fail("correspondence", format!("region {:?} gives a different tangle", region.vertices()));
        }
    }
    Ok(())
}

fn crossedges(b: &mut Battery, tangles: &[Tangle]) -> Result<()> {
    for t in tangles {
        let nd = nd_structure_exhaustive(t)?;
        let edges = nd.edges();
        if !is_matching(&edges) {
            b.fail("crossedges", format!("crossedges {edges:?} are not a matching"));
        }
        if edges.is_empty() {
            continue;
        }
        b.coverage.crossing_tangles += 1;
        let mut state = PipelineState::new(t, &Survivor::LowerId)?;
        while let Some(&e) = state.pending().first() {
            let before = state.pending().len();
            state = state.contract_crossedge_step(e)?;
            b.coverage.contractions += 1;
            if state.pending().len() + 1 != before {
                b.fail("crossedges", format!("contracting {e:?} left {} of {before}", state.pending().len()));
            }
            if !is_k_connected(state.graph(), 3) {
                b.fail("crossedges", format!("contracting {e:?} broke 3-connectivity"));
            }
        }
        state.check_final()?;
    }
    Ok(())
}

fn torso_models(b: &mut Battery, g: &Arc<Graph>) -> Result<()> {
    let mut defined_checked = 0;
    for sep in enumerate_separations(g, 4)? {
        if sep.order() != 3 || !sep.is_proper() {
            continue;
        }
        let degenerate = sep.is_degenerate(g)?;
        match faithful_torso_model(g, &sep) {
            Ok(model) => {
                b.coverage.torso_models += 1;
                if degenerate {
                    b.fail("torso-model", format!("model built for degenerate {sep:?}"));
                }
                if let Err(e) = model.validate() {
                    b.fail("torso-model", format!("{sep:?}: {e}"));
                }
                if !model.is_faithful() {
                    b.fail("torso-model", format!("{sep:?}: model is not faithful"));
                }
                let anchored = model.pattern().vertices().all(|w| model.anchor(w).is_some_and(|h| model.branch_set(w).contains(h)));
                if !anchored {
                    b.fail("torso-model", format!("{sep:?}: torso vertex outside its branch set"));
                }
            }
            Err(Error::Precondition(_)) if degenerate => b.coverage.degenerate_refusals += 1,
            Err(e) => b.fail("torso-model", format!("{sep:?}: {e}")),
        }
        if defined_checked < 6 && !degenerate && g.is_connected_subset(sep.z()) {
            if let Ok(t) = tangle_from_separation(g, &sep) {
                defined_checked += 1;
                let flow = nd_minimals_and_crossedges(&t)?;
                let exhaustive = nd_structure_exhaustive(&t)?;
                if flow.t_nd != exhaustive.t_nd || flow.edges() != exhaustive.edges() {
                    b.fail("defined-tangle-structure", format!("flow and exhaustive minimal structure differ for {sep:?}"));
                }
            }
        }
    }
    Ok(())
}

fn decomposition(b: &mut Battery, g: &Arc<Graph>, tangles: &[Tangle]) -> Result<()> {
    let td = decompose(g)?;
    let report = validate_decomposition(g, &td, 4);
    for v in &report.violations {
        b.fail("decomposition", v.to_string());
    }
    if to_json(&decompose(g)?) != to_json(&td) {
        b.fail("decomposition", "second run differs");
    }
    let audited = decompose_with(g, 4, Quasi4Options { audit: true, ..Quasi4Options::default() })?;
    if to_json(&audited) != to_json(&td) {
        b.fail("decomposition", "audited run differs");
    }
    // Torsos of tangle-carrying nodes against region torsos, up to
    // isomorphism. A 4-bag may stand for a region around it whose torso
    // sits inside the full TH4.
    let th4 = th4(63)?;
    let mut open: Vec<(VertexSet, Graph)> =
        td.tangle_nodes().into_iter().map(|t| (td.nodes()[t].bag.clone(), g.torso(&td.nodes()[t].bag).0)).collect();
    let regions = tangles.iter().map(region_of_tangle).collect::<Result<Vec<_>>>()?;
    let mut unmatched = Vec::new();
    for region in &regions {
        match open.iter().position(|(bag, h)| bag.len() >= 5 && are_isomorphic(h, region.torso())) {
            Some(i) => drop(open.swap_remove(i)),
            None => unmatched.push(region),
        }
    }
    for region in unmatched {
        let fits = |bag: &VertexSet| bag.len() == 4 && bag.is_subset(region.vertices()) && find_embedding(region.torso(), &th4).is_some();
        match open.iter().position(|(bag, _)| fits(bag)) {
            Some(i) => drop(open.swap_remove(i)),
            None => b.fail("torso-multiset", format!("no bag torso matches region {:?}", region.vertices())),
        }
    }
    if !open.is_empty() {
        b.fail("torso-multiset", format!("{} tangle-carrying bags without a tangle", open.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;

    #[test]
    fn named_graphs_pass() {
        for g in [cube(), th3(), tr3(), glued_k5(), complete(5), th4(63).unwrap()] {
            let (f, _) = battery(&Arc::new(g), true);
            assert!(f.is_empty(), "{f:?}");
        }
    }

    #[test]
    fn short_run_is_clean_and_deterministic() {
        let cfg = FuzzConfig { count: 25, max_n: 10, seed: 3, ..FuzzConfig::default() };
        let a = run(&cfg);
        assert!(a.iter().all(|o| o.findings.is_empty()), "{:?}", a.iter().find(|o| !o.findings.is_empty()));
        let b = run(&cfg);
        assert!(a.iter().zip(&b).all(|(x, y)| x.graph.edges().eq(y.graph.edges())));
    }

    #[test]
    fn faulty_meet_is_caught() {
        let cfg = FuzzConfig { count: 3, max_n: 9, seed: 0, faulty_meet: true, ..FuzzConfig::default() };
        let out = run(&cfg);
        assert!(out.iter().all(|o| o.findings.iter().any(|f| f.check == "meet-join")));
    }
}
