//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::sync::Arc;
use std::time::Instant;

use q4dec::decomposition::decompose;
use q4dec::defined::nd_structure_exhaustive;
use q4dec::generators::{complete, cube, th3, th4, tr3, truncated_cube};
use q4dec::mincut::{is_k_connected, min_wx_separation};
use q4dec::oracle::{enumerate_tangles, find_blocks};
use q4dec::quasi4::{
    canonical_q4_tangle, degenerate_construction_requests, faithful_torso_model, is_exceptional, is_quasi_4_connected,
    region_of_tangle, tangle_of_region, PipelineState, Survivor,
};
use q4dec::random::{random_3connected_sparse, rng};
use q4dec::separation::{enumerate_separations, oracle_cap};
use q4dec::tangle::{is_matching, Tangle};
use q4dec::validate::validate_decomposition;
use q4dec::{Graph, VertexSet};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<T>(r: q4dec::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Graphs the brute-force oracle can handle, named generators first.
fn oracle_corpus() -> Vec<(String, Arc<Graph>)> {
    let mut c: Vec<_> = common::named().into_iter().filter(|(_, g)| g.n() <= oracle_cap()).collect();
    c.extend(common::random_3connected(500, 14));
    c
}

fn full_corpus() -> Vec<(String, Arc<Graph>)> {
    let mut c = common::named();
    c.extend(common::random_3connected(500, 14));
    c.extend(common::random_connected_graphs(200, 12));
    c
}

fn exceptional_graphs() -> Outcome {
    for (name, g) in [("TH3", th3()), ("TR3", tr3())] {
        let start = Instant::now();
        let ts = e2s(enumerate_tangles(&Arc::new(g), 4))?;
        let secs = start.elapsed().as_secs_f64();
        ensure(ts.is_empty(), || format!("{name} has {} order-4 tangles", ts.len()))?;
        ensure(secs < 1.0, || format!("{name} took {secs:.2}s"))?;
    }
    Ok("no order-4 tangles on either".into())
}

fn quasi4_tangles() -> Outcome {
    let start = Instant::now();
    let mut graphs = vec![("cube".to_string(), cube()), ("K5".into(), complete(5)), ("K6".into(), complete(6))];
    graphs.extend((0..64).map(|m| (format!("TH4 mask {m}"), th4(m).unwrap())));
    let (mut exceptional, mut regular) = (0, 0);
    for (name, g) in graphs {
        let g = Arc::new(g);
        ensure(is_quasi_4_connected(&g), || format!("{name} is not quasi-4-connected"))?;
        let ts = e2s(enumerate_tangles(&g, 4))?;
        if e2s(is_exceptional(&g))? {
            exceptional += 1;
            ensure(ts.is_empty(), || format!("{name} is exceptional but has {} tangles", ts.len()))?;
        } else {
            regular += 1;
            ensure(ts.len() == 1, || format!("{name} has {} tangles", ts.len()))?;
            let small = e2s(canonical_q4_tangle(&g))?.ok_or_else(|| format!("{name}: no small-side tangle"))?;
            for sep in e2s(enumerate_separations(&g, 4))? {
                let want = sep.y().len() < sep.z().len();
                ensure(e2s(ts[0].contains(&sep))? == want, || format!("{name}: membership of {sep:?}"))?;
                ensure(e2s(small.contains(&sep))? == want, || format!("{name}: small-side rule on {sep:?}"))?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{regular} with one tangle, {exceptional} exceptional with none"))
}

fn correspondence() -> Outcome {
    let mut checked = 0;
    for (name, g) in oracle_corpus() {
        if !is_k_connected(&g, 3) {
            continue;
        }
        for t in e2s(enumerate_tangles(&g, 4))? {
            let region = e2s(region_of_tangle(&t))?;
            let back = e2s(tangle_of_region(&region))?;
            ensure(e2s(back.agrees_on_all_separations(&t))?, || format!("{name}: region {:?}", region.vertices()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tangles recovered from their regions"))
}

fn th4_region() -> Outcome {
    let g = Arc::new(th4(63).unwrap());
    let ts = e2s(enumerate_tangles(&g, 4))?;
    ensure(ts.len() == 1, || format!("{} tangles", ts.len()))?;
    let r = e2s(region_of_tangle(&ts[0]))?;
    let want: VertexSet = [0, 1, 2, 3].into();
    ensure(r.vertices() == &want, || format!("region {:?}", r.vertices()))?;
    Ok("region is the four hub vertices".into())
}

fn decomposition_validity() -> Outcome {
    let corpus = full_corpus();
    for (name, g) in &corpus {
        let td = e2s(decompose(g))?;
        let report = validate_decomposition(g, &td, 4);
        ensure(report.is_ok(), || format!("{name}: {}", report.violations[0]))?;
    }
    Ok(format!("{} graphs, zero violations", corpus.len()))
}

fn tangle_bag_count() -> Outcome {
    let mut graphs = 0;
    let mut total = 0;
    let mut corpus = oracle_corpus();
    corpus.extend(common::random_connected_graphs(200, 12));
    for (name, g) in corpus {
        let ts = e2s(enumerate_tangles(&g, 4))?;
        let td = e2s(decompose(&g))?;
        let nodes = td.tangle_nodes().len();
        ensure(ts.len() == nodes, || format!("{name}: {} tangles, {nodes} nodes", ts.len()))?;
        graphs += 1;
        total += nodes;
    }
    Ok(format!("{graphs} graphs, {total} tangles matched"))
}

fn tangles_and_blocks() -> Outcome {
    let mut matched = 0;
    for (name, g) in common::random_connected_graphs(200, 12) {
        for k in 1..=3 {
            let ts = e2s(enumerate_tangles(&g, k))?;
            let mut cores: Vec<VertexSet> = ts.iter().map(|t| e2s(t.core_set())).collect::<Result<_, _>>()?;
            cores.sort();
            let mut blocks: Vec<VertexSet> = e2s(find_blocks(&g, k - 1))?
                .into_iter()
                .filter(|b| 2 * b.set.len() > 3 * (k - 1))
                .map(|b| b.set)
                .collect();
            blocks.sort();
            ensure(cores == blocks, || format!("{name}, order {k}: cores {cores:?} vs blocks {blocks:?}"))?;
            matched += ts.len();
        }
    }
    Ok(format!("{matched} tangles matched to blocks"))
}

/// Minimum (W,X)-separation by trying every separator: returns the order
/// and the smallest Y∪S among minimum ones.
fn brute_force_wx(g: &Graph, w: &VertexSet, x: &VertexSet) -> (usize, VertexSet) {
    let n = g.n();
    let mut best: Option<(usize, VertexSet)> = None;
    for bits in 0u64..1 << n {
        let s = VertexSet::from_bits(bits);
        if best.as_ref().is_some_and(|(k, _)| s.len() > *k) {
            continue;
        }
        if !w.intersection(x).is_subset(&s) {
            continue;
        }
        // Y: everything reachable from W∖S avoiding S.
        let mut y = w.difference(&s);
        let mut stack: Vec<usize> = y.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if !s.contains(u) && !y.contains(u) {
                    y.insert(u);
                    stack.push(u);
                }
            }
        }
        if !y.is_disjoint(x) {
            continue;
        }
        let left = y.union(&s);
        best = match best {
            Some((k, b)) if k < s.len() || (k == s.len() && b.len() <= left.len()) => Some((k, b)),
            _ => Some((s.len(), left)),
        };
    }
    best.expect("S = W always works")
}

fn flow_vs_brute_force() -> Outcome {
    let mut r = rng(8);
    for q in 0..1000 {
        let n = r.gen_range(2..=10);
        let p = r.gen_range(0.1..0.8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if r.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges).unwrap();
        let pick = |r: &mut rand_chacha::ChaCha8Rng| -> VertexSet {
            let k = r.gen_range(1..=3.min(n));
            (0..k).map(|_| r.gen_range(0..n)).collect()
        };
        let (w, x) = (pick(&mut r), pick(&mut r));
        let flow = min_wx_separation(&g, &w, &x);
        let (order, left) = brute_force_wx(&g, &w, &x);
        ensure(flow.validate(&g).is_ok() && w.is_subset(&flow.ys()) && x.is_subset(&flow.sz()), || {
            format!("query {q}: {flow:?} is not a ({w:?},{x:?})-separation")
        })?;
        ensure(flow.order() == order, || format!("query {q}: order {} vs {order}", flow.order()))?;
        ensure(flow.ys() == left, || format!("query {q}: left side {:?} vs {left:?}", flow.ys()))?;
    }
    Ok("1000 queries agree".into())
}

fn torso_models() -> Outcome {
    let before = degenerate_construction_requests();
    let (mut built, mut refused) = (0, 0);
    for (name, g) in oracle_corpus() {
        if !is_k_connected(&g, 3) || g.n() > 14 {
            continue;
        }
        for sep in e2s(enumerate_separations(&g, 4))? {
            if sep.order() != 3 || !sep.is_proper() {
                continue;
            }
            let degenerate = e2s(sep.is_degenerate(&g))?;
            match faithful_torso_model(&g, &sep) {
                Ok(m) => {
                    ensure(!degenerate, || format!("{name}: model for degenerate {sep:?}"))?;
                    e2s(m.validate()).map_err(|e| format!("{name} {sep:?}: {e}"))?;
                    ensure(m.is_faithful(), || format!("{name} {sep:?}: not faithful"))?;
                    let anchored = m.pattern().vertices().all(|w| m.anchor(w).is_some_and(|h| m.branch_set(w).contains(h)));
                    ensure(anchored, || format!("{name} {sep:?}: torso vertex outside its branch set"))?;
                    built += 1;
                }
                Err(q4dec::Error::Precondition(_)) if degenerate => refused += 1,
                Err(e) => return Err(format!("{name} {sep:?}: {e}")),
            }
        }
        // The algorithm itself builds models for regions; none may ask for a degenerate one.
        e2s(decompose(&g))?;
        for t in e2s(enumerate_tangles(&g, 4))? {
            e2s(region_of_tangle(&t))?;
        }
    }
    let internal = degenerate_construction_requests() - before;
    ensure(internal == 0, || format!("{internal} degenerate construction requests from the algorithm"))?;
    Ok(format!("{built} models validated, {refused} degenerate inputs refused, none requested internally"))
}

fn check_pipeline(name: &str, t: &Tangle, steps: &mut usize) -> Result<(), String> {
    let mut state = e2s(PipelineState::new(t, &Survivor::LowerId))?;
    loop {
        let nd = e2s(nd_structure_exhaustive(state.tangle()))?;
        let edges = nd.edges();
        ensure(is_matching(&edges), || format!("{name}: crossedges {edges:?} not a matching"))?;
        // Pending edges are in original ids, the recomputed ones in stage ids.
        let norm = |(a, b): (usize, usize)| (a.min(b), a.max(b));
        let mut pending: Vec<_> = state.pending().iter().map(|&e| norm(e)).collect();
        pending.sort();
        let mut current: Vec<_> = edges.iter().map(|&(a, b)| norm((state.rename().to_host(a), state.rename().to_host(b)))).collect();
        current.sort();
        ensure(pending == current, || format!("{name}: pending {pending:?} vs recomputed {current:?}"))?;
        ensure(is_k_connected(state.graph(), 3), || format!("{name}: stage {} not 3-connected", state.stage()))?;
        let Some(&e) = state.pending().first() else { break };
        let next = e2s(state.contract_crossedge_step(e))?;
        ensure(next.pending().len() + 1 == state.pending().len(), || format!("{name}: contraction of {e:?} did not drop one"))?;
        state = next;
        *steps += 1;
    }
    e2s(state.check_final())
}

fn crossedge_machinery() -> Outcome {
    let mut instances: Vec<(String, Arc<Graph>)> = vec![("truncated cube".into(), Arc::new(truncated_cube()))];
    instances.extend(common::random_3connected(500, 14));
    let (mut crossing, mut steps) = (0, 0);
    for (name, g) in instances {
        for t in e2s(enumerate_tangles(&g, 4))? {
            if e2s(nd_structure_exhaustive(&t))?.crossedges.is_empty() {
                continue;
            }
            crossing += 1;
            check_pipeline(&name, &t, &mut steps)?;
        }
    }
    ensure(crossing > 1, || "no crossing instances found".into())?;
    Ok(format!("{crossing} crossing tangles, {steps} contraction steps"))
}

fn performance() -> Outcome {
    let sizes = [250usize, 500, 1000, 2000];
    let mut pts = Vec::new();
    let mut last = 0.0;
    for &n in &sizes {
        let g = Arc::new(random_3connected_sparse(n, 3 * n / 2, &mut rng(n as u64)));
        let start = Instant::now();
        e2s(decompose(&g))?;
        last = start.elapsed().as_secs_f64();
        pts.push(((n as f64).ln(), last.max(1e-6).ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let detail = format!("n=2000 in {last:.1}s, log-log exponent {slope:.2}");
    ensure(last < 60.0 && slope <= 3.3, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exceptional graphs have no order-4 tangle", exceptional_graphs),
        ("quasi-4-connected graphs: one small-side tangle unless exceptional", quasi4_tangles),
        ("tangle of the region of a tangle is the tangle", correspondence),
        ("full TH4 region is the hub", th4_region),
        ("decompositions validate at level 4", decomposition_validity),
        ("order-4 tangles match tangle-carrying nodes", tangle_bag_count),
        ("low-order tangles match blocks", tangles_and_blocks),
        ("flow separations match brute force", flow_vs_brute_force),
        ("faithful torso models", torso_models),
        ("crossedge contraction", crossedge_machinery),
        ("running time", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
