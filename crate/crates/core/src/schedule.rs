//! Recombination of subgraph circuits: ALAP packing of emitter-usage
//! curves under a global emitter cap, stem entanglement between boundary
//! photons, and reuse of physical emitters across subcircuits.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::circuit::{Circuit, Gate, Time};
use crate::clifford::{Clifford1, Pauli};
use crate::compile::CompilationCandidate;
use crate::graph::GraphState;
use crate::hardware::{self, HardwareModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("subgraph {part} needs {need} emitters but Ne_limit = {ne_limit}")]
    Infeasible { part: usize, need: usize, ne_limit: usize },
    #[error("no placement of subgraph {part} fits under Ne_limit = {ne_limit}")]
    NoFit { part: usize, ne_limit: usize },
    #[error("stem edge ({0}, {1}) does not join hosted boundary photons of two subgraphs")]
    BadStem(usize, usize),
}

/// Piecewise-constant emitter count; `breakpoints[i].1` holds from
/// `breakpoints[i].0` up to the next breakpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UsageCurve {
    pub breakpoints: Vec<(Time, usize)>,
    pub duration: Time,
}

impl UsageCurve {
    pub fn from_intervals(intervals: &[(Time, Time)]) -> Self {
        let mut events: BTreeMap<Time, i64> = BTreeMap::new();
        for &(s, e) in intervals.iter().filter(|(s, e)| s < e) {
            *events.entry(s).or_default() += 1;
            *events.entry(e).or_default() -= 1;
        }
        let mut breakpoints = Vec::new();
        let mut cur = 0i64;
        for (t, d) in events {
            cur += d;
            if breakpoints.last().is_none_or(|&(_, h)| h != cur as usize) {
                breakpoints.push((t, cur as usize));
            }
        }
        let duration = breakpoints.last().map(|b| b.0).unwrap_or_default();
        UsageCurve { breakpoints, duration }
    }

    pub fn at(&self, t: Time) -> usize {
        self.breakpoints.iter().take_while(|b| b.0 <= t).last().map_or(0, |b| b.1)
    }

    pub fn peak(&self) -> usize {
        self.breakpoints.iter().map(|b| b.1).max().unwrap_or(0)
    }

    /// Unit-height pieces that stack up to this curve.
    fn unit_intervals(&self) -> Vec<(Time, Time)> {
        let mut open: Vec<Time> = Vec::new();
        let mut out = Vec::new();
        for &(t, h) in &self.breakpoints {
            while open.len() > h {
                out.push((open.pop().unwrap(), t));
            }
            while open.len() < h {
                open.push(t);
            }
        }
        out
    }

    /// `time,emitters_in_use` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "emitters_in_use"])?;
        for &(t, h) in &self.breakpoints {
            w.write_record([crate::circuit::format_time(t), h.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Emitter usage of a timed circuit.
pub fn usage_curve(c: &Circuit, hw: &HardwareModel) -> UsageCurve {
    let iv: Vec<(Time, Time)> =
        hardware::emitter_intervals(c, hw).into_iter().map(|(_, s, e)| (s, e)).collect();
    UsageCurve::from_intervals(&iv)
}

/// Photons per unit duration. Zero-duration circuits rank above everything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Priority {
    Finite(Time),
    Infinite,
}

pub fn priority(photons: usize, duration: Time) -> Priority {
    if duration <= Time::default() {
        Priority::Infinite
    } else {
        Priority::Finite(Time::from_integer(photons as i64) / duration)
    }
}

fn max_overlap(intervals: &[(Time, Time)]) -> usize {
    let mut ev: Vec<(Time, i32)> = Vec::with_capacity(intervals.len() * 2);
    for &(s, e) in intervals.iter().filter(|(s, e)| s < e) {
        ev.push((s, 1));
        ev.push((e, -1));
    }
    ev.sort();
    let (mut cur, mut peak) = (0i32, 0i32);
    for (_, d) in ev {
        cur += d;
        peak = peak.max(cur);
    }
    peak as usize
}

/// Offsets worth trying, latest first: the horizon itself and every
/// position where the block's end meets the start of something placed.
fn candidate_offsets(placed: &[(Time, Time)], ends: &[Time], latest: Time) -> Vec<Time> {
    let mut c: Vec<Time> = placed
        .iter()
        .flat_map(|&(s, _)| ends.iter().map(move |&e| s - e))
        .filter(|&t| t < latest)
        .collect();
    c.push(latest);
    c.sort_by(|a, b| b.cmp(a));
    c.dedup();
    c
}

/// Latest start for `curve` ending by `horizon` such that the stacked usage
/// of `placed` (unit-height intervals) stays within `cap`.
pub fn alap_insert(
    placed: &[(Time, Time)],
    curve: &UsageCurve,
    horizon: Time,
    cap: usize,
) -> Result<Time, ScheduleError> {
    if curve.peak() > cap {
        return Err(ScheduleError::NoFit { part: 0, ne_limit: cap });
    }
    let units = curve.unit_intervals();
    let ends: Vec<Time> = units.iter().map(|u| u.1).collect();
    for s in candidate_offsets(placed, &ends, horizon - curve.duration) {
        let mut all = placed.to_vec();
        all.extend(units.iter().map(|&(a, b)| (a + s, b + s)));
        if max_overlap(&all) <= cap {
            return Ok(s);
        }
    }
    unreachable!("placing before everything always fits")
}

/// One subgraph: global ids of its vertices (by local index) and its
/// compiled variants keyed by emitter budget.
#[derive(Clone, Debug)]
pub struct Part {
    pub vertices: Vec<usize>,
    pub variants: BTreeMap<usize, CompilationCandidate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub part: usize,
    /// Key of the chosen variant.
    pub variant: usize,
    pub offset: Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StemGate {
    pub edge: (usize, usize),
    pub start: Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulePlan {
    pub placements: Vec<Placement>,
    pub stem_gates: Vec<StemGate>,
    pub ne_limit: usize,
    /// Physical emitter for each placement, local emitter and activity period.
    pub emitter_map: Vec<Vec<Vec<usize>>>,
}

struct Block<'a> {
    part: usize,
    cand: &'a CompilationCandidate,
    vertices: &'a [usize],
    /// Per host: when its emitter is done with the body, and whether it
    /// must be re-initialized before the stems.
    ready: Vec<(Time, bool)>,
}

impl<'a> Block<'a> {
    fn new(part: usize, cand: &'a CompilationCandidate, vertices: &'a [usize], hw: &HardwareModel) -> Self {
        let ready = cand
            .hosts
            .iter()
            .map(|h| {
                let last = cand.body.ops.iter().filter(|o| o.gate.operands().contains(&h.emitter)).last();
                match last {
                    None => (Time::default(), true),
                    Some(o) => {
                        let t = o.start.unwrap_or_default() + hw.duration(o.gate.kind());
                        (t, matches!(o.gate, Gate::MeasureX { .. }))
                    }
                }
            })
            .collect();
        Block { part, cand, vertices, ready }
    }

    fn width(&self) -> usize {
        self.cand.body.emitters
    }

    fn body_end(&self, hw: &HardwareModel) -> Time {
        self.cand.body.end_time(hw)
    }
}

/// A partial or complete plan laid out on logical emitters (no reuse).
struct Layout {
    circuit: Circuit,
    stems: Vec<StemGate>,
}

/// Lay out `placed` blocks at their offsets, then every stem whose two
/// subgraphs are both placed, then the release of every host whose stems
/// are all done.
fn assemble(
    target: &GraphState,
    placed: &[(&Block, Time)],
    stems: &[(usize, usize)],
    hw: &HardwareModel,
) -> Layout {
    let total: usize = placed.iter().map(|(b, _)| b.width()).sum();
    let mut c = Circuit::new(total, target.len());
    let mut base = Vec::with_capacity(placed.len());
    let mut host_of: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut acc = 0;
    for (i, (b, off)) in placed.iter().enumerate() {
        base.push(acc);
        let w = b.width();
        for op in &b.cand.body.ops {
            let g = op.gate.map_qubits(|q| if q < w { acc + q } else { total + b.vertices[q - w] });
            c.push_at(g, op.start.unwrap_or_default() + *off);
        }
        for (j, h) in b.cand.hosts.iter().enumerate() {
            host_of.insert(b.vertices[h.photon], (i, j));
        }
        acc += w;
    }
    let emitter = |i: usize, j: usize| base[i] + placed[i].0.cand.hosts[j].emitter;
    let mut clock: BTreeMap<(usize, usize), Time> = BTreeMap::new();
    let mut tag: BTreeMap<(usize, usize), Clifford1> = BTreeMap::new();
    let mut pending: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, (b, off)) in placed.iter().enumerate() {
        for (j, h) in b.cand.hosts.iter().enumerate() {
            let (t, init) = b.ready[j];
            clock.insert((i, j), *off + t);
            tag.insert((i, j), h.tag);
            if init {
                c.push_at(Gate::EmitterInit { emitter: emitter(i, j) }, *off + t);
            }
        }
    }
    let mut live: Vec<(Time, usize, usize)> = Vec::new();
    for &(u, v) in stems {
        match (host_of.get(&u), host_of.get(&v)) {
            (Some(&hu), Some(&hv)) => live.push((clock[&hu].max(clock[&hv]), u, v)),
            (Some(&h), None) | (None, Some(&h)) => *pending.entry(h).or_default() += 1,
            _ => {}
        }
    }
    live.sort();
    let t1q = hw.duration(crate::circuit::GateKind::SingleQubitClifford);
    let mut out_stems = Vec::new();
    for (_, u, v) in live {
        let (hu, hv) = (host_of[&u], host_of[&v]);
        let (a, b) = (emitter(hu.0, hu.1), emitter(hv.0, hv.1));
        let t0 = clock[&hu].max(clock[&hv]);
        let ua = tag[&hu].inverse();
        let ub = tag[&hv].inverse().then(Clifford1::h());
        if !ua.is_identity() {
            c.push_at(Gate::Local { qubit: a, u: ua }, t0);
        }
        if !ub.is_identity() {
            c.push_at(Gate::Local { qubit: b, u: ub }, t0);
        }
        let t = t0 + t1q;
        c.push_at(Gate::EmitterCnot { control: a, target: b }, t);
        out_stems.push(StemGate { edge: (u.min(v), u.max(v)), start: t });
        let done = t + hw.t_ee_cnot;
        clock.insert(hu, done);
        clock.insert(hv, done);
        tag.insert(hu, Clifford1::IDENTITY);
        tag.insert(hv, Clifford1::h());
    }
    for (&v, &(i, j)) in &host_of {
        if pending.get(&(i, j)).copied().unwrap_or(0) > 0 {
            continue;
        }
        let e = emitter(i, j);
        let p = total + v;
        let mut t = clock[&(i, j)];
        let clear = tag[&(i, j)].inverse();
        if !clear.is_identity() {
            c.push_at(Gate::Local { qubit: e, u: clear }, t);
            t += t1q;
        }
        c.push_at(Gate::Emission { emitter: e, photon: p }, t);
        t += hw.t_emission;
        c.push_at(Gate::MeasureX { emitter: e, corr: Some((p, Pauli::X)) }, t);
        t += hw.t_measure;
        let fin = Clifford1::h().then(target.lc_tag(v));
        if !fin.is_identity() {
            c.push_at(Gate::Local { qubit: p, u: fin }, t);
        }
    }
    c.canonicalize();
    Layout { circuit: c, stems: out_stems }
}

/// Activity periods of each logical emitter, in the order gates meet them.
fn periods(c: &Circuit, hw: &HardwareModel) -> Vec<Vec<(Time, Time)>> {
    let mut per: Vec<Vec<(Time, Time)>> = vec![Vec::new(); c.emitters];
    let mut open: Vec<Option<(Time, Time)>> = vec![None; c.emitters];
    for op in &c.ops {
        let t = op.start.unwrap_or_default();
        let end = t + hw.duration(op.gate.kind());
        for q in op.gate.operands().into_iter().filter(|&q| c.is_emitter(q)) {
            let slot = open[q].get_or_insert((t, end));
            slot.1 = slot.1.max(end);
            if matches!(op.gate, Gate::MeasureX { .. }) {
                per[q].push(open[q].take().unwrap());
            }
        }
    }
    for (q, slot) in open.into_iter().enumerate() {
        if let Some(s) = slot {
            per[q].push(s);
        }
    }
    per
}

/// Map logical activity periods onto physical emitters, reusing the one
/// that became free earliest. Returns the physical circuit and the map.
fn assign_emitters(c: &Circuit, hw: &HardwareModel) -> (Circuit, Vec<Vec<usize>>) {
    let per = periods(c, hw);
    let mut order: Vec<(Time, usize, usize)> = per
        .iter()
        .enumerate()
        .flat_map(|(q, ps)| ps.iter().enumerate().map(move |(k, &(s, _))| (s, q, k)))
        .collect();
    order.sort();
    let mut free_at: Vec<Time> = Vec::new();
    let mut map: Vec<Vec<usize>> = per.iter().map(|ps| vec![0; ps.len()]).collect();
    for (s, q, k) in order {
        let pick = (0..free_at.len()).filter(|&p| free_at[p] <= s).min_by_key(|&p| (free_at[p], p));
        let p = pick.unwrap_or_else(|| {
            free_at.push(Time::default());
            free_at.len() - 1
        });
        free_at[p] = per[q][k].1;
        map[q][k] = p;
    }
    let phys = free_at.len();
    let mut out = Circuit::new(phys, c.photons);
    let mut seen = vec![0usize; c.emitters];
    for op in &c.ops {
        let g = op.gate.map_qubits(|q| {
            if c.is_emitter(q) {
                map[q][seen[q].min(map[q].len().saturating_sub(1))]
            } else {
                phys + (q - c.emitters)
            }
        });
        out.push_at(g, op.start.unwrap_or_default());
        if let Gate::MeasureX { emitter, .. } = op.gate {
            seen[emitter] += 1;
        }
    }
    (out, map)
}

fn peak_of(c: &Circuit, hw: &HardwareModel) -> usize {
    let iv: Vec<(Time, Time)> = periods(c, hw).into_iter().flatten().collect();
    max_overlap(&iv)
}

/// Right-to-left packing in the given order. Each block starts no later
/// than the block placed before it.
fn pack<'a>(
    target: &GraphState,
    blocks: &[&'a Block<'a>],
    stems: &[(usize, usize)],
    cap: usize,
    hw: &HardwareModel,
) -> Result<Vec<(&'a Block<'a>, Time)>, ScheduleError> {
    let mut placed: Vec<(&Block, Time)> = Vec::new();
    let mut latest_start: Option<Time> = None;
    for &b in blocks {
        let d = b.body_end(hw);
        let mut latest = -d;
        if let Some(prev) = latest_start {
            latest = latest.min(prev);
        }
        let current = assemble(target, &placed, stems, hw).circuit;
        let starts: Vec<(Time, Time)> =
            periods(&current, hw).into_iter().flatten().collect();
        let mut ends: Vec<Time> = periods(&b.cand.body, hw).into_iter().flatten().map(|p| p.1).collect();
        ends.push(d);
        let mut found = None;
        for s in candidate_offsets(&starts, &ends, latest) {
            let mut trial = placed.clone();
            trial.push((b, s));
            if peak_of(&assemble(target, &trial, stems, hw).circuit, hw) <= cap {
                found = Some(s);
                break;
            }
        }
        let s = found.ok_or(ScheduleError::NoFit { part: b.part, ne_limit: cap })?;
        placed.push((b, s));
        latest_start = Some(s);
    }
    Ok(placed)
}

struct Outcome {
    circuit: Circuit,
    plan: SchedulePlan,
}

fn realize(
    target: &GraphState,
    placed: &[(&Block, Time)],
    variant: &[usize],
    stems: &[(usize, usize)],
    cap: usize,
    hw: &HardwareModel,
) -> Outcome {
    let lay = assemble(target, placed, stems, hw);
    let (phys, map) = assign_emitters(&lay.circuit, hw);
    let circuit = hardware::time_alap(&phys, hw);
    let first = lay.circuit.ops.iter().filter_map(|o| o.start).min().unwrap_or_default();
    let mut emitter_map = Vec::new();
    let mut at = 0;
    let mut placements = Vec::new();
    for (b, off) in placed {
        emitter_map.push(map[at..at + b.width()].to_vec());
        at += b.width();
        placements.push(Placement { part: b.part, variant: variant[b.part], offset: *off - first });
    }
    let stem_gates =
        lay.stems.into_iter().map(|s| StemGate { edge: s.edge, start: s.start - first }).collect();
    Outcome { circuit, plan: SchedulePlan { placements, stem_gates, ne_limit: cap, emitter_map } }
}

/// Merge compiled subgraphs and their stems into one circuit for `target`
/// using at most `ne_limit` emitters.
pub fn combine(
    target: &GraphState,
    parts: &[Part],
    stems: &[(usize, usize)],
    ne_limit: usize,
    hw: &HardwareModel,
) -> Result<(Circuit, SchedulePlan), ScheduleError> {
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, p) in parts.iter().enumerate() {
        let Some(c) = p.variants.values().next() else {
            if !p.vertices.is_empty() {
                return Err(ScheduleError::Infeasible { part: i, need: usize::MAX, ne_limit });
            }
            continue;
        };
        for h in &c.hosts {
            owner.insert(p.vertices[h.photon], i);
        }
        let need = p.variants.values().map(|c| c.ne_used).min().unwrap_or(0);
        if need > ne_limit {
            return Err(ScheduleError::Infeasible { part: i, need, ne_limit });
        }
    }
    for &(u, v) in stems {
        match (owner.get(&u), owner.get(&v)) {
            (Some(a), Some(b)) if a != b => {}
            _ => return Err(ScheduleError::BadStem(u, v)),
        }
    }
    // descending priority, then more photons, then part id
    let mut order: Vec<usize> = (0..parts.len()).filter(|&i| !parts[i].variants.is_empty()).collect();
    let rank = |i: usize, v: usize| {
        let c = &parts[i].variants[&v];
        (std::cmp::Reverse(priority(parts[i].vertices.len(), c.duration)), std::cmp::Reverse(parts[i].vertices.len()), i)
    };
    let usable = |i: usize| -> Vec<usize> {
        parts[i].variants.iter().filter(|(_, c)| c.ne_used <= ne_limit).map(|(&k, _)| k).collect()
    };
    let mut variant: Vec<usize> = (0..parts.len()).map(|i| usable(i).first().copied().unwrap_or(0)).collect();
    let run = |variant: &[usize]| -> Result<Outcome, ScheduleError> {
        let blocks: Vec<Block> = (0..parts.len())
            .filter(|&i| !parts[i].variants.is_empty())
            .map(|i| Block::new(i, &parts[i].variants[&variant[i]], &parts[i].vertices, hw))
            .collect();
        let mut idx: Vec<usize> = (0..blocks.len()).collect();
        idx.sort_by_key(|&k| rank(blocks[k].part, variant[blocks[k].part]));
        let ordered: Vec<&Block> = idx.iter().map(|&k| &blocks[k]).collect();
        let placed = pack(target, &ordered, stems, ne_limit, hw)?;
        Ok(realize(target, &placed, variant, stems, ne_limit, hw))
    };
    order.sort_by_key(|&i| rank(i, variant[i]));
    let mut best = run(&variant)?;
    relax_and_fill(&mut best, &mut variant, &order, &usable, hw, |v| run(v).ok());
    Ok((best.circuit, best.plan))
}

/// Swap placed subcircuits to wider variants while that strictly shortens
/// the whole schedule.
fn relax_and_fill(
    best: &mut Outcome,
    variant: &mut [usize],
    order: &[usize],
    usable: &dyn Fn(usize) -> Vec<usize>,
    hw: &HardwareModel,
    run: impl Fn(&[usize]) -> Option<Outcome>,
) {
    let mut improved = true;
    while improved {
        improved = false;
        for &i in order {
            for k in usable(i).into_iter().filter(|&k| k > variant[i]) {
                let mut trial = variant.to_vec();
                trial[i] = k;
                if let Some(o) = run(&trial) {
                    if o.circuit.end_time(hw) < best.circuit.end_time(hw) {
                        *best = o;
                        variant.copy_from_slice(&trial);
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::random_connected;
    use crate::circuit::{GateKind, Outcomes};
    use crate::compile::SearchConfig;
    use crate::partition::seed_partition;
    use crate::pipeline::prepare_parts;
    use crate::tableau::Tableau;
    use proptest::prelude::*;

    fn hw() -> HardwareModel {
        HardwareModel::default()
    }

    fn t(n: i64, d: i64) -> Time {
        Time::new(n, d)
    }

    fn replays_to(c: &Circuit, g: &GraphState) -> bool {
        let want = Tableau::from_graph(g);
        [Outcomes::AllZero, Outcomes::AllOne, Outcomes::Seeded(5)]
            .into_iter()
            .all(|o| c.replay(&hw(), o).unwrap().states_equal(&want).unwrap())
    }

    fn run(g: &GraphState, assignment: &[usize], cap: usize) -> Result<(Circuit, SchedulePlan, usize), ScheduleError> {
        let (parts, stems) = prepare_parts(g, assignment, &hw(), &SearchConfig::default()).unwrap();
        combine(g, &parts, &stems, cap, &hw()).map(|(c, p)| (c, p, stems.len()))
    }

    #[test]
    fn usage_curve_examples() {
        let c = UsageCurve::from_intervals(&[(t(0, 1), t(4, 1))]);
        assert_eq!(c.breakpoints, vec![(t(0, 1), 1), (t(4, 1), 0)]);
        assert_eq!(c.duration, t(4, 1));
        let c = UsageCurve::from_intervals(&[(t(0, 1), t(4, 1)), (t(2, 1), t(6, 1))]);
        let heights: Vec<usize> = c.breakpoints.iter().map(|b| b.1).collect();
        assert_eq!(heights, vec![1, 2, 1, 0]);
        assert_eq!((c.at(t(3, 1)), c.at(t(5, 1)), c.peak()), (2, 1, 2));
        assert_eq!(usage_curve(&Circuit::new(2, 0), &hw()), UsageCurve::default());

        let mut circ = Circuit::new(1, 1);
        circ.push(Gate::EmitterInit { emitter: 0 });
        circ.push(Gate::Emission { emitter: 0, photon: 1 });
        circ.push(Gate::MeasureX { emitter: 0, corr: Some((1, Pauli::X)) });
        let circ = hardware::time_circuit(&circ, &hw());
        assert_eq!(usage_curve(&circ, &hw()).breakpoints, vec![(t(0, 1), 1), (t(1, 5), 0)]);
    }

    #[test]
    fn usage_csv() {
        let c = UsageCurve::from_intervals(&[(t(0, 1), t(1, 2))]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,emitters_in_use\n0/1,1\n1/2,0\n");
    }

    #[test]
    fn priority_examples() {
        assert_eq!(priority(4, t(8, 1)), Priority::Finite(t(1, 2)));
        assert_eq!(priority(1, t(1, 1)), Priority::Finite(t(1, 1)));
        assert_eq!(priority(8, t(16, 1)), priority(4, t(8, 1)));
        assert_eq!(priority(3, Time::default()), Priority::Infinite);
        assert!(Priority::Infinite > priority(100, t(1, 100)));
    }

    #[test]
    fn alap_insert_examples() {
        let rect = UsageCurve::from_intervals(&[(t(0, 1), t(2, 1))]);
        assert_eq!(alap_insert(&[], &rect, t(10, 1), 1).unwrap(), t(8, 1));
        let placed = [(t(8, 1), t(10, 1))];
        assert_eq!(alap_insert(&placed, &rect, t(10, 1), 1).unwrap(), t(6, 1));
        assert_eq!(alap_insert(&placed, &rect, t(10, 1), 2).unwrap(), t(8, 1));
        let tall = UsageCurve::from_intervals(&[(t(0, 1), t(1, 1)), (t(0, 1), t(1, 1))]);
        assert!(alap_insert(&[], &tall, t(1, 1), 1).is_err());
    }

    #[test]
    fn single_part_is_the_candidate() {
        let g = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (parts, stems) = prepare_parts(&g, &[0, 0, 0, 0], &hw(), &SearchConfig::default()).unwrap();
        let cand = parts[0].variants.values().next().unwrap().clone();
        let (c, plan) = combine(&g, &parts, &stems, 1, &hw()).unwrap();
        assert_eq!(c.end_time(&hw()), cand.duration);
        assert_eq!(c.ops.len(), cand.circuit.ops.len());
        assert_eq!(plan.placements.len(), 1);
        assert_eq!(plan.placements[0].offset, Time::default());
        assert!(replays_to(&c, &g));
    }

    #[test]
    fn disjoint_stars_run_in_parallel() {
        let g = GraphState::from_edges(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]).unwrap();
        let a = [0, 0, 0, 0, 1, 1, 1, 1];
        let (parts, stems) = prepare_parts(&g, &a, &hw(), &SearchConfig::default()).unwrap();
        assert!(stems.is_empty());
        let longest = parts.iter().map(|p| p.variants.values().next().unwrap().duration).max().unwrap();
        let (c, _) = combine(&g, &parts, &stems, 2, &hw()).unwrap();
        assert_eq!(c.end_time(&hw()), longest);
        assert!(replays_to(&c, &g));
        // one emitter forces them back to back
        let (c1, plan) = combine(&g, &parts, &stems, 1, &hw()).unwrap();
        assert!(c1.end_time(&hw()) > longest);
        assert_eq!(hardware::peak_emitters(&c1, &hw()), 1);
        assert!(plan.placements[1].offset + longest <= plan.placements[0].offset + longest);
        assert!(replays_to(&c1, &g));
    }

    #[test]
    fn one_stem_between_two_pairs() {
        let g = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (c, plan, k) = run(&g, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(k, 1);
        assert_eq!(plan.stem_gates.len(), 1);
        assert_eq!(plan.stem_gates[0].edge, (1, 2));
        assert_eq!(c.count(GateKind::EmitterEmitterCnot), 1);
        assert!(c.validate(&hw()).is_empty());
        assert!(replays_to(&c, &g));
    }

    #[test]
    fn errors() {
        let g = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (parts, _) = prepare_parts(&g, &[0, 0, 1, 1], &hw(), &SearchConfig::default()).unwrap();
        assert!(matches!(combine(&g, &parts, &[(0, 3)], 2, &hw()), Err(ScheduleError::BadStem(0, 3))));
        let (parts, stems) = prepare_parts(&g, &[0, 0, 1, 1], &hw(), &SearchConfig::default()).unwrap();
        assert!(matches!(combine(&g, &parts, &stems, 0, &hw()), Err(ScheduleError::Infeasible { .. })));
    }

    #[test]
    fn relaxation_uses_spare_emitters() {
        // first small graph whose widest variant is strictly shorter than its narrowest
        let (g, parts, stems) = (0..200)
            .find_map(|seed| {
                let g = random_connected(9, 0.4, seed);
                let (parts, stems) = prepare_parts(&g, &[0; 9], &hw(), &SearchConfig::default()).unwrap();
                let d: Vec<Time> = parts[0].variants.values().map(|c| c.duration).collect();
                (d.last() < d.first()).then_some((g, parts, stems))
            })
            .expect("some graph benefits from a wider variant");
        let narrow = *parts[0].variants.keys().next().unwrap();
        let wide = *parts[0].variants.keys().last().unwrap();
        let (c0, p0) = combine(&g, &parts, &stems, narrow, &hw()).unwrap();
        let (c1, p1) = combine(&g, &parts, &stems, wide, &hw()).unwrap();
        assert!(c1.end_time(&hw()) < c0.end_time(&hw()));
        assert_eq!(p0.placements[0].variant, narrow);
        assert!(p1.placements[0].variant > narrow);
        assert!(replays_to(&c1, &g));
    }

    #[test]
    fn lc_transformed_target_replays_to_original() {
        let g = random_connected(8, 0.5, 3);
        let lc = g.apply_lc_sequence(&[0, 5, 2]).unwrap();
        let a = seed_partition(&lc, 3).unwrap().assignment;
        let (c, _, _) = run(&lc, &a, 8).unwrap();
        assert!(replays_to(&c, &g));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn combined_circuits_are_sound(seed in 0u64..100_000, n in 2usize..=12, g_max in 2usize..6, extra in 0usize..3) {
            let g = random_connected(n, 0.35, seed);
            let a = seed_partition(&g, g_max).unwrap().assignment;
            let (parts, stems) = prepare_parts(&g, &a, &hw(), &SearchConfig::default()).unwrap();
            let need = parts.iter().map(|p| *p.variants.keys().next().unwrap()).max().unwrap();
            let cap = need + extra;
            match combine(&g, &parts, &stems, cap, &hw()) {
                Ok((c, plan)) => {
                    prop_assert!(c.validate(&hw()).is_empty());
                    prop_assert!(replays_to(&c, &g));
                    prop_assert!(hardware::peak_emitters(&c, &hw()) <= cap);
                    prop_assert!(c.emitters <= cap);
                    prop_assert_eq!(plan.stem_gates.len(), stems.len());
                    let inner: usize = plan.placements.iter()
                        .map(|p| parts[p.part].variants[&p.variant].n_ee_cnot).sum();
                    prop_assert_eq!(c.n_ee_cnot(), inner + stems.len());
                    // insertion order never puts a later block after an earlier one
                    for w in plan.placements.windows(2) {
                        prop_assert!(w[1].offset <= w[0].offset);
                    }
                }
                Err(ScheduleError::NoFit { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
