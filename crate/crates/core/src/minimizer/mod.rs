//! Logic-submodule detection and minimization.
//!
//! Arithmetic circuits produced by the lowering embed networks of 1-bit
//! gates: products of {0,1} wires, the two-gate NOT pairs, and sums of
//! provably exclusive products. This module finds the maximal connected
//! components of such gates, computes each component's exhaustive truth
//! table over its boundary inputs, minimizes every output with
//! Quine-McCluskey prime implicants plus Petrick's method, and splices the
//! re-synthesized networks back into the circuit. Components are
//! independent jobs scheduled across cores (LPT or round-robin); results
//! are deterministic regardless of core count.
//!
//! Wires are classified as 1-bit by a sound forward analysis, so a wire is
//! only treated as Boolean when the gate structure guarantees it:
//! expansion outputs, constants, products of Booleans, copies, and sums
//! whose two product operands share a complemented factor (the exclusive
//! sum emitted for XOR).

pub mod petrick;
pub mod qm;
pub mod resynth;
pub mod schedule;

pub use petrick::{petrick_reduce, PetrickExpression, PetrickSolution};
pub use qm::{quine_mccluskey, Implicant};
pub use resynth::{OutputFunction, RGate, RWire, Replacement, SynthContext};
pub use schedule::{schedule, Placement, ScheduleState, Strategy};

use crate::circuit::{Circuit, Gate, GateKind, WireId};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("{vars} boundary variables exceed the exhaustive limit of 16")]
    TooManyVariables { vars: u32 },
    #[error("covering chart has no minterms")]
    EmptyChart,
}

/// Reference to a value inside a submodule: a boundary input, a constant,
/// or the output of an earlier cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SRef {
    In(usize),
    Const(u8),
    Cell(usize),
}

/// One logic element. A cell is one gate, except NOT, which owns its
/// ADD/EXPAND pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellOp {
    And(SRef, SRef),
    /// Sum of two exclusive products; never exceeds 1.
    Sum(SRef, SRef),
    Not(SRef),
    Copy(SRef),
}

/// A maximal connected component of 1-bit logic gates.
///
/// Truth-table convention: bit `j` of an assignment index is the value of
/// `boundary_inputs[j]`.
#[derive(Debug, Clone)]
pub struct LogicSubmodule {
    /// Indices of the owned gates in the host circuit, ascending.
    pub gates: Vec<usize>,
    /// Wires read from outside the component (constants excluded), ascending.
    pub boundary_inputs: Vec<WireId>,
    /// Component wires read outside it or exposed as circuit outputs.
    pub boundary_outputs: Vec<WireId>,
    /// Initial gate count — the job-size estimate for scheduling.
    pub g: usize,
    /// Whether exhaustive minimization is feasible (≤ 16 boundary inputs).
    pub minimizable: bool,
    cells: Vec<CellOp>,
    out_slots: Vec<SRef>,
}

impl LogicSubmodule {
    fn eval(&self, assignment: u32) -> Vec<u8> {
        let mut slots = vec![0u8; self.cells.len()];
        for k in 0..self.cells.len() {
            let v = |s: SRef| match s {
                SRef::In(i) => (assignment >> i & 1) as u8,
                SRef::Const(c) => c,
                SRef::Cell(p) => slots[p],
            };
            slots[k] = match self.cells[k] {
                CellOp::And(a, b) => v(a) & v(b),
                CellOp::Sum(a, b) => {
                    let s = v(a) + v(b);
                    debug_assert!(s <= 1, "certified sums are exclusive");
                    s
                }
                CellOp::Not(a) => 1 - v(a),
                CellOp::Copy(a) => v(a),
            };
        }
        self.out_slots
            .iter()
            .map(|&s| match s {
                SRef::In(i) => (assignment >> i & 1) as u8,
                SRef::Const(c) => c,
                SRef::Cell(p) => slots[p],
            })
            .collect()
    }

    /// Exhaustive per-output truth tables over the boundary inputs, or
    /// `None` when the component is too wide to enumerate.
    pub fn truth_tables(&self) -> Option<Vec<Vec<bool>>> {
        if !self.minimizable {
            return None;
        }
        let b = self.boundary_inputs.len() as u32;
        let mut tables = vec![Vec::with_capacity(1 << b); self.boundary_outputs.len()];
        for assignment in 0..1u32 << b {
            for (j, v) in self.eval(assignment).iter().enumerate() {
                tables[j].push(*v == 1);
            }
        }
        Some(tables)
    }
}

/// Wire classification shared by extraction and assembly.
struct Analysis {
    consumers: Vec<Vec<usize>>,
    zero: BTreeSet<WireId>,
    one: BTreeSet<WireId>,
    boolw: Vec<bool>,
    /// NOT-pair output -> negated source wire.
    not_of: BTreeMap<WireId, WireId>,
    /// EXPAND gate of a NOT pair -> its ADD gate.
    pair_add: BTreeMap<usize, usize>,
}

fn analyze(c: &Circuit) -> Analysis {
    let mut producer = vec![None; c.num_wires];
    let mut consumers = vec![Vec::new(); c.num_wires];
    for (gi, g) in c.gates.iter().enumerate() {
        for &o in &g.outputs {
            producer[o] = Some(gi);
        }
        for &i in &g.inputs {
            consumers[i].push(gi);
        }
    }

    let mut zero = BTreeSet::new();
    let mut one = BTreeSet::new();
    for g in &c.gates {
        match g.kind {
            GateKind::Zero => {
                zero.insert(g.outputs[0]);
            }
            GateKind::One if zero.contains(&g.inputs[0]) => {
                one.insert(g.outputs[0]);
            }
            _ => {}
        }
    }

    let outputs: BTreeSet<WireId> = c.output_wires.iter().copied().collect();
    let mut boolw = vec![false; c.num_wires];
    if c.bit_width == 1 {
        for &w in &c.input_wires {
            boolw[w] = true;
        }
    }
    let mut not_of: BTreeMap<WireId, WireId> = BTreeMap::new();
    let mut pair_add: BTreeMap<usize, usize> = BTreeMap::new();

    let mut changed = true;
    while changed {
        changed = false;
        let set = |boolw: &mut Vec<bool>, w: WireId, changed: &mut bool| {
            if !boolw[w] {
                boolw[w] = true;
                *changed = true;
            }
        };
        for (gi, g) in c.gates.iter().enumerate() {
            match &g.kind {
                GateKind::Expand(positions) => {
                    for &o in &g.outputs {
                        set(&mut boolw, o, &mut changed);
                    }
                    // NOT pair: the sole use of ADD(x, one) is taking the
                    // low bit, which is 1−x for x on {0,1}.
                    if positions.len() == 1 && positions[0] == 0 && !pair_add.contains_key(&gi) {
                        let t = g.inputs[0];
                        if let Some(pgi) = producer[t] {
                            let add = &c.gates[pgi];
                            if add.kind == GateKind::Add
                                && consumers[t].iter().all(|&q| q == gi)
                                && !outputs.contains(&t)
                            {
                                let (a, b) = (add.inputs[0], add.inputs[1]);
                                let x = if one.contains(&a) {
                                    Some(b)
                                } else if one.contains(&b) {
                                    Some(a)
                                } else {
                                    None
                                };
                                if let Some(x) = x {
                                    if boolw[x] {
                                        not_of.insert(g.outputs[0], x);
                                        pair_add.insert(gi, pgi);
                                        changed = true;
                                    }
                                }
                            }
                        }
                    }
                }
                GateKind::Zero => set(&mut boolw, g.outputs[0], &mut changed),
                GateKind::One => {
                    if zero.contains(&g.inputs[0]) {
                        set(&mut boolw, g.outputs[0], &mut changed);
                    }
                }
                GateKind::Mul => {
                    if boolw[g.inputs[0]] && boolw[g.inputs[1]] {
                        set(&mut boolw, g.outputs[0], &mut changed);
                    }
                }
                GateKind::MulConst(1) => {
                    if boolw[g.inputs[0]] {
                        set(&mut boolw, g.outputs[0], &mut changed);
                    }
                }
                GateKind::MulConst(_) => {}
                GateKind::Compress => {
                    if g.inputs.len() == 1 && boolw[g.inputs[0]] {
                        set(&mut boolw, g.outputs[0], &mut changed);
                    }
                }
                GateKind::Add => {
                    let (a, b) = (g.inputs[0], g.inputs[1]);
                    if boolw[g.outputs[0]] {
                        continue;
                    }
                    let zero_rule = (zero.contains(&a) && boolw[b])
                        || (zero.contains(&b) && boolw[a]);
                    if zero_rule || (boolw[a] && boolw[b] && exclusive(c, &producer, &not_of, a, b))
                    {
                        set(&mut boolw, g.outputs[0], &mut changed);
                    }
                }
            }
        }
    }

    Analysis { consumers, zero, one, boolw, not_of, pair_add }
}

/// True when both wires are products whose factor sets contain a
/// complementary pair, making the products mutually exclusive.
fn exclusive(
    c: &Circuit,
    producer: &[Option<usize>],
    not_of: &BTreeMap<WireId, WireId>,
    a: WireId,
    b: WireId,
) -> bool {
    let factors = |w: WireId| -> Option<[WireId; 2]> {
        let g = &c.gates[producer[w]?];
        (g.kind == GateKind::Mul).then(|| [g.inputs[0], g.inputs[1]])
    };
    let (Some(fa), Some(fb)) = (factors(a), factors(b)) else {
        return false;
    };
    fa.iter().any(|u| {
        fb.iter().any(|v| not_of.get(u) == Some(v) || not_of.get(v) == Some(u))
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A logic cell before component grouping: wire-level operation plus the
/// circuit gates it owns.
struct RawCell {
    op_inputs: Vec<WireId>,
    out: WireId,
    gate_ids: Vec<usize>,
    make: fn(&[SRef]) -> CellOp,
}

/// Splits the circuit's 1-bit logic gates into maximal connected
/// components. Connectivity is sharing any non-constant Boolean wire;
/// constants join no component. Components never share gates.
pub fn extract_submodules(c: &Circuit) -> Vec<LogicSubmodule> {
    let an = analyze(c);
    let is_const = |w: WireId| an.zero.contains(&w) || an.one.contains(&w);

    let mut raw: Vec<RawCell> = Vec::new();
    for (gi, g) in c.gates.iter().enumerate() {
        if let Some(&add_gi) = an.pair_add.get(&gi) {
            raw.push(RawCell {
                op_inputs: vec![an.not_of[&g.outputs[0]]],
                out: g.outputs[0],
                gate_ids: vec![add_gi, gi],
                make: |s| CellOp::Not(s[0]),
            });
            continue;
        }
        if an.pair_add.values().any(|&a| a == gi) {
            continue; // owned by its NOT pair
        }
        let out = g.outputs[0];
        match &g.kind {
            GateKind::Mul if an.boolw[out] => raw.push(RawCell {
                op_inputs: g.inputs.clone(),
                out,
                gate_ids: vec![gi],
                make: |s| CellOp::And(s[0], s[1]),
            }),
            GateKind::Add if an.boolw[out] => {
                let (a, b) = (g.inputs[0], g.inputs[1]);
                if an.zero.contains(&a) || an.zero.contains(&b) {
                    let src = if an.zero.contains(&a) { b } else { a };
                    raw.push(RawCell {
                        op_inputs: vec![src],
                        out,
                        gate_ids: vec![gi],
                        make: |s| CellOp::Copy(s[0]),
                    });
                } else {
                    raw.push(RawCell {
                        op_inputs: g.inputs.clone(),
                        out,
                        gate_ids: vec![gi],
                        make: |s| CellOp::Sum(s[0], s[1]),
                    });
                }
            }
            GateKind::MulConst(1) | GateKind::Compress if an.boolw[out] && g.inputs.len() == 1 => {
                raw.push(RawCell {
                    op_inputs: g.inputs.clone(),
                    out,
                    gate_ids: vec![gi],
                    make: |s| CellOp::Copy(s[0]),
                })
            }
            _ => {}
        }
    }

    // Group cells that touch a common non-constant Boolean wire.
    let mut uf = UnionFind::new(raw.len());
    let mut touching: BTreeMap<WireId, Vec<usize>> = BTreeMap::new();
    for (k, cell) in raw.iter().enumerate() {
        for &w in cell.op_inputs.iter().chain([&cell.out]) {
            if !is_const(w) {
                touching.entry(w).or_default().push(k);
            }
        }
    }
    for cells in touching.values() {
        for &k in &cells[1..] {
            uf.union(cells[0], k);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..raw.len() {
        let root = uf.find(k);
        groups.entry(root).or_default().push(k);
    }

    let mut subs = Vec::new();
    for members in groups.values() {
        let gate_set: BTreeSet<usize> =
            members.iter().flat_map(|&k| raw[k].gate_ids.iter().copied()).collect();
        let produced: BTreeMap<WireId, usize> = members
            .iter()
            .enumerate()
            .map(|(pos, &k)| (raw[k].out, pos))
            .collect();
        let boundary_inputs: Vec<WireId> = members
            .iter()
            .flat_map(|&k| raw[k].op_inputs.iter().copied())
            .filter(|&w| !is_const(w) && !produced.contains_key(&w))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let boundary_outputs: Vec<WireId> = produced
            .keys()
            .copied()
            .filter(|w| {
                an.consumers[*w].iter().any(|g| !gate_set.contains(g))
                    || c.output_wires.contains(w)
            })
            .collect();

        let in_pos: BTreeMap<WireId, usize> =
            boundary_inputs.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let sref = |w: WireId| -> SRef {
            if an.zero.contains(&w) {
                SRef::Const(0)
            } else if an.one.contains(&w) {
                SRef::Const(1)
            } else if let Some(&i) = in_pos.get(&w) {
                SRef::In(i)
            } else {
                SRef::Cell(produced[&w])
            }
        };
        let cells: Vec<CellOp> = members
            .iter()
            .map(|&k| {
                let srefs: Vec<SRef> = raw[k].op_inputs.iter().map(|&w| sref(w)).collect();
                (raw[k].make)(&srefs)
            })
            .collect();
        let out_slots: Vec<SRef> = boundary_outputs.iter().map(|&w| sref(w)).collect();

        let minimizable = boundary_inputs.len() <= 16;
        subs.push(LogicSubmodule {
            g: gate_set.len(),
            gates: gate_set.into_iter().collect(),
            boundary_inputs,
            boundary_outputs,
            minimizable,
            cells,
            out_slots,
        });
    }
    subs.sort_by_key(|s| s.gates[0]);
    subs
}

/// Realizes per-output minimized covers as replacement gates for the
/// submodule, or `None` when the host circuit lacks a needed constant wire.
pub fn resynthesize(
    sub: &LogicSubmodule,
    c: &Circuit,
    funcs: &[OutputFunction],
) -> Option<Replacement> {
    resynth::synthesize(funcs, &synth_context(sub, c))
}

fn synth_context(sub: &LogicSubmodule, c: &Circuit) -> SynthContext {
    let widths = c.widths();
    let an_consts = const_wires(c);
    SynthContext {
        input_widths: sub.boundary_inputs.iter().map(|&w| widths[w]).collect(),
        output_widths: sub.boundary_outputs.iter().map(|&w| widths[w]).collect(),
        width_cap: 64u32.min(64 - c.field.modulus().leading_zeros()),
        have_zero: an_consts.0.is_some(),
        have_one: an_consts.1.is_some(),
    }
}

/// First constant-zero and constant-one wires, if the circuit has them.
fn const_wires(c: &Circuit) -> (Option<WireId>, Option<WireId>) {
    let mut zero = None;
    let mut one = None;
    for g in &c.gates {
        match g.kind {
            GateKind::Zero => zero = zero.or(Some(g.outputs[0])),
            GateKind::One if Some(g.inputs[0]) == zero => one = one.or(Some(g.outputs[0])),
            _ => {}
        }
    }
    (zero, one)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimizeConfig {
    pub cores: usize,
    pub strategy: Strategy,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig { cores: 1, strategy: Strategy::Lpt }
    }
}

/// Outcome for one submodule.
#[derive(Debug, Clone)]
pub struct SubmoduleReport {
    pub id: usize,
    pub boundary_inputs: usize,
    pub boundary_outputs: usize,
    pub original_gates: usize,
    pub final_gates: usize,
    pub kept_original: bool,
    pub minimizable: bool,
    /// Exhaustive truth-table equivalence of the replacement (true whenever
    /// a replacement was verified; also true for kept-but-verified cases).
    pub verified: bool,
    pub petrick_steps: usize,
    /// The verified replacement network, when one was spliced in.
    pub replacement: Option<Replacement>,
}

#[derive(Debug, Clone)]
pub struct MinimizeReport {
    pub submodules: Vec<SubmoduleReport>,
    pub schedule: ScheduleState,
    pub original_gate_total: usize,
    pub final_gate_total: usize,
}

impl MinimizeReport {
    /// Human-readable report: per-submodule reductions and the schedule.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.submodules {
            let status = if !s.minimizable {
                "skipped: too many boundary inputs"
            } else if s.kept_original {
                "kept: original not larger"
            } else {
                "replaced"
            };
            out.push_str(&format!(
                "submodule {}: inputs {}, outputs {}, gates {} -> {} ({status}), petrick steps {}\n",
                s.id,
                s.boundary_inputs,
                s.boundary_outputs,
                s.original_gates,
                s.final_gates,
                s.petrick_steps,
            ));
        }
        for (core, jobs) in self.schedule.core_jobs.iter().enumerate() {
            out.push_str(&format!(
                "core {core}: jobs {:?}, aggregate {}\n",
                jobs, self.schedule.aggregates[core]
            ));
        }
        out.push_str(&format!(
            "total gates: {} -> {}\n",
            self.original_gate_total, self.final_gate_total
        ));
        out
    }
}

struct JobResult {
    replacement: Option<Replacement>,
    verified: bool,
    petrick_steps: usize,
}

fn run_job(sub: &LogicSubmodule, ctx: &SynthContext) -> JobResult {
    let kept = |verified, steps| JobResult { replacement: None, verified, petrick_steps: steps };
    if !sub.minimizable {
        return kept(false, 0);
    }
    let tables = sub.truth_tables().expect("minimizable submodule");
    let mut steps = 0usize;
    let mut funcs = Vec::with_capacity(tables.len());
    for table in &tables {
        let minterms: Vec<u32> =
            (0..table.len() as u32).filter(|&m| table[m as usize]).collect();
        if minterms.is_empty() {
            funcs.push(OutputFunction::ConstZero);
            continue;
        }
        let pis = quine_mccluskey(table).expect("boundary checked above");
        let chart = PetrickExpression::new(
            minterms
                .iter()
                .map(|&m| (0..pis.len()).filter(|&k| pis[k].matches(m)).collect())
                .collect(),
        );
        let sol = petrick_reduce(&chart).expect("charts of minterms are nonempty");
        steps += sol.steps;
        funcs.push(OutputFunction::Sop(sol.cover.iter().map(|&k| pis[k].clone()).collect()));
    }
    let Some(rep) = resynth::synthesize(&funcs, ctx) else {
        return kept(false, steps);
    };
    let verified =
        rep.truth_tables(sub.boundary_inputs.len(), sub.boundary_outputs.len()) == tables;
    debug_assert!(verified, "resynthesized network must match the original tables");
    if !verified || rep.gates.len() > sub.g {
        return kept(verified, steps);
    }
    JobResult { replacement: Some(rep), verified: true, petrick_steps: steps }
}

/// Minimizes every feasible logic submodule and returns the rebuilt
/// circuit with a report. The transformation never increases a
/// submodule's gate count and preserves the circuit function; submodules
/// that cannot be minimized (or would grow) are kept verbatim.
pub fn minimize(c: &Circuit, cfg: &MinimizeConfig) -> (Circuit, MinimizeReport) {
    let subs = extract_submodules(c);
    let ctxs: Vec<SynthContext> = subs.iter().map(|s| synth_context(s, c)).collect();
    let jobs: Vec<(usize, u64)> = subs.iter().enumerate().map(|(i, s)| (i, s.g as u64)).collect();
    let cores = cfg.cores.max(1);
    let sched = schedule(&jobs, cores, cfg.strategy);

    let mut results: Vec<Option<JobResult>> = Vec::new();
    results.resize_with(subs.len(), || None);
    if cores == 1 {
        for (i, sub) in subs.iter().enumerate() {
            results[i] = Some(run_job(sub, &ctxs[i]));
        }
    } else {
        let chunks: Vec<Vec<(usize, JobResult)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = sched
                .core_jobs
                .iter()
                .map(|assigned| {
                    let subs = &subs;
                    let ctxs = &ctxs;
                    scope.spawn(move || {
                        assigned
                            .iter()
                            .map(|&i| (i, run_job(&subs[i], &ctxs[i])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("job panicked")).collect()
        });
        for chunk in chunks {
            for (i, r) in chunk {
                results[i] = Some(r);
            }
        }
    }
    let results: Vec<JobResult> = results.into_iter().map(|r| r.expect("job ran")).collect();

    let new_circuit = assemble(c, &subs, &results);
    debug_assert_eq!(new_circuit.validate(), Ok(()));

    let submodules = subs
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(id, (sub, r))| SubmoduleReport {
            id,
            boundary_inputs: sub.boundary_inputs.len(),
            boundary_outputs: sub.boundary_outputs.len(),
            original_gates: sub.g,
            final_gates: r.replacement.as_ref().map_or(sub.g, |rep| rep.gates.len()),
            kept_original: r.replacement.is_none(),
            minimizable: sub.minimizable,
            verified: r.verified,
            petrick_steps: r.petrick_steps,
            replacement: r.replacement.clone(),
        })
        .collect();
    let report = MinimizeReport {
        submodules,
        schedule: sched,
        original_gate_total: c.gates.len(),
        final_gate_total: new_circuit.gates.len(),
    };
    (new_circuit, report)
}

/// Splices replacements into the gate list, re-sorts topologically (stable
/// on original position), and renumbers wires densely.
fn assemble(c: &Circuit, subs: &[LogicSubmodule], results: &[JobResult]) -> Circuit {
    let (zero_wire, one_wire) = const_wires(c);
    let removed: BTreeSet<usize> = subs
        .iter()
        .zip(results)
        .filter(|(_, r)| r.replacement.is_some())
        .flat_map(|(s, _)| s.gates.iter().copied())
        .collect();

    // Virtual wires: original ids, then fresh ids for replacement temps.
    let mut vgates: Vec<(usize, Gate)> = c
        .gates
        .iter()
        .enumerate()
        .filter(|(gi, _)| !removed.contains(gi))
        .map(|(gi, g)| (gi, g.clone()))
        .collect();
    let mut fresh = c.num_wires;
    let mut seq = c.gates.len();
    for (sub, r) in subs.iter().zip(results) {
        let Some(rep) = &r.replacement else { continue };
        let tmp_base = fresh;
        fresh += rep.n_tmp;
        let wire = |w: &RWire| -> WireId {
            match *w {
                RWire::In(i) => sub.boundary_inputs[i],
                RWire::Out(j) => sub.boundary_outputs[j],
                RWire::Zero => zero_wire.expect("synthesis checked availability"),
                RWire::One => one_wire.expect("synthesis checked availability"),
                RWire::Tmp(t) => tmp_base + t,
            }
        };
        for rg in &rep.gates {
            vgates.push((
                seq,
                Gate {
                    kind: rg.kind.clone(),
                    inputs: rg.inputs.iter().map(&wire).collect(),
                    outputs: rg.outputs.iter().map(&wire).collect(),
                },
            ));
            seq += 1;
        }
    }

    // Kahn's algorithm over wire dependencies, min-heap keyed by the
    // sequence number so surviving gates keep their relative order.
    let mut producer: BTreeMap<WireId, usize> = BTreeMap::new();
    for (idx, (_, g)) in vgates.iter().enumerate() {
        for &o in &g.outputs {
            producer.insert(o, idx);
        }
    }
    let mut indegree = vec![0usize; vgates.len()];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); vgates.len()];
    for (idx, (_, g)) in vgates.iter().enumerate() {
        for i in &g.inputs {
            if let Some(&p) = producer.get(i) {
                indegree[idx] += 1;
                dependents[p].push(idx);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(idx, _)| Reverse((vgates[idx].0, idx)))
        .collect();
    let mut order = Vec::with_capacity(vgates.len());
    while let Some(Reverse((_, idx))) = ready.pop() {
        order.push(idx);
        for &d in &dependents[idx] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse((vgates[d].0, d)));
            }
        }
    }
    assert_eq!(order.len(), vgates.len(), "replacement wiring is acyclic");

    // Dense renumbering: inputs first, then gate outputs in final order.
    let mut wire_map: BTreeMap<WireId, WireId> = BTreeMap::new();
    for (i, &w) in c.input_wires.iter().enumerate() {
        wire_map.insert(w, i);
    }
    let mut next = c.input_wires.len();
    for &idx in &order {
        for &o in &vgates[idx].1.outputs {
            wire_map.insert(o, next);
            next += 1;
        }
    }
    let gates = order
        .iter()
        .map(|&idx| {
            let g = &vgates[idx].1;
            Gate {
                kind: g.kind.clone(),
                inputs: g.inputs.iter().map(|w| wire_map[w]).collect(),
                outputs: g.outputs.iter().map(|w| wire_map[w]).collect(),
            }
        })
        .collect();
    Circuit {
        bit_width: c.bit_width,
        field: c.field,
        num_wires: next,
        gates,
        input_wires: (0..c.input_wires.len()).collect(),
        output_wires: c.output_wires.iter().map(|w| wire_map[w]).collect(),
    }
}
