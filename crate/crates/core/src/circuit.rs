//! Emitter/photon generation circuits.
//!
//! Qubit ids are flat: emitters occupy `0..emitters`, photon `k` is qubit
//! `emitters + k`. Photon `k` corresponds to graph vertex `k` of the target.
//!
//! Conventions checked by the replay oracle:
//! * `Emission(e, p)` is `CNOT(e -> p)` on a fresh `|0>` photon followed by
//!   `H` on the photon, so an isolated `|+>` emitter and its photon end up in
//!   the two-vertex graph state.
//! * `MeasureX(e)` measures `X_e`, applies the correction Pauli to its target
//!   on outcome 1, and leaves `e` reset to `|0>`.

use std::fmt;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{Clifford1, Pauli};
use crate::hardware::HardwareModel;
use crate::tableau::{Tableau, TableauError};

/// Time in units of the emitter-emitter CNOT period.
pub type Time = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    EmitterInit,
    #[serde(rename = "EmitterEmitterCNOT")]
    EmitterEmitterCnot,
    Emission,
    SingleQubitClifford,
    EmitterMeasureX,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    EmitterInit { emitter: usize },
    EmitterCnot { control: usize, target: usize },
    Emission { emitter: usize, photon: usize },
    Local { qubit: usize, u: Clifford1 },
    MeasureX { emitter: usize, corr: Option<(usize, Pauli)> },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::EmitterInit { .. } => GateKind::EmitterInit,
            Gate::EmitterCnot { .. } => GateKind::EmitterEmitterCnot,
            Gate::Emission { .. } => GateKind::Emission,
            Gate::Local { .. } => GateKind::SingleQubitClifford,
            Gate::MeasureX { .. } => GateKind::EmitterMeasureX,
        }
    }

    /// Operand qubits, in serialization order.
    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::EmitterInit { emitter } | Gate::MeasureX { emitter, .. } => vec![emitter],
            Gate::EmitterCnot { control, target } => vec![control, target],
            Gate::Emission { emitter, photon } => vec![emitter, photon],
            Gate::Local { qubit, .. } => vec![qubit],
        }
    }

    /// Qubits busy while the gate runs (operands plus any correction target).
    pub fn occupied(&self) -> Vec<usize> {
        let mut q = self.operands();
        if let Gate::MeasureX { corr: Some((t, _)), .. } = *self {
            if !q.contains(&t) {
                q.push(t);
            }
        }
        q
    }

    /// Same gate with every qubit id passed through `f`.
    pub fn map_qubits(self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match self {
            Gate::EmitterInit { emitter } => Gate::EmitterInit { emitter: f(emitter) },
            Gate::EmitterCnot { control, target } => {
                Gate::EmitterCnot { control: f(control), target: f(target) }
            }
            Gate::Emission { emitter, photon } => Gate::Emission { emitter: f(emitter), photon: f(photon) },
            Gate::Local { qubit, u } => Gate::Local { qubit: f(qubit), u },
            Gate::MeasureX { emitter, corr } => {
                Gate::MeasureX { emitter: f(emitter), corr: corr.map(|(q, p)| (f(q), p)) }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub gate: Gate,
    pub start: Option<Time>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub emitters: usize,
    pub photons: usize,
    pub ops: Vec<Op>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Operands,
    /// Rule 3: emission is the first gate on a photon, exactly once.
    EmissionFirst,
    /// Rule 4: photons only see single-qubit gates after emission.
    PhotonInteraction,
    /// Rule 5: emitters end disentangled.
    EmitterFinalState,
    MeasureLast,
    Timing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub gate: Option<usize>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate {
            Some(i) => write!(f, "gate {i}: {:?}: {}", self.rule, self.message),
            None => write!(f, "{:?}: {}", self.rule, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("circuit invalid: {0}")]
    Invalid(Violation),
    #[error("emitter {0} is not returned to |0> at the end")]
    EmitterEntangled(usize),
    #[error("emitter {0} re-initialized while not in |0>")]
    DirtyInit(usize),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

/// How random measurement outcomes are chosen during replay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcomes {
    AllZero,
    AllOne,
    Seeded(u64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported circuit version {0:?}")]
    UnsupportedVersion(String),
    #[error("gate {index}: {message}")]
    Gate { index: usize, message: String },
}

pub const VERSION: &str = "emitforge-circuit/1";

impl Circuit {
    pub fn new(emitters: usize, photons: usize) -> Self {
        Circuit { emitters, photons, ops: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.emitters + self.photons
    }

    pub fn photon_qubit(&self, k: usize) -> usize {
        self.emitters + k
    }

    pub fn is_emitter(&self, q: usize) -> bool {
        q < self.emitters
    }

    pub fn push(&mut self, gate: Gate) {
        self.ops.push(Op { gate, start: None });
    }

    pub fn push_at(&mut self, gate: Gate, t: Time) {
        self.ops.push(Op { gate, start: Some(t) });
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().map(|o| &o.gate)
    }

    pub fn is_timed(&self) -> bool {
        self.ops.iter().all(|o| o.start.is_some())
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates().filter(|g| g.kind() == kind).count()
    }

    pub fn n_ee_cnot(&self) -> usize {
        self.count(GateKind::EmitterEmitterCnot)
    }

    /// Latest gate end, zero for an empty circuit.
    pub fn end_time(&self, hw: &HardwareModel) -> Time {
        self.ops
            .iter()
            .map(|o| o.start.unwrap_or_default() + hw.duration(o.gate.kind()))
            .max()
            .unwrap_or_default()
    }

    /// Stable sort by (start, init-first, operands); keeps per-qubit order.
    pub fn canonicalize(&mut self) {
        self.ops.sort_by_key(|o| {
            (o.start, o.gate.kind() != GateKind::EmitterInit, o.gate.operands())
        });
    }

    /// Shift every timed gate by `dt`.
    pub fn shift(&mut self, dt: Time) {
        for op in &mut self.ops {
            if let Some(t) = op.start.as_mut() {
                *t += dt;
            }
        }
    }

    pub fn validate(&self, hw: &HardwareModel) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |gate: Option<usize>, rule: Rule, message: String| {
            out.push(Violation { gate, rule, message })
        };
        let nq = self.num_qubits();
        let mut emitted = vec![false; self.photons];
        // emitter phase: false = usable, true = measured and awaiting init
        let mut measured = vec![false; self.emitters];
        let mut used = vec![false; self.emitters];
        let mut last_end: Vec<Option<Time>> = vec![None; nq];
        let timed = self.is_timed();
        if !timed && self.ops.iter().any(|o| o.start.is_some()) {
            bad(None, Rule::Timing, "circuit is only partly timed".into());
        }

        for (i, op) in self.ops.iter().enumerate() {
            let g = op.gate;
            let occ = g.occupied();
            if let Some(&q) = occ.iter().find(|&&q| q >= nq) {
                bad(Some(i), Rule::Operands, format!("qubit {q} out of range"));
                continue;
            }
            let photon_ops: Vec<usize> = occ.iter().copied().filter(|&q| !self.is_emitter(q)).collect();
            match g {
                Gate::EmitterCnot { control, target } => {
                    if control == target {
                        bad(Some(i), Rule::Operands, "CNOT on a single qubit".into());
                    }
                    if !photon_ops.is_empty() {
                        bad(Some(i), Rule::PhotonInteraction, "two-qubit gate on a photon".into());
                    }
                }
                Gate::Emission { emitter, photon } => {
                    if !self.is_emitter(emitter) || self.is_emitter(photon) {
                        bad(Some(i), Rule::Operands, "emission needs (emitter, photon)".into());
                    } else {
                        let k = photon - self.emitters;
                        if emitted[k] {
                            bad(Some(i), Rule::EmissionFirst, format!("photon {k} emitted twice"));
                        }
                        emitted[k] = true;
                    }
                }
                Gate::EmitterInit { emitter } | Gate::MeasureX { emitter, .. } => {
                    if !self.is_emitter(emitter) {
                        bad(Some(i), Rule::Operands, "emitter-only gate on a photon".into());
                    }
                }
                Gate::Local { .. } => {}
            }
            if !matches!(g, Gate::Emission { .. }) {
                for &q in &photon_ops {
                    if !emitted[q - self.emitters] {
                        bad(Some(i), Rule::EmissionFirst, format!("photon {} used before emission", q - self.emitters));
                    }
                }
            }
            for &q in g.operands().iter().filter(|&&q| self.is_emitter(q)) {
                let is_init = matches!(g, Gate::EmitterInit { .. });
                if measured[q] && !is_init {
                    bad(Some(i), Rule::MeasureLast, format!("emitter {q} used after measure-out"));
                }
                measured[q] = matches!(g, Gate::MeasureX { .. });
                used[q] |= !is_init;
            }
            if let (true, Some(t)) = (timed, op.start) {
                if t < Time::default() {
                    bad(Some(i), Rule::Timing, "negative start time".into());
                }
                let end = t + hw.duration(g.kind());
                for &q in &occ {
                    if let Some(prev) = last_end[q] {
                        if t < prev {
                            bad(Some(i), Rule::Timing, format!("overlaps previous gate on qubit {q}"));
                        }
                    }
                    last_end[q] = Some(end);
                }
            }
        }
        for (k, e) in emitted.iter().enumerate() {
            if !e {
                bad(None, Rule::EmissionFirst, format!("photon {k} never emitted"));
            }
        }
        let unmeasured: Vec<usize> = (0..self.emitters).filter(|&e| used[e] && !measured[e]).collect();
        if out.is_empty() && !unmeasured.is_empty() {
            let message = match self.simulate(Outcomes::AllZero) {
                Ok(_) => None,
                Err(ReplayError::EmitterEntangled(e)) => Some(format!("emitter {e} not returned to |0>")),
                Err(other) => Some(other.to_string()),
            };
            if let Some(message) = message {
                out.push(Violation { gate: None, rule: Rule::EmitterFinalState, message });
            }
        }
        out
    }

    /// Simulate on the stabilizer oracle and return the photon register.
    pub fn replay(&self, hw: &HardwareModel, outcomes: Outcomes) -> Result<Tableau, ReplayError> {
        if let Some(v) = self.validate(hw).into_iter().next() {
            return Err(ReplayError::Invalid(v));
        }
        self.simulate(outcomes)
    }

    fn simulate(&self, outcomes: Outcomes) -> Result<Tableau, ReplayError> {
        let mut t = Tableau::new(self.num_qubits());
        let mut rng = ChaCha8Rng::seed_from_u64(match outcomes {
            Outcomes::Seeded(s) => s,
            _ => 0,
        });
        let forced = match outcomes {
            Outcomes::AllZero => Some(false),
            Outcomes::AllOne => Some(true),
            Outcomes::Seeded(_) => None,
        };
        for op in &self.ops {
            match op.gate {
                Gate::EmitterInit { emitter } => {
                    if !t.is_zero_state(emitter) {
                        return Err(ReplayError::DirtyInit(emitter));
                    }
                }
                Gate::EmitterCnot { control, target } => t.apply_cnot(control, target)?,
                Gate::Emission { emitter, photon } => {
                    t.apply_cnot(emitter, photon)?;
                    t.apply_h(photon)?;
                }
                Gate::Local { qubit, u } => t.apply_1q(qubit, u)?,
                Gate::MeasureX { emitter, corr } => {
                    let (outcome, _) = t.measure_x(emitter, forced, &mut rng)?;
                    t.apply_h(emitter)?;
                    if outcome {
                        if let Some((q, p)) = corr {
                            t.apply_pauli(q, p)?;
                        }
                        t.apply_pauli(emitter, Pauli::X)?;
                    }
                }
            }
        }
        for e in 0..self.emitters {
            if !t.is_zero_state(e) {
                return Err(ReplayError::EmitterEntangled(e));
            }
        }
        let photons: Vec<usize> = (0..self.photons).map(|k| self.photon_qubit(k)).collect();
        t.restrict_to(&photons).ok_or(ReplayError::EmitterEntangled(0))
    }

    pub fn to_json(&self) -> String {
        let mut sorted = self.clone();
        if sorted.is_timed() {
            sorted.canonicalize();
        }
        let raw = RawCircuit {
            version: VERSION.to_string(),
            emitters: sorted.emitters,
            photons: sorted.photons,
            gates: sorted.ops.iter().map(RawGate::from_op).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Circuit, ParseError> {
        let syntax = |e: serde_json::Error| ParseError::Syntax {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        };
        let head: VersionOnly = serde_json::from_str(text).map_err(syntax)?;
        if head.version != VERSION {
            return Err(ParseError::UnsupportedVersion(head.version));
        }
        let raw: RawCircuit = serde_json::from_str(text).map_err(syntax)?;
        let mut c = Circuit::new(raw.emitters, raw.photons);
        for (index, g) in raw.gates.iter().enumerate() {
            let op = g.to_op().map_err(|message| ParseError::Gate { index, message })?;
            c.ops.push(op);
        }
        Ok(c)
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    before + column.saturating_sub(1)
}

pub fn format_time(t: Time) -> String {
    format!("{}/{}", t.numer(), t.denom())
}

pub fn parse_time(s: &str) -> Option<Time> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().ok()?;
    let d: i64 = d.trim().parse().ok()?;
    (d > 0).then(|| Time::new(n, d))
}

#[derive(Deserialize)]
struct VersionOnly {
    version: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    version: String,
    emitters: usize,
    photons: usize,
    gates: Vec<RawGate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorr {
    q: usize,
    p: Pauli,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    kind: GateKind,
    q: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    corr: Option<RawCorr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<u8>,
}

impl RawGate {
    fn from_op(op: &Op) -> RawGate {
        let (corr, u) = match op.gate {
            Gate::MeasureX { corr, .. } => (corr.map(|(q, p)| RawCorr { q, p }), None),
            Gate::Local { u, .. } => (None, Some(u.index())),
            _ => (None, None),
        };
        RawGate {
            kind: op.gate.kind(),
            q: op.gate.operands(),
            t: op.start.map(format_time),
            corr,
            u,
        }
    }

    fn to_op(&self) -> Result<Op, String> {
        let arity = |n: usize| {
            if self.q.len() == n {
                Ok(())
            } else {
                Err(format!("{:?} takes {n} qubits, got {}", self.kind, self.q.len()))
            }
        };
        let gate = match self.kind {
            GateKind::EmitterInit => {
                arity(1)?;
                Gate::EmitterInit { emitter: self.q[0] }
            }
            GateKind::EmitterEmitterCnot => {
                arity(2)?;
                Gate::EmitterCnot { control: self.q[0], target: self.q[1] }
            }
            GateKind::Emission => {
                arity(2)?;
                Gate::Emission { emitter: self.q[0], photon: self.q[1] }
            }
            GateKind::SingleQubitClifford => {
                arity(1)?;
                let u = self
                    .u
                    .and_then(Clifford1::from_index)
                    .ok_or("missing or invalid clifford index")?;
                Gate::Local { qubit: self.q[0], u }
            }
            GateKind::EmitterMeasureX => {
                arity(1)?;
                Gate::MeasureX { emitter: self.q[0], corr: self.corr.as_ref().map(|c| (c.q, c.p)) }
            }
        };
        let start = match &self.t {
            Some(s) => Some(parse_time(s).ok_or_else(|| format!("bad time {s:?}"))?),
            None => None,
        };
        Ok(Op { gate, start })
    }
}
