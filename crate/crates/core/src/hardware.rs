//! Quantum-dot timing model and photon-loss metrics.

use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind, Time};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HardwareError {
    #[error("unknown profile key {0:?}")]
    UnknownKey(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("photon {0} is never emitted")]
    Unemitted(usize),
    #[error("circuit is not timed")]
    Untimed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardwareModel {
    pub tau_qd: Time,
    pub t_ee_cnot: Time,
    pub t_emission: Time,
    pub t_1q: Time,
    pub t_measure: Time,
    pub loss_per_tau: f64,
}

impl Default for HardwareModel {
    fn default() -> Self {
        let tenth = Time::new(1, 10);
        HardwareModel {
            tau_qd: Time::from_integer(1),
            t_ee_cnot: Time::from_integer(1),
            t_emission: tenth,
            t_1q: tenth,
            t_measure: tenth,
            loss_per_tau: 0.005,
        }
    }
}

/// Parse a plain decimal like `0.1` or `3/10` into an exact rational.
fn parse_decimal(s: &str) -> Option<Time> {
    if s.contains('/') {
        return crate::circuit::parse_time(s);
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10i64.pow(frac.len() as u32);
    let neg = int.starts_with('-');
    let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let f: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let signed_f = if neg { -f } else { f };
    Some(Time::new(whole * den + signed_f, den))
}

impl HardwareModel {
    pub fn preset(name: &str) -> Result<Self, HardwareError> {
        match name {
            "qd-default" => Ok(Self::default()),
            other => Err(HardwareError::UnknownPreset(other.to_string())),
        }
    }

    /// Parse `key=value` lines; unspecified keys keep their defaults.
    pub fn parse_profile(text: &str) -> Result<Self, HardwareError> {
        let mut hw = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| HardwareError::Syntax { line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| syntax("expected key=value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "loss_per_tau" {
                let p: f64 = v.parse().map_err(|_| syntax(format!("bad number {v:?}")))?;
                if !(0.0..1.0).contains(&p) {
                    return Err(syntax("loss_per_tau must be in [0,1)".into()));
                }
                hw.loss_per_tau = p;
                continue;
            }
            let t = parse_decimal(v).ok_or_else(|| syntax(format!("bad duration {v:?}")))?;
            if t <= Time::default() {
                return Err(syntax(format!("{k} must be positive")));
            }
            match k {
                "tau_qd" => hw.tau_qd = t,
                "t_ee_cnot" => hw.t_ee_cnot = t,
                "t_emission" => hw.t_emission = t,
                "t_1q" => hw.t_1q = t,
                "t_measure" => hw.t_measure = t,
                _ => return Err(HardwareError::UnknownKey(k.to_string())),
            }
        }
        Ok(hw)
    }

    pub fn to_profile(&self) -> String {
        use crate::circuit::format_time as f;
        format!(
            "tau_qd={}\nt_ee_cnot={}\nt_emission={}\nt_1q={}\nt_measure={}\nloss_per_tau={}\n",
            f(self.tau_qd),
            f(self.t_ee_cnot),
            f(self.t_emission),
            f(self.t_1q),
            f(self.t_measure),
            self.loss_per_tau
        )
    }

    pub fn duration(&self, kind: GateKind) -> Time {
        match kind {
            GateKind::EmitterInit => Time::default(),
            GateKind::EmitterEmitterCnot => self.t_ee_cnot,
            GateKind::Emission => self.t_emission,
            GateKind::SingleQubitClifford => self.t_1q,
            GateKind::EmitterMeasureX => self.t_measure,
        }
    }
}

/// Assign as-soon-as-possible start times in list order. A circuit that is
/// already timed and consistent is returned unchanged (up to canonical order).
pub fn time_circuit(c: &Circuit, hw: &HardwareModel) -> Circuit {
    let mut out = c.clone();
    if c.is_timed() && c.validate(hw).iter().all(|v| v.rule != crate::circuit::Rule::Timing) {
        out.canonicalize();
        return out;
    }
    let mut avail = vec![Time::default(); c.num_qubits()];
    for op in &mut out.ops {
        let occ = op.gate.occupied();
        let t = occ.iter().map(|&q| avail[q]).max().unwrap_or_default();
        let end = t + hw.duration(op.gate.kind());
        for q in occ {
            avail[q] = end;
        }
        op.start = Some(t);
    }
    out.canonicalize();
    out
}

/// As-late-as-possible times with the end pinned to the ASAP duration, so
/// every gate (emissions included) is delayed as far as dependencies allow.
pub fn time_alap(c: &Circuit, hw: &HardwareModel) -> Circuit {
    let mut untimed = c.clone();
    for op in &mut untimed.ops {
        op.start = None;
    }
    let end = time_circuit(&untimed, hw).end_time(hw);
    let mut out = untimed;
    let mut latest = vec![end; c.num_qubits()];
    for op in out.ops.iter_mut().rev() {
        let occ = op.gate.occupied();
        let finish = occ.iter().map(|&q| latest[q]).min().unwrap_or(end);
        let start = finish - hw.duration(op.gate.kind());
        for q in occ {
            latest[q] = start;
        }
        op.start = Some(start);
    }
    let first = out.ops.iter().filter_map(|o| o.start).min().unwrap_or_default();
    out.shift(-first);
    out.canonicalize();
    out
}

/// Emission time of each photon.
pub fn emission_times(c: &Circuit) -> Result<Vec<Time>, HardwareError> {
    let mut times = vec![None; c.photons];
    for op in &c.ops {
        if let Gate::Emission { photon, .. } = op.gate {
            let k = photon - c.emitters;
            times[k] = Some(op.start.ok_or(HardwareError::Untimed)?);
        }
    }
    times
        .into_iter()
        .enumerate()
        .map(|(k, t)| t.ok_or(HardwareError::Unemitted(k)))
        .collect()
}

/// Mean time photons spend between emission and circuit end.
pub fn avg_photon_loss(c: &Circuit, hw: &HardwareModel) -> Result<Time, HardwareError> {
    let emits = emission_times(c)?;
    Ok(average_alive(&emits, c.end_time(hw)))
}

pub fn average_alive(emits: &[Time], end: Time) -> Time {
    if emits.is_empty() {
        return Time::default();
    }
    let total: Time = emits.iter().map(|&t| end - t).sum();
    total / Time::from_integer(emits.len() as i64)
}

pub fn survival_of(alive: Time, hw: &HardwareModel) -> f64 {
    let periods = to_f64(alive / hw.tau_qd);
    (1.0 - hw.loss_per_tau).powf(periods)
}

pub fn to_f64(t: Time) -> f64 {
    *t.numer() as f64 / *t.denom() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub n_ee_cnot: usize,
    pub duration: Time,
    pub avg_t_loss: Time,
    pub survival: f64,
    pub photon_survival: Vec<f64>,
    pub peak_emitters: usize,
}

pub fn metrics(c: &Circuit, hw: &HardwareModel) -> Result<Metrics, HardwareError> {
    if !c.is_timed() {
        return Err(HardwareError::Untimed);
    }
    let end = c.end_time(hw);
    let emits = emission_times(c)?;
    let photon_survival: Vec<f64> = emits.iter().map(|&t| survival_of(end - t, hw)).collect();
    Ok(Metrics {
        n_ee_cnot: c.n_ee_cnot(),
        duration: end,
        avg_t_loss: average_alive(&emits, end),
        // one power of the summed alive time, so equal totals compare equal
        survival: survival_of(emits.iter().map(|&t| end - t).sum(), hw),
        photon_survival,
        peak_emitters: peak_emitters(c, hw),
    })
}

/// Per-emitter busy intervals: from the first gate after each (re)start to
/// the end of its measure-out (or last gate).
pub fn emitter_intervals(c: &Circuit, hw: &HardwareModel) -> Vec<(usize, Time, Time)> {
    let mut open: Vec<Option<(Time, Time)>> = vec![None; c.emitters];
    let mut out = Vec::new();
    for op in &c.ops {
        let t = op.start.unwrap_or_default();
        let end = t + hw.duration(op.gate.kind());
        for q in op.gate.operands().into_iter().filter(|&q| c.is_emitter(q)) {
            if matches!(op.gate, Gate::EmitterInit { .. }) {
                continue;
            }
            let slot = open[q].get_or_insert((t, end));
            slot.1 = slot.1.max(end);
            if matches!(op.gate, Gate::MeasureX { .. }) {
                let (s, e) = open[q].take().unwrap();
                out.push((q, s, e));
            }
        }
    }
    for (q, slot) in open.into_iter().enumerate() {
        if let Some((s, e)) = slot {
            out.push((q, s, e));
        }
    }
    out.sort_by_key(|&(q, s, _)| (s, q));
    out
}

pub fn peak_emitters(c: &Circuit, hw: &HardwareModel) -> usize {
    let mut events: Vec<(Time, i32)> = Vec::new();
    for (_, s, e) in emitter_intervals(c, hw) {
        events.push((s, 1));
        events.push((e, -1));
    }
    // ends sort before starts at equal times
    events.sort();
    let (mut cur, mut peak) = (0i32, 0i32);
    for (_, d) in events {
        cur += d;
        peak = peak.max(cur);
    }
    peak as usize
}
