//! Stabilizer tableau simulator used as the ground-truth oracle.
//!
//! The tableau keeps `n` destabilizer rows followed by `n` stabilizer rows in
//! the Aaronson-Gottesman layout, so measurements cost `O(n^2)` and state
//! equality can be decided by decomposing each foreign stabilizer over this
//! tableau's generators. Phases are tracked exactly; the `i` exponent of a row
//! product is accumulated mod 4.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::bits::BitRow;
use crate::clifford::{Clifford1, Pauli};
use crate::graph::GraphState;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    OutOfRange { qubit: usize, n: usize },
    #[error("two-qubit gate on coincident qubit {0}")]
    Coincident(usize),
    #[error("tableau sizes differ ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("stabilizer generators are not independent and commuting")]
    Degenerate,
}

/// A Hermitian Pauli string with a sign.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub negative: bool,
    pub x: BitRow,
    pub z: BitRow,
}

#[inline]
fn g_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { negative: false, x: BitRow::zeros(n), z: BitRow::zeros(n) }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, Some(p));
        s
    }

    /// Parse a string like `"+XZI"` or `"-YIZ"` (sign optional).
    pub fn parse(text: &str) -> Option<Self> {
        let (negative, body) = match text.as_bytes().first()? {
            b'+' => (false, &text[1..]),
            b'-' => (true, &text[1..]),
            _ => (false, text),
        };
        let n = body.chars().count();
        let mut s = Self::identity(n);
        s.negative = negative;
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '.' | '_' => None,
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => return None,
            };
            s.set(q, p);
        }
        Some(s)
    }

    pub fn get(&self, q: usize) -> Option<Pauli> {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Option<Pauli>) {
        let (x, z) = p.map_or((false, false), Pauli::bits);
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Left-multiply: `self <- other * self`. Returns the residual `i`
    /// exponent (0 or 2 are absorbed into the sign; 1 or 3 mean the operands
    /// anticommuted and the result is non-Hermitian, which callers only allow
    /// for destabilizer bookkeeping).
    pub fn left_mul(&mut self, other: &PauliString) -> i32 {
        let mut exp = 2 * (self.negative as i32 + other.negative as i32);
        let support = {
            let mut s = self.x.clone();
            for r in [&self.z, &other.x, &other.z] {
                for q in r.iter_ones() {
                    s.set(q, true);
                }
            }
            s
        };
        for q in support.iter_ones() {
            exp += g_exponent(other.x.get(q), other.z.get(q), self.x.get(q), self.z.get(q));
        }
        let exp = exp.rem_euclid(4);
        self.negative = exp >= 2;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        exp % 2
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.len() {
            let c = match self.get(q) {
                None => 'I',
                Some(Pauli::X) => 'X',
                Some(Pauli::Y) => 'Y',
                Some(Pauli::Z) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Symplectic product: true iff the strings anticommute.
fn anticommute(a: &PauliString, b: &PauliString) -> bool {
    !a.commutes_with(b)
}

/// Stabilizer state of `n` qubits with destabilizers.
#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    // rows[0..n] destabilizers, rows[n..2n] stabilizers
    rows: Vec<PauliString>,
}

impl Tableau {
    /// The all-zero state `|0...0>`.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::X));
        }
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::Z));
        }
        Tableau { n, rows }
    }

    /// Build a tableau from `n` independent, mutually commuting stabilizer
    /// generators; destabilizers are completed by symplectic elimination.
    pub fn from_stabilizers(stabs: Vec<PauliString>) -> Result<Self, TableauError> {
        let n = stabs.len();
        if stabs.iter().any(|s| s.len() != n) {
            return Err(TableauError::Degenerate);
        }
        for i in 0..n {
            for j in i + 1..n {
                if anticommute(&stabs[i], &stabs[j]) {
                    return Err(TableauError::Degenerate);
                }
            }
        }
        // Row j of the system: omega(s_j, d) = s_j.z . d.x + s_j.x . d.z, so the
        // unknown vector is (d.x | d.z) and the coefficient row is (s_j.z | s_j.x).
        let width = 2 * n;
        let mut sys: Vec<(BitRow, BitRow)> = stabs
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let mut coeff = BitRow::zeros(width);
                for q in s.z.iter_ones() {
                    coeff.set(q, true);
                }
                for q in s.x.iter_ones() {
                    coeff.set(n + q, true);
                }
                (coeff, BitRow::from_indices(n, [j]))
            })
            .collect();
        let mut pivots = Vec::with_capacity(n);
        let mut rank = 0;
        for col in 0..width {
            let Some(p) = (rank..n).find(|&r| sys[r].0.get(col)) else {
                continue;
            };
            sys.swap(rank, p);
            let (pc, pa) = sys[rank].clone();
            for (r, row) in sys.iter_mut().enumerate() {
                if r != rank && row.0.get(col) {
                    row.0.xor_assign(&pc);
                    row.1.xor_assign(&pa);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == n {
                break;
            }
        }
        if rank < n {
            return Err(TableauError::Degenerate);
        }
        // d_i: pivot variable `pivots[r]` equals (row-op matrix)[r][i]
        let mut destabs: Vec<PauliString> = (0..n)
            .map(|i| {
                let mut d = PauliString::identity(n);
                for (r, &col) in pivots.iter().enumerate() {
                    if sys[r].1.get(i) {
                        if col < n {
                            d.x.set(col, true);
                        } else {
                            d.z.set(col - n, true);
                        }
                    }
                }
                d
            })
            .collect();
        for j in 0..n {
            for i in 0..j {
                if anticommute(&destabs[i], &destabs[j]) {
                    let s = stabs[i].clone();
                    destabs[j].left_mul(&s);
                    destabs[j].negative = false;
                }
            }
        }
        let mut rows = destabs;
        rows.extend(stabs);
        Ok(Tableau { n, rows })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    fn check(&self, q: usize) -> Result<(), TableauError> {
        if q >= self.n {
            Err(TableauError::OutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), TableauError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(TableauError::Coincident(a));
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<(), TableauError> {
        self.apply_1q(q, Clifford1::h())
    }

    pub fn apply_s(&mut self, q: usize) -> Result<(), TableauError> {
        self.apply_1q(q, Clifford1::s())
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<(), TableauError> {
        self.apply_1q(q, Clifford1::pauli(p))
    }

    /// Conjugate every row by a single-qubit Clifford on `q`.
    pub fn apply_1q(&mut self, q: usize, u: Clifford1) -> Result<(), TableauError> {
        self.check(q)?;
        if u.is_identity() {
            return Ok(());
        }
        let table = u.image_table();
        for row in &mut self.rows {
            let Some(p) = row.get(q) else { continue };
            let idx = match p {
                Pauli::X => 0,
                Pauli::Y => 1,
                Pauli::Z => 2,
            };
            let img = table[idx];
            row.set(q, Some(img.pauli));
            row.negative ^= img.negative;
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), TableauError> {
        self.check_pair(control, target)?;
        for row in &mut self.rows {
            let (xc, zc) = (row.x.get(control), row.z.get(control));
            let (xt, zt) = (row.x.get(target), row.z.get(target));
            if xc && zt && (xt == zc) {
                row.negative ^= true;
            }
            row.x.set(target, xt ^ xc);
            row.z.set(control, zc ^ zt);
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<(), TableauError> {
        self.check_pair(a, b)?;
        self.apply_h(b)?;
        self.apply_cnot(a, b)?;
        self.apply_h(b)
    }

    /// Measure `Z_q`. Returns `(outcome, deterministic)`. A forced outcome is
    /// honoured only when the result is random.
    pub fn measure_z(
        &mut self,
        q: usize,
        forced: Option<bool>,
        rng: &mut dyn RngCore,
    ) -> Result<(bool, bool), TableauError> {
        self.check(q)?;
        let n = self.n;
        let pivot = (n..2 * n).find(|&i| self.rows[i].x.get(q));
        match pivot {
            Some(p) => {
                let pivot_row = self.rows[p].clone();
                for i in 0..2 * n {
                    if i != p && self.rows[i].x.get(q) {
                        self.rows[i].left_mul(&pivot_row);
                    }
                }
                let outcome = forced.unwrap_or_else(|| rng.next_u32() & 1 == 1);
                self.rows[p - n] = pivot_row;
                let mut zq = PauliString::single(n, q, Pauli::Z);
                zq.negative = outcome;
                self.rows[p] = zq;
                Ok((outcome, false))
            }
            None => {
                let mut acc = PauliString::identity(n);
                for i in 0..n {
                    if self.rows[i].x.get(q) {
                        let s = self.rows[i + n].clone();
                        acc.left_mul(&s);
                    }
                }
                Ok((acc.negative, true))
            }
        }
    }

    /// Measure `X_q` (via basis change).
    pub fn measure_x(
        &mut self,
        q: usize,
        forced: Option<bool>,
        rng: &mut dyn RngCore,
    ) -> Result<(bool, bool), TableauError> {
        self.apply_h(q)?;
        let r = self.measure_z(q, forced, rng);
        self.apply_h(q)?;
        r
    }

    /// If `p` is (up to sign) in the stabilizer group, return its sign
    /// (`Some(true)` for negative).
    pub fn group_sign(&self, p: &PauliString) -> Option<bool> {
        let n = self.n;
        if self.stabilizers().iter().any(|s| anticommute(s, p)) {
            return None;
        }
        let mut acc = PauliString::identity(n);
        for i in 0..n {
            if anticommute(&self.rows[i], p) {
                let s = self.rows[i + n].clone();
                acc.left_mul(&s);
            }
        }
        if acc.x == p.x && acc.z == p.z {
            Some(acc.negative)
        } else {
            None
        }
    }

    /// Whether `Z_q` is a stabilizer with + sign (qubit in `|0>`).
    pub fn is_zero_state(&self, q: usize) -> bool {
        self.group_sign(&PauliString::single(self.n, q, Pauli::Z)) == Some(false)
    }

    /// Equality of stabilizer groups including signs.
    pub fn states_equal(&self, other: &Tableau) -> Result<bool, TableauError> {
        if self.n != other.n {
            return Err(TableauError::SizeMismatch(self.n, other.n));
        }
        Ok(other
            .stabilizers()
            .iter()
            .all(|s| self.group_sign(s) == Some(s.negative)))
    }

    /// Tableau of the graph state `|G>` with the graph's local-Clifford tags
    /// applied.
    pub fn from_graph(g: &GraphState) -> Tableau {
        let mut t = Self::bare_graph(g);
        for v in 0..g.len() {
            t.apply_1q(v, g.lc_tag(v)).expect("in range");
        }
        t
    }

    /// Graph-state tableau ignoring the local-Clifford tags.
    pub fn bare_graph(g: &GraphState) -> Tableau {
        let n = g.len();
        let stabs = (0..n)
            .map(|v| {
                let mut s = PauliString::single(n, v, Pauli::X);
                for u in g.neighbors_row(v).iter_ones() {
                    s.z.set(u, true);
                }
                s
            })
            .collect();
        let destabs: Vec<PauliString> =
            (0..n).map(|v| PauliString::single(n, v, Pauli::Z)).collect();
        let mut rows = destabs;
        rows.extend::<Vec<_>>(stabs);
        Tableau { n, rows }
    }

    /// Write the state as `U |G>`: returns the graph and the per-qubit local
    /// Cliffords `U`.
    pub fn extract_graph(&self) -> Result<(GraphState, Vec<Clifford1>), TableauError> {
        let n = self.n;
        let mut work = self.clone();
        let mut applied = vec![Clifford1::IDENTITY; n];
        let h_cols = hadamard_columns(self.stabilizers()).ok_or(TableauError::Degenerate)?;
        for &q in &h_cols {
            work.apply_h(q)?;
            applied[q] = applied[q].then(Clifford1::h());
        }
        // The X block of `work` now has full rank; bring it to identity.
        let mut rows: Vec<PauliString> = work.stabilizers().to_vec();
        for col in 0..n {
            let p = (col..n).find(|&r| rows[r].x.get(col)).ok_or(TableauError::Degenerate)?;
            rows.swap(col, p);
            let pr = rows[col].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != col && row.x.get(col) {
                    row.left_mul(&pr);
                }
            }
        }
        for v in 0..n {
            if rows[v].z.get(v) {
                // Y_v -> X_v
                let sdg = Clifford1::s_dag();
                for row in rows.iter_mut() {
                    apply_1q_row(row, v, sdg);
                }
                applied[v] = applied[v].then(sdg);
            }
        }
        for v in 0..n {
            if rows[v].negative {
                let z = Clifford1::pauli(Pauli::Z);
                for row in rows.iter_mut() {
                    apply_1q_row(row, v, z);
                }
                applied[v] = applied[v].then(z);
            }
        }
        let mut g = GraphState::new(n);
        for v in 0..n {
            for u in rows[v].z.iter_ones() {
                if u > v {
                    if !rows[u].z.get(v) {
                        return Err(TableauError::Degenerate);
                    }
                    g.set_edge(u, v, true);
                }
            }
        }
        let corrections = applied.into_iter().map(Clifford1::inverse).collect();
        Ok((g, corrections))
    }

    /// Check that stabilizer rows commute and are independent.
    pub fn is_valid(&self) -> bool {
        let stabs = self.stabilizers();
        for i in 0..stabs.len() {
            for j in i + 1..stabs.len() {
                if anticommute(&stabs[i], &stabs[j]) {
                    return false;
                }
            }
        }
        let rows: Vec<BitRow> = stabs
            .iter()
            .map(|s| {
                let mut r = BitRow::zeros(2 * self.n);
                for q in s.x.iter_ones() {
                    r.set(q, true);
                }
                for q in s.z.iter_ones() {
                    r.set(self.n + q, true);
                }
                r
            })
            .collect();
        crate::bits::gf2_rank(rows) == self.n
    }

    /// Tableau of the qubits in `keep`, assuming every other qubit is in
    /// `|0>`. Returns `None` if some discarded qubit is not in `|0>`.
    pub fn restrict_to(&self, keep: &[usize]) -> Option<Tableau> {
        let n = self.n;
        let drop: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        if !drop.iter().all(|&q| self.is_zero_state(q)) {
            return None;
        }
        let mut rows: Vec<PauliString> = self.stabilizers().to_vec();
        for row in rows.iter_mut() {
            for &q in &drop {
                // every group element commutes with Z_q, so only Z can appear
                debug_assert!(!row.x.get(q));
                row.z.set(q, false);
            }
        }
        // project onto kept qubits and select an independent subset
        let m = keep.len();
        let projected: Vec<PauliString> = rows
            .into_iter()
            .map(|r| {
                let mut p = PauliString::identity(m);
                p.negative = r.negative;
                for (i, &q) in keep.iter().enumerate() {
                    p.set(i, r.get(q));
                }
                p
            })
            .collect();
        let mut basis: Vec<PauliString> = Vec::new();
        let mut reduced: Vec<(usize, PauliString)> = Vec::new();
        for row in projected {
            let mut r = row.clone();
            for (col, b) in &reduced {
                if bit_at(&r, *col) {
                    r.left_mul(b);
                }
            }
            if let Some(col) = first_bit(&r) {
                for (_, b) in reduced.iter_mut() {
                    if bit_at(b, col) {
                        b.left_mul(&r);
                    }
                }
                reduced.push((col, r));
                basis.push(row);
            }
        }
        Tableau::from_stabilizers(basis).ok()
    }

    /// Debug dump: one Pauli string per stabilizer row.
    pub fn dump(&self) -> String {
        self.stabilizers()
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Qubits that need a Hadamard so the X block of the stabilizers becomes
/// invertible.
fn hadamard_columns(stabs: &[PauliString]) -> Option<Vec<usize>> {
    let n = stabs.len();
    let mut rows: Vec<(BitRow, BitRow)> = stabs.iter().map(|s| (s.x.clone(), s.z.clone())).collect();
    let mut x_pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..n).find(|&r| rows[r].0.get(col)) else { continue };
        rows.swap(rank, p);
        let pr = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.0.get(col) {
                row.0.xor_assign(&pr.0);
                row.1.xor_assign(&pr.1);
            }
        }
        x_pivots.push(col);
        rank += 1;
    }
    let mut z_rows: Vec<BitRow> = rows.into_iter().skip(rank).map(|r| r.1).collect();
    let mut h_cols = Vec::new();
    let mut zrank = 0;
    for col in (0..n).filter(|c| !x_pivots.contains(c)) {
        let Some(p) = (zrank..z_rows.len()).find(|&r| z_rows[r].get(col)) else { continue };
        z_rows.swap(zrank, p);
        let pr = z_rows[zrank].clone();
        for (r, row) in z_rows.iter_mut().enumerate() {
            if r != zrank && row.get(col) {
                row.xor_assign(&pr);
            }
        }
        h_cols.push(col);
        zrank += 1;
    }
    (zrank == z_rows.len()).then_some(h_cols)
}

fn bit_at(p: &PauliString, col: usize) -> bool {
    let n = p.len();
    if col < n {
        p.x.get(col)
    } else {
        p.z.get(col - n)
    }
}

fn first_bit(p: &PauliString) -> Option<usize> {
    p.x.first_one().or_else(|| p.z.first_one().map(|q| q + p.len()))
}

fn apply_1q_row(row: &mut PauliString, q: usize, u: Clifford1) {
    if let Some(p) = row.get(q) {
        let img = u.conjugate(p);
        row.set(q, Some(img.pauli));
        row.negative ^= img.negative;
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Tableau({})", self.n)?;
        for s in self.stabilizers() {
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stabs(list: &[&str]) -> Tableau {
        Tableau::from_stabilizers(list.iter().map(|s| PauliString::parse(s).unwrap()).collect())
            .unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn hadamard_maps_plus_to_zero() {
        let mut t = stabs(&["+X"]);
        t.apply_h(0).unwrap();
        assert!(t.states_equal(&stabs(&["+Z"])).unwrap());
    }

    #[test]
    fn cnot_entangles_plus_states() {
        let mut t = stabs(&["+XI", "+IX"]);
        t.apply_cnot(0, 1).unwrap();
        assert!(t.states_equal(&stabs(&["+XX", "+IX"])).unwrap());
        assert!(matches!(t.apply_cnot(0, 0), Err(TableauError::Coincident(0))));
        assert!(matches!(t.apply_h(2), Err(TableauError::OutOfRange { .. })));
    }

    #[test]
    fn cz_makes_two_vertex_graph() {
        let mut t = stabs(&["+XI", "+IX"]);
        t.apply_cz(0, 1).unwrap();
        assert!(t.states_equal(&stabs(&["+XZ", "+ZX"])).unwrap());
    }

    #[test]
    fn measurement_examples() {
        let mut t = Tableau::new(1);
        assert_eq!(t.measure_z(0, None, &mut rng()).unwrap(), (false, true));
        let mut t = stabs(&["-Z"]);
        assert_eq!(t.measure_z(0, None, &mut rng()).unwrap(), (true, true));
        let mut t = stabs(&["+X"]);
        let (out, det) = t.measure_z(0, Some(true), &mut rng()).unwrap();
        assert!(out && !det);
        assert!(t.states_equal(&stabs(&["-Z"])).unwrap());
        let mut bell = stabs(&["+XX", "+ZZ"]);
        let (a, _) = bell.measure_z(0, None, &mut rng()).unwrap();
        assert_eq!(bell.measure_z(1, None, &mut rng()).unwrap(), (a, true));
    }

    #[test]
    fn equality_respects_signs_and_generators() {
        assert!(stabs(&["+XX", "+ZZ"]).states_equal(&stabs(&["+XX", "-YY"])).unwrap());
        assert!(!stabs(&["+XX", "+ZZ"]).states_equal(&stabs(&["-XX", "+ZZ"])).unwrap());
        assert!(stabs(&["+Z"]).states_equal(&stabs(&["+ZI", "+IZ"])).is_err());
    }

    #[test]
    fn rejects_bad_stabilizer_sets() {
        let anti = vec![PauliString::parse("+X").unwrap(), PauliString::parse("+Z").unwrap()];
        assert!(Tableau::from_stabilizers(anti).is_err());
        let dep = vec![PauliString::parse("+ZI").unwrap(), PauliString::parse("+ZI").unwrap()];
        assert!(Tableau::from_stabilizers(dep).is_err());
    }

    #[test]
    fn extract_zero_state() {
        let (g, u) = stabs(&["+Z"]).extract_graph().unwrap();
        assert_eq!(g.edge_count(), 0);
        let mut t = Tableau::bare_graph(&g);
        t.apply_1q(0, u[0]).unwrap();
        assert!(t.states_equal(&stabs(&["+Z"])).unwrap());
    }

    #[test]
    fn extract_ghz_gives_star_up_to_lc() {
        let ghz = stabs(&["+XXX", "+ZZI", "+IZZ"]);
        let (g, u) = ghz.extract_graph().unwrap();
        let mut t = Tableau::bare_graph(&g);
        for (q, c) in u.iter().enumerate() {
            t.apply_1q(q, *c).unwrap();
        }
        assert!(t.states_equal(&ghz).unwrap());
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn restrict_drops_zero_qubits() {
        let mut t = stabs(&["+XZI", "+ZXI", "+IIZ"]);
        let r = t.restrict_to(&[0, 1]).unwrap();
        assert!(r.states_equal(&stabs(&["+XZ", "+ZX"])).unwrap());
        t.apply_h(2).unwrap();
        assert!(t.restrict_to(&[0, 1]).is_none());
    }

    #[test]
    fn lc_unitary_convention() {
        // U = sqrt(-iX)_v prod_{u in N(v)} sqrt(iZ)_u maps |G> to |tau_v G>
        let g = GraphState::from_edges(4, &[(0, 1), (0, 2), (0, 3), (2, 3)]).unwrap();
        let mut t = Tableau::bare_graph(&g);
        t.apply_1q(0, Clifford1::sqrt_neg_i_x()).unwrap();
        for u in 1..4 {
            t.apply_1q(u, Clifford1::sqrt_i_z()).unwrap();
        }
        let lc = g.local_complement(0).unwrap();
        assert!(t.states_equal(&Tableau::bare_graph(&lc)).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn graph_with_tags() -> impl Strategy<Value = GraphState> {
            (1usize..7).prop_flat_map(|n| {
                let pairs = n * (n - 1) / 2;
                (
                    proptest::collection::vec(any::<bool>(), pairs),
                    proptest::collection::vec(0u8..24, n),
                )
                    .prop_map(move |(bits, tags)| {
                        let mut g = GraphState::new(n);
                        let mut k = 0;
                        for u in 0..n {
                            for v in u + 1..n {
                                if bits[k] {
                                    g.set_edge(u, v, true);
                                }
                                k += 1;
                            }
                        }
                        for (v, t) in tags.into_iter().enumerate() {
                            g.set_lc_tag(v, Clifford1::from_index(t).unwrap());
                        }
                        g
                    })
            })
        }

        proptest! {
            #[test]
            fn extraction_round_trips(g in graph_with_tags(), ops in proptest::collection::vec((0usize..6, 0usize..6, 0u8..3), 0..12)) {
                let n = g.len();
                let mut t = Tableau::from_graph(&g);
                for (a, b, kind) in ops {
                    let (a, b) = (a % n, b % n);
                    match kind {
                        0 if a != b => t.apply_cnot(a, b).unwrap(),
                        1 => t.apply_h(a).unwrap(),
                        _ => t.apply_s(a).unwrap(),
                    }
                }
                prop_assert!(t.is_valid());
                let (h, u) = t.extract_graph().unwrap();
                let mut back = Tableau::bare_graph(&h);
                for (q, c) in u.iter().enumerate() {
                    back.apply_1q(q, *c).unwrap();
                }
                prop_assert!(back.states_equal(&t).unwrap());
            }

            #[test]
            fn gates_are_undone_by_inverses(g in graph_with_tags(), q in 0usize..6, c in 0u8..24) {
                let q = q % g.len();
                let c = Clifford1::from_index(c).unwrap();
                let t0 = Tableau::from_graph(&g);
                let mut t = t0.clone();
                t.apply_1q(q, c).unwrap();
                t.apply_1q(q, c.inverse()).unwrap();
                prop_assert!(t.states_equal(&t0).unwrap());
            }

            #[test]
            fn lc_keeps_state(g in graph_with_tags(), v in 0usize..6) {
                let v = v % g.len();
                let h = g.local_complement(v).unwrap();
                prop_assert!(Tableau::from_graph(&h).states_equal(&Tableau::from_graph(&g)).unwrap());
                let back = h.local_complement(v).unwrap();
                prop_assert_eq!(back.edges(), g.edges());
            }
        }
    }
}
