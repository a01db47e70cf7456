//! The 24-element single-qubit Clifford group modulo global phase.
//!
//! An element is identified by its conjugation action on `X` and `Z`. Elements
//! are indexed `0..24` in a fixed breadth-first order over the generators
//! `H` and `S` starting from the identity, so index `0` is always the
//! identity. The composition table is computed once and cached.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// A non-identity single-qubit Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// (x, z) symplectic bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
        }
    }

    /// Product `a * b` for distinct `a`, `b`: returns (sign of the `i`, c) with
    /// `a * b = ±i c`.
    fn product(a: Pauli, b: Pauli) -> (bool, Pauli) {
        use Pauli::*;
        match (a, b) {
            (X, Y) => (false, Z),
            (Y, Z) => (false, X),
            (Z, X) => (false, Y),
            (Y, X) => (true, Z),
            (Z, Y) => (true, X),
            (X, Z) => (true, Y),
            _ => unreachable!("product of equal Paulis"),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(c)
    }
}

/// A signed Pauli: `negative` flips the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub negative: bool,
    pub pauli: Pauli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Action {
    x: SignedPauli,
    z: SignedPauli,
}

impl Action {
    const IDENTITY: Action = Action {
        x: SignedPauli { negative: false, pauli: Pauli::X },
        z: SignedPauli { negative: false, pauli: Pauli::Z },
    };

    fn y(&self) -> SignedPauli {
        // Y = i X Z, so U Y U^dag = i (sx Px)(sz Pz) = i * (±i) Pc
        let (neg_i, pauli) = Pauli::product(self.x.pauli, self.z.pauli);
        // i * i = -1, i * (-i) = +1
        let negative = self.x.negative ^ self.z.negative ^ !neg_i;
        SignedPauli { negative, pauli }
    }

    fn image(&self, p: Pauli) -> SignedPauli {
        match p {
            Pauli::X => self.x,
            Pauli::Y => self.y(),
            Pauli::Z => self.z,
        }
    }

    /// Action of applying `self` first and `next` second.
    fn then(&self, next: &Action) -> Action {
        let map = |sp: SignedPauli| {
            let img = next.image(sp.pauli);
            SignedPauli { negative: img.negative ^ sp.negative, pauli: img.pauli }
        };
        Action { x: map(self.x), z: map(self.z) }
    }
}

struct Group {
    actions: Vec<Action>,
    compose: Vec<[u8; 24]>,
    inverse: [u8; 24],
}

const H_ACTION: Action = Action {
    x: SignedPauli { negative: false, pauli: Pauli::Z },
    z: SignedPauli { negative: false, pauli: Pauli::X },
};
const S_ACTION: Action = Action {
    x: SignedPauli { negative: false, pauli: Pauli::Y },
    z: SignedPauli { negative: false, pauli: Pauli::Z },
};

fn group() -> &'static Group {
    static GROUP: OnceLock<Group> = OnceLock::new();
    GROUP.get_or_init(|| {
        let mut actions = vec![Action::IDENTITY];
        let mut head = 0;
        while head < actions.len() {
            let cur = actions[head];
            for gen in [H_ACTION, S_ACTION] {
                let next = cur.then(&gen);
                if !actions.contains(&next) {
                    actions.push(next);
                }
            }
            head += 1;
        }
        assert_eq!(actions.len(), 24);
        let find = |a: &Action| actions.iter().position(|b| b == a).unwrap() as u8;
        let compose: Vec<[u8; 24]> = actions
            .iter()
            .map(|a| {
                let mut row = [0u8; 24];
                for (j, b) in actions.iter().enumerate() {
                    row[j] = find(&a.then(b));
                }
                row
            })
            .collect();
        let mut inverse = [0u8; 24];
        for i in 0..24 {
            inverse[i] = (0..24u8).find(|&j| compose[i][j as usize] == 0).unwrap();
        }
        Group { actions, compose, inverse }
    })
}

/// An element of the single-qubit Clifford group, by index `0..24`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clifford1(u8);

impl Clifford1 {
    pub const IDENTITY: Clifford1 = Clifford1(0);

    pub fn from_index(index: u8) -> Option<Clifford1> {
        (index < 24).then_some(Clifford1(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Clifford1> {
        (0..24).map(Clifford1)
    }

    fn from_action(action: Action) -> Clifford1 {
        let idx = group().actions.iter().position(|a| *a == action).unwrap();
        Clifford1(idx as u8)
    }

    fn signed(negative: bool, pauli: Pauli) -> SignedPauli {
        SignedPauli { negative, pauli }
    }

    fn with_images(x: (bool, Pauli), z: (bool, Pauli)) -> Clifford1 {
        Self::from_action(Action { x: Self::signed(x.0, x.1), z: Self::signed(z.0, z.1) })
    }

    pub fn h() -> Clifford1 {
        Self::from_action(H_ACTION)
    }

    pub fn s() -> Clifford1 {
        Self::from_action(S_ACTION)
    }

    pub fn s_dag() -> Clifford1 {
        Self::s().inverse()
    }

    pub fn pauli(p: Pauli) -> Clifford1 {
        match p {
            Pauli::X => Self::with_images((false, Pauli::X), (true, Pauli::Z)),
            Pauli::Y => Self::with_images((true, Pauli::X), (true, Pauli::Z)),
            Pauli::Z => Self::with_images((true, Pauli::X), (false, Pauli::Z)),
        }
    }

    /// `exp(-i pi/4 X)`: fixes `X`, maps `Z` to `-Y`.
    pub fn sqrt_neg_i_x() -> Clifford1 {
        Self::with_images((false, Pauli::X), (true, Pauli::Y))
    }

    /// `exp(i pi/4 Z)`: maps `X` to `-Y`, fixes `Z`.
    pub fn sqrt_i_z() -> Clifford1 {
        Self::with_images((true, Pauli::Y), (false, Pauli::Z))
    }

    /// Gate sequence `self` followed by `next`.
    pub fn then(self, next: Clifford1) -> Clifford1 {
        Clifford1(group().compose[self.0 as usize][next.0 as usize])
    }

    pub fn inverse(self) -> Clifford1 {
        Clifford1(group().inverse[self.0 as usize])
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// Conjugation image `U P U^dag` of a Pauli.
    pub fn conjugate(self, p: Pauli) -> SignedPauli {
        group().actions[self.0 as usize].image(p)
    }

    pub(crate) fn image_table(self) -> [SignedPauli; 3] {
        let a = &group().actions[self.0 as usize];
        let mut out = [a.x; 3];
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            out[p.index()] = a.image(p);
        }
        out
    }

    fn name(self) -> Option<&'static str> {
        let named: [(Clifford1, &str); 9] = [
            (Self::IDENTITY, "I"),
            (Self::h(), "H"),
            (Self::s(), "S"),
            (Self::s_dag(), "Sdg"),
            (Self::pauli(Pauli::X), "X"),
            (Self::pauli(Pauli::Y), "Y"),
            (Self::pauli(Pauli::Z), "Z"),
            (Self::sqrt_neg_i_x(), "SXdg"),
            (Self::sqrt_neg_i_x().inverse(), "SX"),
        ];
        named.iter().find(|(c, _)| *c == self).map(|(_, n)| *n)
    }
}

impl fmt::Debug for Clifford1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "C{}", self.0),
        }
    }
}
