//! Monomials z^I z̄^J w^m packed into a single `u128`.
//!
//! Slot `s` holds a 7-bit exponent at bit offset `(16 - s) * 7`, so the
//! numeric order of the packed key is lexicographic on (I, J, m).

use std::fmt;

pub const MAX_DIM: usize = 8;
pub const SLOTS: usize = 2 * MAX_DIM + 1;
const BITS: u32 = 7;
const MASK: u128 = (1 << BITS) - 1;
const BLOCK: u128 = (1u128 << (BITS as usize * MAX_DIM)) - 1;

/// Slot index of `z_i` (0-based).
pub const fn z_slot(i: usize) -> usize {
    i
}

/// Slot index of `z̄_i` (0-based).
pub const fn zbar_slot(i: usize) -> usize {
    MAX_DIM + i
}

pub const W_SLOT: usize = 2 * MAX_DIM;

/// Weight of a slot in the grading: 1 for z, z̄ and 2 for w.
pub const fn slot_weight(slot: usize) -> u32 {
    if slot == W_SLOT {
        2
    } else {
        1
    }
}

const fn shift(slot: usize) -> u32 {
    (SLOTS as u32 - 1 - slot as u32) * BITS
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    deg: u32,
    key: u128,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { deg: 0, key: 0 };

    pub fn from_slots(exps: &[(usize, u32)]) -> Monomial {
        let mut m = Monomial::ONE;
        for &(s, e) in exps {
            m = m.mul(Monomial::slot_pow(s, e));
        }
        m
    }

    pub fn slot_pow(slot: usize, e: u32) -> Monomial {
        assert!(slot < SLOTS && e <= MASK as u32, "exponent out of range");
        Monomial {
            deg: e * slot_weight(slot),
            key: (e as u128) << shift(slot),
        }
    }

    /// Builds z^I z̄^J w^m; `i` and `j` may be shorter than `MAX_DIM`.
    pub fn new(i: &[u32], j: &[u32], m: u32) -> Monomial {
        let mut out = Monomial::slot_pow(W_SLOT, m);
        for (k, &e) in i.iter().enumerate() {
            out = out.mul(Monomial::slot_pow(z_slot(k), e));
        }
        for (k, &e) in j.iter().enumerate() {
            out = out.mul(Monomial::slot_pow(zbar_slot(k), e));
        }
        out
    }

    pub fn z(i: usize) -> Monomial {
        Monomial::slot_pow(z_slot(i), 1)
    }

    pub fn zbar(i: usize) -> Monomial {
        Monomial::slot_pow(zbar_slot(i), 1)
    }

    pub fn w() -> Monomial {
        Monomial::slot_pow(W_SLOT, 1)
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.deg
    }

    #[inline]
    pub fn exp(&self, slot: usize) -> u32 {
        ((self.key >> shift(slot)) & MASK) as u32
    }

    pub fn z_exp(&self, i: usize) -> u32 {
        self.exp(z_slot(i))
    }

    pub fn zbar_exp(&self, i: usize) -> u32 {
        self.exp(zbar_slot(i))
    }

    pub fn w_exp(&self) -> u32 {
        self.exp(W_SLOT)
    }

    pub fn i_vec(&self, n: usize) -> Vec<u32> {
        (0..n).map(|k| self.z_exp(k)).collect()
    }

    pub fn j_vec(&self, n: usize) -> Vec<u32> {
        (0..n).map(|k| self.zbar_exp(k)).collect()
    }

    /// Product of monomials. Callers keep degrees within the cap, so no
    /// field overflows.
    #[inline]
    pub fn mul(self, other: Monomial) -> Monomial {
        Monomial {
            deg: self.deg + other.deg,
            key: self.key + other.key,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        (0..SLOTS).all(|s| self.exp(s) <= other.exp(s))
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn div_into(self, other: Monomial) -> Monomial {
        Monomial {
            deg: other.deg - self.deg,
            key: other.key - self.key,
        }
    }

    /// Removes all powers of `slot`.
    pub fn without(self, slot: usize) -> Monomial {
        let e = self.exp(slot);
        Monomial::slot_pow(slot, e).div_into(self)
    }

    /// Swaps the z and z̄ exponent blocks.
    pub fn conj(self) -> Monomial {
        let zs = (self.key >> shift(z_slot(MAX_DIM - 1))) & BLOCK;
        let zbs = (self.key >> shift(zbar_slot(MAX_DIM - 1))) & BLOCK;
        Monomial {
            deg: self.deg,
            key: (zbs << shift(z_slot(MAX_DIM - 1)))
                | (zs << shift(zbar_slot(MAX_DIM - 1)))
                | (self.key & MASK),
        }
    }

    pub fn z_part(self) -> Monomial {
        let zs = (self.key >> shift(z_slot(MAX_DIM - 1))) & BLOCK;
        let key = zs << shift(z_slot(MAX_DIM - 1));
        Monomial {
            deg: (0..MAX_DIM).map(|k| self.z_exp(k)).sum(),
            key,
        }
    }

    pub fn zbar_part(self) -> Monomial {
        self.conj().z_part().conj()
    }

    pub fn has_zbar(&self) -> bool {
        (self.key >> shift(zbar_slot(MAX_DIM - 1))) & BLOCK != 0
    }

    pub fn has_z(&self) -> bool {
        (self.key >> shift(z_slot(MAX_DIM - 1))) & BLOCK != 0
    }

    pub fn has_w(&self) -> bool {
        self.key & MASK != 0
    }

    pub fn z_degree(&self) -> u32 {
        (0..MAX_DIM).map(|k| self.z_exp(k)).sum()
    }

    pub fn zbar_degree(&self) -> u32 {
        (0..MAX_DIM).map(|k| self.zbar_exp(k)).sum()
    }

    /// Slots with a nonzero exponent, in slot order.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        (0..SLOTS).filter_map(move |s| {
            let e = self.exp(s);
            (e > 0).then_some((s, e))
        })
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.deg == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (s, e) in self.support() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let name = if s == W_SLOT {
                "w".to_string()
            } else if s < MAX_DIM {
                format!("z{}", s + 1)
            } else {
                format!("zb{}", s - MAX_DIM + 1)
            };
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}
