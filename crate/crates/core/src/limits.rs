//! Process-wide resource caps. Every search that can blow up checks one of
//! these before allocating.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

static ELEMENTS: AtomicU64 = AtomicU64::new(1_000_000);
static MONOID: AtomicU64 = AtomicU64::new(20_000_000);
static ATOMS: AtomicU64 = AtomicU64::new(2_000_000);

/// Cap on the domain size of constructed structures (powers, quotients).
pub fn element_cap() -> u64 {
    ELEMENTS.load(Ordering::Relaxed)
}

/// Cap on the number of maps collected into one monoid or enumeration.
pub fn monoid_cap() -> u64 {
    MONOID.load(Ordering::Relaxed)
}

/// Cap on the number of atoms in a generated formula or tuple table.
pub fn atom_cap() -> u64 {
    ATOMS.load(Ordering::Relaxed)
}

pub fn set_element_cap(n: u64) {
    ELEMENTS.store(n, Ordering::Relaxed);
}

pub fn set_monoid_cap(n: u64) {
    MONOID.store(n, Ordering::Relaxed);
}

pub fn set_atom_cap(n: u64) {
    ATOMS.store(n, Ordering::Relaxed);
}

/// Set all caps at once (the CLI's `--guard`).
pub fn set_all(n: u64) {
    set_element_cap(n);
    set_monoid_cap(n);
    set_atom_cap(n);
}

pub(crate) fn check(what: &str, required: u128, cap: u64) -> Result<()> {
    if required > cap as u128 {
        return Err(Error::Guard {
            what: what.to_string(),
            required,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `base^exp`, saturating at `u128::MAX`.
pub(crate) fn pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
