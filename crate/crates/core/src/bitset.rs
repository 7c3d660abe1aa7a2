//! Index sets over the object and feature orderings, stored as `u64` bitmasks.
//!
//! Contexts are capped at 64 objects and 64 features so that every subset of
//! either side fits in a single machine word and set algebra is a handful of
//! bit instructions.

use std::fmt;

/// Hard cap on either dimension of a context, forced by the mask width.
pub const MAX_DIM: usize = 64;

pub(crate) fn full_mask(n: usize) -> u64 {
    debug_assert!(n <= MAX_DIM);
    if n == MAX_DIM {
        !0
    } else {
        (1u64 << n) - 1
    }
}

macro_rules! index_set {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(u64);

        impl $name {
            pub const EMPTY: Self = Self(0);

            pub fn full(n: usize) -> Self {
                Self(full_mask(n))
            }

            pub fn singleton(i: usize) -> Self {
                debug_assert!(i < MAX_DIM);
                Self(1u64 << i)
            }

            pub fn from_bits(bits: u64) -> Self {
                Self(bits)
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
                let mut s = Self::EMPTY;
                for i in indices {
                    s.insert(i);
                }
                s
            }

            pub fn bits(self) -> u64 {
                self.0
            }

            pub fn contains(self, i: usize) -> bool {
                i < MAX_DIM && self.0 & (1u64 << i) != 0
            }

            pub fn insert(&mut self, i: usize) {
                debug_assert!(i < MAX_DIM);
                self.0 |= 1u64 << i;
            }

            pub fn remove(&mut self, i: usize) {
                self.0 &= !(1u64 << i);
            }

            pub fn union(self, other: Self) -> Self {
                Self(self.0 | other.0)
            }

            pub fn intersect(self, other: Self) -> Self {
                Self(self.0 & other.0)
            }

            pub fn minus(self, other: Self) -> Self {
                Self(self.0 & !other.0)
            }

            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn iter(self) -> impl Iterator<Item = usize> {
                let mut bits = self.0;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some(i)
                    }
                })
            }

            /// True iff every set bit is below `n`.
            pub fn within(self, n: usize) -> bool {
                self.0 & !full_mask(n) == 0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{{", stringify!($name))?;
                let mut first = true;
                for i in self.iter() {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                    first = false;
                }
                write!(f, "}}")
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                Self::from_indices(iter)
            }
        }
    };
}

index_set!(
    /// A subset of the objects of a context, as a bitmask over object indices.
    ObjectSet
);
index_set!(
    /// A subset of the features of a context, as a bitmask over feature indices.
    FeatureSet
);
