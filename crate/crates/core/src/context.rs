//! Formal contexts, Galois derivation operators, stable sets, and
//! concept-lattice enumeration.
//!
//! A formal context is a triple `(A, X, I)` of objects, features, and an
//! incidence relation. The derivation operators `up` and `down` form a Galois
//! connection between subsets of `A` and subsets of `X`; their stable sets
//! pair up into formal concepts, the maximal rectangles of `I`.

use crate::bitset::{full_mask, FeatureSet, ObjectSet, MAX_DIM};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Default cap on `|A|` and `|X|` for [`FormalContext::all_concepts`].
///
/// The worst case produces `2^min(|A|,|X|)` concepts; the cap keeps
/// enumeration interactive. Override with
/// [`FormalContext::all_concepts_with_bound`] or, in the CLI, the
/// `EPICAT_MAX_CONCEPTS` environment variable.
pub const DEFAULT_ENUM_BOUND: usize = 24;

/// Above this many elements on the smaller side, concept enumeration switches
/// from powerset scanning to closure-based (NextClosure-style) enumeration.
const POWERSET_CUTOFF: usize = 15;

/// A binary relation between objects and features, stored as one feature
/// bitmask per object.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n_objects: usize,
    n_features: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(n_objects: usize, n_features: usize) -> Self {
        assert!(n_objects <= MAX_DIM && n_features <= MAX_DIM);
        Relation {
            n_objects,
            n_features,
            rows: vec![0; n_objects],
        }
    }

    pub fn full(n_objects: usize, n_features: usize) -> Self {
        assert!(n_objects <= MAX_DIM && n_features <= MAX_DIM);
        Relation {
            n_objects,
            n_features,
            rows: vec![full_mask(n_features); n_objects],
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(
        n_objects: usize,
        n_features: usize,
        pairs: I,
    ) -> Result<Self> {
        let mut rel = Relation::empty(n_objects, n_features);
        for (a, x) in pairs {
            if a >= n_objects {
                return Err(Error::IndexOutOfRange {
                    kind: "object",
                    index: a,
                    len: n_objects,
                });
            }
            if x >= n_features {
                return Err(Error::IndexOutOfRange {
                    kind: "feature",
                    index: x,
                    len: n_features,
                });
            }
            rel.rows[a] |= 1u64 << x;
        }
        Ok(rel)
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn contains(&self, a: usize, x: usize) -> bool {
        a < self.n_objects && x < self.n_features && self.rows[a] & (1u64 << x) != 0
    }

    pub fn set(&mut self, a: usize, x: usize, value: bool) {
        assert!(a < self.n_objects && x < self.n_features);
        if value {
            self.rows[a] |= 1u64 << x;
        } else {
            self.rows[a] &= !(1u64 << x);
        }
    }

    /// The feature set related to object `a` (the row `R^↑[a]` of singleton `a`).
    pub fn row(&self, a: usize) -> FeatureSet {
        FeatureSet::from_bits(self.rows[a])
    }

    /// The object set related to feature `x` (the column `R^↓[x]` of singleton `x`).
    pub fn column(&self, x: usize) -> ObjectSet {
        let bit = 1u64 << x;
        let mut col = 0u64;
        for (a, row) in self.rows.iter().enumerate() {
            if row & bit != 0 {
                col |= 1u64 << a;
            }
        }
        ObjectSet::from_bits(col)
    }

    pub fn set_row(&mut self, a: usize, row: FeatureSet) {
        assert!(a < self.n_objects && row.within(self.n_features));
        self.rows[a] = row.bits();
    }

    pub fn set_column(&mut self, x: usize, col: ObjectSet) {
        assert!(x < self.n_features && col.within(self.n_objects));
        let bit = 1u64 << x;
        for a in 0..self.n_objects {
            if col.contains(a) {
                self.rows[a] |= bit;
            } else {
                self.rows[a] &= !bit;
            }
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_objects).flat_map(move |a| self.row(a).iter().map(move |x| (a, x)))
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        assert!(self.same_dims(other));
        Relation {
            n_objects: self.n_objects,
            n_features: self.n_features,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn is_subrelation(&self, other: &Relation) -> bool {
        self.same_dims(other) && self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    pub fn same_dims(&self, other: &Relation) -> bool {
        self.n_objects == other.n_objects && self.n_features == other.n_features
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }
}

impl std::fmt::Debug for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Relation {}x{}", self.n_objects, self.n_features)?;
        for a in 0..self.n_objects {
            for x in 0..self.n_features {
                write!(f, "{}", if self.contains(a, x) { 'X' } else { '.' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A formal concept: a pair `(extent, intent)` forming a maximal rectangle of
/// the incidence relation. Constructed only through context operations, so
/// the invariant `extent = down(intent)` and `intent = up(extent)` always
/// holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalConcept {
    extent: ObjectSet,
    intent: FeatureSet,
}

impl FormalConcept {
    pub fn extent(&self) -> ObjectSet {
        self.extent
    }

    pub fn intent(&self) -> FeatureSet {
        self.intent
    }
}

/// A formal context `(A, X, I)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    features: Vec<String>,
    object_index: BTreeMap<String, usize>,
    feature_index: BTreeMap<String, usize>,
    incidence: Relation,
}

impl FormalContext {
    pub fn new(objects: Vec<String>, features: Vec<String>, incidence: Relation) -> Result<Self> {
        if objects.len() > MAX_DIM || features.len() > MAX_DIM {
            return Err(Error::DimensionLimit {
                objects: objects.len(),
                features: features.len(),
            });
        }
        if incidence.n_objects != objects.len() || incidence.n_features != features.len() {
            return Err(Error::DimensionMismatch {
                got_objects: incidence.n_objects,
                got_features: incidence.n_features,
                want_objects: objects.len(),
                want_features: features.len(),
            });
        }
        let mut object_index = BTreeMap::new();
        for (i, name) in objects.iter().enumerate() {
            if object_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName {
                    kind: "object",
                    name: name.clone(),
                });
            }
        }
        let mut feature_index = BTreeMap::new();
        for (i, name) in features.iter().enumerate() {
            if feature_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName {
                    kind: "feature",
                    name: name.clone(),
                });
            }
        }
        Ok(FormalContext {
            objects,
            features,
            object_index,
            feature_index,
            incidence,
        })
    }

    pub fn from_named_pairs(
        objects: Vec<String>,
        features: Vec<String>,
        pairs: &[(String, String)],
    ) -> Result<Self> {
        let empty = Relation::empty(objects.len(), features.len());
        let mut ctx = FormalContext::new(objects, features, empty)?;
        for (obj, feat) in pairs {
            let a = ctx.object_id(obj)?;
            let x = ctx.feature_id(feat)?;
            ctx.incidence.set(a, x, true);
        }
        Ok(ctx)
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn incidence(&self) -> &Relation {
        &self.incidence
    }

    pub fn object_id(&self, name: &str) -> Result<usize> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownName {
                kind: "object",
                name: name.to_string(),
            })
    }

    pub fn feature_id(&self, name: &str) -> Result<usize> {
        self.feature_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownName {
                kind: "feature",
                name: name.to_string(),
            })
    }

    pub fn object_names(&self, set: ObjectSet) -> Vec<String> {
        set.iter().map(|i| self.objects[i].clone()).collect()
    }

    pub fn feature_names(&self, set: FeatureSet) -> Vec<String> {
        set.iter().map(|i| self.features[i].clone()).collect()
    }

    pub fn all_objects(&self) -> ObjectSet {
        ObjectSet::full(self.n_objects())
    }

    pub fn all_features(&self) -> FeatureSet {
        FeatureSet::full(self.n_features())
    }

    fn check_dims(&self, rel: &Relation) -> Result<()> {
        if rel.n_objects != self.n_objects() || rel.n_features != self.n_features() {
            return Err(Error::DimensionMismatch {
                got_objects: rel.n_objects,
                got_features: rel.n_features,
                want_objects: self.n_objects(),
                want_features: self.n_features(),
            });
        }
        Ok(())
    }

    /// `S^↑[B]`: the features every object of `B` has under `rel`.
    pub fn up_via(&self, rel: &Relation, set: ObjectSet) -> Result<FeatureSet> {
        self.check_dims(rel)?;
        Ok(up_in(rel, set))
    }

    /// `S^↓[Y]`: the objects that have every feature of `Y` under `rel`.
    pub fn down_via(&self, rel: &Relation, set: FeatureSet) -> Result<ObjectSet> {
        self.check_dims(rel)?;
        Ok(down_in(rel, set))
    }

    /// `B^↑` under the incidence relation.
    pub fn up(&self, set: ObjectSet) -> FeatureSet {
        up_in(&self.incidence, set)
    }

    /// `Y^↓` under the incidence relation.
    pub fn down(&self, set: FeatureSet) -> ObjectSet {
        down_in(&self.incidence, set)
    }

    /// `B^↑↓`.
    pub fn extent_closure(&self, set: ObjectSet) -> ObjectSet {
        self.down(self.up(set))
    }

    /// `Y^↓↑`.
    pub fn intent_closure(&self, set: FeatureSet) -> FeatureSet {
        self.up(self.down(set))
    }

    pub fn is_stable_extent(&self, set: ObjectSet) -> bool {
        self.extent_closure(set) == set
    }

    pub fn is_stable_intent(&self, set: FeatureSet) -> bool {
        self.intent_closure(set) == set
    }

    /// The concept generated by a set of objects: `(B^↑↓, B^↑)`.
    pub fn concept_of_objects(&self, set: ObjectSet) -> FormalConcept {
        let intent = self.up(set);
        FormalConcept {
            extent: self.down(intent),
            intent,
        }
    }

    /// The concept generated by a set of features: `(Y^↓, Y^↓↑)`.
    pub fn concept_of_features(&self, set: FeatureSet) -> FormalConcept {
        let extent = self.down(set);
        FormalConcept {
            extent,
            intent: self.up(extent),
        }
    }

    /// The widest concept `(A, A^↑)`.
    pub fn top_concept(&self) -> FormalConcept {
        self.concept_of_objects(self.all_objects())
    }

    /// The narrowest concept `(X^↓, X)`.
    pub fn bottom_concept(&self) -> FormalConcept {
        self.concept_of_features(self.all_features())
    }

    pub fn is_concept(&self, extent: ObjectSet, intent: FeatureSet) -> bool {
        extent.within(self.n_objects())
            && intent.within(self.n_features())
            && self.up(extent) == intent
            && self.down(intent) == extent
    }

    /// Greatest common subconcept: `(B1 ∩ B2, (B1 ∩ B2)^↑)`.
    pub fn concept_meet(&self, c1: &FormalConcept, c2: &FormalConcept) -> Result<FormalConcept> {
        self.require_concept(c1)?;
        self.require_concept(c2)?;
        let extent = c1.extent.intersect(c2.extent);
        Ok(FormalConcept {
            extent,
            intent: self.up(extent),
        })
    }

    /// Least common superconcept: `((Y1 ∩ Y2)^↓, Y1 ∩ Y2)`.
    pub fn concept_join(&self, c1: &FormalConcept, c2: &FormalConcept) -> Result<FormalConcept> {
        self.require_concept(c1)?;
        self.require_concept(c2)?;
        let intent = c1.intent.intersect(c2.intent);
        Ok(FormalConcept {
            extent: self.down(intent),
            intent,
        })
    }

    fn require_concept(&self, c: &FormalConcept) -> Result<()> {
        if self.is_concept(c.extent, c.intent) {
            Ok(())
        } else {
            Err(Error::NotAConcept)
        }
    }

    /// All formal concepts, sorted by ascending numeric value of the extent
    /// bitmask (a linear extension of the subconcept order).
    pub fn all_concepts(&self) -> Result<Vec<FormalConcept>> {
        self.all_concepts_with_bound(DEFAULT_ENUM_BOUND)
    }

    pub fn all_concepts_with_bound(&self, bound: usize) -> Result<Vec<FormalConcept>> {
        if self.n_objects() > bound || self.n_features() > bound {
            return Err(Error::EnumerationLimit {
                objects: self.n_objects(),
                features: self.n_features(),
                bound,
            });
        }
        let mut concepts = if self.n_objects().min(self.n_features()) <= POWERSET_CUTOFF {
            self.concepts_by_powerset()
        } else {
            self.concepts_by_closure()
        };
        concepts.sort_by_key(|c| c.extent.bits());
        Ok(concepts)
    }

    /// Scan the powerset of the smaller side, keeping the stable sets.
    fn concepts_by_powerset(&self) -> Vec<FormalConcept> {
        let mut out = Vec::new();
        if self.n_objects() <= self.n_features() {
            for bits in 0..(1u64 << self.n_objects()) {
                let extent = ObjectSet::from_bits(bits);
                if self.is_stable_extent(extent) {
                    out.push(FormalConcept {
                        extent,
                        intent: self.up(extent),
                    });
                }
            }
        } else {
            for bits in 0..(1u64 << self.n_features()) {
                let intent = FeatureSet::from_bits(bits);
                if self.is_stable_intent(intent) {
                    out.push(FormalConcept {
                        extent: self.down(intent),
                        intent,
                    });
                }
            }
        }
        out
    }

    /// NextClosure over the smaller side: walks the stable sets in lectic
    /// order, touching only closures, so the cost is proportional to the
    /// number of concepts rather than the powerset.
    fn concepts_by_closure(&self) -> Vec<FormalConcept> {
        let mut out = Vec::new();
        if self.n_objects() <= self.n_features() {
            let n = self.n_objects();
            let cl = |b: u64| self.extent_closure(ObjectSet::from_bits(b)).bits();
            for bits in next_closure_iter(n, cl) {
                let extent = ObjectSet::from_bits(bits);
                out.push(FormalConcept {
                    extent,
                    intent: self.up(extent),
                });
            }
        } else {
            let n = self.n_features();
            let cl = |b: u64| self.intent_closure(FeatureSet::from_bits(b)).bits();
            for bits in next_closure_iter(n, cl) {
                let intent = FeatureSet::from_bits(bits);
                out.push(FormalConcept {
                    extent: self.down(intent),
                    intent,
                });
            }
        }
        out
    }

    /// Cover edges of the concept lattice: `(i, j)` means concept `i` is a
    /// lower cover of concept `j` in the given slice (subconcept order by
    /// extent inclusion, transitively reduced).
    pub fn concept_covers(&self, concepts: &[FormalConcept]) -> Vec<(usize, usize)> {
        let mut covers = Vec::new();
        for (i, ci) in concepts.iter().enumerate() {
            for (j, cj) in concepts.iter().enumerate() {
                if i == j || !ci.extent.is_subset(cj.extent) || ci.extent == cj.extent {
                    continue;
                }
                let between = concepts.iter().enumerate().any(|(k, ck)| {
                    k != i
                        && k != j
                        && ci.extent.is_subset(ck.extent)
                        && ck.extent.is_subset(cj.extent)
                        && ck.extent != ci.extent
                        && ck.extent != cj.extent
                });
                if !between {
                    covers.push((i, j));
                }
            }
        }
        covers
    }
}

fn up_in(rel: &Relation, set: ObjectSet) -> FeatureSet {
    let mut acc = full_mask(rel.n_features);
    for a in set.iter() {
        acc &= rel.rows[a];
    }
    FeatureSet::from_bits(acc)
}

fn down_in(rel: &Relation, set: FeatureSet) -> ObjectSet {
    let want = set.bits();
    let mut out = 0u64;
    for (a, row) in rel.rows.iter().enumerate() {
        if row & want == want {
            out |= 1u64 << a;
        }
    }
    ObjectSet::from_bits(out)
}

/// Enumerates all closed sets of the closure operator `cl` over `0..n` in
/// lectic order, starting from `cl(∅)`.
fn next_closure_iter(n: usize, cl: impl Fn(u64) -> u64) -> impl Iterator<Item = u64> {
    let mut current = Some(cl(0));
    std::iter::from_fn(move || {
        let result = current?;
        let mut b = result;
        let mut next = None;
        for i in (0..n).rev() {
            let bit = 1u64 << i;
            if b & bit != 0 {
                b &= !bit;
            } else {
                let d = cl(b | bit);
                if (d & !b) & (bit - 1) == 0 {
                    next = Some(d);
                    break;
                }
            }
        }
        current = next;
        Some(result)
    })
}
