//! Agent relations over a formal context: I-compatibility, the least
//! compatible closure, I-products, sequence relations, and the
//! common-knowledge relation.
//!
//! A relation `R ⊆ A×X` is I-compatible when every column preimage `R^↓[x]`
//! is a stable extent and every row image `R^↑[a]` is a stable intent. The
//! box semantics returns formal concepts exactly on compatible relations, so
//! compatibility is the entry ticket for everything in this module.

use crate::bitset::{FeatureSet, ObjectSet};
use crate::context::{FormalContext, Relation};
use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// A named agent's subjective relation, same dimensions as the owning
/// context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentRelation {
    pub agent: String,
    pub matrix: Relation,
}

/// A nonempty sequence of agent names, the index of a composite box.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentSequence(Vec<String>);

impl AgentSequence {
    pub fn new(agents: Vec<String>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(AgentSequence(agents))
    }

    pub fn agents(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// True iff every column of `rel` is a stable extent and every row a stable
/// intent of `ctx`.
pub fn is_compatible(ctx: &FormalContext, rel: &Relation) -> Result<bool> {
    check_dims(ctx, rel)?;
    for x in 0..ctx.n_features() {
        if !ctx.is_stable_extent(rel.column(x)) {
            return Ok(false);
        }
    }
    for a in 0..ctx.n_objects() {
        if !ctx.is_stable_intent(rel.row(a)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The least I-compatible relation containing `rel`: repeatedly replace each
/// column by its extent closure and each row by its intent closure until
/// nothing changes. Terminates because every step only adds pairs and `A×X`
/// is an upper bound.
pub fn compatibility_closure(ctx: &FormalContext, rel: &Relation) -> Result<Relation> {
    check_dims(ctx, rel)?;
    let mut current = rel.clone();
    loop {
        let mut changed = false;
        for x in 0..ctx.n_features() {
            let col = current.column(x);
            let closed = ctx.extent_closure(col);
            if closed != col {
                current.set_column(x, closed);
                changed = true;
            }
        }
        for a in 0..ctx.n_objects() {
            let row = current.row(a);
            let closed = ctx.intent_closure(row);
            if closed != row {
                current.set_row(a, closed);
                changed = true;
            }
        }
        if !changed {
            return Ok(current);
        }
    }
}

/// `R^↓[Y]` computed as the intersection of the column preimages
/// `⋂_{y∈Y} R^↓[y]`. For compatible `R` this is a stable extent whenever `Y`
/// is a stable intent, and agrees with `R^↓[Y^↓↑]` for arbitrary `Y`.
pub fn box_preimage(ctx: &FormalContext, rel: &Relation, set: FeatureSet) -> Result<ObjectSet> {
    check_dims(ctx, rel)?;
    let mut acc = ctx.all_objects();
    for y in set.iter() {
        acc = acc.intersect(rel.column(y));
    }
    Ok(acc)
}

/// The I-product `R_{st}`: column `x` is `R_s^↓[I^↑[R_t^↓[x^↓↑]]]`.
/// Rejects incompatible inputs; the product of compatible relations is
/// itself compatible.
pub fn i_product(ctx: &FormalContext, rs: &Relation, rt: &Relation) -> Result<Relation> {
    if !is_compatible(ctx, rs)? {
        return Err(Error::IncompatibleRelation {
            agent: "<left operand>".into(),
        });
    }
    if !is_compatible(ctx, rt)? {
        return Err(Error::IncompatibleRelation {
            agent: "<right operand>".into(),
        });
    }
    Ok(i_product_unchecked(ctx, rs, rt))
}

pub(crate) fn i_product_unchecked(ctx: &FormalContext, rs: &Relation, rt: &Relation) -> Relation {
    let mut out = Relation::empty(ctx.n_objects(), ctx.n_features());
    for x in 0..ctx.n_features() {
        let x_closed = ctx.intent_closure(FeatureSet::singleton(x));
        let z = ctx.down_via(rt, x_closed).expect("dims checked");
        let w = ctx.up(z);
        let col = ctx.down_via(rs, w).expect("dims checked");
        out.set_column(x, col);
    }
    out
}

/// `R_s` for a sequence `s = i_1⋯i_n`: the right fold of the I-product over
/// the per-agent relations; a singleton sequence is the agent's relation
/// unchanged.
pub fn sequence_relation(
    ctx: &FormalContext,
    rels: &[AgentRelation],
    seq: &AgentSequence,
) -> Result<Relation> {
    let mut acc: Option<Relation> = None;
    for name in seq.agents().iter().rev() {
        let rel = lookup(rels, name)?;
        acc = Some(match acc {
            None => rel.matrix.clone(),
            Some(tail) => i_product_unchecked(ctx, &rel.matrix, &tail),
        });
    }
    Ok(acc.expect("sequence is nonempty"))
}

/// The common-knowledge relation along with the worklist bookkeeping needed
/// to reason about approximants.
#[derive(Clone, Debug)]
pub struct CommonKnowledge {
    /// `R_C = ⋂_{s∈S} R_s` over all finite nonempty agent sequences.
    pub relation: Relation,
    /// `layers[k]` is the set of distinct relations `R_s` with `|s| = k+1`.
    pub layers: Vec<BTreeSet<Relation>>,
    /// First sequence length at which no new relation appears; every `R_s`
    /// equals some relation reachable within this depth.
    pub depth: usize,
}

/// Computes `R_C` by a worklist over distinct reachable relations: seed with
/// the agent relations, close under prefixing by each agent via the
/// I-product, stop when a whole layer adds nothing new, and intersect
/// everything seen.
pub fn common_relation(ctx: &FormalContext, rels: &[AgentRelation]) -> Result<CommonKnowledge> {
    if rels.is_empty() {
        return Err(Error::NoAgents);
    }
    for r in rels {
        if !is_compatible(ctx, &r.matrix)? {
            return Err(Error::IncompatibleRelation {
                agent: r.agent.clone(),
            });
        }
    }
    let mut seen: BTreeSet<Relation> = BTreeSet::new();
    let mut layers: Vec<BTreeSet<Relation>> = Vec::new();
    let mut frontier: BTreeSet<Relation> =
        rels.iter().map(|r| r.matrix.clone()).collect();
    seen.extend(frontier.iter().cloned());
    layers.push(frontier.clone());
    loop {
        let mut next: BTreeSet<Relation> = BTreeSet::new();
        for tail in &frontier {
            for r in rels {
                next.insert(i_product_unchecked(ctx, &r.matrix, tail));
            }
        }
        let fresh: BTreeSet<Relation> =
            next.iter().filter(|r| !seen.contains(*r)).cloned().collect();
        if fresh.is_empty() {
            break;
        }
        seen.extend(fresh.iter().cloned());
        layers.push(next.clone());
        frontier = next;
    }
    let depth = layers.len();
    let mut relation = Relation::full(ctx.n_objects(), ctx.n_features());
    for r in &seen {
        relation = relation.intersection(r);
    }
    Ok(CommonKnowledge {
        relation,
        layers,
        depth,
    })
}

fn lookup<'a>(rels: &'a [AgentRelation], name: &str) -> Result<&'a AgentRelation> {
    rels.iter()
        .find(|r| r.agent == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "agent",
            name: name.to_string(),
        })
}

fn check_dims(ctx: &FormalContext, rel: &Relation) -> Result<()> {
    if rel.n_objects() != ctx.n_objects() || rel.n_features() != ctx.n_features() {
        return Err(Error::DimensionMismatch {
            got_objects: rel.n_objects(),
            got_features: rel.n_features(),
            want_objects: ctx.n_objects(),
            want_features: ctx.n_features(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> FormalContext {
        FormalContext::from_named_pairs(
            vec!["a1".into(), "a2".into()],
            vec!["x1".into(), "x2".into()],
            &[
                ("a1".into(), "x1".into()),
                ("a1".into(), "x2".into()),
                ("a2".into(), "x2".into()),
            ],
        )
        .unwrap()
    }

    fn named(agent: &str, matrix: Relation) -> AgentRelation {
        AgentRelation {
            agent: agent.into(),
            matrix,
        }
    }

    #[test]
    fn incidence_is_compatible() {
        let ctx = k2();
        assert!(is_compatible(&ctx, ctx.incidence()).unwrap());
        let full = Relation::full(2, 2);
        assert!(is_compatible(&ctx, &full).unwrap());
    }

    #[test]
    fn single_pair_not_compatible_on_k2() {
        let ctx = k2();
        let rel = Relation::from_pairs(2, 2, [(1, 1)]).unwrap();
        assert!(!is_compatible(&ctx, &rel).unwrap());
    }

    #[test]
    fn closure_repairs_to_incidence() {
        let ctx = k2();
        let rel = Relation::from_pairs(2, 2, [(1, 1)]).unwrap();
        let closed = compatibility_closure(&ctx, &rel).unwrap();
        assert_eq!(&closed, ctx.incidence());
        // already-compatible relations are fixpoints
        assert_eq!(
            &compatibility_closure(&ctx, ctx.incidence()).unwrap(),
            ctx.incidence()
        );
        let full = Relation::full(2, 2);
        assert_eq!(compatibility_closure(&ctx, &full).unwrap(), full);
    }

    /// Least-closure oracle: intersect every compatible superset. Compatible
    /// relations are closed under intersection, so this is the least one.
    fn least_compatible_superset(ctx: &FormalContext, rel: &Relation) -> Relation {
        let n = ctx.n_objects() * ctx.n_features();
        let mut acc = Relation::full(ctx.n_objects(), ctx.n_features());
        for bits in 0..(1u64 << n) {
            let mut cand = Relation::empty(ctx.n_objects(), ctx.n_features());
            for i in 0..n {
                if bits & (1 << i) != 0 {
                    cand.set(i / ctx.n_features(), i % ctx.n_features(), true);
                }
            }
            if rel.is_subrelation(&cand) && is_compatible(ctx, &cand).unwrap() {
                acc = acc.intersection(&cand);
            }
        }
        acc
    }

    #[test]
    fn closure_is_least_on_k2() {
        let ctx = k2();
        for bits in 0..16u64 {
            let rel = Relation::from_pairs(
                2,
                2,
                (0..4).filter(|i| bits & (1 << i) != 0).map(|i| (i / 2, i % 2)),
            )
            .unwrap();
            let closed = compatibility_closure(&ctx, &rel).unwrap();
            assert!(is_compatible(&ctx, &closed).unwrap());
            assert_eq!(closed, least_compatible_superset(&ctx, &rel), "bits {bits}");
        }
    }

    #[test]
    fn box_preimage_matches_down() {
        let ctx = k2();
        for bits in 0..4u64 {
            let y = FeatureSet::from_bits(bits);
            assert_eq!(
                box_preimage(&ctx, ctx.incidence(), y).unwrap(),
                ctx.down(y)
            );
        }
        // empty intersection convention
        let full = Relation::full(2, 2);
        assert_eq!(
            box_preimage(&ctx, &full, FeatureSet::EMPTY).unwrap(),
            ctx.all_objects()
        );
        assert_eq!(
            box_preimage(&ctx, &full, FeatureSet::from_bits(0b11)).unwrap(),
            ctx.all_objects()
        );
    }

    #[test]
    fn i_product_identity_collapse() {
        let ctx = k2();
        let i = ctx.incidence();
        assert_eq!(&i_product(&ctx, i, i).unwrap(), i);
        let full = Relation::full(2, 2);
        assert_eq!(i_product(&ctx, i, &full).unwrap(), full);
        assert!(is_compatible(&ctx, &i_product(&ctx, &full, &full).unwrap()).unwrap());
    }

    #[test]
    fn i_product_rejects_incompatible() {
        let ctx = k2();
        let bad = Relation::from_pairs(2, 2, [(1, 1)]).unwrap();
        assert!(matches!(
            i_product(&ctx, &bad, ctx.incidence()),
            Err(Error::IncompatibleRelation { .. })
        ));
    }

    #[test]
    fn sequence_base_and_fold() {
        let ctx = k2();
        let rels = vec![named("1", ctx.incidence().clone())];
        let s1 = AgentSequence::new(vec!["1".into()]).unwrap();
        assert_eq!(
            &sequence_relation(&ctx, &rels, &s1).unwrap(),
            ctx.incidence()
        );
        let s11 = AgentSequence::new(vec!["1".into(), "1".into()]).unwrap();
        assert_eq!(
            &sequence_relation(&ctx, &rels, &s11).unwrap(),
            ctx.incidence()
        );
        let unknown = AgentSequence::new(vec!["9".into()]).unwrap();
        assert!(sequence_relation(&ctx, &rels, &unknown).is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(matches!(
            AgentSequence::new(Vec::new()),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn common_relation_single_agent_identity() {
        let ctx = k2();
        let rels = vec![named("1", ctx.incidence().clone())];
        let ck = common_relation(&ctx, &rels).unwrap();
        assert_eq!(&ck.relation, ctx.incidence());
        assert_eq!(ck.depth, 1);
    }

    #[test]
    fn common_relation_two_full_agents() {
        let ctx = k2();
        let full = Relation::full(2, 2);
        let rels = vec![named("1", full.clone()), named("2", full.clone())];
        let ck = common_relation(&ctx, &rels).unwrap();
        assert_eq!(ck.relation, full);
    }

    #[test]
    fn common_relation_mixed_agents_on_k2() {
        let ctx = k2();
        let rels = vec![
            named("1", ctx.incidence().clone()),
            named("2", Relation::full(2, 2)),
        ];
        let ck = common_relation(&ctx, &rels).unwrap();
        assert_eq!(&ck.relation, ctx.incidence());
        // brute-force intersection over all sequences up to the recorded depth
        let mut brute = Relation::full(2, 2);
        let mut seqs: Vec<Vec<String>> = vec![vec!["1".into()], vec!["2".into()]];
        for _ in 1..ck.depth + 1 {
            let mut next = Vec::new();
            for s in &seqs {
                let seq = AgentSequence::new(s.clone()).unwrap();
                brute = brute.intersection(&sequence_relation(&ctx, &rels, &seq).unwrap());
                for agent in ["1", "2"] {
                    let mut longer = vec![agent.to_string()];
                    longer.extend(s.iter().cloned());
                    next.push(longer);
                }
            }
            seqs = next;
        }
        assert_eq!(brute, ck.relation);
    }

    #[test]
    fn common_relation_requires_agents() {
        let ctx = k2();
        assert!(matches!(common_relation(&ctx, &[]), Err(Error::NoAgents)));
    }
}
