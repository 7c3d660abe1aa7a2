//! Models over enriched formal contexts and compositional evaluation of
//! formulas to formal concepts.
//!
//! Every connective evaluates to a formal concept of the base context: meets
//! intersect extents, joins intersect intents, and each box takes the
//! preimage of the operand's intent under the agent's relation. Sequents are
//! extent inclusion.

use crate::bitset::{FeatureSet, ObjectSet};
use crate::context::{FormalConcept, FormalContext, Relation};
use crate::error::{Error, Result};
use crate::relations::{
    box_preimage, common_relation, compatibility_closure, is_compatible, sequence_relation,
    AgentRelation, AgentSequence, CommonKnowledge,
};
use crate::syntax::Formula;
use crate::Sequent;
use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

/// What to do with input that fails a stability or compatibility check:
/// an agent relation that is not I-compatible, or an atom extent that is
/// not Galois-stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Reject. This is the default: silent repair would change the
    /// semantics invisibly.
    #[default]
    Strict,
    /// Close the offending input (compatibility closure for relations, the
    /// generated concept for atom extents) and record a warning.
    Repair,
}

/// A formal context together with one I-compatible relation per agent.
#[derive(Clone, Debug)]
pub struct EnrichedContext {
    base: FormalContext,
    relations: Vec<AgentRelation>,
}

impl EnrichedContext {
    /// Builds a compositional frame. Returns the frame plus the names of any
    /// agents whose relations were repaired (always empty under
    /// [`RelationPolicy::Strict`]).
    pub fn new(
        base: FormalContext,
        relations: Vec<AgentRelation>,
        policy: Strictness,
    ) -> Result<(Self, Vec<String>)> {
        let mut seen = BTreeMap::new();
        for r in &relations {
            if seen.insert(r.agent.clone(), ()).is_some() {
                return Err(Error::DuplicateName {
                    kind: "agent",
                    name: r.agent.clone(),
                });
            }
        }
        let mut repaired = Vec::new();
        let mut fixed = Vec::with_capacity(relations.len());
        for r in relations {
            if is_compatible(&base, &r.matrix)? {
                fixed.push(r);
            } else {
                match policy {
                    Strictness::Strict => {
                        return Err(Error::IncompatibleRelation { agent: r.agent });
                    }
                    Strictness::Repair => {
                        let matrix = compatibility_closure(&base, &r.matrix)?;
                        repaired.push(r.agent.clone());
                        fixed.push(AgentRelation {
                            agent: r.agent,
                            matrix,
                        });
                    }
                }
            }
        }
        Ok((
            EnrichedContext {
                base,
                relations: fixed,
            },
            repaired,
        ))
    }

    pub fn base(&self) -> &FormalContext {
        &self.base
    }

    pub fn relations(&self) -> &[AgentRelation] {
        &self.relations
    }

    pub fn agent_names(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.agent.clone()).collect()
    }

    pub fn relation(&self, agent: &str) -> Result<&AgentRelation> {
        self.relations
            .iter()
            .find(|r| r.agent == agent)
            .ok_or_else(|| Error::UnknownName {
                kind: "agent",
                name: agent.to_string(),
            })
    }
}

/// Maps atoms to concepts, nominals to objects, conominals to features.
#[derive(Clone, Debug, Default)]
pub struct Valuation {
    pub atoms: BTreeMap<String, FormalConcept>,
    pub nominals: BTreeMap<String, usize>,
    pub conominals: BTreeMap<String, usize>,
}

impl Valuation {
    pub fn empty() -> Self {
        Valuation::default()
    }
}

/// Turns a raw atom extent into its concept. A non-stable extent is an
/// error under [`Strictness::Strict`], with the closed extent quoted as the
/// suggestion; under [`Strictness::Repair`] the generated concept is used.
pub fn atom_concept_from_extent(
    ctx: &FormalContext,
    atom: &str,
    extent: ObjectSet,
    policy: Strictness,
) -> Result<FormalConcept> {
    if !ctx.is_stable_extent(extent) && policy == Strictness::Strict {
        return Err(Error::UnstableAtomExtent {
            atom: atom.to_string(),
            given: ctx.object_names(extent),
            closure: ctx.object_names(ctx.extent_closure(extent)),
        });
    }
    Ok(ctx.concept_of_objects(extent))
}

/// A frame plus a valuation; the unit formulas are evaluated against.
#[derive(Debug)]
pub struct Model {
    frame: EnrichedContext,
    valuation: Valuation,
    enum_bound: usize,
    common: OnceLock<CommonKnowledge>,
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Model {
            frame: self.frame.clone(),
            valuation: self.valuation.clone(),
            enum_bound: self.enum_bound,
            common: OnceLock::new(),
        }
    }
}

impl Model {
    pub fn new(frame: EnrichedContext, valuation: Valuation) -> Result<Self> {
        let ctx = &frame.base;
        for (name, concept) in &valuation.atoms {
            if !ctx.is_concept(concept.extent(), concept.intent()) {
                return Err(Error::UnstableAtomExtent {
                    atom: name.clone(),
                    given: ctx.object_names(concept.extent()),
                    closure: ctx.object_names(ctx.extent_closure(concept.extent())),
                });
            }
        }
        for r in frame.relations() {
            if !is_compatible(ctx, &r.matrix)? {
                return Err(Error::IncompatibleRelation {
                    agent: r.agent.clone(),
                });
            }
        }
        for (name, &target) in &valuation.nominals {
            if target >= ctx.n_objects() {
                return Err(Error::UnknownName {
                    kind: "nominal target",
                    name: name.clone(),
                });
            }
        }
        for (name, &target) in &valuation.conominals {
            if target >= ctx.n_features() {
                return Err(Error::UnknownName {
                    kind: "conominal target",
                    name: name.clone(),
                });
            }
        }
        Ok(Model {
            frame,
            valuation,
            enum_bound: crate::context::DEFAULT_ENUM_BOUND,
            common: OnceLock::new(),
        })
    }

    pub fn with_enum_bound(mut self, bound: usize) -> Self {
        self.enum_bound = bound;
        self
    }

    pub fn frame(&self) -> &EnrichedContext {
        &self.frame
    }

    pub fn context(&self) -> &FormalContext {
        &self.frame.base
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn enum_bound(&self) -> usize {
        self.enum_bound
    }

    /// The common-knowledge worklist result, computed once per model.
    pub fn common_knowledge(&self) -> Result<&CommonKnowledge> {
        if self.frame.relations.is_empty() {
            return Err(Error::NoAgents);
        }
        if self.common.get().is_none() {
            let ck = common_relation(&self.frame.base, &self.frame.relations)?;
            let _ = self.common.set(ck);
        }
        Ok(self.common.get().expect("just initialized"))
    }

    /// Evaluates a formula to the formal concept it denotes.
    pub fn interpret(&self, f: &Formula) -> Result<FormalConcept> {
        let mut memo = HashMap::new();
        self.eval(f, &mut memo)
    }

    fn eval(&self, f: &Formula, memo: &mut HashMap<Formula, FormalConcept>) -> Result<FormalConcept> {
        if let Some(c) = memo.get(f) {
            return Ok(*c);
        }
        let ctx = &self.frame.base;
        let concept = match f {
            Formula::Top => ctx.top_concept(),
            Formula::Bot => ctx.bottom_concept(),
            Formula::Atom(p) => {
                *self
                    .valuation
                    .atoms
                    .get(p)
                    .ok_or_else(|| Error::UnknownName {
                        kind: "atom",
                        name: p.clone(),
                    })?
            }
            Formula::Nominal(n) => {
                let a = *self
                    .valuation
                    .nominals
                    .get(n)
                    .ok_or_else(|| Error::UnknownName {
                        kind: "nominal",
                        name: n.clone(),
                    })?;
                ctx.concept_of_objects(ObjectSet::singleton(a))
            }
            Formula::Conominal(n) => {
                let x = *self
                    .valuation
                    .conominals
                    .get(n)
                    .ok_or_else(|| Error::UnknownName {
                        kind: "conominal",
                        name: n.clone(),
                    })?;
                ctx.concept_of_features(FeatureSet::singleton(x))
            }
            Formula::And(l, r) => {
                let cl = self.eval(l, memo)?;
                let cr = self.eval(r, memo)?;
                let extent = cl.extent().intersect(cr.extent());
                concept_from_extent(ctx, extent)
            }
            Formula::Or(l, r) => {
                let cl = self.eval(l, memo)?;
                let cr = self.eval(r, memo)?;
                let intent = cl.intent().intersect(cr.intent());
                concept_from_intent(ctx, intent)
            }
            Formula::Box_(agent, sub) => {
                let inner = self.eval(sub, memo)?;
                let rel = self.frame.relation(agent)?;
                let extent = box_preimage(ctx, &rel.matrix, inner.intent())?;
                concept_from_extent(ctx, extent)
            }
            Formula::Common(sub) => {
                let inner = self.eval(sub, memo)?;
                let ck = self.common_knowledge()?;
                let extent = box_preimage(ctx, &ck.relation, inner.intent())?;
                concept_from_extent(ctx, extent)
            }
        };
        memo.insert(f.clone(), concept);
        Ok(concept)
    }

    /// `a ⊩ f`: is the named object a member of the category?
    pub fn member(&self, object: &str, f: &Formula) -> Result<bool> {
        let a = self.context().object_id(object)?;
        Ok(self.interpret(f)?.extent().contains(a))
    }

    /// `x ≻ f`: does the named feature describe the category?
    pub fn describes(&self, feature: &str, f: &Formula) -> Result<bool> {
        let x = self.context().feature_id(feature)?;
        Ok(self.interpret(f)?.intent().contains(x))
    }

    /// `M ⊨ lhs ⊢ rhs`: extent inclusion.
    pub fn check_sequent(&self, s: &Sequent) -> Result<bool> {
        let mut memo = HashMap::new();
        let lhs = self.eval(&s.lhs, &mut memo)?;
        let rhs = self.eval(&s.rhs, &mut memo)?;
        Ok(lhs.extent().is_subset(rhs.extent()))
    }

    /// The extent of `□_s f`, computed through the sequence relation
    /// `R_s^↓[⦅f⦆]`. Agrees with interpreting the syntactically nested boxes.
    pub fn box_sequence_extension(&self, seq: &AgentSequence, f: &Formula) -> Result<ObjectSet> {
        let inner = self.interpret(f)?;
        let rel = sequence_relation(&self.frame.base, &self.frame.relations, seq)?;
        box_preimage(&self.frame.base, &rel, inner.intent())
    }
}

fn concept_from_extent(ctx: &FormalContext, extent: ObjectSet) -> FormalConcept {
    ctx.concept_of_objects(extent)
}

fn concept_from_intent(ctx: &FormalContext, intent: FeatureSet) -> FormalConcept {
    ctx.concept_of_features(intent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Dialect, FormulaParser};

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

    /// K2 with agent 1 seeing the incidence relation and agent 2 seeing the
    /// full relation, and V(p) the concept generated by {a1}.
    fn k2_two_agent_model() -> Model {
        let ctx = k2();
        let p = ctx.concept_of_objects(ObjectSet::singleton(0));
        let (frame, repaired) = EnrichedContext::new(
            ctx.clone(),
            vec![
                AgentRelation {
                    agent: "1".into(),
                    matrix: ctx.incidence().clone(),
                },
                AgentRelation {
                    agent: "2".into(),
                    matrix: Relation::full(2, 2),
                },
            ],
            Strictness::Strict,
        )
        .unwrap();
        assert!(repaired.is_empty());
        let mut valuation = Valuation::empty();
        valuation.atoms.insert("p".into(), p);
        valuation.nominals.insert("a".into(), 0);
        valuation.conominals.insert("x".into(), 1);
        Model::new(frame, valuation).unwrap()
    }

    fn parse(text: &str) -> Formula {
        FormulaParser::new(Dialect::LCH).parse_formula(text).unwrap()
    }

    #[test]
    fn constants_on_k2() {
        let m = k2_two_agent_model();
        let top = m.interpret(&Formula::Top).unwrap();
        assert_eq!(top.extent(), m.context().all_objects());
        assert_eq!(top.intent(), FeatureSet::singleton(1));
        let bot = m.interpret(&Formula::Bot).unwrap();
        assert_eq!(bot.extent(), ObjectSet::singleton(0));
        assert_eq!(bot.intent(), m.context().all_features());
    }

    #[test]
    fn box_and_common_on_k2() {
        let m = k2_two_agent_model();
        let box1p = m.interpret(&parse("[1]p")).unwrap();
        assert_eq!(box1p.extent(), ObjectSet::singleton(0));
        assert_eq!(box1p.intent(), FeatureSet::from_bits(0b11));
        let cp = m.interpret(&parse("C(p)")).unwrap();
        assert_eq!(cp.extent(), ObjectSet::singleton(0));
        assert_eq!(cp.intent(), FeatureSet::from_bits(0b11));
    }

    #[test]
    fn membership_readoff() {
        let m = k2_two_agent_model();
        assert!(m.member("a1", &Formula::Top).unwrap());
        assert!(m.member("a2", &Formula::Top).unwrap());
        assert!(m.describes("x1", &Formula::Bot).unwrap());
        assert!(m.describes("x2", &Formula::Bot).unwrap());
        assert!(!m.member("a2", &parse("p")).unwrap());
        assert!(m.member("a1", &parse("p")).unwrap());
        assert!(m.member("zzz", &Formula::Top).is_err());
    }

    #[test]
    fn sequents_on_k2() {
        let m = k2_two_agent_model();
        let parser = FormulaParser::new(Dialect::LCH);
        for text in ["p |- top", "bot |- p", "bot |- C(p)", "C(p) |- [1]p"] {
            assert!(
                m.check_sequent(&parser.parse_sequent(text).unwrap()).unwrap(),
                "{text}"
            );
        }
        assert!(!m
            .check_sequent(&parser.parse_sequent("top |- p").unwrap())
            .unwrap());
    }

    #[test]
    fn box_meet_axiom_all_valuations() {
        // K2, R_1 = I: the box-meet axiom holds for every concept valuation
        // of p and q (exhaustive sweep over the 2-concept lattice).
        let ctx = k2();
        let concepts = ctx.all_concepts().unwrap();
        let (frame, _) = EnrichedContext::new(
            ctx.clone(),
            vec![AgentRelation {
                agent: "1".into(),
                matrix: ctx.incidence().clone(),
            }],
            Strictness::Strict,
        )
        .unwrap();
        let parser = FormulaParser::new(Dialect::LCH);
        let axiom = parser
            .parse_sequent("[1]p & [1]q |- [1](p & q)")
            .unwrap();
        for cp in &concepts {
            for cq in &concepts {
                let mut valuation = Valuation::empty();
                valuation.atoms.insert("p".into(), *cp);
                valuation.atoms.insert("q".into(), *cq);
                let m = Model::new(frame.clone(), valuation).unwrap();
                assert!(m.check_sequent(&axiom).unwrap());
            }
        }
    }

    #[test]
    fn concept_valuedness() {
        let m = k2_two_agent_model();
        for text in [
            "top", "bot", "p", "#a", "@x", "p & top", "p | bot", "[1]p", "[2]p", "C(p)",
            "C([1]p | p) & [2](p & top)",
        ] {
            let c = m.interpret(&parse(text)).unwrap();
            assert!(
                m.context().is_concept(c.extent(), c.intent()),
                "{text} gave a non-concept"
            );
        }
    }

    #[test]
    fn hybrid_clauses_match_quantifier_form() {
        let m = k2_two_agent_model();
        let ctx = m.context();
        // member(b, #a) iff every feature of a is a feature of b
        for b in 0..ctx.n_objects() {
            let direct = (0..ctx.n_features())
                .all(|y| !ctx.incidence().contains(0, y) || ctx.incidence().contains(b, y));
            let via_concept = m
                .interpret(&parse("#a"))
                .unwrap()
                .extent()
                .contains(b);
            assert_eq!(direct, via_concept, "object {b}");
        }
        // describes(y, #a) iff a has y
        for y in 0..ctx.n_features() {
            assert_eq!(
                m.interpret(&parse("#a")).unwrap().intent().contains(y),
                ctx.incidence().contains(0, y)
            );
        }
        // member(b, @x) iff b has x (x = feature index 1 here)
        for b in 0..ctx.n_objects() {
            assert_eq!(
                m.interpret(&parse("@x")).unwrap().extent().contains(b),
                ctx.incidence().contains(b, 1)
            );
        }
        // describes(y, @x) iff every object with x also has y
        for y in 0..ctx.n_features() {
            let direct = (0..ctx.n_objects())
                .all(|b| !ctx.incidence().contains(b, 1) || ctx.incidence().contains(b, y));
            assert_eq!(
                m.interpret(&parse("@x")).unwrap().intent().contains(y),
                direct
            );
        }
    }

    #[test]
    fn box_sequence_agrees_with_nested_boxes() {
        let m = k2_two_agent_model();
        let seq = AgentSequence::new(vec!["1".into(), "1".into()]).unwrap();
        let via_relation = m.box_sequence_extension(&seq, &parse("p")).unwrap();
        assert_eq!(via_relation, ObjectSet::singleton(0));
        let via_syntax = m.interpret(&parse("[1][1]p")).unwrap().extent();
        assert_eq!(via_relation, via_syntax);

        let base = AgentSequence::new(vec!["2".into()]).unwrap();
        assert_eq!(
            m.box_sequence_extension(&base, &parse("p")).unwrap(),
            m.interpret(&parse("[2]p")).unwrap().extent()
        );
    }

    #[test]
    fn strict_rejects_repair_fixes() {
        let ctx = k2();
        let bad = AgentRelation {
            agent: "1".into(),
            matrix: Relation::from_pairs(2, 2, [(1, 1)]).unwrap(),
        };
        let err = EnrichedContext::new(ctx.clone(), vec![bad.clone()], Strictness::Strict);
        assert!(matches!(err, Err(Error::IncompatibleRelation { .. })));
        let (frame, repaired) =
            EnrichedContext::new(ctx.clone(), vec![bad], Strictness::Repair).unwrap();
        assert_eq!(repaired, vec!["1".to_string()]);
        assert_eq!(&frame.relation("1").unwrap().matrix, ctx.incidence());
    }

    #[test]
    fn unstable_atom_extent_rejected_with_suggestion() {
        let ctx = k2();
        // {a2} is not stable; its closure is {a1,a2}
        match atom_concept_from_extent(&ctx, "p", ObjectSet::singleton(1), Strictness::Strict) {
            Err(Error::UnstableAtomExtent { given, closure, .. }) => {
                assert_eq!(given, vec!["a2".to_string()]);
                assert_eq!(closure, vec!["a1".to_string(), "a2".to_string()]);
            }
            other => panic!("expected unstable atom error, got {other:?}"),
        }
        let repaired =
            atom_concept_from_extent(&ctx, "p", ObjectSet::singleton(1), Strictness::Repair)
                .unwrap();
        assert_eq!(repaired.extent(), ObjectSet::from_bits(0b11));
    }
}
