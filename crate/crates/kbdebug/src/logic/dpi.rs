use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ground::{check_depth, ground_formulas, GroundError, GroundTheory, Origin};
use super::syntax::{Axiom, AxiomId, Formula, ParseError, Parser};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Consistency,
    Coherence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestOrigin {
    #[default]
    UserSpecified,
    AnsweredQuery,
}

/// Entailment types offered as query material.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntailmentKind {
    Assertions,
    Subsumptions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub formulas: Vec<Formula>,
    pub polarity: Polarity,
    pub origin: TestOrigin,
}

impl TestCase {
    pub fn texts(&self) -> Vec<String> {
        self.formulas.iter().map(ToString::to_string).collect()
    }
}

/// A diagnosis problem instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DpiEnvelope", into = "DpiEnvelope")]
pub struct Dpi {
    pub kb: Vec<Axiom>,
    pub background: Vec<Axiom>,
    pub positive_tests: Vec<TestCase>,
    pub negative_tests: Vec<TestCase>,
    pub requirements: BTreeSet<Requirement>,
    pub entailments: BTreeSet<EntailmentKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestCaseEnvelope {
    Plain(Vec<String>),
    Tagged { formulas: Vec<String>, origin: TestOrigin },
}

impl TestCaseEnvelope {
    fn parts(&self) -> (&[String], TestOrigin) {
        match self {
            TestCaseEnvelope::Plain(f) => (f, TestOrigin::UserSpecified),
            TestCaseEnvelope::Tagged { formulas, origin } => (formulas, *origin),
        }
    }
}

fn default_requirements() -> Vec<Requirement> {
    vec![Requirement::Consistency]
}

fn default_entailments() -> Vec<EntailmentKind> {
    vec![EntailmentKind::Assertions, EntailmentKind::Subsumptions]
}

/// JSON form of a DPI. Statements are strings in the KB language.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpiEnvelope {
    pub kb: Vec<String>,
    #[serde(default)]
    pub background: Vec<String>,
    #[serde(default)]
    pub positive_tests: Vec<TestCaseEnvelope>,
    #[serde(default)]
    pub negative_tests: Vec<TestCaseEnvelope>,
    #[serde(default = "default_requirements")]
    pub requirements: Vec<Requirement>,
    #[serde(default = "default_entailments")]
    pub entailments: Vec<EntailmentKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DpiError {
    #[error("{section}: {error}")]
    Parse { section: String, error: ParseError },
    #[error("{section}: test case has no formulas")]
    EmptyTest { section: String },
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("unknown axiom id {0}")]
    UnknownAxiom(AxiomId),
    #[error("duplicate axiom id {0}")]
    DuplicateId(AxiomId),
}

impl Dpi {
    pub fn from_envelope(env: &DpiEnvelope) -> Result<Dpi, DpiError> {
        let mut parser = Parser::new();
        let mut next_id: AxiomId = 1;
        let mut axioms = |parser: &mut Parser, items: &[String], section: &str| {
            let mut out = Vec::new();
            for (i, src) in items.iter().enumerate() {
                let parsed = parser.parse_source(src).map_err(|error| DpiError::Parse {
                    section: format!("{section}[{i}]"),
                    error,
                })?;
                for (text, f) in parsed {
                    out.push(Axiom::new(next_id, &text, f));
                    next_id += 1;
                }
            }
            Ok::<_, DpiError>(out)
        };
        let kb = axioms(&mut parser, &env.kb, "kb")?;
        let background = axioms(&mut parser, &env.background, "background")?;
        let tests = |parser: &mut Parser, items: &[TestCaseEnvelope], polarity: Polarity, section: &str| {
            let mut out = Vec::new();
            for (i, t) in items.iter().enumerate() {
                let (texts, origin) = t.parts();
                let mut formulas = Vec::new();
                for src in texts {
                    let parsed = parser.parse_source(src).map_err(|error| DpiError::Parse {
                        section: format!("{section}[{i}]"),
                        error,
                    })?;
                    formulas.extend(parsed.into_iter().map(|(_, f)| f));
                }
                if formulas.is_empty() {
                    return Err(DpiError::EmptyTest { section: format!("{section}[{i}]") });
                }
                out.push(TestCase { formulas, polarity, origin });
            }
            Ok(out)
        };
        let positive_tests = tests(&mut parser, &env.positive_tests, Polarity::Positive, "positive_tests")?;
        let negative_tests = tests(&mut parser, &env.negative_tests, Polarity::Negative, "negative_tests")?;
        let mut requirements: BTreeSet<Requirement> = env.requirements.iter().copied().collect();
        requirements.insert(Requirement::Consistency);
        let dpi = Dpi {
            kb,
            background,
            positive_tests,
            negative_tests,
            requirements,
            entailments: env.entailments.iter().copied().collect(),
        };
        dpi.check()?;
        Ok(dpi)
    }

    pub fn from_json(text: &str) -> Result<Dpi, String> {
        let env: DpiEnvelope = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Dpi::from_envelope(&env).map_err(|e| e.to_string())
    }

    pub fn to_envelope(&self) -> DpiEnvelope {
        let tests = |ts: &[TestCase]| {
            ts.iter()
                .map(|t| match t.origin {
                    TestOrigin::UserSpecified => TestCaseEnvelope::Plain(t.texts()),
                    origin => TestCaseEnvelope::Tagged { formulas: t.texts(), origin },
                })
                .collect()
        };
        DpiEnvelope {
            kb: self.kb.iter().map(|a| a.text.clone()).collect(),
            background: self.background.iter().map(|a| a.text.clone()).collect(),
            positive_tests: tests(&self.positive_tests),
            negative_tests: tests(&self.negative_tests),
            requirements: self.requirements.iter().copied().collect(),
            entailments: self.entailments.iter().copied().collect(),
        }
    }

    /// Unique ids and bounded quantifier nesting.
    pub fn check(&self) -> Result<(), DpiError> {
        let mut ids = BTreeSet::new();
        for a in self.kb.iter().chain(&self.background) {
            if !ids.insert(a.id) {
                return Err(DpiError::DuplicateId(a.id));
            }
            check_depth(&a.formula, &format!("axiom {}", a.id))?;
        }
        for (i, t) in self.positive_tests.iter().enumerate() {
            for f in &t.formulas {
                check_depth(f, &format!("positive test {i}"))?;
            }
        }
        for (i, t) in self.negative_tests.iter().enumerate() {
            for f in &t.formulas {
                check_depth(f, &format!("negative test {i}"))?;
            }
        }
        Ok(())
    }

    pub fn kb_ids(&self) -> Vec<AxiomId> {
        self.kb.iter().map(|a| a.id).collect()
    }

    pub fn axiom(&self, id: AxiomId) -> Option<&Axiom> {
        self.kb.iter().chain(&self.background).find(|a| a.id == id)
    }

    pub fn requires_coherence(&self) -> bool {
        self.requirements.contains(&Requirement::Coherence)
    }

    /// Every formula of the instance, with its origin.
    pub fn all_formulas(&self) -> Vec<(Origin, &Formula)> {
        let mut out: Vec<(Origin, &Formula)> = Vec::new();
        for a in self.kb.iter().chain(&self.background) {
            out.push((Origin::Axiom(a.id), &a.formula));
        }
        for (i, t) in self.positive_tests.iter().enumerate() {
            out.extend(t.formulas.iter().map(|f| (Origin::PositiveTest(i), f)));
        }
        for (i, t) in self.negative_tests.iter().enumerate() {
            out.extend(t.formulas.iter().map(|f| (Origin::NegativeTest(i), f)));
        }
        out
    }

    /// Append a test case; returns its index within its polarity list.
    pub fn add_test(&mut self, formulas: Vec<Formula>, polarity: Polarity, origin: TestOrigin) -> usize {
        let t = TestCase { formulas, polarity, origin };
        let list = match polarity {
            Polarity::Positive => &mut self.positive_tests,
            Polarity::Negative => &mut self.negative_tests,
        };
        list.push(t);
        list.len() - 1
    }
}

impl TryFrom<DpiEnvelope> for Dpi {
    type Error = DpiError;

    fn try_from(env: DpiEnvelope) -> Result<Dpi, DpiError> {
        Dpi::from_envelope(&env)
    }
}

impl From<Dpi> for DpiEnvelope {
    fn from(dpi: Dpi) -> DpiEnvelope {
        dpi.to_envelope()
    }
}

/// Ground KB, background and positive test cases over the named individuals
/// plus `witness_budget` fresh constants per existential occurrence.
pub fn ground(dpi: &Dpi, witness_budget: usize) -> Result<GroundTheory, GroundError> {
    let items: Vec<(Origin, &Formula)> = dpi
        .all_formulas()
        .into_iter()
        .filter(|(o, _)| !matches!(o, Origin::NegativeTest(_)))
        .collect();
    ground_formulas(&items, witness_budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example1() -> Dpi {
        Dpi::from_envelope(&DpiEnvelope {
            kb: vec!["A sub B".into(), "B sub C".into(), "C sub D".into(), "D sub R".into()],
            background: vec!["A(w)".into(), "(not R)(w)".into(), "A(v)".into()],
            positive_tests: vec![],
            negative_tests: vec![],
            requirements: vec![Requirement::Consistency],
            entailments: vec![EntailmentKind::Assertions],
        })
        .unwrap()
    }

    #[test]
    fn ids_are_sequential_and_disjoint() {
        let d = example1();
        assert_eq!(d.kb_ids(), vec![1, 2, 3, 4]);
        assert_eq!(d.background.iter().map(|a| a.id).collect::<Vec<_>>(), vec![5, 6, 7]);
    }

    #[test]
    fn example1_ground_counts() {
        let t = ground(&example1(), 1).unwrap();
        assert_eq!(t.domain, vec!["w".to_string(), "v".to_string()]);
        let implications = t.clauses.iter().filter(|c| c.len() == 2).count();
        let units = t.clauses.iter().filter(|c| c.len() == 1).count();
        assert_eq!((implications, units, t.clauses.len()), (8, 3, 11));
        assert!(!t.satisfiable());
    }

    #[test]
    fn grounding_is_deterministic() {
        assert_eq!(ground(&example1(), 1).unwrap(), ground(&example1(), 1).unwrap());
    }

    #[test]
    fn envelope_round_trip() {
        let mut d = example1();
        let f = crate::logic::syntax::parse_formula("B(w)").unwrap();
        d.add_test(vec![f], Polarity::Negative, TestOrigin::AnsweredQuery);
        let env = d.to_envelope();
        let json = serde_json::to_string(&env).unwrap();
        let back: DpiEnvelope = serde_json::from_str(&json).unwrap();
        assert_eq!(Dpi::from_envelope(&back).unwrap(), d);
    }

    #[test]
    fn parse_errors_name_the_section() {
        let env = DpiEnvelope {
            kb: vec!["A sub B".into(), "A sub".into()],
            background: vec![],
            positive_tests: vec![],
            negative_tests: vec![],
            requirements: vec![],
            entailments: vec![],
        };
        let err = Dpi::from_envelope(&env).unwrap_err().to_string();
        assert!(err.starts_with("kb[1]: line 1"), "{err}");
    }

    #[test]
    fn empty_dpi_grounds_to_nothing() {
        let env: DpiEnvelope = serde_json::from_str(r#"{"kb": []}"#).unwrap();
        let d = Dpi::from_envelope(&env).unwrap();
        assert!(ground(&d, 1).unwrap().clauses.is_empty());
        assert!(d.requirements.contains(&Requirement::Consistency));
    }
}
