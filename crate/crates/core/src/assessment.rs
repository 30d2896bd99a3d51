//! Technology suitability checklist and stakeholder impact ledger.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{syntax_parts, AssessmentError};

/// A checklist question: stable id, characteristic it belongs to, and prompt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Question {
    pub id: &'static str,
    pub characteristic: &'static str,
    pub prompt: &'static str,
}

pub const QUESTIONS: [Question; 12] = [
    Question {
        id: "elasticity.scale-out",
        characteristic: "elasticity",
        prompt: "Can the software scale out by adding instances?",
    },
    Question {
        id: "elasticity.scale-up",
        characteristic: "elasticity",
        prompt: "Where it cannot scale out, is a larger single server enough?",
    },
    Question {
        id: "communications.bandwidth",
        characteristic: "communications",
        prompt: "Is bandwidth inside the cloud and to other systems adequate?",
    },
    Question {
        id: "communications.latency",
        characteristic: "communications",
        prompt: "Is transfer latency to and from the cloud tolerable?",
    },
    Question {
        id: "processing.cpu",
        characteristic: "processing",
        prompt: "Do the instance types offer enough CPU at expected load?",
    },
    Question {
        id: "processing.memory",
        characteristic: "processing",
        prompt: "Do the instance types offer enough memory?",
    },
    Question {
        id: "hardware.access",
        characteristic: "hardware access",
        prompt: "Is any required hardware or bespoke device access available?",
    },
    Question {
        id: "availability.sla",
        characteristic: "availability",
        prompt: "Is the provider's service level agreement adequate?",
    },
    Question {
        id: "availability.redundancy",
        characteristic: "availability",
        prompt: "Can availability targets be met by combining regions or providers?",
    },
    Question {
        id: "security.requirements",
        characteristic: "security",
        prompt: "Does the provider satisfy the security requirements?",
    },
    Question {
        id: "confidentiality.privacy",
        characteristic: "confidentiality",
        prompt: "Are the confidentiality and privacy guarantees sufficient?",
    },
    Question {
        id: "regulatory.compliance",
        characteristic: "regulatory",
        prompt: "Does the provider comply with applicable regulation?",
    },
];

pub fn question(id: &str) -> Option<&'static Question> {
    QUESTIONS.iter().find(|q| q.id == id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Answer {
    Yes,
    No,
    NotApplicable,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitabilityChecklist {
    pub answers: BTreeMap<String, Answer>,
}

impl SuitabilityChecklist {
    /// Every question answered with `answer`.
    pub fn uniform(answer: Answer) -> Self {
        SuitabilityChecklist {
            answers: QUESTIONS.iter().map(|q| (q.id.to_string(), answer)).collect(),
        }
    }

    pub fn with(mut self, id: &str, answer: Answer) -> Self {
        self.answers.insert(id.to_string(), answer);
        self
    }
}

/// Ordered from worst to best.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DoNotProceed,
    ProceedWithCaution,
    Proceed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::DoNotProceed => "do-not-proceed",
            Verdict::ProceedWithCaution => "proceed-with-caution",
            Verdict::Proceed => "proceed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub verdict: Verdict,
    pub blocking_items: Vec<String>,
    pub narrative: String,
}

/// Any "no" blocks; otherwise any "unknown" calls for caution.
pub fn evaluate_suitability(checklist: &SuitabilityChecklist) -> Result<Recommendation, AssessmentError> {
    if let Some(id) = checklist.answers.keys().find(|id| question(id).is_none()) {
        return Err(AssessmentError::UnknownQuestion(id.clone()));
    }
    let mut no = Vec::new();
    let mut unknown = Vec::new();
    for q in &QUESTIONS {
        match checklist.answers.get(q.id) {
            None => return Err(AssessmentError::MissingAnswer(q.id.to_string())),
            Some(Answer::No) => no.push(q),
            Some(Answer::Unknown) => unknown.push(q),
            Some(Answer::Yes | Answer::NotApplicable) => {}
        }
    }
    let describe = |qs: &[&Question]| {
        let mut chars: Vec<&str> = qs.iter().map(|q| q.characteristic).collect();
        chars.dedup();
        chars.join(", ")
    };
    let ids = |qs: &[&Question]| qs.iter().map(|q| q.id.to_string()).collect::<Vec<_>>();
    Ok(if !no.is_empty() {
        Recommendation {
            verdict: Verdict::DoNotProceed,
            blocking_items: ids(&no),
            narrative: format!("The system fails the suitability check on: {}.", describe(&no)),
        }
    } else if !unknown.is_empty() {
        Recommendation {
            verdict: Verdict::ProceedWithCaution,
            blocking_items: ids(&unknown),
            narrative: format!(
                "No blocking issue found, but these characteristics are unresolved: {}.",
                describe(&unknown)
            ),
        }
    } else {
        Recommendation {
            verdict: Verdict::Proceed,
            blocking_items: Vec::new(),
            narrative: "All characteristics are satisfied; proceed to cost modeling.".into(),
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetBenefit {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StakeholderEntry {
    pub stakeholder: String,
    #[serde(default)]
    pub changes: String,
    /// Effect on time, resources and capabilities, -2..=2.
    pub practicalities: i8,
    /// Effect on interests, values, status and satisfaction, -2..=2.
    pub social: i8,
    /// Perceived fairness of the change, -2..=2.
    pub political: i8,
}

impl StakeholderEntry {
    pub fn new(stakeholder: &str, practicalities: i8, social: i8, political: i8) -> Self {
        StakeholderEntry {
            stakeholder: stakeholder.to_string(),
            changes: String::new(),
            practicalities,
            social,
            political,
        }
    }

    pub fn net_benefit(&self) -> NetBenefit {
        let sum = i32::from(self.practicalities) + i32::from(self.social) + i32::from(self.political);
        match sum.signum() {
            -1 => NetBenefit::Negative,
            0 => NetBenefit::Zero,
            _ => NetBenefit::Positive,
        }
    }

    fn check(&self) -> Result<(), AssessmentError> {
        for value in [self.practicalities, self.social, self.political] {
            if !(-2..=2).contains(&value) {
                return Err(AssessmentError::RatingOutOfRange {
                    stakeholder: self.stakeholder.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StakeholderSummary {
    pub buckets: BTreeMap<NetBenefit, Vec<String>>,
    pub counts: BTreeMap<NetBenefit, usize>,
}

pub fn aggregate_stakeholders(entries: &[StakeholderEntry]) -> Result<StakeholderSummary, AssessmentError> {
    if entries.is_empty() {
        return Err(AssessmentError::NoStakeholders);
    }
    let mut buckets: BTreeMap<NetBenefit, Vec<String>> = BTreeMap::new();
    for e in entries {
        e.check()?;
        buckets.entry(e.net_benefit()).or_default().push(e.stakeholder.clone());
    }
    let counts = buckets.iter().map(|(k, v)| (*k, v.len())).collect();
    Ok(StakeholderSummary { buckets, counts })
}

/// Contents of an `.assessment.json` file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentFile {
    pub schema: u64,
    pub checklist: SuitabilityChecklist,
    #[serde(default)]
    pub stakeholders: Vec<StakeholderEntry>,
}

pub fn load_assessment(document: &str) -> Result<AssessmentFile, AssessmentError> {
    serde_json::from_str(document).map_err(|e| {
        let (line, column, message) = syntax_parts(&e);
        AssessmentError::Syntax {
            line,
            column,
            message,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssessmentOutcome {
    pub recommendation: Recommendation,
    pub stakeholders: Option<StakeholderSummary>,
}

/// Checklist verdict, downgraded to caution when a stakeholder perceives a negative net benefit.
pub fn assess(file: &AssessmentFile) -> Result<AssessmentOutcome, AssessmentError> {
    let mut recommendation = evaluate_suitability(&file.checklist)?;
    let stakeholders = if file.stakeholders.is_empty() {
        None
    } else {
        Some(aggregate_stakeholders(&file.stakeholders)?)
    };
    if let Some(negative) = stakeholders
        .as_ref()
        .and_then(|s| s.buckets.get(&NetBenefit::Negative))
    {
        if recommendation.verdict == Verdict::Proceed {
            recommendation.verdict = Verdict::ProceedWithCaution;
            recommendation.narrative = format!(
                "Technically suitable, but {} stakeholder(s) perceive a negative net benefit.",
                negative.len()
            );
        }
        recommendation.blocking_items.extend(negative.iter().cloned());
    }
    Ok(AssessmentOutcome {
        recommendation,
        stakeholders,
    })
}
