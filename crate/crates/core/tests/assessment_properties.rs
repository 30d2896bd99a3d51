mod common;

use cloudcost::assessment::{
    aggregate_stakeholders, assess, evaluate_suitability, load_assessment, Answer, NetBenefit,
    StakeholderEntry, SuitabilityChecklist, Verdict, QUESTIONS,
};
use common::fixture;
use proptest::prelude::*;

fn answer() -> impl Strategy<Value = Answer> {
    prop_oneof![
        Just(Answer::Yes),
        Just(Answer::No),
        Just(Answer::NotApplicable),
        Just(Answer::Unknown),
    ]
}

fn checklist() -> impl Strategy<Value = SuitabilityChecklist> {
    prop::collection::vec(answer(), QUESTIONS.len()).prop_map(|answers| SuitabilityChecklist {
        answers: QUESTIONS
            .iter()
            .zip(answers)
            .map(|(q, a)| (q.id.to_string(), a))
            .collect(),
    })
}

fn verdict(c: &SuitabilityChecklist) -> Verdict {
    evaluate_suitability(c).unwrap().verdict
}

proptest! {
    #[test]
    fn raising_an_answer_to_yes_never_worsens(c in checklist(), idx in 0..QUESTIONS.len()) {
        let id = QUESTIONS[idx].id;
        let before = c.answers[id];
        prop_assume!(matches!(before, Answer::No | Answer::Unknown));
        let after = c.clone().with(id, Answer::Yes);
        prop_assert!(verdict(&after) >= verdict(&c));
    }

    #[test]
    fn verdict_follows_policy(c in checklist()) {
        let r = evaluate_suitability(&c).unwrap();
        let has = |a| c.answers.values().any(|x| *x == a);
        let expected = if has(Answer::No) {
            Verdict::DoNotProceed
        } else if has(Answer::Unknown) {
            Verdict::ProceedWithCaution
        } else {
            Verdict::Proceed
        };
        prop_assert_eq!(r.verdict, expected);
        if expected == Verdict::DoNotProceed {
            for item in &r.blocking_items {
                prop_assert_eq!(c.answers[item.as_str()], Answer::No);
            }
        }
    }

    #[test]
    fn stakeholder_buckets_partition_entries(
        ratings in prop::collection::vec((-2i8..=2, -2i8..=2, -2i8..=2), 1..20),
    ) {
        let entries: Vec<StakeholderEntry> = ratings
            .iter()
            .enumerate()
            .map(|(i, (p, s, l))| StakeholderEntry::new(&format!("s{i}"), *p, *s, *l))
            .collect();
        let summary = aggregate_stakeholders(&entries).unwrap();
        let mut seen: Vec<String> = summary.buckets.values().flatten().cloned().collect();
        seen.sort();
        let mut all: Vec<String> = entries.iter().map(|e| e.stakeholder.clone()).collect();
        all.sort();
        prop_assert_eq!(seen, all);
        prop_assert_eq!(summary.counts.values().sum::<usize>(), entries.len());
        for (bucket, names) in &summary.buckets {
            prop_assert!(!names.is_empty());
            for n in names {
                let e = entries.iter().find(|e| &e.stakeholder == n).unwrap();
                prop_assert_eq!(e.net_benefit(), *bucket);
            }
        }
    }
}

#[test]
fn examples() {
    assert_eq!(verdict(&SuitabilityChecklist::uniform(Answer::Yes)), Verdict::Proceed);

    let r = evaluate_suitability(
        &SuitabilityChecklist::uniform(Answer::Yes).with("elasticity.scale-out", Answer::No),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::DoNotProceed);
    assert_eq!(r.blocking_items, vec!["elasticity.scale-out".to_string()]);

    let c = SuitabilityChecklist::uniform(Answer::Yes).with("security.requirements", Answer::Unknown);
    assert_eq!(verdict(&c), Verdict::ProceedWithCaution);

    let mut missing = SuitabilityChecklist::uniform(Answer::Yes);
    missing.answers.remove("regulatory.compliance");
    let err = evaluate_suitability(&missing).unwrap_err();
    assert!(err.to_string().contains("regulatory.compliance"), "{err}");
}

#[test]
fn stakeholder_examples() {
    let one = aggregate_stakeholders(&[StakeholderEntry::new("a", 0, 0, 0)]).unwrap();
    assert_eq!(one.counts.get(&NetBenefit::Zero), Some(&1));
    let two = aggregate_stakeholders(&[
        StakeholderEntry::new("a", 2, 2, 2),
        StakeholderEntry::new("b", 2, 2, 2),
    ])
    .unwrap();
    assert_eq!(two.counts.get(&NetBenefit::Positive), Some(&2));
    assert!(aggregate_stakeholders(&[StakeholderEntry::new("a", 3, 0, 0)]).is_err());
}

#[test]
fn fixture_files() {
    let school = assess(&load_assessment(&fixture("school.assessment.json")).unwrap()).unwrap();
    assert_eq!(school.recommendation.verdict, Verdict::Proceed);

    let oil = assess(&load_assessment(&fixture("oilgas.assessment.json")).unwrap()).unwrap();
    let summary = oil.stakeholders.unwrap();
    assert_eq!(summary.buckets.len(), 3);
    assert_eq!(
        summary.buckets[&NetBenefit::Negative],
        vec!["technical manager".to_string()]
    );
    assert_eq!(oil.recommendation.verdict, Verdict::ProceedWithCaution);
}
