//! Day-by-day reference interpreter for usage patterns, written against
//! chrono only, plus generators for random pattern lists.
#![allow(dead_code)]

use chrono::{Datelike, Days, NaiveDate};
use cloudcost::calendar::YearMonth;
use cloudcost::patterns::{format_patterns, parse_patterns, DaySpec, Mode, MonthSpec, Op, Pattern};
use cloudcost::UsageSpec;
use proptest::prelude::*;

use super::rel_close;

pub const TOL: f64 = 1e-9;

pub fn month_in(spec: MonthSpec, m: u32) -> bool {
    match spec {
        MonthSpec::Every => true,
        MonthSpec::Range(a, b) => {
            let mut k = a;
            loop {
                if k == m {
                    return true;
                }
                if k == b {
                    return false;
                }
                k = k % 12 + 1;
            }
        }
    }
}

pub fn day_in(spec: DaySpec, date: NaiveDate) -> bool {
    let wd = date.weekday().num_days_from_monday() + 1;
    match spec {
        DaySpec::Default | DaySpec::Everyday => true,
        DaySpec::Weekdays => wd < 6,
        DaySpec::Weekends => wd == 6 || wd == 7,
        DaySpec::Range(a, b) => a <= date.day() && date.day() <= b,
        DaySpec::WeekdayRange(a, b) => {
            let mut k = a;
            loop {
                if k == wd {
                    return true;
                }
                if k == b {
                    return false;
                }
                k = k % 7 + 1;
            }
        }
    }
}

pub fn step(op: Op, x: f64, v: f64) -> f64 {
    let y = match op {
        Op::Add => x + v,
        Op::Sub => x - v,
        Op::Mul => x * v,
        Op::Div => x / v,
        Op::Pow => x.powf(v),
    };
    if y < 0.0 {
        0.0
    } else {
        y
    }
}

/// Day values for `months` consecutive months, grouped by month.
pub fn oracle(baseline: f64, patterns: &[Pattern], start: NaiveDate, months: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut base = baseline.max(0.0);
    let mut date = start;
    let mut current: Vec<f64> = Vec::new();
    loop {
        let mut v = base;
        for p in patterns {
            if p.mode == Mode::Temp && month_in(p.months, date.month()) && day_in(p.days, date) {
                v = step(p.op, v, p.value);
            }
        }
        current.push(v);
        let next = date.checked_add_days(Days::new(1)).unwrap();
        if next.month() != date.month() {
            for p in patterns {
                if p.mode == Mode::Perm && month_in(p.months, date.month()) {
                    base = step(p.op, base, p.value);
                }
            }
            out.push(std::mem::take(&mut current));
            if out.len() == months {
                return out;
            }
        }
        date = next;
    }
}

pub fn library(spec: &UsageSpec, start: YearMonth, months: usize) -> Vec<Vec<f64>> {
    let mut m = start;
    (0..months)
        .map(|_| {
            let days = spec.daily_series(start, m).unwrap();
            m = m.succ();
            days
        })
        .collect()
}

pub fn assert_matches(expected: &[Vec<f64>], actual: &[Vec<f64>]) -> Result<(), String> {
    if expected.len() != actual.len() {
        return Err(format!("{} months vs {}", expected.len(), actual.len()));
    }
    for (i, (e, a)) in expected.iter().zip(actual).enumerate() {
        if e.len() != a.len() {
            return Err(format!("month {i}: {} days vs {}", e.len(), a.len()));
        }
        for (d, (x, y)) in e.iter().zip(a).enumerate() {
            if !rel_close(*x, *y, TOL) {
                return Err(format!("month {i} day {}: oracle {x} library {y}", d + 1));
            }
        }
    }
    Ok(())
}


pub fn month_spec() -> impl Strategy<Value = MonthSpec> {
    prop_oneof![
        Just(MonthSpec::Every),
        (1u32..=12, 1u32..=12).prop_map(|(a, b)| MonthSpec::Range(a, b)),
    ]
}

pub fn day_spec() -> impl Strategy<Value = DaySpec> {
    prop_oneof![
        Just(DaySpec::Default),
        Just(DaySpec::Everyday),
        Just(DaySpec::Weekdays),
        Just(DaySpec::Weekends),
        (1u32..=31, 0u32..=10).prop_map(|(a, len)| DaySpec::Range(a, (a + len).min(31))),
        (1u32..=7, 1u32..=7).prop_map(|(a, b)| DaySpec::WeekdayRange(a, b)),
    ]
}

pub fn quarter(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|q| f64::from(q) / 4.0)
}

// Exponents and factors stay small so 24 months of compounding remain finite.
pub fn temp_pattern() -> impl Strategy<Value = Pattern> {
    let op = prop_oneof![
        (Just(Op::Add), quarter(0, 80)),
        (Just(Op::Sub), quarter(0, 80)),
        (Just(Op::Mul), quarter(0, 12)),
        (Just(Op::Div), quarter(1, 12)),
        (Just(Op::Pow), quarter(1, 8)),
    ];
    (month_spec(), day_spec(), op).prop_map(|(months, days, (op, value))| Pattern {
        mode: Mode::Temp,
        months,
        days,
        op,
        value,
    })
}

pub fn perm_pattern() -> impl Strategy<Value = Pattern> {
    let op = prop_oneof![
        (Just(Op::Add), quarter(0, 80)),
        (Just(Op::Sub), quarter(0, 80)),
        (Just(Op::Mul), quarter(2, 5)),
        (Just(Op::Div), quarter(3, 6)),
        (Just(Op::Pow), quarter(1, 4)),
    ];
    (month_spec(), op).prop_map(|(months, (op, value))| Pattern {
        mode: Mode::Perm,
        months,
        days: DaySpec::Default,
        op,
        value,
    })
}

pub fn spec() -> impl Strategy<Value = (f64, Vec<Pattern>)> {
    (
        quarter(0, 2000),
        prop::collection::vec(prop_oneof![temp_pattern(), perm_pattern()], 0..6),
    )
}


pub const WORKED_EXAMPLE: &str =
    "perm: every month +10, temp: every jun-aug on weekends /2, temp: every dec on 25-30 *2";

/// The worked example, built by hand rather than parsed.
pub fn worked_example_ast() -> Vec<Pattern> {
    vec![
        Pattern { mode: Mode::Perm, months: MonthSpec::Every, days: DaySpec::Default, op: Op::Add, value: 10.0 },
        Pattern { mode: Mode::Temp, months: MonthSpec::Range(6, 8), days: DaySpec::Weekends, op: Op::Div, value: 2.0 },
        Pattern { mode: Mode::Temp, months: MonthSpec::Range(12, 12), days: DaySpec::Range(25, 30), op: Op::Mul, value: 2.0 },
    ]
}

/// Baseline 100 with the worked example over 24 months from `start`.
pub fn check_worked_example(start: YearMonth) -> Result<(), String> {
    let spec = UsageSpec::parse(100.0, WORKED_EXAMPLE).map_err(|e| e.to_string())?;
    let ast = worked_example_ast();
    if spec.patterns != ast {
        return Err(format!("parsed {:?}", spec.patterns));
    }
    let date = NaiveDate::from_ymd_opt(start.year(), start.month(), 1).unwrap();
    assert_matches(&oracle(100.0, &ast, date, 24), &library(&spec, start, 24))
}

pub type Case = ((f64, Vec<Pattern>), i32, u32);

pub fn case() -> impl Strategy<Value = Case> {
    (spec(), 2008i32..2030, 1u32..=12)
}

/// Renders the patterns to text, parses them back and compares 24 months
/// of library output with the oracle.
pub fn check_case(((baseline, ast), year, month): &Case) -> Result<(), String> {
    let text = format_patterns(ast);
    let parsed = parse_patterns(&text).map_err(|e| format!("{text}: {e}"))?;
    if &parsed != ast {
        return Err(format!("{text}: reparsed as {parsed:?}"));
    }
    let spec = UsageSpec { baseline: *baseline, patterns: parsed };
    let start = YearMonth::new(*year, *month).unwrap();
    let date = NaiveDate::from_ymd_opt(*year, *month, 1).unwrap();
    assert_matches(&oracle(*baseline, ast, date, 24), &library(&spec, start, 24))
        .map_err(|m| format!("{text}: {m}"))
}
