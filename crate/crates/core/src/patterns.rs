//! The usage-pattern language.
//!
//! A resource quantity is a baseline plus an ordered list of clauses of the form
//!
//! ```text
//! temp|perm: every <months> [on <days>] <op><number>
//! ```
//!
//! separated by commas. `perm` clauses change the baseline persistently and take
//! effect at the boundary after each matching month. `temp` clauses modify
//! individual days of matching months and leave the baseline untouched.

use std::fmt;
use std::str::FromStr;

use chrono::Weekday;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calendar::YearMonth;
use crate::error::{EvalError, PatternError, PatternErrorKind};

const MONTH_NAMES: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];
const MONTH_FULL_NAMES: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
const WEEKDAY_NAMES: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Temp,
    Perm,
}

/// Months a clause applies to. Ranges may wrap around the year end (`nov-feb`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonthSpec {
    Every,
    /// Inclusive range of month numbers (1 = January); `from == to` is a single month.
    Range(u32, u32),
}

impl MonthSpec {
    pub fn contains(self, month: u32) -> bool {
        match self {
            MonthSpec::Every => true,
            MonthSpec::Range(a, b) if a <= b => (a..=b).contains(&month),
            MonthSpec::Range(a, b) => month >= a || month <= b,
        }
    }
}

/// Days of a month a clause applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DaySpec {
    /// No `on` part: the whole month.
    Default,
    Everyday,
    Weekdays,
    Weekends,
    /// Inclusive day-of-month range; days past the month's end are skipped.
    Range(u32, u32),
    /// Inclusive ISO weekday range, Monday = 1; may wrap (`fri-mon`).
    WeekdayRange(u32, u32),
}

impl DaySpec {
    pub fn contains(self, ym: YearMonth, day: u32) -> bool {
        match self {
            DaySpec::Default | DaySpec::Everyday => true,
            DaySpec::Weekdays => ym.weekday(day).number_from_monday() <= 5,
            DaySpec::Weekends => ym.weekday(day).number_from_monday() >= 6,
            DaySpec::Range(a, b) => (a..=b).contains(&day),
            DaySpec::WeekdayRange(a, b) => {
                let wd = ym.weekday(day).number_from_monday();
                if a <= b {
                    (a..=b).contains(&wd)
                } else {
                    wd >= a || wd <= b
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Op {
    fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
            Op::Pow => '^',
        }
    }

    /// Applies the operator and clamps the result at zero.
    pub fn apply(self, current: f64, value: f64) -> Result<f64, EvalError> {
        let out = match self {
            Op::Add => current + value,
            Op::Sub => current - value,
            Op::Mul => current * value,
            Op::Div => current / value,
            Op::Pow => {
                if current == 0.0 && value < 0.0 {
                    return Err(EvalError::ZeroToNegativePower(value));
                }
                current.powf(value)
            }
        };
        if !out.is_finite() {
            return Err(EvalError::Overflow);
        }
        Ok(if out > 0.0 { out } else { 0.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pattern {
    pub mode: Mode,
    pub months: MonthSpec,
    pub days: DaySpec,
    pub op: Op,
    pub value: f64,
}

impl Pattern {
    pub fn applies_to_month(&self, ym: YearMonth) -> bool {
        self.months.contains(ym.month())
    }

    pub fn applies_to_day(&self, ym: YearMonth, day: u32) -> bool {
        self.applies_to_month(ym) && self.days.contains(ym, day)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Temp => "temp",
            Mode::Perm => "perm",
        };
        write!(f, "{mode}: every ")?;
        match self.months {
            MonthSpec::Every => write!(f, "month")?,
            MonthSpec::Range(a, b) if a == b => write!(f, "{}", MONTH_NAMES[a as usize - 1])?,
            MonthSpec::Range(a, b) => write!(
                f,
                "{}-{}",
                MONTH_NAMES[a as usize - 1],
                MONTH_NAMES[b as usize - 1]
            )?,
        }
        match self.days {
            DaySpec::Default => {}
            DaySpec::Everyday => write!(f, " on everyday")?,
            DaySpec::Weekdays => write!(f, " on weekdays")?,
            DaySpec::Weekends => write!(f, " on weekends")?,
            DaySpec::Range(a, b) if a == b => write!(f, " on {a:02}")?,
            DaySpec::Range(a, b) => write!(f, " on {a:02}-{b:02}")?,
            DaySpec::WeekdayRange(a, b) if a == b => {
                write!(f, " on {}", WEEKDAY_NAMES[a as usize - 1])?
            }
            DaySpec::WeekdayRange(a, b) => write!(
                f,
                " on {}-{}",
                WEEKDAY_NAMES[a as usize - 1],
                WEEKDAY_NAMES[b as usize - 1]
            )?,
        }
        write!(f, " {}{}", self.op.symbol(), self.value)
    }
}

/// Writes a pattern list back to its textual form.
pub fn format_patterns(patterns: &[Pattern]) -> String {
    patterns
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses a comma-separated list of pattern clauses. Blank text yields no patterns.
pub fn parse_patterns(text: &str) -> Result<Vec<Pattern>, PatternError> {
    let mut cursor = Cursor { src: text, pos: 0 };
    let mut out = Vec::new();
    cursor.skip_ws();
    if cursor.at_end() {
        return Ok(out);
    }
    loop {
        out.push(cursor.clause()?);
        cursor.skip_ws();
        match cursor.peek() {
            None => break,
            Some(',') => {
                cursor.bump();
            }
            Some(_) => {
                let rest = cursor.rest_of_clause();
                return Err(cursor.err(PatternErrorKind::TrailingInput(rest)));
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, kind: PatternErrorKind) -> PatternError {
        PatternError {
            position: self.pos,
            kind,
        }
    }

    fn err_at(&self, position: usize, kind: PatternErrorKind) -> PatternError {
        PatternError { position, kind }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn rest_of_clause(&self) -> String {
        self.src[self.pos..]
            .split(',')
            .next()
            .unwrap_or("")
            .trim()
            .to_string()
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn word(&mut self) -> (usize, String) {
        self.skip_ws();
        let start = self.pos;
        let w = self.take_while(|c| c.is_ascii_alphabetic()).to_ascii_lowercase();
        (start, w)
    }

    /// True when the next non-blank character is `-` followed by a letter.
    fn range_dash_then(&self, pred: impl Fn(char) -> bool) -> bool {
        let rest = self.src[self.pos..].trim_start();
        let Some(after) = rest.strip_prefix('-') else {
            return false;
        };
        after.trim_start().chars().next().is_some_and(pred)
    }

    fn consume_dash(&mut self) {
        self.skip_ws();
        let dash = self.bump();
        debug_assert_eq!(dash, Some('-'));
    }

    fn clause(&mut self) -> Result<Pattern, PatternError> {
        let (at, mode_word) = self.word();
        let mode = match mode_word.as_str() {
            "temp" => Mode::Temp,
            "perm" => Mode::Perm,
            _ => {
                let shown = if mode_word.is_empty() {
                    self.rest_of_clause()
                } else {
                    mode_word
                };
                return Err(self.err_at(at, PatternErrorKind::UnknownMode(shown)));
            }
        };
        self.skip_ws();
        if self.peek() != Some(':') {
            return Err(self.err(PatternErrorKind::Expected("':' after mode")));
        }
        self.bump();
        let (at, every) = self.word();
        if every != "every" {
            return Err(self.err_at(at, PatternErrorKind::Expected("'every'")));
        }
        let months = self.months()?;

        self.skip_ws();
        let save = self.pos;
        let (on_at, maybe_on) = self.word();
        let days = if maybe_on == "on" {
            if mode == Mode::Perm {
                return Err(self.err_at(on_at, PatternErrorKind::PermWithDayScope));
            }
            self.days()?
        } else {
            self.pos = save;
            DaySpec::Default
        };

        self.skip_ws();
        let op = match self.peek() {
            Some('+') => Op::Add,
            Some('-') => Op::Sub,
            Some('*') => Op::Mul,
            Some('/') => Op::Div,
            Some('^') => Op::Pow,
            _ => return Err(self.err(PatternErrorKind::MissingOperator)),
        };
        self.bump();
        self.skip_ws();
        let num_at = self.pos;
        let raw = self
            .take_while(|c| c != ',' && !c.is_whitespace())
            .to_string();
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| self.err_at(num_at, PatternErrorKind::InvalidNumber(raw.clone())))?;
        if op == Op::Div && value == 0.0 {
            return Err(self.err_at(num_at, PatternErrorKind::DivisionByZero));
        }
        Ok(Pattern {
            mode,
            months,
            days,
            op,
            value,
        })
    }

    fn month_name(&mut self) -> Result<u32, PatternError> {
        let (at, w) = self.word();
        month_number(&w).ok_or_else(|| {
            let shown = if w.is_empty() { self.rest_of_clause() } else { w };
            self.err_at(at, PatternErrorKind::UnknownMonth(shown))
        })
    }

    fn months(&mut self) -> Result<MonthSpec, PatternError> {
        self.skip_ws();
        let save = self.pos;
        let (_, w) = self.word();
        if w == "month" || w == "months" {
            return Ok(MonthSpec::Every);
        }
        self.pos = save;
        let from = self.month_name()?;
        if self.range_dash_then(|c| c.is_ascii_alphabetic()) {
            self.consume_dash();
            let to = self.month_name()?;
            return Ok(MonthSpec::Range(from, to));
        }
        Ok(MonthSpec::Range(from, from))
    }

    fn day_number(&mut self) -> Result<u32, PatternError> {
        self.skip_ws();
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit()).to_string();
        digits
            .parse::<u32>()
            .ok()
            .filter(|d| (1..=31).contains(d))
            .ok_or_else(|| self.err_at(at, PatternErrorKind::UnknownDay(digits)))
    }

    fn days(&mut self) -> Result<DaySpec, PatternError> {
        self.skip_ws();
        let at = self.pos;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let from = self.day_number()?;
            // `on 26 -12` is day 26 minus 12, `on 26-12 +1` a range: a range
            // needs an operator after it.
            let mut to = from;
            if self.range_dash_then(|c| c.is_ascii_digit()) {
                let save = self.pos;
                self.consume_dash();
                let end = self.day_number();
                self.skip_ws();
                let op_follows = self.peek().is_some_and(|c| "+-*/^".contains(c));
                match end {
                    Ok(end) if op_follows => to = end,
                    Err(e) if op_follows => return Err(e),
                    _ => self.pos = save,
                }
            }
            if to < from {
                return Err(self.err_at(at, PatternErrorKind::InvalidDayRange(from, to)));
            }
            return Ok(DaySpec::Range(from, to));
        }
        let (at, w) = self.word();
        match w.as_str() {
            "everyday" => Ok(DaySpec::Everyday),
            "weekdays" => Ok(DaySpec::Weekdays),
            "weekends" => Ok(DaySpec::Weekends),
            _ => {
                let from = weekday_number(&w).ok_or_else(|| {
                    let shown = if w.is_empty() { self.rest_of_clause() } else { w };
                    self.err_at(at, PatternErrorKind::UnknownDay(shown))
                })?;
                if self.range_dash_then(|c| c.is_ascii_alphabetic()) {
                    self.consume_dash();
                    let (at, w) = self.word();
                    let to = weekday_number(&w)
                        .ok_or_else(|| self.err_at(at, PatternErrorKind::UnknownDay(w)))?;
                    Ok(DaySpec::WeekdayRange(from, to))
                } else {
                    Ok(DaySpec::WeekdayRange(from, from))
                }
            }
        }
    }
}

fn month_number(word: &str) -> Option<u32> {
    MONTH_NAMES
        .iter()
        .position(|m| *m == word)
        .or_else(|| MONTH_FULL_NAMES.iter().position(|m| *m == word))
        .map(|i| i as u32 + 1)
}

fn weekday_number(word: &str) -> Option<u32> {
    let wd: Weekday = match word {
        "monday" => Weekday::Mon,
        "tuesday" => Weekday::Tue,
        "wednesday" => Weekday::Wed,
        "thursday" => Weekday::Thu,
        "friday" => Weekday::Fri,
        "saturday" => Weekday::Sat,
        "sunday" => Weekday::Sun,
        _ => {
            let i = WEEKDAY_NAMES.iter().position(|d| *d == word)?;
            return Some(i as u32 + 1);
        }
    };
    Some(wd.number_from_monday())
}

/// A baseline quantity with its modification patterns.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct UsageSpec {
    pub baseline: f64,
    pub patterns: Vec<Pattern>,
}

impl UsageSpec {
    pub fn constant(baseline: f64) -> Self {
        UsageSpec {
            baseline,
            patterns: Vec::new(),
        }
    }

    pub fn parse(baseline: f64, patterns: &str) -> Result<Self, PatternError> {
        Ok(UsageSpec {
            baseline,
            patterns: parse_patterns(patterns)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.baseline == 0.0 && self.patterns.is_empty()
    }

    /// Iterates effective baselines month by month starting at `window_start`.
    pub fn baselines(&self, window_start: YearMonth) -> BaselineTrack<'_> {
        BaselineTrack {
            spec: self,
            month: window_start,
            current: self.baseline.max(0.0),
        }
    }

    pub fn effective_baseline(
        &self,
        window_start: YearMonth,
        month: YearMonth,
    ) -> Result<f64, EvalError> {
        effective_baseline(self, window_start, month)
    }

    pub fn daily_series(
        &self,
        window_start: YearMonth,
        month: YearMonth,
    ) -> Result<Vec<f64>, EvalError> {
        daily_series(self, window_start, month)
    }

    /// Applies this spec's temp patterns to every day of `month` starting from `base`.
    pub fn days_from_baseline(&self, base: f64, month: YearMonth) -> Result<Vec<f64>, EvalError> {
        let temps: Vec<&Pattern> = self
            .patterns
            .iter()
            .filter(|p| p.mode == Mode::Temp && p.applies_to_month(month))
            .collect();
        (1..=month.days())
            .map(|day| {
                temps
                    .iter()
                    .filter(|p| p.days.contains(month, day))
                    .try_fold(base, |v, p| p.op.apply(v, p.value))
            })
            .collect()
    }
}

/// Month-by-month evolution of a baseline under its perm patterns.
pub struct BaselineTrack<'a> {
    spec: &'a UsageSpec,
    month: YearMonth,
    current: f64,
}

impl Iterator for BaselineTrack<'_> {
    type Item = Result<(YearMonth, f64), EvalError>;

    fn next(&mut self) -> Option<Self::Item> {
        let month = self.month;
        let value = self.current;
        for p in &self.spec.patterns {
            if p.mode == Mode::Perm && p.applies_to_month(month) {
                match p.op.apply(self.current, p.value) {
                    Ok(v) => self.current = v,
                    Err(e) => return Some(Err(e)),
                }
            }
        }
        self.month = month.succ();
        Some(Ok((month, value)))
    }
}

/// Baseline in force during `month`: the raw baseline for the first simulated
/// month, then updated by every matching perm pattern at each month boundary.
pub fn effective_baseline(
    spec: &UsageSpec,
    window_start: YearMonth,
    month: YearMonth,
) -> Result<f64, EvalError> {
    if month < window_start {
        return Err(EvalError::BeforeWindow {
            month,
            start: window_start,
        });
    }
    let steps = month.months_since(window_start) as usize;
    let (_, value) = spec
        .baselines(window_start)
        .nth(steps)
        .expect("track is infinite")?;
    Ok(value)
}

/// One value per calendar day of `month`.
pub fn daily_series(
    spec: &UsageSpec,
    window_start: YearMonth,
    month: YearMonth,
) -> Result<Vec<f64>, EvalError> {
    let base = effective_baseline(spec, window_start, month)?;
    spec.days_from_baseline(base, month)
}

/// How a daily series collapses into one monthly quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregation {
    /// Mean over the days of the month (GB-month proration).
    Average,
    SumOfDaily,
    /// Value on the first day.
    Point,
}

/// Collapses a daily series. An empty series yields 0.
pub fn month_quantity(series: &[f64], semantics: Aggregation) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    match semantics {
        Aggregation::Average => series.iter().sum::<f64>() / series.len() as f64,
        Aggregation::SumOfDaily => series.iter().sum(),
        Aggregation::Point => series[0],
    }
}

impl FromStr for UsageSpec {
    type Err = PatternError;

    /// Parses pattern text with a zero baseline.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UsageSpec::parse(0.0, s)
    }
}

#[derive(Serialize, Deserialize)]
struct UsageSpecRepr {
    baseline: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    patterns: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UsageSpecInput {
    Number(f64),
    Full(UsageSpecRepr),
}

impl Serialize for UsageSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        UsageSpecRepr {
            baseline: self.baseline,
            patterns: format_patterns(&self.patterns),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UsageSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = match UsageSpecInput::deserialize(deserializer)? {
            UsageSpecInput::Number(n) => return Ok(UsageSpec::constant(n)),
            UsageSpecInput::Full(r) => r,
        };
        let patterns = parse_patterns(&repr.patterns).map_err(|e| {
            serde::de::Error::custom(format!("in patterns {:?}: {e}", repr.patterns))
        })?;
        Ok(UsageSpec {
            baseline: repr.baseline,
            patterns,
        })
    }
}
