//! Set equality, intersection and missing-element tasks over ordered element
//! domains. Elements are ordinals; each domain renders and parses them.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use chrono::{Days, NaiveDate};

use crate::env::{jaccard, normalize_word, DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::rng::TaskRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Integers,
    English,
    French,
    IsoDate,
    DayMonthYear,
    LongDate,
    Letters,
}

pub const DOMAINS: [Domain; 7] = [
    Domain::Integers,
    Domain::English,
    Domain::French,
    Domain::IsoDate,
    Domain::DayMonthYear,
    Domain::LongDate,
    Domain::Letters,
];

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

const UNITES: [&str; 20] = [
    "zéro", "un", "deux", "trois", "quatre", "cinq", "six", "sept", "huit", "neuf", "dix", "onze", "douze", "treize",
    "quatorze", "quinze", "seize", "dix-sept", "dix-huit", "dix-neuf",
];
const DIZAINES: [&str; 7] = ["", "", "vingt", "trente", "quarante", "cinquante", "soixante"];

pub fn english(n: u32) -> String {
    let below100 = |n: u32| -> String {
        if n < 20 {
            ONES[n as usize].to_string()
        } else if n.is_multiple_of(10) {
            TENS[(n / 10) as usize].to_string()
        } else {
            format!("{}-{}", TENS[(n / 10) as usize], ONES[(n % 10) as usize])
        }
    };
    match (n / 100, n % 100) {
        (0, r) => below100(r),
        (h, 0) => format!("{} hundred", ONES[h as usize]),
        (h, r) => format!("{} hundred and {}", ONES[h as usize], below100(r)),
    }
}

fn french_below100(n: u32) -> String {
    match n {
        0..=19 => UNITES[n as usize].to_string(),
        20..=69 => {
            let (t, u) = (DIZAINES[(n / 10) as usize], n % 10);
            match u {
                0 => t.to_string(),
                1 => format!("{t} et un"),
                _ => format!("{t}-{}", UNITES[u as usize]),
            }
        }
        71 => "soixante et onze".into(),
        70..=79 => format!("soixante-{}", UNITES[(n - 60) as usize]),
        80 => "quatre-vingts".into(),
        _ => format!("quatre-vingt-{}", UNITES[(n - 80) as usize]),
    }
}

pub fn french(n: u32) -> String {
    match (n / 100, n % 100) {
        (0, r) => french_below100(r),
        (1, 0) => "cent".into(),
        (1, r) => format!("cent {}", french_below100(r)),
        (h, 0) => format!("{} cents", UNITES[h as usize]),
        (h, r) => format!("{} cent {}", UNITES[h as usize], french_below100(r)),
    }
}

/// Bijective base 26: 1 is `a`, 26 is `z`, 27 is `aa`.
pub fn letters(mut n: u64) -> String {
    let mut out = Vec::new();
    while n > 0 {
        n -= 1;
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

pub fn parse_letters(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 8 || !s.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    Some(s.bytes().fold(0, |acc, b| acc * 26 + u64::from(b - b'a' + 1)))
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date")
}

fn word_table(domain: Domain) -> &'static HashMap<String, i64> {
    static EN: OnceLock<HashMap<String, i64>> = OnceLock::new();
    static FR: OnceLock<HashMap<String, i64>> = OnceLock::new();
    let build = |f: fn(u32) -> String| (0..1000).map(|n| (f(n), i64::from(n))).collect();
    match domain {
        Domain::English => EN.get_or_init(|| build(english)),
        _ => FR.get_or_init(|| build(french)),
    }
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Integers => "integers",
            Domain::English => "english_numbers",
            Domain::French => "french_numbers",
            Domain::IsoDate => "iso_dates",
            Domain::DayMonthYear => "dmy_dates",
            Domain::LongDate => "long_dates",
            Domain::Letters => "letters",
        }
    }

    pub fn from_name(name: &str) -> Option<Domain> {
        DOMAINS.iter().copied().find(|d| d.name() == name)
    }

    /// Inclusive ordinal range.
    pub fn range(self) -> (i64, i64) {
        match self {
            Domain::Integers | Domain::English | Domain::French => (0, 999),
            Domain::IsoDate | Domain::DayMonthYear | Domain::LongDate => (0, 10_956),
            Domain::Letters => (1, 18_278),
        }
    }

    pub fn is_numeric(self) -> bool {
        self == Domain::Integers
    }

    pub fn render(self, v: i64) -> String {
        let date = || epoch().checked_add_days(Days::new(v as u64)).expect("date in range");
        match self {
            Domain::Integers => v.to_string(),
            Domain::English => english(v as u32),
            Domain::French => french(v as u32),
            Domain::IsoDate => date().format("%Y-%m-%d").to_string(),
            Domain::DayMonthYear => date().format("%d-%m-%Y").to_string(),
            Domain::LongDate => date().format("%-d %B %Y").to_string(),
            Domain::Letters => letters(v as u64),
        }
    }

    pub fn parse(self, text: &str) -> Option<i64> {
        let t = text.trim();
        let (lo, hi) = self.range();
        let date = |fmt: &str| NaiveDate::parse_from_str(t, fmt).ok().map(|d| (d - epoch()).num_days());
        let v = match self {
            Domain::Integers => t.parse().ok(),
            Domain::English | Domain::French => word_table(self).get(&t.to_lowercase()).copied(),
            Domain::IsoDate => date("%Y-%m-%d"),
            Domain::DayMonthYear => date("%d-%m-%Y"),
            Domain::LongDate => date("%d %B %Y"),
            Domain::Letters => parse_letters(&t.to_lowercase()).and_then(|v| i64::try_from(v).ok()),
        }?;
        (lo..=hi).contains(&v).then_some(v)
    }

    /// One element as Python would print it inside a list.
    pub fn repr(self, v: i64) -> String {
        if self.is_numeric() {
            self.render(v)
        } else {
            format!("'{}'", self.render(v))
        }
    }

    pub fn list(self, xs: &[i64]) -> String {
        format!("[{}]", xs.iter().map(|&x| self.repr(x)).collect::<Vec<_>>().join(", "))
    }

    /// Python set display in domain order; `set()` when empty.
    pub fn set(self, xs: &BTreeSet<i64>) -> String {
        if xs.is_empty() {
            return "set()".into();
        }
        format!("{{{}}}", xs.iter().map(|&x| self.repr(x)).collect::<Vec<_>>().join(", "))
    }

    fn sample_distinct(self, k: usize, avoid: &BTreeSet<i64>, rng: &mut TaskRng) -> Vec<i64> {
        let (lo, hi) = self.range();
        let mut seen = avoid.clone();
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let v = rng.range_i64(lo, hi);
            if seen.insert(v) {
                out.push(v);
            }
        }
        out
    }
}

/// Splits a list or set literal into element strings, honouring quotes.
pub fn split_elements(text: &str) -> Option<Vec<String>> {
    let t = text.trim().trim_matches('`').trim();
    if t == "set()" {
        return Some(Vec::new());
    }
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .or_else(|| t.strip_prefix('[').and_then(|s| s.strip_suffix(']')))?;
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for c in inner.chars() {
        match (quote, c) {
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), _) if c == q => quote = None,
            (None, ',') => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if quote.is_some() {
        return None;
    }
    out.push(cur);
    let out: Vec<String> = out.into_iter().map(|s| s.trim().to_string()).collect();
    if out.len() == 1 && out[0].is_empty() {
        return Some(Vec::new());
    }
    if out.iter().any(String::is_empty) {
        return None;
    }
    Some(out)
}

pub fn parse_set(domain: Domain, text: &str) -> Option<BTreeSet<i64>> {
    split_elements(text)?.iter().map(|e| domain.parse(e)).collect()
}

/// The single gap in an otherwise contiguous run, if there is exactly one.
pub fn missing_element(domain: Domain, elems: &[String]) -> Option<String> {
    let vals: BTreeSet<i64> = elems.iter().map(|e| domain.parse(e)).collect::<Option<_>>()?;
    let (lo, hi) = (*vals.first()?, *vals.last()?);
    let gaps: Vec<i64> = (lo..=hi).filter(|v| !vals.contains(v)).collect();
    (gaps.len() == 1).then(|| domain.render(gaps[0]))
}

fn pick_domain(rng: &mut TaskRng) -> Domain {
    *rng.choose(&DOMAINS)
}

fn domain_of(instance: &TaskInstance) -> Option<Domain> {
    Domain::from_name(instance.meta("domain")?.as_str()?)
}

pub struct SetEquality;

impl Task for SetEquality {
    fn name(&self) -> &'static str {
        "set_equality"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("size", 8.0, 2.0, 3.0, 40.0),
            ParamSpec::discrete("perturbations", 1.0, 0.3, 1.0, 5.0),
            ParamSpec::continuous("p_equal", 0.5, 0.0, 0.0, 1.0),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let domain = pick_domain(rng);
        let n = params.usize("size").max(1);
        let first = domain.sample_distinct(n, &BTreeSet::new(), rng);
        let mut second = first.clone();
        if !rng.chance(params.get("p_equal")) {
            for _ in 0..params.usize("perturbations").max(1) {
                let used: BTreeSet<i64> = first.iter().chain(&second).copied().collect();
                match rng.below(3) {
                    0 => second.insert(rng.below(second.len() + 1), domain.sample_distinct(1, &used, rng)[0]),
                    1 if second.len() > 1 => {
                        second.remove(rng.below(second.len()));
                    }
                    _ => {
                        let i = rng.below(second.len());
                        second[i] = domain.sample_distinct(1, &used, rng)[0];
                    }
                }
            }
        }
        rng.shuffle(&mut second);
        // The label is recomputed, never assumed from the branch taken.
        let (mut a, mut b) = (first.clone(), second.clone());
        a.sort_unstable();
        b.sort_unstable();
        let equal = a == b;
        let prompt = format!(
            "Set1: {}\nSet2: {}\nOnly return True if Set1 and Set2 contain exactly the same elements, False otherwise.",
            domain.list(&first),
            domain.list(&second)
        );
        Ok(Generated::new(prompt, if equal { "True" } else { "False" })
            .meta("domain", domain.name())
            .meta("set1", first.iter().map(|&x| domain.render(x)).collect::<Vec<_>>())
            .meta("set2", second.iter().map(|&x| domain.render(x)).collect::<Vec<_>>())
            .meta("size", n))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let got = normalize_word(candidate);
        if got != "true" && got != "false" {
            return ScoreResult::parse_error("expected True or False");
        }
        ScoreResult::binary(got == instance.answer.to_lowercase())
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("size")?.as_f64()
    }
}

pub fn intersection_prompt(domain: Domain, first: &[i64], second: &[i64]) -> String {
    format!(
        "Set1: {}\nSet2: {}\nOnly return the intersection of Set1 and Set2 as a Python set: {{elem_1, elem_2, ..., elem_n}}.",
        domain.list(first),
        domain.list(second)
    )
}

/// Jaccard similarity between the parsed candidate and the true set.
pub fn score_intersection(domain: Domain, truth: &BTreeSet<i64>, candidate: &str) -> ScoreResult {
    match parse_set(domain, candidate) {
        Some(got) => {
            let r = jaccard(&got, truth);
            ScoreResult::new(r).with("jaccard", r)
        }
        None => ScoreResult::parse_error("expected a set such as {a, b}"),
    }
}

pub struct SetIntersection;

impl Task for SetIntersection {
    fn name(&self) -> &'static str {
        "set_intersection"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("size", 8.0, 2.0, 3.0, 40.0),
            ParamSpec::discrete("size2", 5.0, 1.5, 2.0, 30.0),
            ParamSpec::continuous("overlap", 0.5, 0.0, 0.1, 0.9),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let domain = pick_domain(rng);
        let n = params.usize("size").max(1);
        let m = params.usize("size2").max(2);
        let first = domain.sample_distinct(n, &BTreeSet::new(), rng);
        let shared = ((m as f64 * params.get("overlap")).round() as usize).clamp(1, n.min(m - 1));
        let mut second: Vec<i64> = rng.sample_indices(n, shared).into_iter().map(|i| first[i]).collect();
        let used: BTreeSet<i64> = first.iter().copied().collect();
        second.extend(domain.sample_distinct(m - shared, &used, rng));
        rng.shuffle(&mut second);
        let a: BTreeSet<i64> = first.iter().copied().collect();
        let b: BTreeSet<i64> = second.iter().copied().collect();
        let truth: BTreeSet<i64> = a.intersection(&b).copied().collect();
        Ok(Generated::new(intersection_prompt(domain, &first, &second), domain.set(&truth))
            .meta("domain", domain.name())
            .meta("size", n))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(domain) = domain_of(instance) else {
            return ScoreResult::new(0.0).with("error", "instance lacks a domain");
        };
        let Some(truth) = parse_set(domain, &instance.answer) else {
            return ScoreResult::new(0.0).with("error", "instance answer does not parse");
        };
        score_intersection(domain, &truth, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("size")?.as_f64()
    }
}

pub fn missing_prompt(domain: Domain, shown: &[i64]) -> String {
    format!("Set_A: {}\nOnly return the string element missing from Set_A.", domain.list(shown))
}

fn normalize_element(s: &str) -> String {
    let t = s.trim().trim_matches(|c| c == '`' || c == '\'' || c == '"').trim();
    t.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

pub struct SetMissingElement;

impl Task for SetMissingElement {
    fn name(&self) -> &'static str {
        "set_missing_element"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![ParamSpec::discrete("run", 6.0, 2.0, 3.0, 40.0)])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let domain = pick_domain(rng);
        let m = params.usize("run").max(3);
        let (lo, hi) = domain.range();
        let start = rng.range_i64(lo, hi - m as i64 + 1);
        let missing = start + rng.range_i64(1, m as i64 - 2);
        let mut shown: Vec<i64> = (start..start + m as i64).filter(|&v| v != missing).collect();
        rng.shuffle(&mut shown);
        Ok(Generated::new(missing_prompt(domain, &shown), domain.render(missing))
            .meta("domain", domain.name())
            .meta("size", m))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        ScoreResult::binary(!candidate.trim().is_empty() && normalize_element(candidate) == normalize_element(&instance.answer))
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("size")?.as_f64()
    }
}
