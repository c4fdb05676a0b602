//! Human-like rounding of metric quantities and parsing of free-form answers.

use std::fmt;
use std::sync::LazyLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Mm,
    Cm,
    M,
    Km,
    In,
    Ft,
}

impl Unit {
    pub fn metres(self) -> f64 {
        match self {
            Unit::Mm => 0.001,
            Unit::Cm => 0.01,
            Unit::M => 1.0,
            Unit::Km => 1000.0,
            Unit::In => 0.0254,
            Unit::Ft => 0.3048,
        }
    }

    pub fn is_imperial(self) -> bool {
        matches!(self, Unit::In | Unit::Ft)
    }

    /// `(plural word, singular word)` spellings; abbreviations do not inflect.
    fn words(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Unit::Mm => &[("mm", "mm"), ("millimeters", "millimeter")],
            Unit::Cm => &[("cm", "cm"), ("centimeters", "centimeter")],
            Unit::M => &[("meters", "meter"), ("m", "m"), ("metres", "metre")],
            Unit::Km => &[("km", "km"), ("kilometers", "kilometer")],
            Unit::In => &[("inches", "inch"), ("in", "in")],
            Unit::Ft => &[("feet", "foot"), ("ft", "ft")],
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.words()[0].0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Nearest multiple of `step` (in the option's unit).
    Step(f64),
    /// Keep this many significant figures.
    SigFigs(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOption {
    pub probability: f64,
    pub unit: Unit,
    pub rule: Rule,
}

/// Options applying to values below `upper_m` (and at or above the previous band's bound).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub upper_m: f64,
    pub options: Vec<GridOption>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoundingPolicy {
    pub imperial_probability: f64,
    pub metric: Vec<Band>,
    pub imperial: Vec<Band>,
}

fn band(upper_m: f64, options: &[(f64, Unit, Rule)]) -> Band {
    Band {
        upper_m,
        options: options
            .iter()
            .map(|&(probability, unit, rule)| GridOption { probability, unit, rule })
            .collect(),
    }
}

impl Default for RoundingPolicy {
    fn default() -> Self {
        use Rule::*;
        use Unit::*;
        const INCH: f64 = 0.0254;
        const FOOT: f64 = 0.3048;
        Self {
            imperial_probability: 0.2,
            metric: vec![
                band(0.01, &[(1.0, Mm, Step(1.0))]),
                band(0.1, &[(1.0, Cm, Step(1.0))]),
                band(0.4, &[(0.6, Cm, Step(5.0)), (0.3, Cm, Step(10.0)), (0.1, Cm, Step(1.0))]),
                band(1.0, &[(0.9375, M, Step(0.5)), (0.0625, Cm, Step(10.0))]),
                band(10.0, &[(0.75, M, Step(1.0)), (0.25, M, Step(0.5))]),
                band(100.0, &[(1.0, M, SigFigs(1))]),
                band(1000.0, &[(0.8, M, SigFigs(1)), (0.2, M, SigFigs(2))]),
                band(f64::INFINITY, &[(0.8, Km, SigFigs(1)), (0.2, Km, SigFigs(2))]),
            ],
            imperial: vec![
                band(INCH, &[(1.0, In, Step(0.1))]),
                band(FOOT, &[(1.0, In, Step(1.0))]),
                band(10.0 * FOOT, &[(0.75, Ft, Step(1.0)), (0.25, Ft, Step(0.5))]),
                band(100.0 * FOOT, &[(0.7, Ft, SigFigs(1)), (0.3, Ft, Step(5.0))]),
                band(f64::INFINITY, &[(0.8, Ft, SigFigs(1)), (0.2, Ft, SigFigs(2))]),
            ],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("cannot round negative or non-finite value {0}")]
    NegativeValue(f64),
    #[error("invalid rounding policy: {0}")]
    InvalidPolicy(String),
}

impl RoundingPolicy {
    pub fn validate(&self) -> Result<(), AlignError> {
        let bad = |m: String| Err(AlignError::InvalidPolicy(m));
        if !(0.0..=1.0).contains(&self.imperial_probability) {
            return bad(format!("imperial_probability {} outside [0,1]", self.imperial_probability));
        }
        for (name, bands) in [("metric", &self.metric), ("imperial", &self.imperial)] {
            if bands.last().is_none_or(|b| b.upper_m != f64::INFINITY) {
                return bad(format!("{name} bands must end with upper_m = inf"));
            }
            for (i, b) in bands.iter().enumerate() {
                if i > 0 && b.upper_m <= bands[i - 1].upper_m {
                    return bad(format!("{name} band {i} bounds not increasing"));
                }
                let total: f64 = b.options.iter().map(|o| o.probability).sum();
                if (total - 1.0).abs() > 1e-9 || b.options.iter().any(|o| o.probability < 0.0) {
                    return bad(format!("{name} band {i} probabilities sum to {total}"));
                }
                for o in &b.options {
                    let ok = match o.rule {
                        Rule::Step(s) => s > 0.0 && s.is_finite(),
                        Rule::SigFigs(d) => (1..=6).contains(&d),
                    };
                    if !ok {
                        return bad(format!("{name} band {i} has invalid rule {:?}", o.rule));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which policy entry produced a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleRef {
    pub imperial: bool,
    pub band: usize,
    pub option: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub value_si: f64,
    pub unit: Unit,
    pub display_value: f64,
    /// Half of the rounding grid, in metres.
    pub half_step_si: f64,
    pub phrasing: String,
    pub source: RuleRef,
}

impl Quantity {
    pub fn display_si(&self) -> f64 {
        self.display_value * self.unit.metres()
    }
}

fn decimals_of(step: f64) -> usize {
    (0..=9)
        .find(|&d| {
            let s = step * 10f64.powi(d as i32);
            (s - s.round()).abs() < 1e-9 * s.abs().max(1.0)
        })
        .unwrap_or(9)
}

fn render_number(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn pick<R: Rng + ?Sized>(options: &[GridOption], rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, o) in options.iter().enumerate() {
        acc += o.probability;
        if x < acc {
            return i;
        }
    }
    options.len() - 1
}

/// Applies a single grid option.
pub fn round_with(value_si: f64, option: &GridOption) -> (f64, usize, f64) {
    let v = value_si / option.unit.metres();
    let (step, decimals) = match option.rule {
        Rule::Step(step) => (step, decimals_of(step)),
        Rule::SigFigs(d) => {
            let exp = if v > 0.0 { v.log10().floor() as i32 } else { 0 };
            let p = 10f64.powi(exp - d as i32 + 1);
            (p, (-(exp - d as i32 + 1)).max(0) as usize)
        }
    };
    let mut display = (v / step).round() * step;
    if display == 0.0 && v > 0.0 {
        display = step;
    }
    let display: f64 = render_number(display, decimals).parse().unwrap_or(display);
    (display, decimals, step * option.unit.metres() / 2.0)
}

/// Draws a human-like surface form for `value_si` metres.
pub fn round_human<R: Rng + ?Sized>(value_si: f64, policy: &RoundingPolicy, rng: &mut R) -> Result<Quantity, AlignError> {
    if !value_si.is_finite() || value_si < 0.0 {
        return Err(AlignError::NegativeValue(value_si));
    }
    let imperial = rng.random::<f64>() < policy.imperial_probability;
    let bands = if imperial { &policy.imperial } else { &policy.metric };
    let band = bands
        .iter()
        .position(|b| value_si < b.upper_m)
        .unwrap_or(bands.len().saturating_sub(1));
    let options = &bands
        .get(band)
        .ok_or_else(|| AlignError::InvalidPolicy("no bands".into()))?
        .options;
    let option = pick(options, rng);
    let opt = &options[option];
    let (display, decimals, half_step_si) = round_with(value_si, opt);
    let words = opt.unit.words();
    let (plural, singular) = words[rng.random_range(0..words.len())];
    let number = render_number(display, decimals);
    let phrasing = if opt.unit == Unit::M && display == 0.5 && plural == "meters" {
        "half a meter".to_string()
    } else if display == 1.0 {
        format!("{number} {singular}")
    } else {
        format!("{number} {plural}")
    };
    Ok(Quantity {
        value_si,
        unit: opt.unit,
        display_value: display,
        half_step_si,
        phrasing,
        source: RuleRef { imperial, band, option },
    })
}

pub fn format_quantity(q: &Quantity) -> String {
    q.phrasing.clone()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsedQuantity {
    pub value_si: f64,
    /// No unit was found; the number was read as metres.
    pub assumed_unit: bool,
}

const NUMBER: &str = r"(?P<num>\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+|\b(?:half|zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety|hundred)\b)";
const UNIT: &str = r"(?P<unit>millimet(?:er|re)s?|mm|centimet(?:er|re)s?|cm|kilomet(?:er|re)s?|km|met(?:er|re)s?|m|feet|foot|ft|inch(?:es)?|in|yards?|yd)";

static QUANTITY_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i){NUMBER}(?:\s*-?\s*(?:(?:a|an)\s+)?{UNIT}\b)?")).expect("valid regex")
});

fn word_value(w: &str) -> Option<f64> {
    const WORDS: [&str; 20] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
        "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    ];
    const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
    let w = w.to_ascii_lowercase();
    if w == "half" {
        return Some(0.5);
    }
    if w == "hundred" {
        return Some(100.0);
    }
    if let Some(i) = WORDS.iter().position(|&x| x == w) {
        return Some(i as f64);
    }
    TENS.iter().position(|&x| x == w).map(|i| 20.0 + 10.0 * i as f64)
}

fn unit_metres(u: &str) -> f64 {
    let u = u.to_ascii_lowercase();
    match u.as_str() {
        "mm" => 0.001,
        "cm" => 0.01,
        "km" => 1000.0,
        "m" => 1.0,
        "feet" | "foot" | "ft" => 0.3048,
        "in" => 0.0254,
        "yd" => 0.9144,
        _ if u.starts_with("milli") => 0.001,
        _ if u.starts_with("centi") => 0.01,
        _ if u.starts_with("kilo") => 1000.0,
        _ if u.starts_with("met") => 1.0,
        _ if u.starts_with("inch") => 0.0254,
        _ if u.starts_with("yard") => 0.9144,
        _ => 1.0,
    }
}

/// Reads the first number that carries a length unit, or failing that the
/// first bare number (taken as metres). A foot value directly followed by an
/// inch value is summed ("5 feet 3 inches").
pub fn parse_quantity(text: &str) -> Option<ParsedQuantity> {
    let mut first_bare = None;
    let mut caps = QUANTITY_RE.captures_iter(text).peekable();
    while let Some(c) = caps.next() {
        let raw = c.name("num")?.as_str();
        let value = match raw.chars().next()? {
            ch if ch.is_ascii_digit() || ch == '.' => raw.replace(',', "").parse::<f64>().ok()?,
            _ => word_value(raw)?,
        };
        match c.name("unit") {
            Some(u) => {
                let factor = unit_metres(u.as_str());
                let mut si = value * factor;
                if factor == 0.3048 {
                    if let Some(next) = caps.peek() {
                        let between = &text[c.get(0)?.end()..next.get(0)?.start()];
                        let inch = next.name("unit").is_some_and(|u| unit_metres(u.as_str()) == 0.0254);
                        if inch && matches!(between.trim(), "" | "," | "and" | ", and") {
                            if let Some(n) = next.name("num").and_then(|n| n.as_str().parse::<f64>().ok()) {
                                si += n * 0.0254;
                            }
                        }
                    }
                }
                return Some(ParsedQuantity {
                    value_si: si,
                    assumed_unit: false,
                });
            }
            None => {
                first_bare.get_or_insert(value);
            }
        }
    }
    first_bare.map(|v| ParsedQuantity {
        value_si: v,
        assumed_unit: true,
    })
}

/// Every number-with-unit span in `text` with its value in metres.
pub fn find_quantities(text: &str) -> Vec<(std::ops::Range<usize>, f64)> {
    QUANTITY_RE
        .captures_iter(text)
        .filter_map(|c| {
            let unit = c.name("unit")?;
            let raw = c.name("num")?.as_str();
            let value = match raw.chars().next()? {
                ch if ch.is_ascii_digit() || ch == '.' => raw.replace(',', "").parse::<f64>().ok()?,
                _ => word_value(raw)?,
            };
            let whole = c.get(0)?;
            Some((whole.start()..unit.end(), value * unit_metres(unit.as_str())))
        })
        .collect()
}

/// Mean of several sampled estimates; sharper than any single rounded draw.
pub fn mean_estimate(samples: &[f64]) -> Option<f64> {
    (!samples.is_empty()).then(|| samples.iter().sum::<f64>() / samples.len() as f64)
}
