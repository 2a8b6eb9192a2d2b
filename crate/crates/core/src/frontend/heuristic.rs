//! Keyword and fuzzy-match parsing of natural language queries into ranked specifications.

use indexmap::IndexMap;

use crate::ctype::ColumnType;
use crate::program::{Channel, PlotKind};
use crate::qualifier::{Qualifier, SynAtom};
use crate::synth::ScoredSpec;
use crate::table::{OpTag, Table};
use crate::types::{BaseType, RefinementType, Schema};

/// Minimum normalized similarity for a query phrase to name a column.
pub const MATCH_THRESHOLD: f64 = 0.55;
pub const SLOT_CANDIDATES: usize = 2;
pub const MAX_SPECS: usize = 16;
const NO_MATCH_SCORE: f64 = 0.1;
/// Confidence that an intent without any keyword is absent.
const ABSENT: f64 = 0.9;
const PART_WEIGHT: f64 = 0.8;
const SYNONYM_WEIGHT: f64 = 0.9;

const PLOT_WORDS: &[(&str, PlotKind)] = &[
    ("bar", PlotKind::Bar),
    ("bars", PlotKind::Bar),
    ("histogram", PlotKind::Bar),
    ("scatter", PlotKind::Scatter),
    ("scatterplot", PlotKind::Scatter),
    ("point", PlotKind::Scatter),
    ("points", PlotKind::Scatter),
    ("line", PlotKind::Line),
    ("lines", PlotKind::Line),
    ("trend", PlotKind::Line),
    ("trends", PlotKind::Line),
    ("area", PlotKind::Area),
];
const MEAN_WORDS: &[&str] = &["average", "averages", "mean", "avg"];
const SUM_WORDS: &[&str] = &["total", "totals", "sum"];
const COUNT_WORDS: &[&str] = &["number of", "count", "counts", "how many"];
const COLOR_WORDS: &[&str] = &[
    "colored by",
    "coloured by",
    "color",
    "colour",
    "colored",
    "coloured",
];
const GROUP_WORDS: &[&str] = &[
    "segregated",
    "grouped",
    "group",
    "split",
    "separated",
    "broken down",
    "faceted",
];
const SYNONYMS: &[(&str, &[&str])] = &[
    ("country", &["origin", "nation", "region"]),
    ("countries", &["origin", "nation", "region"]),
    ("efficiency", &["economy", "mileage", "mpg"]),
    ("mileage", &["economy", "mpg"]),
    ("price", &["cost"]),
    ("cost", &["price"]),
    ("year", &["date", "time"]),
    ("time", &["date", "year"]),
    ("type", &["style", "kind", "category"]),
    ("kind", &["type", "style", "category"]),
];

/// One property decision with its confidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision<T> {
    pub value: T,
    pub confidence: f64,
}

/// An optional slot: absent, or present with candidate columns.
pub type SlotDecision = Decision<Option<Decision<String>>>;

/// Per-property alternatives: plot type, color, subplot, and the three aggregates. Positive
/// decisions carry the candidate columns filling their slot.
#[derive(Clone, Debug, PartialEq)]
pub struct IntentPrediction {
    pub plot: Vec<Decision<PlotKind>>,
    pub color: Vec<SlotDecision>,
    pub subplot: Vec<SlotDecision>,
    pub aggregates: Vec<(OpTag, Vec<SlotDecision>)>,
    /// Columns the query mentions, with match confidence, in order of appearance.
    pub columns: IndexMap<String, f64>,
}

/// Probability of one choice of decisions: the product of the intent confidences and, for
/// positive intents, the slot confidences.
pub fn score(intents: impl IntoIterator<Item = (f64, Option<f64>)>) -> f64 {
    intents
        .into_iter()
        .map(|(c, slot)| c * slot.unwrap_or(1.0))
        .product()
}

struct Token {
    text: String,
    pos: usize,
}

fn tokenize(query: &str) -> Vec<Token> {
    query
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .enumerate()
        .map(|(pos, w)| Token {
            text: w.to_string(),
            pos,
        })
        .collect()
}

/// Position of the first occurrence of any phrase.
fn find(tokens: &[Token], phrases: &[&str]) -> Option<usize> {
    let words: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    phrases
        .iter()
        .filter_map(|p| {
            let p: Vec<&str> = p.split(' ').collect();
            words.windows(p.len()).position(|w| w == p.as_slice())
        })
        .min()
}

fn normalize(name: &str) -> String {
    name.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

/// Best match of a column against the query: confidence and token position.
fn match_column(tokens: &[Token], column: &str) -> Option<(f64, usize)> {
    let name = normalize(column);
    let parts: Vec<&str> = name.split(' ').filter(|p| p.len() >= 3).collect();
    let mut best: Option<(f64, usize)> = None;
    let mut offer = |s: f64, pos: usize| {
        if s >= MATCH_THRESHOLD && best.is_none_or(|(b, _)| s > b) {
            best = Some((s, pos));
        }
    };
    for n in 1..=3 {
        for w in tokens.windows(n) {
            let phrase = w
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            offer(similarity(&phrase, &name), w[0].pos);
        }
    }
    for t in tokens {
        let synonyms = SYNONYMS
            .iter()
            .find(|(w, _)| *w == t.text)
            .map_or(&[][..], |(_, s)| *s);
        for s in synonyms {
            offer(SYNONYM_WEIGHT * similarity(s, &name), t.pos);
        }
        if t.text.len() < 3 {
            continue;
        }
        for p in &parts {
            offer(PART_WEIGHT * similarity(&t.text, p), t.pos);
            for s in synonyms {
                offer(PART_WEIGHT * SYNONYM_WEIGHT * similarity(s, p), t.pos);
            }
        }
    }
    best
}

/// Slot candidates: columns after `anchor` by distance, otherwise every match by confidence.
fn slot(
    matches: &[(String, f64, usize)],
    anchor: Option<usize>,
    keep: impl Fn(&str) -> bool,
) -> Vec<Decision<String>> {
    let mut cands: Vec<&(String, f64, usize)> = matches.iter().filter(|m| keep(&m.0)).collect();
    let after: Vec<&(String, f64, usize)> = match anchor {
        Some(a) => cands.iter().copied().filter(|m| m.2 > a).collect(),
        None => Vec::new(),
    };
    if !after.is_empty() {
        cands = after;
        cands.sort_by(|x, y| x.2.cmp(&y.2).then(y.1.total_cmp(&x.1)));
    } else {
        cands.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.2.cmp(&y.2)));
    }
    cands
        .into_iter()
        .take(SLOT_CANDIDATES)
        .map(|m| Decision {
            value: m.0.clone(),
            confidence: m.1,
        })
        .collect()
}

/// Alternatives for a yes/no intent. An intent whose slot cannot be filled is downgraded to no.
fn binary(yes: f64, slots: Vec<Decision<String>>) -> Vec<SlotDecision> {
    if yes <= 0.0 {
        return vec![Decision {
            value: None,
            confidence: ABSENT,
        }];
    }
    let no = Decision {
        value: None,
        confidence: 1.0 - yes,
    };
    if slots.is_empty() {
        return vec![no];
    }
    let mut out: Vec<_> = slots
        .into_iter()
        .map(|s| Decision {
            value: Some(s),
            confidence: yes,
        })
        .collect();
    out.push(no);
    out
}

/// Keyword intents and column slots for `query` over `t`.
pub fn predict(query: &str, t: &Table) -> IntentPrediction {
    let tokens = tokenize(query);
    let mut matches: Vec<(String, f64, usize)> = t
        .columns()
        .iter()
        .filter_map(|c| match_column(&tokens, &c.name).map(|(s, p)| (c.name.clone(), s, p)))
        .collect();
    matches.sort_by(|a, b| a.2.cmp(&b.2).then(b.1.total_cmp(&a.1)));
    let columns: IndexMap<String, f64> = matches.iter().map(|m| (m.0.clone(), m.1)).collect();
    let is_quantitative = |c: &str| t.column_type(c).is_some_and(ColumnType::is_quantitative);

    let plot_kw = tokens.iter().find_map(|tok| {
        PLOT_WORDS
            .iter()
            .find(|(w, _)| *w == tok.text)
            .map(|(_, k)| *k)
    });
    let has_temporal = matches
        .iter()
        .any(|m| t.column_type(&m.0) == Some(ColumnType::Temporal));
    let plot = match plot_kw {
        Some(k) => vec![Decision {
            value: k,
            confidence: 0.9,
        }],
        None if has_temporal => {
            vec![
                Decision {
                    value: PlotKind::Line,
                    confidence: 0.6,
                },
                Decision {
                    value: PlotKind::Bar,
                    confidence: 0.4,
                },
            ]
        }
        None => vec![
            Decision {
                value: PlotKind::Bar,
                confidence: 0.6,
            },
            Decision {
                value: PlotKind::Scatter,
                confidence: 0.4,
            },
        ],
    };

    let color_at = find(&tokens, COLOR_WORDS);
    let group_at = find(&tokens, GROUP_WORDS);
    let (color_yes, subplot_yes) = match (color_at, group_at) {
        (Some(_), _) => (0.85, 0.0),
        (None, Some(_)) => (0.4, 0.6),
        (None, None) => (0.0, 0.0),
    };
    let any = |_: &str| true;
    let color = binary(color_yes, slot(&matches, color_at.or(group_at), any));
    let subplot = binary(subplot_yes, slot(&matches, group_at, any));

    let mean_at = find(&tokens, MEAN_WORDS);
    let sum_at = find(&tokens, SUM_WORDS);
    let count_at = find(&tokens, COUNT_WORDS);
    let no_aggregate = mean_at.is_none() && sum_at.is_none() && count_at.is_none();
    let mean_yes = match mean_at {
        Some(_) => 0.9,
        None if no_aggregate && group_at.or(color_at).is_some() => 0.65,
        None => 0.0,
    };
    let aggregates = vec![
        (
            OpTag::Mean,
            binary(mean_yes, slot(&matches, mean_at, is_quantitative)),
        ),
        (
            OpTag::Sum,
            binary(
                if sum_at.is_some() { 0.9 } else { 0.0 },
                slot(&matches, sum_at, is_quantitative),
            ),
        ),
        (
            OpTag::Count,
            binary(
                if count_at.is_some() { 0.9 } else { 0.0 },
                slot(&matches, count_at, any),
            ),
        ),
    ];
    IntentPrediction {
        plot,
        color,
        subplot,
        aggregates,
        columns,
    }
}

fn conf(d: &SlotDecision) -> (f64, Option<f64>) {
    (d.confidence, d.value.as_ref().map(|s| s.confidence))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Forbid aggregates the query gives no sign of, on every mentioned column.
    pub negate_absent_aggregates: bool,
}

/// Ranked specifications for a query: the cross product of intent alternatives, scored by
/// the product of confidences, best first and at most `MAX_SPECS` of them.
pub fn heuristic_parse(query: &str, t: &Table) -> Vec<ScoredSpec> {
    heuristic_parse_with(query, t, &ParseOptions::default())
}

pub fn heuristic_parse_with(query: &str, t: &Table, opts: &ParseOptions) -> Vec<ScoredSpec> {
    let p = predict(query, t);
    let schema: Schema = p
        .columns
        .keys()
        .map(|c| (c.clone(), ColumnType::Top))
        .collect();
    let keywords = p.plot.len() == 1
        || p.color.iter().chain(&p.subplot).any(|d| d.value.is_some())
        || p.aggregates
            .iter()
            .any(|(_, ds)| ds.iter().any(|d| d.value.is_some()));
    if !keywords && p.columns.is_empty() {
        return vec![ScoredSpec {
            plot: RefinementType::scalar(BaseType::Plot(PlotKind::Bar), Qualifier::True),
            table: RefinementType::table(Schema::new(), Qualifier::True),
            score: NO_MATCH_SCORE,
        }];
    }

    let mut out: Vec<ScoredSpec> = Vec::new();
    let (mean, sum, count) = (&p.aggregates[0], &p.aggregates[1], &p.aggregates[2]);
    for kind in &p.plot {
        for color in &p.color {
            for subplot in &p.subplot {
                let (cc, sc) = (
                    color.value.as_ref().map(|d| &d.value),
                    subplot.value.as_ref().map(|d| &d.value),
                );
                if cc.is_some() && cc == sc {
                    continue;
                }
                for m in &mean.1 {
                    for s in &sum.1 {
                        for c in &count.1 {
                            let mut plot_q = Vec::new();
                            if let Some(col) = cc {
                                plot_q.push(Qualifier::syn(SynAtom::channel(
                                    Channel::Color,
                                    col.clone(),
                                )));
                            }
                            if let Some(col) = sc {
                                plot_q.push(Qualifier::syn(SynAtom::channel(
                                    Channel::Subplot,
                                    col.clone(),
                                )));
                            }
                            let mut table_q = Vec::new();
                            for (tag, d) in [(mean.0, m), (sum.0, s), (count.0, c)] {
                                match &d.value {
                                    Some(col) => table_q.push(Qualifier::syn(SynAtom::column_op(
                                        col.value.clone(),
                                        tag,
                                    ))),
                                    None if opts.negate_absent_aggregates
                                        && d.confidence >= ABSENT =>
                                    {
                                        table_q.extend(schema.keys().map(|c| {
                                            Qualifier::not(Qualifier::syn(SynAtom::column_op(
                                                c.clone(),
                                                tag,
                                            )))
                                        }))
                                    }
                                    None => {}
                                }
                            }
                            let score = score([
                                (kind.confidence, None),
                                conf(color),
                                conf(subplot),
                                conf(m),
                                conf(s),
                                conf(c),
                            ]);
                            let spec = ScoredSpec {
                                plot: RefinementType::scalar(
                                    BaseType::Plot(kind.value),
                                    Qualifier::and(plot_q),
                                ),
                                table: RefinementType::table(
                                    schema.clone(),
                                    Qualifier::and(table_q),
                                ),
                                score,
                            };
                            if !out
                                .iter()
                                .any(|o| o.plot == spec.plot && o.table == spec.table)
                            {
                                out.push(spec);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(MAX_SPECS);
    out
}
