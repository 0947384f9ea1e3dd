//! Line-oriented text format for enrolled templates and their classifier.
//!
//! ```text
//! EARDYN-TEMPLATE v1
//! user <id>
//! band <f_low> <f_high> <bin_hz>
//! entry <C1..C7|STATIC> <POSTURE> <n> <mu_w> <sigma_w>
//! <feature values, space separated>
//! boost <T>
//! round <C1..C7|STATIC> <POSTURE> <theta> <alpha> <eps>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! finite `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::auth::{
    BoostRound, BoostedClassifier, KeyCategory, TemplateEntry, TemplateKey, UserTemplate,
    WeakClassifier,
};
use crate::channel::FeatureVector;
use crate::error::{Error, Result};
use crate::motion::HeadPosture;

pub const TEMPLATE_HEADER: &str = "EARDYN-TEMPLATE v1";
const HEADER_PREFIX: &str = "EARDYN-TEMPLATE";
/// Allowed drift of a stored feature's mean and norm.
const FEATURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateFile {
    pub template: UserTemplate,
    pub classifier: Option<BoostedClassifier>,
}

fn real(v: f64) -> Result<String> {
    if v.is_finite() {
        Ok(format!("{v:.16e}"))
    } else {
        Err(Error::Validation(format!(
            "cannot store non-finite value {v}"
        )))
    }
}

pub fn save_template(file: &TemplateFile) -> Result<String> {
    let t = &file.template;
    if t.user_id.is_empty() || t.user_id.chars().any(char::is_whitespace) {
        return Err(Error::Validation(format!(
            "user id {:?} must be non-empty and free of whitespace",
            t.user_id
        )));
    }
    let mut out = String::new();
    writeln!(out, "{TEMPLATE_HEADER}").unwrap();
    writeln!(out, "user {}", t.user_id).unwrap();
    writeln!(
        out,
        "band {} {} {}",
        real(t.band.0)?,
        real(t.band.1)?,
        real(t.bin_hz)?
    )
    .unwrap();
    for (key, e) in &t.entries {
        writeln!(
            out,
            "entry {} {} {} {} {}",
            key.category,
            key.posture,
            e.n_samples,
            real(e.mu_w)?,
            real(e.sigma_w)?
        )
        .unwrap();
        let values = e
            .mean
            .values
            .iter()
            .map(|&v| real(v))
            .collect::<Result<Vec<_>>>()?;
        writeln!(out, "{}", values.join(" ")).unwrap();
    }
    if let Some(c) = &file.classifier {
        writeln!(out, "boost {}", c.rounds.len()).unwrap();
        for r in &c.rounds {
            writeln!(
                out,
                "round {} {} {} {} {}",
                r.stump.key.category,
                r.stump.key.posture,
                real(r.stump.threshold)?,
                real(r.alpha)?,
                real(r.error)?
            )
            .unwrap();
        }
    }
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let (i, l) = self.inner.next()?;
        self.last = i + 1;
        Some((i + 1, l.trim_end_matches('\r')))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Load {
            line: self.last + 1,
            msg: format!("file ends before {what}"),
        })
    }
}

fn load_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Load {
        line,
        msg: msg.into(),
    }
}

fn parse_real(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| load_err(line, format!("invalid number {tok:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(load_err(line, format!("non-finite value {tok:?}")))
    }
}

fn fields<'a>(line: usize, text: &'a str, tag: &str, count: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.first() != Some(&tag) || parts.len() != count + 1 {
        return Err(load_err(
            line,
            format!("expected `{tag}` with {count} field(s), found {text:?}"),
        ));
    }
    Ok(parts[1..].to_vec())
}

fn parse_key(line: usize, category: &str, posture: &str) -> Result<TemplateKey> {
    let category: KeyCategory = category
        .parse()
        .map_err(|_| load_err(line, format!("unknown category {category:?}")))?;
    let posture: HeadPosture = posture
        .parse()
        .map_err(|_| load_err(line, format!("unknown posture {posture:?}")))?;
    Ok(TemplateKey::new(category, posture))
}

pub fn load_template(text: &str) -> Result<TemplateFile> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (n, header) = lines.expect("the header")?;
    if header != TEMPLATE_HEADER {
        let msg = if header.starts_with(HEADER_PREFIX) {
            format!("unsupported template version {header:?}, expected {TEMPLATE_HEADER:?}")
        } else {
            format!("not a template file (header {header:?})")
        };
        return Err(load_err(n, msg));
    }
    let (n, user) = lines.expect("the user line")?;
    let user_id = fields(n, user, "user", 1)?[0].to_string();
    let (n, band) = lines.expect("the band line")?;
    let b = fields(n, band, "band", 3)?;
    let band = (parse_real(n, b[0])?, parse_real(n, b[1])?);
    let bin_hz = parse_real(n, b[2])?;
    if !(band.0 < band.1 && bin_hz > 0.0) {
        return Err(load_err(
            n,
            "band must satisfy f_low < f_high and bin_hz > 0",
        ));
    }

    let mut entries = BTreeMap::new();
    let mut classifier = None;
    let mut width = None;
    while let Some((n, line)) = lines.next() {
        if line.trim().is_empty() {
            continue;
        }
        let tag = line.split_whitespace().next().unwrap_or("");
        match tag {
            "entry" if classifier.is_none() => {
                let f = fields(n, line, "entry", 5)?;
                let key = parse_key(n, f[0], f[1])?;
                let n_samples: usize = f[2]
                    .parse()
                    .map_err(|_| load_err(n, format!("invalid sample count {:?}", f[2])))?;
                let mu_w = parse_real(n, f[3])?;
                let sigma_w = parse_real(n, f[4])?;
                let (vn, vline) = lines.expect(&format!("the feature values of {key}"))?;
                let values = vline
                    .split_whitespace()
                    .map(|t| parse_real(vn, t))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() < 2 || *width.get_or_insert(values.len()) != values.len() {
                    return Err(load_err(
                        vn,
                        format!("feature line has {} values", values.len()),
                    ));
                }
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
                if mean.abs() > FEATURE_TOLERANCE || (norm - 1.0).abs() > FEATURE_TOLERANCE {
                    return Err(load_err(vn, "feature is not mean-zero with unit norm"));
                }
                let entry = TemplateEntry {
                    mean: FeatureVector {
                        values,
                        band,
                        bin_hz,
                    },
                    n_samples,
                    mu_w,
                    sigma_w,
                };
                if entries.insert(key, entry).is_some() {
                    return Err(load_err(n, format!("duplicate entry for {key}")));
                }
            }
            "boost" if classifier.is_none() => {
                let count: usize = fields(n, line, "boost", 1)?[0]
                    .parse()
                    .map_err(|_| load_err(n, "invalid round count"))?;
                let mut rounds = Vec::with_capacity(count);
                for i in 0..count {
                    let (rn, rline) = lines.expect(&format!("round {} of {count}", i + 1))?;
                    let f = fields(rn, rline, "round", 5)?;
                    let key = parse_key(rn, f[0], f[1])?;
                    if !entries.contains_key(&key) {
                        return Err(load_err(rn, format!("round uses key {key} with no entry")));
                    }
                    rounds.push(BoostRound {
                        stump: WeakClassifier {
                            key,
                            threshold: parse_real(rn, f[2])?,
                        },
                        alpha: parse_real(rn, f[3])?,
                        error: parse_real(rn, f[4])?,
                    });
                }
                classifier = Some(BoostedClassifier { rounds });
            }
            _ => return Err(load_err(n, format!("unexpected line {line:?}"))),
        }
    }
    if entries.is_empty() {
        return Err(load_err(lines.last.max(1), "template has no entries"));
    }
    Ok(TemplateFile {
        template: UserTemplate {
            user_id,
            band,
            bin_hz,
            entries,
        },
        classifier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phoneme::DeformationCategory;

    fn sample() -> TemplateFile {
        let f = FeatureVector::from_raw(
            vec![0.1, -0.3, 0.25, 1.0 / 3.0],
            (16_000.0, 23_000.0),
            250.0 / 3.0,
        )
        .unwrap();
        let k1 = TemplateKey::static_key(HeadPosture::Up);
        let k2 = TemplateKey::phoneme(DeformationCategory::TongueLowerJawWide, HeadPosture::Left);
        let entry = TemplateEntry {
            mean: f,
            n_samples: 3,
            mu_w: 0.987654321,
            sigma_w: 1.0 / 7.0,
        };
        let mut entries = BTreeMap::new();
        entries.insert(k1, entry.clone());
        entries.insert(k2, entry);
        TemplateFile {
            template: UserTemplate {
                user_id: "S07".into(),
                band: (16_000.0, 23_000.0),
                bin_hz: 250.0 / 3.0,
                entries,
            },
            classifier: Some(BoostedClassifier {
                rounds: vec![BoostRound {
                    stump: WeakClassifier {
                        key: k2,
                        threshold: 0.1 + 0.2,
                    },
                    alpha: 0.5 * (0.7f64 / 0.3).ln(),
                    error: 0.3,
                }],
            }),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let text = save_template(&t).unwrap();
        assert_eq!(load_template(&text).unwrap(), t);
        assert_eq!(save_template(&load_template(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn rejects_other_versions() {
        let text = save_template(&sample()).unwrap().replace("v1", "v2");
        let err = load_template(&text).unwrap_err();
        assert!(matches!(err, Error::Load { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn rejects_nan_and_truncation() {
        let text = save_template(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut bad = lines.clone();
        let replaced = lines[4].replacen(lines[4].split(' ').next().unwrap(), "nan", 1);
        bad[4] = &replaced;
        assert!(matches!(
            load_template(&bad.join("\n")),
            Err(Error::Load { line: 5, .. })
        ));
        let truncated = lines[..lines.len() - 1].join("\n");
        assert!(matches!(load_template(&truncated), Err(Error::Load { .. })));
        let no_values = lines[..4].join("\n");
        assert!(matches!(
            load_template(&no_values),
            Err(Error::Load { line: 5, .. })
        ));
    }

    #[test]
    fn rejects_bad_user_ids() {
        let mut t = sample();
        t.template.user_id = "two words".into();
        assert!(save_template(&t).is_err());
    }
}
