//! Ingestion of statute-style XML (one document per norm element).

use std::collections::BTreeMap;
use std::str::FromStr;

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Which elements hold norms, titles and text, and which norms to keep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub norm_tag: String,
    pub title_tag: String,
    pub text_tag: String,
    /// Norms whose title does not start with this prefix are ignored.
    pub title_prefix: Option<String>,
    /// First norm to keep, by exact title.
    pub from_title: Option<String>,
    /// Last norm to keep, by exact title.
    pub until_title: Option<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            norm_tag: "norm".into(),
            title_tag: "enbez".into(),
            text_tag: "Content".into(),
            title_prefix: Some("§".into()),
            from_title: None,
            until_title: None,
        }
    }
}

impl IngestConfig {
    /// General part of the German civil code.
    pub fn bgb_general_part() -> Self {
        Self {
            from_title: Some("§ 1".into()),
            until_title: Some("§ 240".into()),
            ..Self::default()
        }
    }
}

/// `key = value` lines; `#` starts a comment. Values may be double-quoted.
impl FromStr for IngestConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cfg = IngestConfig::default();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| Error::IngestConfig {
                line: n + 1,
                message: message.to_owned(),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value"))?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value)
                .to_owned();
            let optional = if value.is_empty() {
                None
            } else {
                Some(value.clone())
            };
            match key.trim() {
                "norm_tag" => cfg.norm_tag = value,
                "title_tag" => cfg.title_tag = value,
                "text_tag" => cfg.text_tag = value,
                "title_prefix" => cfg.title_prefix = optional,
                "from_title" => cfg.from_title = optional,
                "until_title" => cfg.until_title = optional,
                other => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        for (name, v) in [
            ("norm_tag", &cfg.norm_tag),
            ("title_tag", &cfg.title_tag),
            ("text_tag", &cfg.text_tag),
        ] {
            if v.is_empty() {
                return Err(Error::IngestConfig {
                    line: 0,
                    message: format!("{name} must not be empty"),
                });
            }
        }
        Ok(cfg)
    }
}

/// A norm as found in the XML, before filtering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Norm {
    pub title: String,
    pub text: String,
}

/// Extracts all norms in document order. Malformed or truncated input is a
/// parse error carrying the byte offset.
pub fn parse_norms(xml: &str, config: &IngestConfig) -> Result<Vec<Norm>> {
    let mut reader = Reader::from_str(xml);
    let mut norms = Vec::new();
    let mut current: Option<Norm> = None;
    let mut depth = 0usize;
    // depth at which the enclosing title/text element was opened
    let mut in_title: Option<usize> = None;
    let mut in_text: Option<usize> = None;
    let parse_err = |position: u64, message: String| Error::Parse { position, message };
    loop {
        let event = reader
            .read_event()
            .map_err(|e| parse_err(reader.error_position(), e.to_string()))?;
        let pos = reader.buffer_position();
        match event {
            Event::Start(e) => {
                depth += 1;
                let name = e.name();
                let name = std::str::from_utf8(name.as_ref()).unwrap_or("");
                if name == config.norm_tag {
                    current = Some(Norm::default());
                } else if current.is_some() && name == config.title_tag && in_title.is_none() {
                    in_title = Some(depth);
                } else if current.is_some() && name == config.text_tag && in_text.is_none() {
                    in_text = Some(depth);
                }
            }
            Event::End(e) => {
                let name = e.name();
                let name = std::str::from_utf8(name.as_ref()).unwrap_or("");
                if in_title == Some(depth) {
                    in_title = None;
                }
                if in_text == Some(depth) {
                    in_text = None;
                }
                if in_text.is_some() {
                    // element boundaries inside the text separate words
                    if let Some(n) = current.as_mut() {
                        n.text.push(' ');
                    }
                }
                if name == config.norm_tag {
                    if let Some(n) = current.take() {
                        norms.push(n);
                    }
                }
                depth = depth.saturating_sub(1);
            }
            Event::Empty(_) => {
                if in_text.is_some() {
                    if let Some(n) = current.as_mut() {
                        n.text.push(' ');
                    }
                }
            }
            Event::Text(t) => {
                let s = t.xml_content().map_err(|e| parse_err(pos, e.to_string()))?;
                append(&mut current, in_title, in_text, &s);
            }
            Event::CData(t) => {
                let s = t.decode().map_err(|e| parse_err(pos, e.to_string()))?;
                append(&mut current, in_title, in_text, &s);
            }
            Event::GeneralRef(r) => {
                let resolved = match r
                    .resolve_char_ref()
                    .map_err(|e| parse_err(pos, e.to_string()))?
                {
                    Some(c) => c.to_string(),
                    None => {
                        let name = r.decode().map_err(|e| parse_err(pos, e.to_string()))?;
                        resolve_predefined_entity(&name)
                            .ok_or_else(|| parse_err(pos, format!("unknown entity &{name};")))?
                            .to_owned()
                    }
                };
                append(&mut current, in_title, in_text, &resolved);
            }
            Event::Eof => {
                if depth != 0 {
                    return Err(parse_err(
                        pos,
                        format!("{depth} unclosed element(s) at end of input"),
                    ));
                }
                break;
            }
            _ => {}
        }
    }
    Ok(norms)
}

fn append(current: &mut Option<Norm>, in_title: Option<usize>, in_text: Option<usize>, s: &str) {
    let Some(n) = current.as_mut() else { return };
    if in_title.is_some() {
        n.title.push_str(s);
    } else if in_text.is_some() {
        n.text.push_str(s);
    }
}

/// Keeps norms matching the prefix within the configured title range.
/// Titles are compared after collapsing whitespace.
pub fn select_norms(norms: Vec<Norm>, config: &IngestConfig) -> Vec<Norm> {
    let normalize = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    let from = config.from_title.as_deref().map(normalize);
    let until = config.until_title.as_deref().map(normalize);
    let mut started = from.is_none();
    let mut out = Vec::new();
    for mut norm in norms {
        norm.title = normalize(&norm.title);
        if let Some(p) = &config.title_prefix {
            if !norm.title.starts_with(p.as_str()) {
                continue;
            }
        }
        if !started && from.as_deref() == Some(norm.title.as_str()) {
            started = true;
        }
        if !started {
            continue;
        }
        let last = until.as_deref() == Some(norm.title.as_str());
        out.push(norm);
        if last {
            break;
        }
    }
    out
}

/// Parses `xml` and adds one document per selected, non-empty norm to `corpus`.
/// The document id is the norm title, suffixed on repetition.
/// Returns the ids of the added documents.
pub fn ingest_xml_law(
    corpus: &mut Corpus,
    xml: &str,
    config: &IngestConfig,
) -> Result<Vec<String>> {
    let norms = select_norms(parse_norms(xml, config)?, config);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut work = corpus.clone();
    let mut ids = Vec::new();
    for norm in norms {
        let count = seen.entry(norm.title.clone()).or_insert(0);
        *count += 1;
        let mut id = if *count == 1 {
            norm.title.clone()
        } else {
            format!("{} ({count})", norm.title)
        };
        while work.document(&id).is_some() {
            *count += 1;
            id = format!("{} ({count})", norm.title);
        }
        match work.ingest_plaintext(&norm.text, &id) {
            Ok(_) => ids.push(id),
            Err(Error::EmptyDocument) => {
                tracing::debug!(title = %norm.title, "skipping norm without text");
            }
            Err(e) => return Err(e),
        }
    }
    *corpus = work;
    Ok(ids)
}
