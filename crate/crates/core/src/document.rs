//! JSON instance documents.
//!
//! ```json
//! {
//!   "spaces":        { "X": ["a", "b"], "Y": ["⋆"] },
//!   "dists":         { "p": { "space": "X", "probs": { "a": 1 } } },
//!   "channels":      { "s": { "dom": "Y", "cod": "X", "rows": { "⋆": { "a": 0.5, "b": 0.5 } } } },
//!   "det_maps":      { "h": { "dom": "X", "cod": "Y", "map": { "a": "⋆", "b": "⋆" } } },
//!   "morphisms":     { "m": { "f": "h", "p": "p", "s": "s" } },
//!   "two_morphisms": { "sq": { "dom": "m", "cod": "n", "f": "top", "fp": "bottom" } }
//! }
//! ```
//!
//! Every section is optional. Channels are written row-per-input as
//! `{input: {output: prob}}`; omitted entries are 0, as are omitted
//! distribution entries. Morphisms reference det maps, dists and channels;
//! 2-morphisms reference morphisms and channels.
//!
//! The canonical form sorts keys, drops zero entries and rounds every number
//! to 15 significant digits, which makes it a fixed point of
//! parse-then-serialize.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::Error;
use crate::finstat::StatMorphism;
use crate::finstat2::TwoMorphism;
use crate::prob::{Channel, DetMap, Dist, FinSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate name `{name}` at line {line}, column {column}")]
    DuplicateName {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("{from}: reference to undefined {kind} `{name}`")]
    DanglingReference {
        kind: &'static str,
        name: String,
        from: String,
    },

    #[error("{object}: {source}")]
    Invalid { object: String, source: Error },

    #[error("name `{0}` is already defined")]
    NameTaken(String),
}

const DUPLICATE_TAG: &str = "duplicate name ";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    pub space: String,
    #[serde(deserialize_with = "unique_map")]
    pub probs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub dom: String,
    pub cod: String,
    #[serde(deserialize_with = "unique_rows")]
    pub rows: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetMapSpec {
    pub dom: String,
    pub cod: String,
    #[serde(deserialize_with = "unique_map")]
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    pub f: String,
    pub p: String,
    pub s: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoMorphismSpec {
    pub dom: String,
    pub cod: String,
    pub f: String,
    pub fp: String,
}

/// A structurally valid document: names resolve, numbers are not yet checked.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default, deserialize_with = "unique_map")]
    pub spaces: BTreeMap<String, Vec<String>>,
    #[serde(default, deserialize_with = "unique_map")]
    pub dists: BTreeMap<String, DistSpec>,
    #[serde(default, deserialize_with = "unique_map")]
    pub channels: BTreeMap<String, ChannelSpec>,
    #[serde(default, deserialize_with = "unique_map")]
    pub det_maps: BTreeMap<String, DetMapSpec>,
    #[serde(default, deserialize_with = "unique_map")]
    pub morphisms: BTreeMap<String, MorphismSpec>,
    #[serde(default, deserialize_with = "unique_map")]
    pub two_morphisms: BTreeMap<String, TwoMorphismSpec>,
}

fn unique_map<'de, D, V>(de: D) -> Result<BTreeMap<String, V>, D::Error>
where
    D: Deserializer<'de>,
    V: Deserialize<'de>,
{
    struct UniqueVisitor<V>(std::marker::PhantomData<V>);

    impl<'de, V: Deserialize<'de>> Visitor<'de> for UniqueVisitor<V> {
        type Value = BTreeMap<String, V>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an object with unique keys")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some(key) = access.next_key::<String>()? {
                if out.contains_key(&key) {
                    return Err(serde::de::Error::custom(format!("{DUPLICATE_TAG}`{key}`")));
                }
                let value = access.next_value()?;
                out.insert(key, value);
            }
            Ok(out)
        }
    }

    de.deserialize_map(UniqueVisitor(std::marker::PhantomData))
}

fn unique_rows<'de, D>(de: D) -> Result<BTreeMap<String, BTreeMap<String, f64>>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    struct Row(#[serde(deserialize_with = "unique_map")] BTreeMap<String, f64>);

    let rows: BTreeMap<String, Row> = unique_map(de)?;
    Ok(rows.into_iter().map(|(k, Row(v))| (k, v)).collect())
}

/// Parses and reference-checks a document.
pub fn parse(text: &str) -> Result<Document, DocError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        match message
            .strip_prefix(DUPLICATE_TAG)
            .and_then(|rest| rest.split('`').nth(1))
        {
            Some(name) => DocError::DuplicateName {
                name: name.to_owned(),
                line: e.line(),
                column: e.column(),
            },
            None => DocError::Parse {
                line: e.line(),
                column: e.column(),
                message: strip_position(&message),
            },
        }
    })?;
    doc.check_references()?;
    Ok(doc)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_owned(),
        None => message.to_owned(),
    }
}

fn dangling(kind: &'static str, name: &str, from: String) -> DocError {
    DocError::DanglingReference {
        kind,
        name: name.to_owned(),
        from,
    }
}

impl Document {
    fn space_labels(&self, name: &str, from: impl Fn() -> String) -> Result<&[String], DocError> {
        self.spaces
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| dangling("space", name, from()))
    }

    fn check_labels<'a>(
        labels: &[String],
        used: impl IntoIterator<Item = &'a String>,
        from: impl Fn() -> String,
    ) -> Result<(), DocError> {
        for l in used {
            if !labels.contains(l) {
                return Err(dangling("label", l, from()));
            }
        }
        Ok(())
    }

    fn check_references(&self) -> Result<(), DocError> {
        for (name, d) in &self.dists {
            let from = || format!("dist `{name}`");
            let labels = self.space_labels(&d.space, from)?;
            Self::check_labels(labels, d.probs.keys(), from)?;
        }
        for (name, c) in &self.channels {
            let from = || format!("channel `{name}`");
            let dom = self.space_labels(&c.dom, from)?;
            let cod = self.space_labels(&c.cod, from)?;
            Self::check_labels(dom, c.rows.keys(), from)?;
            for row in c.rows.values() {
                Self::check_labels(cod, row.keys(), from)?;
            }
        }
        for (name, h) in &self.det_maps {
            let from = || format!("det_map `{name}`");
            let dom = self.space_labels(&h.dom, from)?;
            let cod = self.space_labels(&h.cod, from)?;
            Self::check_labels(dom, h.map.keys(), from)?;
            Self::check_labels(cod, h.map.values(), from)?;
        }
        for (name, m) in &self.morphisms {
            let from = || format!("morphism `{name}`");
            if !self.det_maps.contains_key(&m.f) {
                return Err(dangling("det_map", &m.f, from()));
            }
            if !self.dists.contains_key(&m.p) {
                return Err(dangling("dist", &m.p, from()));
            }
            if !self.channels.contains_key(&m.s) {
                return Err(dangling("channel", &m.s, from()));
            }
        }
        for (name, sq) in &self.two_morphisms {
            let from = || format!("two_morphism `{name}`");
            for r in [&sq.dom, &sq.cod] {
                if !self.morphisms.contains_key(r) {
                    return Err(dangling("morphism", r, from()));
                }
            }
            for r in [&sq.f, &sq.fp] {
                if !self.channels.contains_key(r) {
                    return Err(dangling("channel", r, from()));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self, name: &str) -> Result<FinSet, DocError> {
        let labels = self
            .spaces
            .get(name)
            .ok_or_else(|| dangling("space", name, "lookup".into()))?;
        FinSet::new(labels.iter().cloned()).map_err(|source| DocError::Invalid {
            object: format!("space `{name}`"),
            source,
        })
    }

    /// Raw probability vector in space order.
    pub fn dist_probs(&self, name: &str) -> Result<(FinSet, Vec<f64>), DocError> {
        let spec = self
            .dists
            .get(name)
            .ok_or_else(|| dangling("dist", name, "lookup".into()))?;
        let space = self.space(&spec.space)?;
        let probs = space
            .labels()
            .iter()
            .map(|l| spec.probs.get(l).copied().unwrap_or(0.0))
            .collect();
        Ok((space, probs))
    }

    /// Raw rows in domain order.
    pub fn channel_rows(&self, name: &str) -> Result<(FinSet, FinSet, Vec<Vec<f64>>), DocError> {
        let spec = self
            .channels
            .get(name)
            .ok_or_else(|| dangling("channel", name, "lookup".into()))?;
        let dom = self.space(&spec.dom)?;
        let cod = self.space(&spec.cod)?;
        let rows = dom
            .labels()
            .iter()
            .map(|x| {
                let row = spec.rows.get(x);
                cod.labels()
                    .iter()
                    .map(|y| row.and_then(|r| r.get(y)).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        Ok((dom, cod, rows))
    }

    pub fn dist(&self, name: &str) -> Result<Dist, DocError> {
        let (space, probs) = self.dist_probs(name)?;
        Dist::new(space, probs).map_err(|source| invalid("dist", name, source))
    }

    pub fn channel(&self, name: &str) -> Result<Channel, DocError> {
        let (dom, cod, rows) = self.channel_rows(name)?;
        Channel::new(dom, cod, rows).map_err(|source| invalid("channel", name, source))
    }

    pub fn det_map(&self, name: &str) -> Result<DetMap, DocError> {
        let spec = self
            .det_maps
            .get(name)
            .ok_or_else(|| dangling("det_map", name, "lookup".into()))?;
        let dom = self.space(&spec.dom)?;
        let cod = self.space(&spec.cod)?;
        let map = dom
            .labels()
            .iter()
            .map(|x| {
                spec.map
                    .get(x)
                    .and_then(|y| cod.index_of(y))
                    .ok_or_else(|| DocError::Invalid {
                        object: format!("det_map `{name}`"),
                        source: Error::SpaceMismatch {
                            context: "deterministic map: every element needs an image",
                        },
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        DetMap::new(dom, cod, map).map_err(|source| invalid("det_map", name, source))
    }

    pub fn morphism(&self, name: &str) -> Result<StatMorphism, DocError> {
        let spec = self
            .morphisms
            .get(name)
            .ok_or_else(|| dangling("morphism", name, "lookup".into()))?;
        StatMorphism::new(
            self.det_map(&spec.f)?,
            self.dist(&spec.p)?,
            self.channel(&spec.s)?,
        )
        .map_err(|source| invalid("morphism", name, source))
    }

    pub fn two_morphism(&self, name: &str) -> Result<TwoMorphism, DocError> {
        let spec = self
            .two_morphisms
            .get(name)
            .ok_or_else(|| dangling("two_morphism", name, "lookup".into()))?;
        TwoMorphism::new(
            self.morphism(&spec.dom)?,
            self.morphism(&spec.cod)?,
            self.channel(&spec.f)?,
            self.channel(&spec.fp)?,
        )
        .map_err(|source| invalid("two_morphism", name, source))
    }

    fn name_taken(&self, name: &str) -> bool {
        self.dists.contains_key(name)
            || self.channels.contains_key(name)
            || self.det_maps.contains_key(name)
            || self.morphisms.contains_key(name)
            || self.two_morphisms.contains_key(name)
    }

    fn claim(&self, name: &str) -> Result<String, DocError> {
        if self.name_taken(name) {
            Err(DocError::NameTaken(name.to_owned()))
        } else {
            Ok(name.to_owned())
        }
    }

    /// Returns the name of a space with exactly these labels, adding one
    /// derived from `hint` if none exists.
    pub fn insert_space(&mut self, hint: &str, set: &FinSet) -> String {
        if let Some((name, _)) = self.spaces.iter().find(|(_, l)| l.as_slice() == set.labels()) {
            return name.clone();
        }
        let mut name = hint.to_owned();
        let mut k = 1;
        while self.spaces.contains_key(&name) {
            k += 1;
            name = format!("{hint}#{k}");
        }
        self.spaces.insert(name.clone(), set.labels().to_vec());
        name
    }

    pub fn insert_dist(&mut self, name: &str, d: &Dist) -> Result<String, DocError> {
        let name = self.claim(name)?;
        let space = self.insert_space(&format!("{name}.space"), d.space());
        let probs = sparse_entries(d.space(), d.probs());
        self.dists.insert(name.clone(), DistSpec { space, probs });
        Ok(name)
    }

    pub fn insert_channel(&mut self, name: &str, c: &Channel) -> Result<String, DocError> {
        let name = self.claim(name)?;
        let dom = self.insert_space(&format!("{name}.dom"), c.dom());
        let cod = self.insert_space(&format!("{name}.cod"), c.cod());
        let rows = c
            .rows()
            .enumerate()
            .map(|(x, row)| (c.dom().label(x).to_owned(), sparse_entries(c.cod(), row)))
            .collect();
        self.channels
            .insert(name.clone(), ChannelSpec { dom, cod, rows });
        Ok(name)
    }

    pub fn insert_det_map(&mut self, name: &str, h: &DetMap) -> Result<String, DocError> {
        let name = self.claim(name)?;
        let dom = self.insert_space(&format!("{name}.dom"), h.dom());
        let cod = self.insert_space(&format!("{name}.cod"), h.cod());
        let map = h
            .map()
            .iter()
            .enumerate()
            .map(|(x, &y)| (h.dom().label(x).to_owned(), h.cod().label(y).to_owned()))
            .collect();
        self.det_maps.insert(name.clone(), DetMapSpec { dom, cod, map });
        Ok(name)
    }

    /// Adds `m` with its legs stored as `{name}.f`, `{name}.p`, `{name}.s`.
    pub fn insert_morphism(&mut self, name: &str, m: &StatMorphism) -> Result<String, DocError> {
        let name = self.claim(name)?;
        let f = self.insert_det_map(&format!("{name}.f"), m.f())?;
        let p = self.insert_dist(&format!("{name}.p"), m.p())?;
        let s = self.insert_channel(&format!("{name}.s"), m.s())?;
        self.morphisms.insert(name.clone(), MorphismSpec { f, p, s });
        Ok(name)
    }

    /// Adds `sq` with 1-morphisms `{name}.dom`, `{name}.cod` and channels
    /// `{name}.f`, `{name}.fp`.
    pub fn insert_two_morphism(&mut self, name: &str, sq: &TwoMorphism) -> Result<String, DocError> {
        let name = self.claim(name)?;
        let dom = self.insert_morphism(&format!("{name}.dom"), sq.dom())?;
        let cod = self.insert_morphism(&format!("{name}.cod"), sq.cod())?;
        let f = self.insert_channel(&format!("{name}.f"), sq.f())?;
        let fp = self.insert_channel(&format!("{name}.fp"), sq.fp())?;
        self.two_morphisms
            .insert(name.clone(), TwoMorphismSpec { dom, cod, f, fp });
        Ok(name)
    }

    /// Canonical JSON value (sorted keys, zero entries dropped, numbers at 15
    /// significant digits).
    pub fn to_value(&self) -> Value {
        let spaces: Map<String, Value> = self
            .spaces
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let dists: Map<String, Value> = self
            .dists
            .iter()
            .map(|(k, d)| {
                (
                    k.clone(),
                    json!({ "space": d.space, "probs": number_map(&d.probs) }),
                )
            })
            .collect();
        let channels: Map<String, Value> = self
            .channels
            .iter()
            .map(|(k, c)| {
                let rows: Map<String, Value> = c
                    .rows
                    .iter()
                    .map(|(x, row)| (x.clone(), number_map(row)))
                    .collect();
                (
                    k.clone(),
                    json!({ "dom": c.dom, "cod": c.cod, "rows": rows }),
                )
            })
            .collect();
        let det_maps: Map<String, Value> = self
            .det_maps
            .iter()
            .map(|(k, h)| {
                (
                    k.clone(),
                    json!({ "dom": h.dom, "cod": h.cod, "map": h.map }),
                )
            })
            .collect();
        let morphisms: Map<String, Value> = self
            .morphisms
            .iter()
            .map(|(k, m)| (k.clone(), json!({ "f": m.f, "p": m.p, "s": m.s })))
            .collect();
        let two_morphisms: Map<String, Value> = self
            .two_morphisms
            .iter()
            .map(|(k, sq)| {
                (
                    k.clone(),
                    json!({ "dom": sq.dom, "cod": sq.cod, "f": sq.f, "fp": sq.fp }),
                )
            })
            .collect();
        let mut out = Map::new();
        for (key, section) in [
            ("spaces", spaces),
            ("dists", dists),
            ("channels", channels),
            ("det_maps", det_maps),
            ("morphisms", morphisms),
            ("two_morphisms", two_morphisms),
        ] {
            if !section.is_empty() {
                out.insert(key.to_owned(), Value::Object(section));
            }
        }
        Value::Object(out)
    }

    /// Canonical pretty-printed text with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("values are finite");
        s.push('\n');
        s
    }
}

fn invalid(kind: &str, name: &str, source: Error) -> DocError {
    DocError::Invalid {
        object: format!("{kind} `{name}`"),
        source,
    }
}

fn sparse_entries(space: &FinSet, probs: &[f64]) -> BTreeMap<String, f64> {
    probs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (space.label(i).to_owned(), v))
        .collect()
}

/// Rounds to 15 significant digits.
pub fn round15(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.14e}").parse().expect("formatted float parses")
}

/// A canonical JSON number; non-finite values become the string `"inf"`
/// (or `"-inf"`/`"nan"`).
pub fn canonical_number(v: f64) -> Value {
    match serde_json::Number::from_f64(round15(v)) {
        Some(n) => Value::Number(n),
        None if v == f64::INFINITY => Value::String("inf".into()),
        None if v == f64::NEG_INFINITY => Value::String("-inf".into()),
        None => Value::String("nan".into()),
    }
}

fn number_map(m: &BTreeMap<String, f64>) -> Value {
    Value::Object(
        m.iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &v)| (k.clone(), canonical_number(v)))
            .collect(),
    )
}
