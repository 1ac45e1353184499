//! Law, schedule and config files (JSON) and the inline law shorthand.

use std::path::Path;

use cag_core::{Atom, CommunityLaw, LogAtom};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{AppError, AppResult};

/// Weight sums further than this from one are normalized with a warning.
pub const WEIGHT_SUM_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomRecord {
    pub x: u64,
    pub q: f64,
    pub w: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    x: u64,
    q: f64,
    w: f64,
}

impl TryFrom<RawAtom> for AtomRecord {
    type Error = String;

    fn try_from(a: RawAtom) -> Result<Self, String> {
        check_q(a.q)?;
        if !(a.w >= 0.0 && a.w.is_finite()) {
            return Err(format!("weight {} is not a finite nonnegative number", a.w));
        }
        Ok(AtomRecord { x: a.x, q: a.q, w: a.w })
    }
}

/// Log-domain atom; `log2_x = null` encodes size zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogAtomRecord {
    pub log2_x: Option<f64>,
    pub q: f64,
    pub log_w: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLogAtom {
    log2_x: Option<f64>,
    q: f64,
    log_w: f64,
}

impl TryFrom<RawLogAtom> for LogAtomRecord {
    type Error = String;

    fn try_from(a: RawLogAtom) -> Result<Self, String> {
        check_q(a.q)?;
        if let Some(l) = a.log2_x {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(format!("log2_x {l} must be finite and >= 0"));
            }
        }
        if a.log_w.is_nan() || a.log_w == f64::INFINITY {
            return Err(format!("log_w {} is not a valid log weight", a.log_w));
        }
        Ok(LogAtomRecord {
            log2_x: a.log2_x,
            q: a.q,
            log_w: a.log_w,
        })
    }
}

/// List whose entries are parsed one at a time so that errors can name the
/// line an entry starts on.
#[derive(Deserialize)]
#[serde(transparent)]
struct RawList<'a>(#[serde(borrow)] Vec<&'a RawValue>);

fn parse_entries<'a, R, T>(source: &str, list: RawList<'a>, what: &str) -> AppResult<Vec<T>>
where
    R: Deserialize<'a>,
    T: TryFrom<R, Error = String>,
{
    list.0
        .into_iter()
        .enumerate()
        .map(|(i, raw)| {
            let offset = raw.get().as_ptr() as usize - source.as_ptr() as usize;
            let line = source[..offset].matches('\n').count() + 1;
            let fail = |m: String| AppError::Parse(format!("{what} {} at line {line}: {m}", i + 1));
            let r: R = serde_json::from_str(raw.get()).map_err(|e| fail(e.to_string()))?;
            T::try_from(r).map_err(fail)
        })
        .collect()
}

fn check_q(q: f64) -> Result<(), String> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(format!("density {q} is outside [0, 1]"))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LawDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms_log: Option<Vec<LogAtomRecord>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLawDocument<'a> {
    #[serde(borrow, default)]
    atoms: Option<RawList<'a>>,
    #[serde(borrow, default)]
    atoms_log: Option<RawList<'a>>,
}

impl LawDocument {
    pub fn parse(text: &str) -> AppResult<Self> {
        let raw: RawLawDocument = serde_json::from_str(text).map_err(|e| AppError::Parse(format!("law: {e}")))?;
        Ok(LawDocument {
            atoms: raw
                .atoms
                .map(|l| parse_entries::<RawAtom, _>(text, l, "atom"))
                .transpose()?,
            atoms_log: raw
                .atoms_log
                .map(|l| parse_entries::<RawLogAtom, _>(text, l, "atom"))
                .transpose()?,
        })
    }

    pub fn from_law(law: &CommunityLaw) -> Self {
        if let Some(atoms) = law.atoms() {
            LawDocument {
                atoms: Some(
                    atoms
                        .iter()
                        .map(|a| AtomRecord {
                            x: a.size,
                            q: a.density,
                            w: a.weight,
                        })
                        .collect(),
                ),
                atoms_log: None,
            }
        } else {
            let atoms = law.log_atoms().unwrap_or(&[]);
            LawDocument {
                atoms: None,
                atoms_log: Some(
                    atoms
                        .iter()
                        .map(|a| LogAtomRecord {
                            log2_x: a.log2_size.is_finite().then_some(a.log2_size),
                            q: a.density,
                            log_w: a.log_weight,
                        })
                        .collect(),
                ),
            }
        }
    }

    pub fn into_law(self) -> AppResult<CommunityLaw> {
        match (self.atoms, self.atoms_log) {
            (Some(atoms), None) => {
                check_weight_sum(atoms.iter().map(|a| a.w).sum())?;
                Ok(CommunityLaw::new(
                    atoms.into_iter().map(|a| Atom::new(a.x, a.q, a.w)).collect(),
                )?)
            }
            (None, Some(atoms)) => {
                check_weight_sum(atoms.iter().map(|a| a.log_w.exp()).sum())?;
                Ok(CommunityLaw::from_log_atoms(
                    atoms
                        .into_iter()
                        .map(|a| LogAtom {
                            log2_size: a.log2_x.unwrap_or(f64::NEG_INFINITY),
                            density: a.q,
                            log_weight: a.log_w,
                        })
                        .collect(),
                )?)
            }
            (Some(_), Some(_)) => Err(AppError::Parse("law has both `atoms` and `atoms_log`".into())),
            (None, None) => Err(AppError::Parse("law needs `atoms` or `atoms_log`".into())),
        }
    }
}

fn check_weight_sum(sum: f64) -> AppResult<()> {
    if !(sum.is_finite() && sum > 0.0) {
        return Err(AppError::Parse(format!("atom weights sum to {sum}")));
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_WARN {
        log::warn!("law weights sum to {sum}; normalizing");
    }
    Ok(())
}

pub fn law_to_json(law: &CommunityLaw) -> String {
    serde_json::to_string_pretty(&LawDocument::from_law(law)).expect("law documents always serialize")
}

pub fn law_from_json(text: &str) -> AppResult<CommunityLaw> {
    LawDocument::parse(text)?.into_law()
}

/// Parses `deg_<x>_<q>` or `mix:x,q,w;x,q,w;...`.
pub fn parse_inline_law(spec: &str) -> AppResult<CommunityLaw> {
    if let Some(rest) = spec.strip_prefix("deg_") {
        let (x, q) = rest
            .split_once('_')
            .ok_or_else(|| AppError::Parse(format!("`{spec}`: expected deg_<x>_<q>")))?;
        let atom = parse_atom(x, q, "1").map_err(|m| AppError::Parse(format!("`{spec}`: {m}")))?;
        return Ok(CommunityLaw::new(vec![atom])?);
    }
    if let Some(rest) = spec.strip_prefix("mix:") {
        let mut atoms = Vec::new();
        for (i, part) in rest.split(';').enumerate().filter(|(_, p)| !p.trim().is_empty()) {
            let fields: Vec<&str> = part.split(',').collect();
            let atom = match fields.as_slice() {
                [x, q, w] => parse_atom(x, q, w),
                _ => Err("expected x,q,w".to_string()),
            }
            .map_err(|m| AppError::Parse(format!("atom {} `{}`: {m}", i + 1, part.trim())))?;
            atoms.push(atom);
        }
        if atoms.is_empty() {
            return Err(AppError::Parse(format!("`{spec}` has no atoms")));
        }
        check_weight_sum(atoms.iter().map(|a| a.weight).sum())?;
        return Ok(CommunityLaw::new(atoms)?);
    }
    Err(AppError::Parse(format!(
        "`{spec}` is not an inline law (deg_<x>_<q> or mix:x,q,w;...)"
    )))
}

fn parse_atom(x: &str, q: &str, w: &str) -> Result<Atom, String> {
    let x: u64 = x.trim().parse().map_err(|_| format!("bad size `{x}`"))?;
    let q: f64 = q.trim().parse().map_err(|_| format!("bad density `{q}`"))?;
    let w: f64 = w.trim().parse().map_err(|_| format!("bad weight `{w}`"))?;
    let a = AtomRecord::try_from(RawAtom { x, q, w })?;
    Ok(Atom::new(a.x, a.q, a.w))
}

pub fn is_inline_law(spec: &str) -> bool {
    spec.starts_with("deg_") || spec.starts_with("mix:")
}

/// Inline shorthand or a path to a law file.
pub fn load_law(spec: &str) -> AppResult<CommunityLaw> {
    if is_inline_law(spec) {
        return parse_inline_law(spec);
    }
    let text = read_file(Path::new(spec))?;
    law_from_json(&text)
}

pub(crate) fn read_file(path: &Path) -> AppResult<String> {
    std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerRecord {
    pub x: u64,
    pub q: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    x: u64,
    q: f64,
}

impl TryFrom<RawLayer> for LayerRecord {
    type Error = String;

    fn try_from(l: RawLayer) -> Result<Self, String> {
        check_q(l.q)?;
        Ok(LayerRecord { x: l.x, q: l.q })
    }
}

/// Fixed per-layer schedule: `{"n": 10, "layers": [{"x": 2, "q": 1.0}, ...]}`;
/// `n` may come from the command line instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub layers: Vec<LayerRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixedDocument<'a> {
    #[serde(default)]
    n: Option<u64>,
    #[serde(borrow)]
    layers: RawList<'a>,
}

impl FixedDocument {
    pub fn pairs(&self) -> Vec<(u64, f64)> {
        self.layers.iter().map(|l| (l.x, l.q)).collect()
    }
}

pub fn fixed_from_json(text: &str) -> AppResult<FixedDocument> {
    let raw: RawFixedDocument =
        serde_json::from_str(text).map_err(|e| AppError::Parse(format!("fixed schedule: {e}")))?;
    Ok(FixedDocument {
        n: raw.n,
        layers: parse_entries::<RawLayer, _>(text, raw.layers, "layer")?,
    })
}

pub fn load_fixed(path: &Path) -> AppResult<FixedDocument> {
    fixed_from_json(&read_file(path)?)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

/// JSON value for a float; non-finite values become the strings used by [`fmt_f64`].
pub fn json_f64(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(fmt_f64(v))
    }
}
