//! Labeled test families and a seeded generator of random ones.
//!
//! A family is either a template (a function in the JSON DSL where the
//! string `"$p"` stands for a parameter) plus its parameter samples, or an
//! explicit member list.
//!
//! Several catalog entries sample infinite rays (translations, modulations,
//! dilations). Their "non-compact" label refers to the sampled diagnostics
//! staying above the failure floor across the default sweep window, which
//! is how the full ray behaves; any finite sample is of course compact.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PegoError, Result};
use crate::halfline::{HalfLineFunction, Label, Order, PegoFamily, TimeGrid};

pub const PLACEHOLDER: &str = "$p";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<HalfLineFunction>,
    pub order: Order,
    #[serde(default = "unknown")]
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

fn unknown() -> Label {
    Label::Unknown
}

fn substitute(v: &Value, p: f64) -> Result<Value> {
    Ok(match v {
        Value::String(s) if s == PLACEHOLDER => Value::from(p),
        Value::Array(items) => Value::Array(items.iter().map(|i| substitute(i, p)).collect::<Result<_>>()?),
        Value::Object(map) => {
            let mut out = serde_json::Map::new();
            for (k, val) in map {
                out.insert(k.clone(), substitute(val, p)?);
            }
            Value::Object(out)
        }
        other => other.clone(),
    })
}

impl FamilySpec {
    pub fn from_template(name: &str, template: Value, parameters: Vec<f64>, order: f64) -> Result<Self> {
        let spec = FamilySpec {
            name: name.to_string(),
            template: Some(template),
            parameters,
            members: Vec::new(),
            order: Order::new(order)?,
            label: Label::Unknown,
            rationale: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn labeled(mut self, label: Label, rationale: &str) -> Self {
        self.label = label;
        self.rationale = Some(rationale.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.template, self.members.is_empty()) {
            (Some(_), true) => {
                if self.parameters.is_empty() {
                    return Err(PegoError::Dsl(format!("family `{}` has a template but no parameters", self.name)));
                }
                if let Some(p) = self.parameters.iter().find(|p| !p.is_finite()) {
                    return Err(PegoError::Dsl(format!("family `{}` has non-finite parameter {p}", self.name)));
                }
            }
            (None, false) => {
                for m in &self.members {
                    m.validate()?;
                }
            }
            (Some(_), false) => {
                return Err(PegoError::Dsl(format!("family `{}` has both a template and members", self.name)));
            }
            (None, true) => return Err(PegoError::Dsl(format!("family `{}` has no members", self.name))),
        }
        if self.label != Label::Unknown && self.rationale.as_deref().is_none_or(str::is_empty) {
            return Err(PegoError::Dsl(format!("family `{}` is labeled without a rationale", self.name)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_str(text).map_err(|e| PegoError::Dsl(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes")
    }

    pub fn functions(&self) -> Result<Vec<HalfLineFunction>> {
        self.validate()?;
        match &self.template {
            None => Ok(self.members.clone()),
            Some(t) => self
                .parameters
                .iter()
                .map(|&p| {
                    let v = substitute(t, p)?;
                    let f: HalfLineFunction =
                        serde_json::from_value(v).map_err(|e| PegoError::Dsl(format!("template at p = {p}: {e}")))?;
                    f.validate()?;
                    Ok(f)
                })
                .collect(),
        }
    }

    pub fn instantiate(&self, grid: TimeGrid) -> Result<PegoFamily> {
        Ok(PegoFamily::new(self.functions()?, self.order, grid)?.with_label(self.label))
    }

    pub fn with_order(mut self, x: Order) -> Self {
        self.order = x;
        self
    }
}

fn template(text: &str) -> Value {
    serde_json::from_str(text).expect("catalog template parses")
}

fn spec(name: &str, t: &str, parameters: Vec<f64>, order: f64, label: Label, rationale: &str) -> FamilySpec {
    FamilySpec::from_template(name, template(t), parameters, order)
        .expect("catalog entry is valid")
        .labeled(label, rationale)
}

/// The labeled catalog plus the zero family.
pub fn catalog() -> Vec<FamilySpec> {
    use Label::*;
    let ind01 = r#"{"kind":"translate","s":"$p","base":{"kind":"indicator","a":0,"b":1}}"#;
    vec![
        spec("zero", r#"{"kind":"sum","terms":[]}"#, vec![0.0], 0.0, Compact, "a single point"),
        spec("exp-single", r#"{"kind":"exponential","a":"$p"}"#, vec![1.0], 0.0, Compact, "finite set"),
        spec(
            "indicator-set",
            ind01,
            [0.0, 0.5, 1.0].repeat(4),
            0.0,
            Compact,
            "finite set {1_(0,1), 1_(0.5,1.5), 1_(1,2)}, sampled repeatedly",
        ),
        spec(
            "exp-scale",
            r#"{"kind":"exponential","a":"$p"}"#,
            (0..=10).map(|k| 1.0 + 0.1 * k as f64).collect(),
            0.0,
            Compact,
            "continuous image of the compact interval a in [1, 2]",
        ),
        spec(
            "translate-ray",
            ind01,
            (0..=8).map(f64::from).collect(),
            0.0,
            NonCompact,
            "translates of 1_(0,1) stay sqrt(2) apart and carry unit mass past every T",
        ),
        spec(
            "translate-ray-x1",
            ind01,
            (0..=8).map(f64::from).collect(),
            1.0,
            Compact,
            "weighted norms decay like e^{-s}, so the weighted translates converge to 0",
        ),
        spec(
            "modulation-ray",
            r#"{"kind":"modulate","omega":"$p","base":{"kind":"exponential","a":1}}"#,
            (0..=20).map(|k| 10.0 * k as f64).collect(),
            0.0,
            NonCompact,
            "spectral mass centered at y = omega escapes every frequency band",
        ),
        spec(
            "dilation",
            r#"{"kind":"dilate","c":"$p","base":{"kind":"exponential","a":1}}"#,
            (0..=12).map(|k| 2f64.powf(k as f64 / 2.0)).collect(),
            0.0,
            NonCompact,
            "unit-norm dilations concentrate at 0; the shift modulus stays bounded below",
        ),
    ]
}

pub fn catalog_family(name: &str) -> Result<FamilySpec> {
    catalog().into_iter().find(|s| s.name == name).ok_or_else(|| PegoError::UnknownFamily(name.to_string()))
}

/// Relative weights of the term kinds drawn by [`random_family`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindMix {
    pub exponential: f64,
    pub indicator: f64,
    pub modulated: f64,
}

impl Default for KindMix {
    fn default() -> Self {
        KindMix { exponential: 1.0, indicator: 1.0, modulated: 1.0 }
    }
}

/// Seeded family of random finite sums (one to three terms) of
/// exponentials, indicators and modulated exponentials. Coefficients are
/// normalized so their absolute values sum to 1; decay rates lie in
/// `[1, 3]`, indicator supports inside `(0, 2)`, modulations in `[-30, 30]`.
pub fn random_family(seed: u64, size: usize, kind_mix: KindMix) -> Result<FamilySpec> {
    if size == 0 {
        return Err(PegoError::Parameter("random family needs size >= 1".into()));
    }
    let weights = [kind_mix.exponential, kind_mix.indicator, kind_mix.modulated];
    let pick =
        WeightedIndex::new(weights).map_err(|e| PegoError::Parameter(format!("invalid kind mix {weights:?}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(size);
    for _ in 0..size {
        let n_terms = rng.gen_range(1..=3);
        let coeffs: Vec<f64> =
            (0..n_terms).map(|_| rng.gen_range(0.2..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let total: f64 = coeffs.iter().map(|c| c.abs()).sum();
        let mut terms = Vec::with_capacity(n_terms);
        for c in coeffs {
            let base = match pick.sample(&mut rng) {
                0 => HalfLineFunction::exponential(rng.gen_range(1.0..3.0))?,
                1 => {
                    let a = rng.gen_range(0.0..1.0);
                    HalfLineFunction::indicator(a, a + rng.gen_range(0.25..1.0))?
                }
                _ => HalfLineFunction::exponential(rng.gen_range(1.0..3.0))?.modulate(rng.gen_range(-30.0..30.0)),
            };
            terms.push(base.scale(num_complex::Complex64::new(c / total, 0.0)));
        }
        members.push(if terms.len() == 1 { terms.pop().unwrap() } else { HalfLineFunction::sum(terms) });
    }
    Ok(FamilySpec {
        name: format!("random-{seed}-{size}"),
        template: None,
        parameters: Vec::new(),
        members,
        order: Order::new(1.0)?,
        label: Label::Unknown,
        rationale: None,
    })
}
