use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rank::schmidt::central_binomial;

/// A numeric constant, or an asymptotic shape that is never evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Value(f64),
    Symbolic(String),
}

impl Constant {
    pub fn value(&self) -> Option<f64> {
        match self {
            Constant::Value(v) => Some(*v),
            Constant::Symbolic(_) => None,
        }
    }
}

impl std::fmt::Display for Constant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constant::Value(v) => write!(f, "{v}"),
            Constant::Symbolic(s) => f.write_str(s),
        }
    }
}

/// Constants of the rank comparison `rk_k <= A [n rk_kbar + 1]^B` for forms,
/// its multilinear version `(A~, B~)`, and the embedding threshold
/// `prk > C (n t^d)^D` where the field class has one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    #[serde(rename = "A")]
    pub a: Constant,
    #[serde(rename = "B")]
    pub b: Constant,
    #[serde(rename = "A_tilde")]
    pub a_tilde: Constant,
    #[serde(rename = "B_tilde")]
    pub b_tilde: Constant,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Constant>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Constant>,
}

impl RegimeConstants {
    pub fn describe(&self) -> String {
        let mut s = format!("A={};B={};A~={};B~={}", self.a, self.b, self.a_tilde, self.b_tilde);
        if let Some(c) = &self.c {
            s.push_str(&format!(";C={c}"));
        }
        if let Some(d) = &self.d {
            s.push_str(&format!(";D={d}"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldClass {
    Rationals,
    /// Any finite field.
    Finite,
    /// Finite fields above the unspecified size threshold.
    FiniteLarge,
    /// Number fields and separable extensions of `F_q(t)`.
    Global,
}

/// Per-field-class constants for a fixed degree `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub degree: usize,
    pub rationals: RegimeConstants,
    pub finite: RegimeConstants,
    pub finite_large: RegimeConstants,
    pub global: RegimeConstants,
    /// `bias(P) <= q^{-r}` once `prk(P) > alpha r^beta` (any finite field).
    pub bias_alpha: Constant,
    pub bias_beta: Constant,
    /// Multiplier in the large-field version, `prk(P) > c r`.
    pub bias_large_field: Constant,
}

const DOUBLE_EXP: &str = "2^{2^{O(d^2)}}";

impl ConstantsTable {
    pub fn defaults(d: usize) -> Self {
        let d_f = d as f64;
        let binom = central_binomial(d) as f64;
        let two = 2f64.powi(d as i32 - 1);
        let v = Constant::Value;
        ConstantsTable {
            degree: d,
            rationals: RegimeConstants {
                a: v(4f64.powi(d as i32 - 1) * d_f * binom.powi(d as i32)),
                b: v(d_f),
                a_tilde: v(4f64.powi(d as i32 - 1) * d_f),
                b_tilde: v(d_f),
                c: None,
                d: None,
            },
            finite: RegimeConstants {
                a: Constant::Symbolic(DOUBLE_EXP.into()),
                b: Constant::Symbolic(DOUBLE_EXP.into()),
                a_tilde: Constant::Symbolic("2^{d^{2^{O(d^2)}}}".into()),
                b_tilde: Constant::Symbolic(DOUBLE_EXP.into()),
                c: Some(Constant::Symbolic("2^{d^{2^{O(d^2)}}}".into())),
                d: Some(Constant::Symbolic(DOUBLE_EXP.into())),
            },
            finite_large: RegimeConstants {
                a: v(two * binom.powi(d as i32)),
                b: v(d_f),
                a_tilde: v(two),
                b_tilde: v(d_f),
                c: Some(v(two)),
                d: Some(v(1.0)),
            },
            global: RegimeConstants {
                a: v(two * (d_f - 1.0) * binom.powi(2 * d as i32)),
                b: v(2.0 * d_f),
                a_tilde: v(two * (d_f - 1.0)),
                b_tilde: v(2.0 * d_f),
                c: Some(v(two * (d_f - 1.0))),
                d: Some(v(2.0)),
            },
            bias_alpha: Constant::Symbolic(DOUBLE_EXP.into()),
            bias_beta: Constant::Symbolic(DOUBLE_EXP.into()),
            bias_large_field: v(two),
        }
    }

    /// Defaults for degree `d` with entries replaced from a JSON object of the
    /// same shape, e.g. `{"rationals": {"A": 10}}`.
    pub fn with_overrides(d: usize, overrides: &Value) -> Result<Self> {
        let mut base = serde_json::to_value(Self::defaults(d))?;
        merge(&mut base, overrides)?;
        let table: ConstantsTable = serde_json::from_value(base)?;
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        let regimes = [&self.rationals, &self.finite, &self.finite_large, &self.global];
        for r in regimes {
            for c in [Some(&r.a), Some(&r.b), Some(&r.a_tilde), Some(&r.b_tilde), r.c.as_ref(), r.d.as_ref()]
                .into_iter()
                .flatten()
            {
                if let Constant::Value(v) = c {
                    if !(*v > 0.0) {
                        return Err(Error::InvalidInput(format!("constants must be positive, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn regime(&self, class: FieldClass) -> &RegimeConstants {
        match class {
            FieldClass::Rationals => &self.rationals,
            FieldClass::Finite => &self.finite,
            FieldClass::FiniteLarge => &self.finite_large,
            FieldClass::Global => &self.global,
        }
    }

    /// `A [n r + 1]^B`, or `None` for symbolic constants.
    pub fn form_bound(&self, class: FieldClass, n: usize, r: f64) -> Option<f64> {
        let reg = self.regime(class);
        Some(reg.a.value()? * (n as f64 * r + 1.0).powf(reg.b.value()?))
    }

    /// `A~ [n r + 1]^B~`, or `None` for symbolic constants.
    pub fn multilinear_bound(&self, class: FieldClass, n: usize, r: f64) -> Option<f64> {
        let reg = self.regime(class);
        Some(reg.a_tilde.value()? * (n as f64 * r + 1.0).powf(reg.b_tilde.value()?))
    }

    /// `C (n t^d)^D`, or `None` when unavailable.
    pub fn embedding_threshold(&self, class: FieldClass, n: usize, t: usize) -> Option<f64> {
        let reg = self.regime(class);
        let c = reg.c.as_ref()?.value()?;
        let dd = reg.d.as_ref()?.value()?;
        Some(c * (n as f64 * (t as f64).powi(self.degree as i32)).powf(dd))
    }
}

fn merge(base: &mut Value, over: &Value) -> Result<()> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v)?,
                    Some(slot) => *slot = v.clone(),
                    None => {
                        // Optional entries (C, D) may be absent in the defaults.
                        if matches!(k.as_str(), "C" | "D") {
                            b.insert(k.clone(), v.clone());
                        } else {
                            return Err(Error::InvalidInput(format!("unknown constants key {k:?}")));
                        }
                    }
                }
            }
            Ok(())
        }
        _ => Err(Error::InvalidInput("constants override must be a JSON object".into())),
    }
}
