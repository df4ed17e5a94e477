//! Problem instances: `k` (field, class) pairs, coefficients `a_i`, cutoff
//! `X`, and the targets `N`, read from JSON instance files.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_i64, lcm};
use crate::error::{Error, Result};
use crate::galois::{ClassSpec, GaloisSpec};
use crate::sieve::{SieveParams, MAX_LIMIT};

pub const DEFAULT_EULER_PMAX: u64 = 10_000;

const BUILTIN_INSTANCES: &[(&str, &str)] = &[
    ("classical-vinogradov", include_str!("../instances/classical-vinogradov.json")),
    ("gaussian-vinogradov", include_str!("../instances/gaussian-vinogradov.json")),
    ("twin-average", include_str!("../instances/twin-average.json")),
];

pub fn builtin_instance_names() -> Vec<&'static str> {
    BUILTIN_INSTANCES.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_instance_json(name: &str) -> Option<&'static str> {
    let name = name.trim_end_matches(".json");
    BUILTIN_INSTANCES.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
}

/// A field with one of its classes.
#[derive(Clone, Debug)]
pub struct FieldClass {
    pub name: String,
    pub spec: GaloisSpec,
    pub class_label: String,
}

impl FieldClass {
    pub fn class(&self) -> &ClassSpec {
        self.spec.class(&self.class_label).expect("validated class label")
    }

    /// Built-in shorthand `<spec>-<class>`, e.g. `gaussian-e`, `s3-cbrt2-2`,
    /// or a bare spec name with a single class.
    pub fn builtin(s: &str) -> Result<FieldClass> {
        if let Some(spec) = GaloisSpec::builtin(s) {
            if spec.classes().len() == 1 {
                let label = spec.classes()[0].label.clone();
                return Ok(FieldClass {
                    name: s.to_string(),
                    spec,
                    class_label: label,
                });
            }
        }
        let (name, label) = s
            .rsplit_once('-')
            .ok_or_else(|| Error::Validation(format!("unknown field-class {s:?}")))?;
        let spec = GaloisSpec::builtin(name)
            .ok_or_else(|| Error::Validation(format!("unknown built-in field {name:?}")))?;
        if spec.class(label).is_none() {
            return Err(Error::Validation(format!("field {name:?} has no class {label:?}")));
        }
        Ok(FieldClass {
            name: s.to_string(),
            spec,
            class_label: label.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    Single(i64),
    Range { from: i64, to: i64, step: Option<i64> },
    List(Vec<i64>),
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<i64>> {
        match self {
            NSpec::Single(n) => Ok(vec![*n]),
            NSpec::List(v) => Ok(v.clone()),
            NSpec::Range { from, to, step } => {
                let step = step.unwrap_or(1);
                if step <= 0 {
                    return Err(Error::Validation("N step must be positive".into()));
                }
                Ok((*from..=*to).step_by(step as usize).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldEntry {
    Shorthand(String),
    Builtin { builtin: String, class: String },
    Inline { spec: GaloisSpec, class: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveConfig {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B", default)]
    pub b: Option<f64>,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { a: 1.0, b: None }
    }
}

impl SieveConfig {
    pub fn b(&self) -> f64 {
        self.b.unwrap_or(4.0 * self.a)
    }
}

/// The JSON document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub fields: Vec<FieldEntry>,
    pub a: Vec<i64>,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "N")]
    pub n: NSpec,
    #[serde(default)]
    pub sieve: SieveConfig,
    #[serde(default = "default_pmax")]
    pub euler_pmax: u64,
}

fn default_pmax() -> u64 {
    DEFAULT_EULER_PMAX
}

impl PartialEq for GaloisSpec {
    fn eq(&self, other: &Self) -> bool {
        self.to_json() == other.to_json()
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub fields: Vec<FieldClass>,
    pub a: Vec<i64>,
    pub x: u64,
    pub n_values: Vec<i64>,
    pub sieve: SieveConfig,
    pub euler_pmax: u64,
}

impl ProblemInstance {
    pub fn new(fields: Vec<FieldClass>, a: Vec<i64>, x: u64, n_values: Vec<i64>) -> Result<ProblemInstance> {
        let inst = ProblemInstance {
            fields,
            a,
            x,
            n_values,
            sieve: SieveConfig::default(),
            euler_pmax: DEFAULT_EULER_PMAX,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// `k` copies of the same field-class.
    pub fn uniform(field: &str, a: Vec<i64>, x: u64, n_values: Vec<i64>) -> Result<ProblemInstance> {
        let fc = FieldClass::builtin(field)?;
        ProblemInstance::new(vec![fc; a.len()], a, x, n_values)
    }

    pub fn from_file(file: InstanceFile) -> Result<ProblemInstance> {
        let fields = file
            .fields
            .into_iter()
            .map(|f| match f {
                FieldEntry::Shorthand(s) => FieldClass::builtin(&s),
                FieldEntry::Builtin { builtin, class } => FieldClass::builtin(&format!("{builtin}-{class}")),
                FieldEntry::Inline { spec, class } => {
                    let spec = spec.validated()?;
                    if spec.class(&class).is_none() {
                        return Err(Error::Validation(format!("spec has no class {class:?}")));
                    }
                    Ok(FieldClass {
                        name: format!("inline-{class}"),
                        spec,
                        class_label: class,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let inst = ProblemInstance {
            fields,
            a: file.a,
            x: file.x,
            n_values: file.n.values()?,
            sieve: file.sieve,
            euler_pmax: file.euler_pmax,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_json(s: &str) -> Result<ProblemInstance> {
        let file: InstanceFile =
            serde_json::from_str(s).map_err(|e| Error::Validation(format!("instance file: {e}")))?;
        ProblemInstance::from_file(file)
    }

    pub fn builtin(name: &str) -> Result<ProblemInstance> {
        let json = builtin_instance_json(name)
            .ok_or_else(|| Error::Validation(format!("unknown built-in instance {name:?}")))?;
        ProblemInstance::from_json(json)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.a.len();
        if k < 2 {
            return Err(Error::Validation("need at least two coefficients".into()));
        }
        if self.fields.len() != k {
            return Err(Error::Validation(format!(
                "{} fields for {k} coefficients",
                self.fields.len()
            )));
        }
        if self.a.iter().any(|&v| v == 0) {
            return Err(Error::Validation("coefficients must be nonzero".into()));
        }
        if self.a.iter().any(|&v| v.unsigned_abs() > 1 << 20) {
            return Err(Error::Validation("coefficients must satisfy |a_i| <= 2^20".into()));
        }
        let g = self.a.iter().fold(0u64, |g, &v| gcd_i64(g as i64, v));
        if g != 1 {
            return Err(Error::Validation("coefficients share a common divisor".into()));
        }
        if self.x > MAX_LIMIT {
            return Err(Error::Validation(format!("X = {} exceeds {MAX_LIMIT}", self.x)));
        }
        for f in &self.fields {
            let report = f.spec.validate();
            if !report.is_valid() {
                return Err(Error::InvalidSpec(report));
            }
            if f.spec.class(&f.class_label).is_none() {
                return Err(Error::Validation(format!("unknown class {:?}", f.class_label)));
            }
        }
        if !(self.sieve.a > 0.0) || !(self.sieve.b() > 0.0) {
            return Err(Error::Validation("sieve A and B must be positive".into()));
        }
        if self.euler_pmax < 2 {
            return Err(Error::Validation("euler_pmax must be at least 2".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// `D = lcm(D_i)`.
    pub fn modulus(&self) -> u64 {
        self.fields.iter().fold(1, |d, f| lcm(d, f.spec.modulus()))
    }

    pub fn sieve_params(&self) -> SieveParams {
        SieveParams::new(self.x, self.sieve.a, self.sieve.b())
    }

    /// Smallest and largest attainable `N = Σ a_i n_i`, `0 ≤ n_i ≤ X`.
    pub fn n_bounds(&self) -> (i64, i64) {
        let x = self.x as i64;
        let lo = self.a.iter().filter(|&&v| v < 0).map(|&v| v * x).sum();
        let hi = self.a.iter().filter(|&&v| v > 0).map(|&v| v * x).sum();
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_field_classes() {
        assert_eq!(FieldClass::builtin("gaussian-e").unwrap().class_label, "e");
        assert_eq!(FieldClass::builtin("s3-cbrt2-2").unwrap().class_label, "2");
        assert_eq!(FieldClass::builtin("trivial").unwrap().class_label, "e");
        assert!(FieldClass::builtin("gaussian").is_err());
        assert!(FieldClass::builtin("gaussian-z").is_err());
    }

    #[test]
    fn builtin_instances_parse() {
        for name in builtin_instance_names() {
            let inst = ProblemInstance::builtin(name).unwrap();
            assert!(inst.k() >= 2);
        }
        let c = ProblemInstance::builtin("classical-vinogradov.json").unwrap();
        assert_eq!(c.a, vec![1, 1, 1]);
        assert_eq!(c.modulus(), 1);
        assert_eq!(c.sieve.b(), 4.0);
    }

    #[test]
    fn rejects_common_divisor() {
        let err = ProblemInstance::uniform("trivial", vec![2, 4], 100, vec![10]).unwrap_err();
        assert!(err.to_string().contains("coefficients share a common divisor"));
        assert!(ProblemInstance::uniform("trivial", vec![1], 100, vec![10]).is_err());
        assert!(ProblemInstance::uniform("trivial", vec![1, 0], 100, vec![10]).is_err());
    }

    #[test]
    fn n_specs() {
        let json = r#"{"fields":["gaussian-e",{"builtin":"gaussian","class":"c"},
            {"spec":{"kind":"abelian","modulus":3,"classes":[{"label":"a","coset":[1]},{"label":"b","coset":[2]}]},"class":"b"}],
            "a":[1,-2,3],"X":100,"N":{"from":5,"to":15,"step":5}}"#;
        let inst = ProblemInstance::from_json(json).unwrap();
        assert_eq!(inst.n_values, vec![5, 10, 15]);
        assert_eq!(inst.modulus(), 12);
        assert_eq!(inst.n_bounds(), (-200, 400));
        assert_eq!(inst.euler_pmax, DEFAULT_EULER_PMAX);
    }
}
