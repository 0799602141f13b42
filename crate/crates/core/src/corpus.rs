//! Seeded random inputs for the verifiers.
//!
//! A corpus is fully determined by its [`CorpusParams`]; regenerating it
//! yields bit-identical files.

use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{matrix_from_json, matrix_to_json, vector_from_json, vector_to_json};
use crate::lattice::LatticeVector;
use crate::regular_op::RegularOperator;
use crate::report::{canonical_json, digest, write_atomically};
use crate::scalar::Scalar;
use crate::superop::SuperDims;

/// How entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryDistribution {
    /// `p/q` with `1 ≤ q ≤ max_den` and `|p/q| ≤ bound`.
    RationalGrid { bound: i64, max_den: i64 },
    /// Uniform floats in `[lo, hi)`.
    FloatRange { lo: f64, hi: f64 },
}

impl Default for EntryDistribution {
    fn default() -> Self {
        EntryDistribution::RationalGrid { bound: 5, max_den: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    Positive,
    #[default]
    Mixed,
}

/// Probability that a drawn entry is forced to zero.
const ZERO_PROBABILITY: f64 = 0.2;

pub fn random_scalar<S: Scalar>(
    dist: &EntryDistribution,
    sign: SignMode,
    rng: &mut ChaCha8Rng,
) -> S {
    if rng.gen_bool(ZERO_PROBABILITY) {
        return S::zero();
    }
    match *dist {
        EntryDistribution::RationalGrid { bound, max_den } => {
            let den = rng.gen_range(1..=max_den.max(1));
            let hi = bound * den;
            let lo = match sign {
                SignMode::Positive => 0,
                SignMode::Mixed => -hi,
            };
            S::from_ratio(rng.gen_range(lo..=hi), den)
        }
        EntryDistribution::FloatRange { lo, hi } => {
            let (lo, hi) = match sign {
                SignMode::Positive => (lo.max(0.0), hi.max(lo.abs())),
                SignMode::Mixed => (lo, hi),
            };
            if hi > lo {
                S::from_f64(rng.gen_range(lo..hi))
            } else {
                S::from_f64(lo)
            }
        }
    }
}

pub fn random_matrix<S: Scalar>(
    rows: usize,
    cols: usize,
    dist: &EntryDistribution,
    sign: SignMode,
    rng: &mut ChaCha8Rng,
) -> RegularOperator<S> {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| random_scalar(dist, sign, rng)).collect())
        .collect();
    RegularOperator::from_rows(data).expect("nonempty shape")
}

pub fn random_vector<S: Scalar>(
    dim: usize,
    dist: &EntryDistribution,
    sign: SignMode,
    rng: &mut ChaCha8Rng,
) -> LatticeVector<S> {
    LatticeVector::new((0..dim).map(|_| random_scalar(dist, sign, rng)).collect())
        .expect("nonempty dim")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusParams {
    pub seed: u64,
    pub dims: SuperDims,
    pub count: usize,
    pub distribution: EntryDistribution,
    pub sign: SignMode,
}

impl CorpusParams {
    pub fn new(seed: u64, dims: SuperDims, count: usize) -> Self {
        Self {
            seed,
            dims,
            count,
            distribution: EntryDistribution::default(),
            sign: SignMode::default(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "dims": [self.dims.w, self.dims.x, self.dims.y, self.dims.z],
            "count": self.count,
            "distribution": self.distribution,
            "sign": self.sign,
        })
    }
}

pub fn parse_dims(s: &str) -> Result<SuperDims> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("invalid dims {s:?}; expected WxXxYxZ")))?;
    match parts[..] {
        [w, x, y, z] if parts.iter().all(|&d| d >= 1) => Ok(SuperDims { w, x, y, z }),
        _ => Err(Error::Parse(format!(
            "invalid dims {s:?}; expected four positive sizes WxXxYxZ"
        ))),
    }
}

impl FromStr for CorpusParams {
    type Err = Error;

    /// `seed=7,dims=2x2x2x2,count=100[,sign=positive|mixed][,dist=rational|float]`
    fn from_str(s: &str) -> Result<Self> {
        let mut seed = None;
        let mut dims = None;
        let mut count = None;
        let mut sign = SignMode::default();
        let mut distribution = EntryDistribution::default();
        for item in s.split(',').filter(|i| !i.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            let bad = || Error::Parse(format!("invalid value for {k}: {v:?}"));
            match k.trim() {
                "seed" => seed = Some(v.trim().parse().map_err(|_| bad())?),
                "dims" => dims = Some(parse_dims(v)?),
                "count" => count = Some(v.trim().parse().map_err(|_| bad())?),
                "sign" => {
                    sign = match v.trim() {
                        "positive" => SignMode::Positive,
                        "mixed" => SignMode::Mixed,
                        _ => return Err(bad()),
                    }
                }
                "dist" => {
                    distribution = match v.trim() {
                        "rational" => EntryDistribution::default(),
                        "float" => EntryDistribution::FloatRange { lo: -5.0, hi: 5.0 },
                        _ => return Err(bad()),
                    }
                }
                other => return Err(Error::Parse(format!("unknown corpus key {other:?}"))),
            }
        }
        let params = CorpusParams {
            seed: seed.ok_or_else(|| Error::Parse("corpus needs seed=".into()))?,
            dims: dims.ok_or_else(|| Error::Parse("corpus needs dims=".into()))?,
            count: count.ok_or_else(|| Error::Parse("corpus needs count=".into()))?,
            distribution,
            sign,
        };
        if params.count == 0 {
            return Err(Error::Parse("count must be at least 1".into()));
        }
        Ok(params)
    }
}

/// One generated input tuple. `a0`, `b0`, `t` and `w` are always positive;
/// the sign mode applies to `a`, `b`, `c`, `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase<S> {
    pub index: usize,
    /// `z × y`
    pub a: RegularOperator<S>,
    /// `z × y`, positive
    pub a0: RegularOperator<S>,
    /// `x × w`
    pub b: RegularOperator<S>,
    /// `x × w`, positive
    pub b0: RegularOperator<S>,
    /// `z × y`
    pub c: RegularOperator<S>,
    /// `x × w`
    pub d: RegularOperator<S>,
    /// `y × x`, positive
    pub t: RegularOperator<S>,
    /// dimension `w`, positive
    pub w: LatticeVector<S>,
}

impl<S: Scalar> CorpusCase<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "A": matrix_to_json(&self.a),
            "A0": matrix_to_json(&self.a0),
            "B": matrix_to_json(&self.b),
            "B0": matrix_to_json(&self.b0),
            "C": matrix_to_json(&self.c),
            "D": matrix_to_json(&self.d),
            "T": matrix_to_json(&self.t),
            "w": vector_to_json(&self.w),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Parse(format!("corpus case missing {k:?}")))
        };
        Ok(Self {
            index: get("index")?
                .as_u64()
                .ok_or_else(|| Error::Parse("index must be an integer".into()))?
                as usize,
            a: matrix_from_json(get("A")?)?,
            a0: matrix_from_json(get("A0")?)?,
            b: matrix_from_json(get("B")?)?,
            b0: matrix_from_json(get("B0")?)?,
            c: matrix_from_json(get("C")?)?,
            d: matrix_from_json(get("D")?)?,
            t: matrix_from_json(get("T")?)?,
            w: vector_from_json(get("w")?)?,
        })
    }
}

pub fn generate_cases<S: Scalar>(params: &CorpusParams) -> Vec<CorpusCase<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let SuperDims { w, x, y, z } = params.dims;
    let dist = &params.distribution;
    let (sign, pos) = (params.sign, SignMode::Positive);
    (0..params.count)
        .map(|index| CorpusCase {
            index,
            a: random_matrix(z, y, dist, sign, &mut rng),
            a0: random_matrix(z, y, dist, pos, &mut rng),
            b: random_matrix(x, w, dist, sign, &mut rng),
            b0: random_matrix(x, w, dist, pos, &mut rng),
            c: random_matrix(z, y, dist, sign, &mut rng),
            d: random_matrix(x, w, dist, sign, &mut rng),
            t: random_matrix(y, x, dist, pos, &mut rng),
            w: random_vector(w, dist, pos, &mut rng),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

/// Writes `case_NNNN.json` files and a `manifest.json` into `dir`.
pub fn write_corpus<S: Scalar>(params: &CorpusParams, dir: &Path) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(params.count);
    for case in generate_cases::<S>(params) {
        let value = case.to_json();
        let file = format!("case_{:04}.json", case.index);
        write_atomically(&dir.join(&file), &(canonical_json(&value) + "\n"))?;
        entries.push(ManifestEntry {
            file,
            sha256: digest(&value),
        });
    }
    let manifest = json!({
        "params": params.to_json(),
        "files": entries,
    });
    write_atomically(&dir.join("manifest.json"), &(canonical_json(&manifest) + "\n"))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Tolerance};
    use num_traits::Signed;

    fn params() -> CorpusParams {
        "seed=7,dims=2x3x1x2,count=3".parse().unwrap()
    }

    #[test]
    fn parses_corpus_spec() {
        let p = params();
        assert_eq!(p.seed, 7);
        assert_eq!(p.dims, SuperDims { w: 2, x: 3, y: 1, z: 2 });
        assert_eq!(p.count, 3);
        let p: CorpusParams = "seed=1,dims=1x1x1x1,count=2,sign=positive,dist=float"
            .parse()
            .unwrap();
        assert_eq!(p.sign, SignMode::Positive);
        assert!(matches!(p.distribution, EntryDistribution::FloatRange { .. }));
        for bad in [
            "dims=2x2x2x2,count=1",
            "seed=1,dims=2x2x2,count=1",
            "seed=1,dims=2x0x2x2,count=1",
            "seed=1,dims=2x2x2x2,count=0",
            "seed=x,dims=2x2x2x2,count=1",
            "seed=1,dims=2x2x2x2,count=1,colour=red",
        ] {
            assert!(bad.parse::<CorpusParams>().is_err(), "{bad}");
        }
    }

    #[test]
    fn generation_is_deterministic_and_shaped() {
        let a = generate_cases::<Rational>(&params());
        let b = generate_cases::<Rational>(&params());
        assert_eq!(a, b);
        let c = &a[0];
        assert_eq!(c.a.shape(), (2, 1));
        assert_eq!(c.b.shape(), (3, 2));
        assert_eq!(c.t.shape(), (1, 3));
        assert_eq!(c.w.dim(), 2);
        for case in &a {
            assert!(case.a0.is_positive(Tolerance::EXACT));
            assert!(case.b0.is_positive(Tolerance::EXACT));
            assert!(case.t.is_positive(Tolerance::EXACT));
            assert!(case.w.is_positive(Tolerance::EXACT));
            assert_eq!(CorpusCase::from_json(&case.to_json()).unwrap(), *case);
        }
    }

    #[test]
    fn positive_mode_has_no_negative_entries() {
        let mut p = params();
        p.sign = SignMode::Positive;
        p.count = 20;
        for case in generate_cases::<Rational>(&p) {
            for m in [&case.a, &case.b, &case.c, &case.d] {
                assert!(m.is_positive(Tolerance::EXACT));
            }
        }
    }

    #[test]
    fn rational_grid_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dist = EntryDistribution::default();
        let five = Rational::from_int(5);
        let mut saw_negative = false;
        for _ in 0..2000 {
            let v: Rational = random_scalar(&dist, SignMode::Mixed, &mut rng);
            assert!(v.abs() <= five);
            assert!(v.denom() <= &num_bigint::BigInt::from(8));
            saw_negative |= v < Rational::from_int(0);
        }
        assert!(saw_negative);
    }

    #[test]
    fn written_corpus_is_reproducible() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let m1 = write_corpus::<Rational>(&params(), d1.path()).unwrap();
        let m2 = write_corpus::<Rational>(&params(), d2.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.len(), 3);
        for e in &m1 {
            assert_eq!(
                std::fs::read(d1.path().join(&e.file)).unwrap(),
                std::fs::read(d2.path().join(&e.file)).unwrap()
            );
        }
        assert_eq!(
            std::fs::read(d1.path().join("manifest.json")).unwrap(),
            std::fs::read(d2.path().join("manifest.json")).unwrap()
        );
        let text = std::fs::read_to_string(d1.path().join("case_0001.json")).unwrap();
        let case: CorpusCase<Rational> =
            CorpusCase::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(case, generate_cases::<Rational>(&params())[1]);
    }

    #[test]
    fn float_corpus_round_trips_through_canonical_json() {
        let mut p = params();
        p.distribution = EntryDistribution::FloatRange { lo: -5.0, hi: 5.0 };
        let cases = generate_cases::<f64>(&p);
        for case in &cases {
            let text = canonical_json(&case.to_json());
            let back: CorpusCase<f64> =
                CorpusCase::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(&back, case);
        }
    }
}
