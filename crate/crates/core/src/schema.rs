//! JSON form of a distribution.
//!
//! ```json
//! {"kind": "poly-pieces", "support": [0, 0.25],
//!  "pieces": [{"to": 0.1, "coef": [8]}, {"to": 0.25, "coef": [0.4]}]}
//! ```
//!
//! Mixtures are flattened when loaded.

use crate::dist::{Atom, PiecewisePolyDist};
use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub to: f64,
    pub coef: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub dist: DistSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform {
        support: [f64; 2],
    },
    PolyPieces {
        support: [f64; 2],
        pieces: Vec<PieceSpec>,
        #[serde(default)]
        atoms: Vec<Atom>,
    },
    Atoms {
        support: [f64; 2],
        atoms: Vec<Atom>,
    },
    Mixture {
        components: Vec<Component>,
    },
}

impl DistSpec {
    pub fn build(&self) -> Result<PiecewisePolyDist> {
        match self {
            DistSpec::Uniform { support } => PiecewisePolyDist::uniform(support[0], support[1]),
            DistSpec::PolyPieces { support, pieces, atoms } => {
                let [lo, hi] = *support;
                let body: Vec<(f64, Vec<f64>)> = pieces.iter().map(|p| (p.to, p.coef.clone())).collect();
                if let Some(last) = body.last() {
                    if last.0 > hi + 1e-15 {
                        return config(format!("piece end {} beyond support end {hi}", last.0));
                    }
                }
                let mut segs = Vec::new();
                let mut start = lo;
                for (to, coef) in body {
                    if to <= start {
                        return config("piece breakpoints must be strictly increasing");
                    }
                    segs.push(crate::dist::Segment { lo: start, hi: to, coef });
                    start = to;
                }
                PiecewisePolyDist::new(lo, hi, segs, atoms.clone())
            }
            DistSpec::Atoms { support, atoms } => PiecewisePolyDist::new(support[0], support[1], vec![], atoms.clone()),
            DistSpec::Mixture { components } => {
                let built: Vec<(f64, PiecewisePolyDist)> = components
                    .iter()
                    .map(|c| c.dist.build().map(|d| (c.weight, d)))
                    .collect::<Result<_>>()?;
                let refs: Vec<(f64, &PiecewisePolyDist)> = built.iter().map(|(w, d)| (*w, d)).collect();
                PiecewisePolyDist::mixture(&refs)
            }
        }
    }

    /// Lossless spec for an existing distribution, as `poly-pieces`.
    pub fn from_dist(d: &PiecewisePolyDist) -> Self {
        let (lo, hi) = d.support();
        let mut pieces = Vec::new();
        let mut at = lo;
        for s in d.segments() {
            if s.lo > at {
                pieces.push(PieceSpec { to: s.lo, coef: vec![0.0] });
            }
            pieces.push(PieceSpec { to: s.hi, coef: s.coef.clone() });
            at = s.hi;
        }
        DistSpec::PolyPieces { support: [lo, hi], pieces, atoms: d.atoms().to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let u: DistSpec = serde_json::from_str(r#"{"kind":"uniform","support":[0,0.18]}"#).unwrap();
        assert!((u.build().unwrap().mean() - 0.09).abs() < 1e-15);
        let p: DistSpec = serde_json::from_str(
            r#"{"kind":"poly-pieces","support":[0,1],"pieces":[{"to":1,"coef":[0,2]}]}"#,
        )
        .unwrap();
        assert!((p.build().unwrap().mean() - 2.0 / 3.0).abs() < 1e-15);
        let a: DistSpec =
            serde_json::from_str(r#"{"kind":"atoms","support":[0,1],"atoms":[{"at":0.5,"mass":1}]}"#).unwrap();
        assert_eq!(a.build().unwrap().mean(), 0.5);
        let m: DistSpec = serde_json::from_str(
            r#"{"kind":"mixture","components":[
                {"weight":0.5,"dist":{"kind":"uniform","support":[0,1]}},
                {"weight":0.5,"dist":{"kind":"atoms","support":[0,1],"atoms":[{"at":0.5,"mass":1}]}}]}"#,
        )
        .unwrap();
        let d = m.build().unwrap();
        assert!((d.atom_mass_at(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(serde_json::from_str::<DistSpec>(r#"{"kind":"uniform","support":[0,1],"x":1}"#).is_err());
        assert!(serde_json::from_str::<DistSpec>(r#"{"kind":"beta","support":[0,1]}"#).is_err());
    }

    #[test]
    fn round_trips_through_pieces() {
        let d = PiecewisePolyDist::step_density(&[0.0, 0.1, 0.3, 0.4], &[4.0, 0.8, 4.4]).unwrap();
        let back = DistSpec::from_dist(&d).build().unwrap();
        assert_eq!(back.segments(), d.segments());
    }
}
