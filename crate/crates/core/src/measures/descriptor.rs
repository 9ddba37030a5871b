//! JSON measure descriptors.
//!
//! ```json
//! {"atoms": [[0.0, 0.25]],
//!  "pieces": [{"lo": 0, "hi": 4, "kind": "quartercircle", "weight": 0.75}],
//!  "radius": 4}
//! ```
//!
//! Piece kinds: `semicircle` (centred on the interval), `quartercircle`
//! (singular edge at `lo`), `uniform`, `poly` (`params.coeffs`), `beta`
//! (`params.a`, `params.b`) and `table` (`params.points` as `[t, ρ]` pairs).
//! Every piece is normalized to its `weight`; missing weights share the mass
//! left over by the atoms equally.

use serde::{Deserialize, Serialize};

use super::{beta_piece, poly_piece, quartercircle_piece, semicircle_piece, table_pieces, uniform_piece, CompactMeasure, DensityPiece};
use crate::error::{input, Error, Result};
use crate::quadrature::TanhSinh;
use crate::scalar::rat_from_f64;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct MeasureDescriptor {
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub pieces: Vec<PieceDescriptor>,
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PieceDescriptor {
    pub lo: f64,
    pub hi: f64,
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub weight: Option<f64>,
}

fn param(v: &serde_json::Value, key: &str) -> Result<f64> {
    v.get(key).and_then(|x| x.as_f64()).ok_or_else(|| Error::Input(format!("missing numeric parameter `{key}`")))
}

impl PieceDescriptor {
    fn build(&self) -> Result<Vec<DensityPiece>> {
        let (lo, hi) = (self.lo, self.hi);
        if !(hi > lo) {
            return input(format!("piece [{lo}, {hi}] is empty"));
        }
        Ok(match self.kind.as_str() {
            "semicircle" => {
                let r = 0.5 * (hi - lo);
                let rr = rat_from_f64(hi) - rat_from_f64(lo);
                let r2 = &rr * &rr / num_rational::BigRational::from_integer(4.into());
                vec![semicircle_piece(0.5 * (lo + hi), r, Some(r2))]
            }
            "quartercircle" => vec![quartercircle_piece(lo, hi - lo)],
            "uniform" => vec![uniform_piece(lo, hi)],
            "poly" => {
                let coeffs: Vec<f64> = serde_json::from_value(self.params.get("coeffs").cloned().unwrap_or_default())
                    .map_err(|e| Error::Input(format!("poly coeffs: {e}")))?;
                vec![poly_piece(lo, hi, &coeffs)?]
            }
            "beta" => vec![beta_piece(param(&self.params, "a")?, param(&self.params, "b")?, lo, hi)?],
            "table" => {
                let pts: Vec<(f64, f64)> = serde_json::from_value(self.params.get("points").cloned().unwrap_or_default())
                    .map_err(|e| Error::Input(format!("table points: {e}")))?;
                if pts.first().map(|p| p.0) != Some(lo) || pts.last().map(|p| p.0) != Some(hi) {
                    return input("table points must start at lo and end at hi");
                }
                let pieces = table_pieces(&pts)?;
                let quad = TanhSinh::with_tol(1e-13);
                let mut mass = 0.0;
                for p in &pieces {
                    mass += p.integrate(&quad, |_| 1.0)?;
                }
                if !(mass > 0.0) {
                    return input("tabulated density has no mass");
                }
                pieces.iter().map(|p| p.scaled(1.0 / mass)).collect()
            }
            other => return input(format!("unknown piece kind `{other}`")),
        })
    }
}

impl MeasureDescriptor {
    pub fn build(&self) -> Result<CompactMeasure> {
        let atom_mass: f64 = self.atoms.iter().map(|a| a.1).sum();
        let explicit: f64 = self.pieces.iter().filter_map(|p| p.weight).sum();
        let implicit = self.pieces.iter().filter(|p| p.weight.is_none()).count();
        let share = if implicit > 0 { (1.0 - atom_mass - explicit) / implicit as f64 } else { 0.0 };
        let mut pieces = Vec::new();
        for pd in &self.pieces {
            let w = pd.weight.unwrap_or(share);
            if !(w > 0.0) {
                return input(format!("piece [{}, {}] has non-positive weight {w}", pd.lo, pd.hi));
            }
            pieces.extend(pd.build()?.iter().map(|p| p.scaled(w)));
        }
        CompactMeasure::new(self.atoms.clone(), pieces, self.radius, "descriptor")
    }

    pub fn from_json(text: &str) -> Result<CompactMeasure> {
        let d: MeasureDescriptor = serde_json::from_str(text).map_err(|e| Error::Input(format!("measure JSON: {e}")))?;
        d.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_descriptor() {
        let m = MeasureDescriptor::from_json(
            r#"{"atoms":[[0.0,0.25]],"pieces":[{"lo":0,"hi":4,"kind":"quartercircle"}],"radius":4}"#,
        )
        .unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        assert!((m.moment(1).unwrap() - 0.75).abs() < 1e-10);
        assert!(m.is_exact());
    }

    #[test]
    fn table_descriptor() {
        let m = MeasureDescriptor::from_json(
            r#"{"pieces":[{"lo":0,"hi":1,"kind":"table","params":{"points":[[0,1],[0.5,1],[1,1]]}}]}"#,
        )
        .unwrap();
        assert!((m.moment(1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn malformed() {
        assert!(MeasureDescriptor::from_json("{").is_err());
        assert!(MeasureDescriptor::from_json(r#"{"pieces":[{"lo":0,"hi":1,"kind":"zzz"}]}"#).is_err());
        assert!(MeasureDescriptor::from_json(r#"{"atoms":[[0,0.5]]}"#).is_err());
    }
}
