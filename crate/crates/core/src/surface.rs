//! Decision-surface sampling for two-feature models.
//!
//! The mesh is written as CSV with header `x,y,d1,d2,label`, row-major with
//! `x` varying fastest. `label` is the class index into the model's class
//! map; `d1,d2` are the two scores described on
//! [`crate::model::ScoredPrediction`].

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Result, TwinSvmError};
use crate::persistence::SavedModel;

pub const DEFAULT_RESOLUTION: usize = 200;
pub const CSV_HEADER: &str = "x,y,d1,d2,label";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridValue {
    pub x: f64,
    pub y: f64,
    pub d1: f64,
    pub d2: f64,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x_bounds: (f64, f64),
    pub y_bounds: (f64, f64),
    pub resolution: usize,
    /// `resolution * resolution` points, x fastest.
    pub values: Vec<GridValue>,
}

/// Bounding box of the two columns, widened by 10% of the span per side.
pub fn default_bounds(samples: &DMatrix<f64>) -> Result<((f64, f64), (f64, f64))> {
    if samples.ncols() != 2 || samples.nrows() == 0 {
        return Err(TwinSvmError::validation("visualization requires 2 features"));
    }
    let widen = |lo: f64, hi: f64| {
        let pad = if hi > lo { 0.1 * (hi - lo) } else { 0.5 };
        (lo - pad, hi + pad)
    };
    let xs = samples.column(0);
    let ys = samples.column(1);
    Ok((widen(xs.min(), xs.max()), widen(ys.min(), ys.max())))
}

/// `steps` points from `lo` to `hi` with both endpoints exact.
fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (steps - 1) as f64)
            }
        })
        .collect()
}

fn check_bounds(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(TwinSvmError::validation(format!("{name} bounds need min < max, got ({lo}, {hi})")));
    }
    Ok(())
}

/// Scores a `resolution x resolution` mesh in the model's input space; a
/// bundled scaler is applied before scoring.
pub fn sample_grid(
    model: &SavedModel,
    x_bounds: (f64, f64),
    y_bounds: (f64, f64),
    resolution: usize,
) -> Result<GridField> {
    if model.model.feature_count() != 2 {
        return Err(TwinSvmError::validation("visualization requires 2 features"));
    }
    check_bounds("x", x_bounds)?;
    check_bounds("y", y_bounds)?;
    if resolution < 2 {
        return Err(TwinSvmError::validation("grid resolution must be at least 2"));
    }
    let xs = axis(x_bounds.0, x_bounds.1, resolution);
    let ys = axis(y_bounds.0, y_bounds.1, resolution);
    let mesh = DMatrix::from_fn(resolution * resolution, 2, |r, c| {
        if c == 0 {
            xs[r % resolution]
        } else {
            ys[r / resolution]
        }
    });
    let scored = model.predict_scored_batch(&mesh)?;
    let values = scored
        .iter()
        .enumerate()
        .map(|(r, s)| GridValue {
            x: mesh[(r, 0)],
            y: mesh[(r, 1)],
            d1: s.first,
            d2: s.second,
            label: s.class,
        })
        .collect();
    Ok(GridField {
        x_bounds,
        y_bounds,
        resolution,
        values,
    })
}

impl GridField {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for v in &self.values {
            writeln!(out, "{},{},{},{},{}", v.x, v.y, v.d1, v.d2, v.label).unwrap();
        }
        out
    }

    /// Parses [`GridField::to_csv`] output; bounds come from the first and
    /// last mesh points.
    pub fn from_csv(text: &str) -> Result<GridField> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(TwinSvmError::Parse {
                line: 1,
                message: format!("expected header '{CSV_HEADER}'"),
            });
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let bad = |m: &str| TwinSvmError::Parse {
                line: lineno,
                message: m.to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            values.push(GridValue {
                x: num(fields[0])?,
                y: num(fields[1])?,
                d1: num(fields[2])?,
                d2: num(fields[3])?,
                label: fields[4].parse().map_err(|_| bad("bad label"))?,
            });
        }
        let resolution = (values.len() as f64).sqrt().round() as usize;
        if resolution < 2 || resolution * resolution != values.len() {
            return Err(TwinSvmError::validation(format!(
                "{} grid points do not form a square mesh",
                values.len()
            )));
        }
        let first = values[0];
        let last = values[values.len() - 1];
        Ok(GridField {
            x_bounds: (first.x, last.x),
            y_bounds: (first.y, last.y),
            resolution,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{Algorithm, BinaryModel, Plane};
    use crate::model::FittedModel;
    use crate::kernels::KernelSpec;
    use nalgebra::DVector;

    fn vertical_planes(d: usize) -> SavedModel {
        let mut w = vec![0.0; d];
        w[0] = 1.0;
        let plane = |b| Plane {
            w: DVector::from_vec(w.clone()),
            b,
        };
        let model = FittedModel::Binary {
            model: BinaryModel::from_parts(Algorithm::Tsvm, plane(1.0), plane(-1.0), KernelSpec::linear(), None, d)
                .unwrap(),
            class_map: vec!["a".into(), "b".into()],
        };
        SavedModel::new(model, None)
    }

    #[test]
    fn mesh_size_and_order() {
        let g = sample_grid(&vertical_planes(2), (-2.0, 2.0), (0.0, 1.0), 3).unwrap();
        assert_eq!(g.values.len(), 9);
        assert_eq!((g.values[1].x, g.values[1].y), (0.0, 0.0));
        assert_eq!((g.values[3].x, g.values[3].y), (-2.0, 0.5));
        assert_eq!(g.values[0].label, 0);
        assert_eq!(g.values[2].label, 1);
    }

    #[test]
    fn csv_roundtrip() {
        let g = sample_grid(&vertical_planes(2), (-1.3, 2.7), (0.1, 0.9), 7).unwrap();
        let text = g.to_csv();
        assert!(text.starts_with("x,y,d1,d2,label\n"));
        assert_eq!(GridField::from_csv(&text).unwrap(), g);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(sample_grid(&vertical_planes(3), (0.0, 1.0), (0.0, 1.0), 5).is_err());
        assert!(sample_grid(&vertical_planes(2), (1.0, 1.0), (0.0, 1.0), 5).is_err());
        assert!(sample_grid(&vertical_planes(2), (0.0, 1.0), (0.0, 1.0), 1).is_err());
        assert!(default_bounds(&DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn bounds_are_widened() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 10.0, 5.0]);
        let (xb, yb) = default_bounds(&s).unwrap();
        assert_eq!(xb, (-1.0, 11.0));
        assert_eq!(yb, (4.5, 5.5));
    }
}
