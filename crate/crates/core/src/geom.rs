//! Boxes and overlap geometry.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("box has non-finite field ({cx}, {cy}, {w}, {h})")]
    NonFinite { cx: f64, cy: f64, w: f64, h: f64 },
    #[error("box has non-positive size {w}x{h}")]
    NonPositiveSize { w: f64, h: f64 },
}

/// Axis-aligned box in normalized image coordinates: center position plus
/// width and height, all as fractions of the frame size. Boxes may extend
/// past the frame edges; nothing here clips them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { cx, cy, w, h }
    }

    /// All fields finite, width and height strictly positive.
    pub fn validate(&self) -> Result<(), BoxError> {
        if !(self.cx.is_finite() && self.cy.is_finite() && self.w.is_finite() && self.h.is_finite())
        {
            return Err(BoxError::NonFinite { cx: self.cx, cy: self.cy, w: self.w, h: self.h });
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(BoxError::NonPositiveSize { w: self.w, h: self.h });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn x_min(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn x_max(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn y_min(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn y_max(&self) -> f64 {
        self.cy + self.h / 2.0
    }
}

/// Intersection over union of two boxes. Disjoint boxes score exactly 0,
/// identical boxes exactly 1.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x_max().min(b.x_max()) - a.x_min().max(b.x_min())).max(0.0);
    let iy = (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0);
    let inter = ix * iy;
    if inter <= 0.0 {
        return 0.0;
    }
    // Areas come from the same corner coordinates as the intersection, so
    // inter <= min(area_a, area_b) holds in floating point and the result
    // stays in [0, 1]; in particular iou(a, a) == 1.0 exactly.
    let area_a = (a.x_max() - a.x_min()) * (a.y_max() - a.y_min());
    let area_b = (b.x_max() - b.x_min()) * (b.y_max() - b.y_min());
    inter / (area_a + area_b - inter)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Rasterized overlap on a fine grid of cell centers; deliberately avoids
    // the closed-form min/max intersection used by `iou`.
    fn raster_iou(a: &BBox, b: &BBox, n: usize) -> f64 {
        let x_lo = a.x_min().min(b.x_min());
        let x_hi = a.x_max().max(b.x_max());
        let y_lo = a.y_min().min(b.y_min());
        let y_hi = a.y_max().max(b.y_max());
        let dx = (x_hi - x_lo) / n as f64;
        let dy = (y_hi - y_lo) / n as f64;
        let inside = |bx: &BBox, x: f64, y: f64| {
            x >= bx.x_min() && x <= bx.x_max() && y >= bx.y_min() && y <= bx.y_max()
        };
        let (mut inter, mut union) = (0usize, 0usize);
        for i in 0..n {
            for j in 0..n {
                let x = x_lo + (i as f64 + 0.5) * dx;
                let y = y_lo + (j as f64 + 0.5) * dy;
                let (ia, ib) = (inside(a, x, y), inside(b, x, y));
                if ia && ib {
                    inter += 1;
                }
                if ia || ib {
                    union += 1;
                }
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_offset_squares_is_one_third() {
        // 0.2x0.2 squares offset by 0.1 in x: intersection 0.02, union 0.06.
        let a = BBox::new(0.5, 0.5, 0.2, 0.2);
        let b = BBox::new(0.6, 0.5, 0.2, 0.2);
        let v = iou(&a, &b);
        assert!((v - 1.0 / 3.0).abs() < 1e-15, "got {v}");
        assert!((v - raster_iou(&a, &b, 1500)).abs() < 2e-3);
    }

    #[test]
    fn iou_matches_raster_oracle_on_mixed_shapes() {
        let cases = [
            (BBox::new(0.3, 0.4, 0.25, 0.1), BBox::new(0.35, 0.38, 0.1, 0.3)),
            (BBox::new(0.5, 0.5, 0.4, 0.4), BBox::new(0.5, 0.5, 0.1, 0.1)),
            (BBox::new(0.2, 0.2, 0.15, 0.2), BBox::new(0.21, 0.23, 0.2, 0.05)),
        ];
        for (a, b) in cases {
            let exact = iou(&a, &b);
            let approx = raster_iou(&a, &b, 1500);
            assert!((exact - approx).abs() < 2e-3, "exact {exact} raster {approx}");
        }
    }

    #[test]
    fn iou_identity_and_disjoint() {
        let a = BBox::new(0.5, 0.5, 0.2, 0.3);
        assert_eq!(iou(&a, &a), 1.0);
        let far = BBox::new(0.9, 0.9, 0.05, 0.05);
        assert_eq!(iou(&a, &far), 0.0);
        // Touching edges count as disjoint.
        let touch = BBox::new(0.7, 0.5, 0.2, 0.3);
        assert_eq!(iou(&a, &touch), 0.0);
    }

    #[test]
    fn iou_contained_box_is_area_ratio() {
        let outer = BBox::new(0.5, 0.5, 0.4, 0.4);
        let inner = BBox::new(0.5, 0.5, 0.2, 0.2);
        assert!((iou(&outer, &inner) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn validate_rejects_bad_boxes() {
        assert!(BBox::new(0.5, 0.5, 0.1, 0.1).validate().is_ok());
        assert!(BBox::new(0.5, 0.5, 0.0, 0.1).validate().is_err());
        assert!(BBox::new(0.5, 0.5, 0.1, -0.2).validate().is_err());
        assert!(BBox::new(f64::NAN, 0.5, 0.1, 0.1).validate().is_err());
        assert!(BBox::new(0.5, f64::INFINITY, 0.1, 0.1).validate().is_err());
        // Out-of-frame centers are allowed.
        assert!(BBox::new(1.2, -0.1, 0.1, 0.1).validate().is_ok());
    }
}
