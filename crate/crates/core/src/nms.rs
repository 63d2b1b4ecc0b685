//! Per-class greedy non-maximum suppression.

use crate::geom::iou;
use crate::stream::Detection;

/// Greedy NMS: drops detections scoring below `score_threshold`, then keeps
/// survivors in descending score order, suppressing any same-class candidate
/// whose IoU with an already-kept box exceeds `nms_threshold` (strictly).
/// Different classes never suppress each other. Output is sorted by
/// descending score, ties resolved by input order.
pub fn nms(candidates: &[Detection], score_threshold: f64, nms_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> =
        (0..candidates.len()).filter(|&i| candidates[i].score >= score_threshold).collect();
    order.sort_by(|&a, &b| candidates[b].score.total_cmp(&candidates[a].score).then(a.cmp(&b)));

    let mut suppressed = vec![false; candidates.len()];
    let mut kept = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(candidates[i]);
        for &j in &order[pos + 1..] {
            if !suppressed[j]
                && candidates[j].class_id == candidates[i].class_id
                && iou(&candidates[j].bbox, &candidates[i].bbox) > nms_threshold
            {
                suppressed[j] = true;
            }
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::BBox;

    fn det(class_id: i64, score: f64, cx: f64, cy: f64, w: f64, h: f64) -> Detection {
        Detection::new(0, class_id, score, BBox::new(cx, cy, w, h))
    }

    #[test]
    fn suppresses_overlapping_same_class() {
        // Second box overlaps the first at IoU 1/3 > 0.3 and loses on score.
        let cands = vec![det(0, 0.9, 0.5, 0.5, 0.2, 0.2), det(0, 0.8, 0.6, 0.5, 0.2, 0.2)];
        let kept = nms(&cands, 0.0, 0.3);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].score, 0.9);
        // At threshold 0.5 the same pair survives: 1/3 is not > 0.5.
        assert_eq!(nms(&cands, 0.0, 0.5).len(), 2);
    }

    #[test]
    fn classes_do_not_suppress_each_other() {
        let cands = vec![det(0, 0.9, 0.5, 0.5, 0.2, 0.2), det(1, 0.8, 0.5, 0.5, 0.2, 0.2)];
        assert_eq!(nms(&cands, 0.0, 0.5).len(), 2);
    }

    #[test]
    fn score_threshold_filters_before_suppression() {
        // The low scorer is dropped by the score gate, so it cannot shield
        // or suppress anything.
        let cands = vec![det(0, 0.4, 0.5, 0.5, 0.2, 0.2), det(0, 0.6, 0.5, 0.5, 0.2, 0.2)];
        let kept = nms(&cands, 0.5, 0.5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].score, 0.6);
    }

    #[test]
    fn chain_suppression_is_greedy_not_transitive() {
        // a suppresses b; c overlaps b but not a, so c survives.
        let a = det(0, 0.9, 0.50, 0.5, 0.20, 0.2);
        let b = det(0, 0.8, 0.55, 0.5, 0.20, 0.2);
        let c = det(0, 0.7, 0.60, 0.5, 0.20, 0.2);
        assert!(iou(&a.bbox, &b.bbox) > 0.5);
        assert!(iou(&b.bbox, &c.bbox) > 0.5);
        assert!(iou(&a.bbox, &c.bbox) < 0.5);
        let kept = nms(&[a, b, c], 0.0, 0.5);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].score, 0.9);
        assert_eq!(kept[1].score, 0.7);
    }

    #[test]
    fn output_sorted_by_score_then_input_order() {
        let cands = vec![
            det(0, 0.7, 0.2, 0.2, 0.1, 0.1),
            det(1, 0.9, 0.8, 0.8, 0.1, 0.1),
            det(2, 0.7, 0.5, 0.5, 0.1, 0.1),
        ];
        let kept = nms(&cands, 0.0, 0.5);
        assert_eq!(kept.len(), 3);
        assert_eq!(kept[0].class_id, 1);
        assert_eq!(kept[1].class_id, 0); // earlier input wins the 0.7 tie
        assert_eq!(kept[2].class_id, 2);
    }

    #[test]
    fn empty_and_all_filtered_inputs() {
        assert!(nms(&[], 0.0, 0.5).is_empty());
        let cands = vec![det(0, 0.2, 0.5, 0.5, 0.1, 0.1)];
        assert!(nms(&cands, 0.5, 0.5).is_empty());
    }

    #[test]
    fn idempotent_on_own_output() {
        let cands = vec![
            det(0, 0.9, 0.50, 0.5, 0.2, 0.2),
            det(0, 0.8, 0.56, 0.5, 0.2, 0.2),
            det(0, 0.7, 0.90, 0.5, 0.1, 0.1),
            det(1, 0.6, 0.52, 0.5, 0.2, 0.2),
        ];
        let once = nms(&cands, 0.5, 0.5);
        let twice = nms(&once, 0.5, 0.5);
        assert_eq!(once, twice);
    }
}
