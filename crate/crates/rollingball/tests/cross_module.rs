//! Cross-module consistency: the function regularizer is the lower
//! boundary of a body opening in one dimension higher, so the body
//! machinery can recompute it independently.

use rollingball::convex::{ConvexBody, VPolygon};
use rollingball::funcreg::{regularize, PCQFunction};
use rollingball::geometry::Vector;
use rollingball::morphology::opening;

/// The regularizer of f = |x| must agree with the lower boundary of the
/// opening of the capped-cylinder body
/// `W = { (x, y) : |x| <= 2R, f(x) <= y <= cap }`
/// wherever the cap plays no role (|x| <= R - delta and small delta): the
/// full-epigraph construction and the bounded-body construction describe
/// the same set of interior balls there.
#[test]
fn opening_of_capped_epigraph_matches_regularizer() {
    let big_r = 1.0;
    let delta = 0.15;
    let cap = 4.0 * big_r; // M + 2R with M = sup |x| on [-2R, 2R] = 2R.

    // The capped epigraph of |x| over [-2R, 2R] is a convex pentagon.
    let body = VPolygon::new(vec![
        [0.0, 0.0],
        [2.0 * big_r, 2.0 * big_r],
        [2.0 * big_r, cap],
        [-2.0 * big_r, cap],
        [-2.0 * big_r, 2.0 * big_r],
    ])
    .unwrap()
    .to_hpolytope()
    .unwrap();
    let w = opening(&body, delta).unwrap();

    // Lower boundary of the opening by bisection on membership.
    let lower = |x: f64| -> f64 {
        let mut lo = -0.5;
        let mut hi = cap;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if w.contains(&Vector(vec![x, mid]), 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let f = PCQFunction::abs_1d();
    let g = regularize(&f, delta, 8.0).unwrap();
    for i in 0..=120 {
        let x = -(big_r - delta) + 2.0 * (big_r - delta) * i as f64 / 120.0;
        let from_body = lower(x);
        let from_function = g.value(&Vector(vec![x])).unwrap();
        assert!(
            (from_body - from_function).abs() < 1e-7,
            "x = {x}: body route {from_body} vs function route {from_function}"
        );
    }
}
