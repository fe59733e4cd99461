//! Fast two-sided check of the main parametrization identity at a small
//! truncation radius. The full grid with tight thresholds lives in the
//! acceptance suite; this test pins the sign conventions and catches gross
//! regressions quickly.

use eisenstein::checks::{parametrization_data, RunConfig};
use eisenstein::instance::FieldInstance;

const QI_SQRT2: &str = include_str!("../../../instances/qi-sqrt2.toml");

#[test]
fn two_sided_identity_at_small_radius() {
    let inst = FieldInstance::from_toml_str(QI_SQRT2).unwrap();
    let mut cfg = RunConfig::acceptance(vec![inst.clone()], 7);
    cfg.radius_grid = vec![10.0];
    cfg.bound_grid = vec![100];
    cfg.s_grid = vec![(2.5, 0.0), (3.0, 2.0)];
    let data = parametrization_data(&inst, &cfg).unwrap();
    for d in &data {
        let g = &d.grid[0];
        println!(
            "s = {:?}: lhs = {:?}, rhs = {:?}, rel = {:.3e} (tails {:.1e}/{:.1e})",
            d.s, g.lhs, g.rhs, g.rel_diff, g.lhs_tail, g.rhs_tail
        );
        // R = 10 misses the unit-direction cluster at (1+√2)³ ≈ 14.07, so
        // only coarse agreement is available here; the tight grid runs in
        // the acceptance suite. Signs and magnitudes must already match.
        assert!(
            g.rel_diff < 0.1,
            "identity off at s = {:?}: rel diff {:.3e}",
            d.s,
            g.rel_diff
        );
        assert!(g.lhs.re.is_sign_positive() == g.rhs.re.is_sign_positive());
    }
}
