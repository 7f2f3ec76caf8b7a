use cantor_riemannium::green::{trace_green_line, traces_cross, TraceOptions, TraceStatus};
use cantor_riemannium::measures::Base;
use cantor_riemannium::rational::ratio;
use cantor_riemannium::render::{render_field, render_with_threads, RenderMode, RenderSpec};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = RenderMode> {
    prop_oneof![Just(RenderMode::DomainColor), Just(RenderMode::GreenLines), Just(RenderMode::Equipotentials)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rendering_is_deterministic(
        x0 in -1.5f64..0.0, w in 0.5f64..2.0, y0 in -1.0f64..0.5, h in 0.5f64..1.5,
        size in 16u32..48, depth in 2u32..8, mode in mode(), nu in prop::bool::ANY,
    ) {
        let base = if nu { Base::Nu } else { Base::Mu };
        let spec = RenderSpec::new([x0, x0 + w, y0, y0 + h], size, size + 3, base, depth, mode);
        let a = render_field(&spec).unwrap();
        let b = render_field(&spec).unwrap();
        prop_assert_eq!(&a.rgb, &b.rgb);
        prop_assert_eq!(a.rgb.len(), 3 * size as usize * (size + 3) as usize);
        let c = render_with_threads(&spec, 3).unwrap();
        prop_assert_eq!(&a.rgb, &c.rgb);
    }
}

#[test]
fn green_lines_do_not_cross() {
    let opts = TraceOptions::default();
    let thetas = [(1, 3), (1, 5), (2, 5), (1, 7), (3, 7), (2, 9), (4, 9), (-1, 3), (-2, 5), (-1, 7)];
    let traces: Vec<_> = thetas.iter().map(|&(p, q)| trace_green_line(&ratio(p, q), &opts).unwrap()).collect();
    for t in &traces {
        assert_eq!(t.status, TraceStatus::Landed, "{}", t.theta);
        assert!(t.residual < 1e-9, "{} residual {}", t.theta, t.residual);
    }
    for i in 0..traces.len() {
        for j in i + 1..traces.len() {
            assert!(!traces_cross(&traces[i], &traces[j]), "{} crosses {}", traces[i].theta, traces[j].theta);
        }
    }
}
