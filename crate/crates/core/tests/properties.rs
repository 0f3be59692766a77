use proptest::prelude::*;

use revised_rigid_body::config::{parse_config, serialize_config, RunConfig};
use revised_rigid_body::dynamics::{integral_rates, rhs_hp, rhs_revised};
use revised_rigid_body::equilibria::{
    e2_point, equilibria_on_level, is_equilibrium, level_polynomial, line_family_point, scalar_g,
    scalar_h, Family, LineFamily,
};
use revised_rigid_body::model::{
    build_metric_generic, drift_v, hamiltonian, hamiltonian_completed_square, m_vector,
    metric_matrix, poisson_matrix,
};
use revised_rigid_body::output::format_g17;
use revised_rigid_body::stability::{lyapunov_k, lyapunov_k_gradient};
use revised_rigid_body::vec3::{self, Vec3};
use revised_rigid_body::{State, SystemConfig};

fn vec_in(r: f64) -> impl Strategy<Value = Vec3> {
    [-r..r, -r..r, -r..r]
}

fn body() -> impl Strategy<Value = SystemConfig> {
    (0.3..3.0f64, 0.05..3.0f64, 0.05..3.0f64, vec_in(3.0), -2.0..2.0f64).prop_map(|(a1, d2, d3, u, eps)| {
        SystemConfig::new([a1, a1 + d2, a1 + d2 + d3], u, eps).unwrap()
    })
}

/// Bodies whose gains are all bounded away from zero.
fn controlled_body() -> impl Strategy<Value = SystemConfig> {
    (body(), [0.2..2.0f64, 0.2..2.0, 0.2..2.0], [any::<bool>(), any::<bool>(), any::<bool>()]).prop_map(
        |(cfg, mag, neg)| {
            let u = [0, 1, 2].map(|i| if neg[i] { -mag[i] } else { mag[i] });
            cfg.with_controls(u).unwrap()
        },
    )
}

fn state() -> impl Strategy<Value = State> {
    vec_in(4.0).prop_map(State)
}

fn pointwise_tol(cfg: &SystemConfig, x: &State) -> f64 {
    let m = vec3::norm(m_vector(cfg, x));
    1e-12 * (1.0 + m * m * x.norm() * (1.0 + cfg.epsilon().abs() * m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn poisson_matrix_is_exactly_skew(x in state()) {
        let p = poisson_matrix(&x);
        let (r, t) = (p.rows(), p.transpose_rows());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(t[i][j], -r[i][j]);
            }
        }
    }

    #[test]
    fn poisson_matrix_annihilates_casimir_gradient(x in state()) {
        let v = poisson_matrix(&x).mul_vec(x.0);
        prop_assert!(vec3::norm(v) <= 1e-13 * x.norm_sq());
    }

    #[test]
    fn metric_annihilates_energy_gradient(cfg in body(), x in state()) {
        let m = m_vector(&cfg, &x);
        let gm = metric_matrix(&cfg, &x).mul_vec(m);
        prop_assert!(vec3::norm(gm) <= 1e-12 * (1.0 + vec3::norm(m).powi(3)));
    }

    #[test]
    fn drift_is_double_cross_product(cfg in body(), x in state()) {
        let m = m_vector(&cfg, &x);
        let want = vec3::cross(vec3::cross(x.0, m), m);
        let diff = vec3::norm(vec3::sub(drift_v(&cfg, &x), want));
        prop_assert!(diff <= 1e-12 * (1.0 + x.norm() * vec3::dot(m, m)));
    }

    #[test]
    fn triple_product_identity(u in vec_in(5.0), w in vec_in(5.0)) {
        let lhs = vec3::dot(u, vec3::cross(w, vec3::cross(u, w)));
        let uw = vec3::cross(u, w);
        let rhs = vec3::dot(uw, uw);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (vec3::dot(u, u) * vec3::dot(w, w)).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn energy_forms_agree(cfg in body(), x in state()) {
        let h = hamiltonian(&cfg, &x);
        prop_assert!((h - hamiltonian_completed_square(&cfg, &x)).abs() <= 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn generic_builder_reproduces_metric_bitwise(cfg in body(), x in state()) {
        let g = build_metric_generic(&m_vector(&cfg, &x)).unwrap();
        let rows = metric_matrix(&cfg, &x).rows();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(g.get(i, j).to_bits(), rows[i][j].to_bits());
            }
        }
    }

    #[test]
    fn generic_builder_annihilates_its_gradient(grad in prop::collection::vec(-3.0..3.0f64, 2..=6)) {
        let g = build_metric_generic(&grad).unwrap();
        prop_assert!(g.is_symmetric());
        let n: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        let out = g.mul_vec(&grad);
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(norm <= 1e-12 * (1.0 + n.powi(3)));
    }

    #[test]
    fn energy_is_orthogonal_to_revised_field(cfg in body(), x in state()) {
        let v = vec3::dot(m_vector(&cfg, &x), rhs_revised(&cfg, &x));
        prop_assert!(v.abs() <= pointwise_tol(&cfg, &x));
    }

    #[test]
    fn dissipation_law_pointwise(cfg in body(), x in state()) {
        let xm = vec3::cross(x.0, m_vector(&cfg, &x));
        let r = integral_rates(&cfg, &x);
        prop_assert!((r.dc_dt + cfg.epsilon() * vec3::dot(xm, xm)).abs() <= pointwise_tol(&cfg, &x));
        prop_assert!(r.dh_dt.abs() <= pointwise_tol(&cfg, &x));
    }

    #[test]
    fn revised_field_norm_brackets_conservative(cfg in body(), x in state()) {
        // |x×m| ≤ |rhs_revised| ≤ |x×m|(1 + |ε||m|): same zero set
        let m = vec3::norm(m_vector(&cfg, &x));
        let hp = vec3::norm(rhs_hp(&cfg, &x));
        let rev = vec3::norm(rhs_revised(&cfg, &x));
        prop_assert!(hp <= rev * (1.0 + 1e-12) + 1e-300);
        prop_assert!(rev <= hp * (1.0 + cfg.epsilon().abs() * m) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn zero_epsilon_reduces_exactly(cfg in body(), x in state()) {
        let cfg = cfg.with_epsilon(0.0).unwrap();
        prop_assert_eq!(rhs_revised(&cfg, &x), rhs_hp(&cfg, &x));
    }

    #[test]
    fn e2_members_are_equilibria(cfg in body(), lambda in -20.0..20.0f64) {
        prop_assume!(cfg.inverse_moments().iter().all(|a| (lambda - a).abs() > 1e-3));
        let eq = e2_point(&cfg, lambda).unwrap();
        let x = eq.point();
        prop_assert!(is_equilibrium(&cfg, &x, 1e-12));
        let m = m_vector(&cfg, &x);
        let diff = vec3::norm(vec3::sub(m, vec3::scale(lambda, x.0)));
        prop_assert!(diff <= 1e-12 * (1.0 + lambda.abs() * x.norm()));
        prop_assert!(is_equilibrium(&cfg.with_epsilon(0.7).unwrap(), &x, 1e-12));
    }

    #[test]
    fn line_family_members_are_equilibria(cfg in body(), alpha in -5.0..5.0f64, which in 0usize..3) {
        let line = LineFamily::ALL[which];
        let mut u = cfg.controls();
        u[line.axis()] = 0.0;
        let cfg = cfg.with_controls(u).unwrap();
        let eq = line_family_point(&cfg, line, alpha).unwrap();
        prop_assert!(is_equilibrium(&cfg, &eq.point(), 1e-12));
        prop_assert_eq!(eq.point().0[line.axis()], alpha);
    }

    #[test]
    fn line_family_requires_zero_gain(cfg in controlled_body(), which in 0usize..3) {
        prop_assert!(line_family_point(&cfg, LineFamily::ALL[which], 1.0).is_err());
    }

    #[test]
    fn scalar_g_increases_below_a1(cfg in body(), s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let a1 = cfg.inverse_moments()[0];
        prop_assume!(cfg.controls().iter().any(|&u| u != 0.0));
        let map = |v: f64| -30.0 + (a1 - 0.01 + 30.0) * v;
        let (lo, hi) = if s < t { (map(s), map(t)) } else { (map(t), map(s)) };
        prop_assume!(hi - lo > 1e-6);
        prop_assert!(scalar_g(&cfg, lo).unwrap() < scalar_g(&cfg, hi).unwrap());
    }

    #[test]
    fn scalar_h_shape(cfg in controlled_body(), s in 0.001..0.999f64, t in 0.001..0.999f64) {
        let [a1, _, a3] = cfg.inverse_moments();
        let h = |v: f64| scalar_h(&cfg, v).unwrap();
        let (s, t) = if s < t { (s, t) } else { (t, s) };
        prop_assume!(t - s > 1e-4);
        // (-∞, 0): decreasing
        prop_assert!(h(-20.0 * (1.0 - s)) > h(-20.0 * (1.0 - t)) || (1.0 - t) * 20.0 < 1e-9);
        // (0, a1): increasing
        prop_assert!(h(s * a1) < h(t * a1));
        // (a3, ∞): decreasing
        prop_assert!(h(a3 + 20.0 * s) > h(a3 + 20.0 * t));
        prop_assert!(h(0.0) <= h(-20.0 * s) && h(0.0) <= h(a1 * s));
        prop_assert!((h(0.0) - cfg.min_energy()).abs() <= 1e-14 * (1.0 + cfg.min_energy().abs()));
    }

    #[test]
    fn level_polynomial_matches_definition(cfg in controlled_body(), k in -5.0..5.0f64, lambda in -10.0..10.0f64) {
        let a = cfg.inverse_moments();
        prop_assume!(a.iter().all(|ai| (lambda - ai).abs() > 1e-2));
        let p = level_polynomial(&cfg, k);
        prop_assert_eq!(p.degree(), Some(6));
        let poles: f64 = a.iter().map(|ai| (lambda - ai).powi(2)).product();
        let want = (scalar_h(&cfg, lambda).unwrap() - k) * poles;
        let scale = p.max_abs_coefficient() * (1.0 + lambda.abs()).powi(6);
        prop_assert!((p.eval(lambda) - want).abs() <= 1e-12 * scale);
    }

    #[test]
    fn level_roots_round_trip(cfg in body(), dk in 0.0..5.0f64) {
        let k = cfg.min_energy() + dk;
        let eqs = equilibria_on_level(&cfg, k).unwrap();
        let mut e2 = 0;
        let mut per_line = [0; 3];
        for e in &eqs {
            prop_assert!((hamiltonian(&cfg, &e.point()) - k).abs() <= 1e-9 * (1.0 + k.abs()));
            match e.family() {
                Family::E2 { lambda } => {
                    e2 += 1;
                    prop_assert!((scalar_h(&cfg, lambda).unwrap() - k).abs() <= 1e-9 * (1.0 + k.abs()));
                }
                Family::E3 { .. } => per_line[0] += 1,
                Family::E4 { .. } => per_line[1] += 1,
                Family::E5 { .. } => per_line[2] += 1,
                Family::E1 => prop_assert!(k.abs() <= 1e-12),
            }
        }
        prop_assert!(e2 <= 6);
        prop_assert!(per_line.iter().all(|&c| c <= 2));
    }

    #[test]
    fn planted_roots_are_recovered(cfg in controlled_body(), t in 0.0..1.0f64, branch in 0usize..3) {
        let [a1, _, a3] = cfg.inverse_moments();
        let lambda = match branch {
            0 => -5.0 + 4.9 * t,
            1 => a1 * (0.1 + 0.8 * t),
            _ => a3 + 0.1 + 5.0 * t,
        };
        let k = scalar_h(&cfg, lambda).unwrap();
        let eqs = equilibria_on_level(&cfg, k).unwrap();
        let hit = eqs.iter().any(|e| matches!(e.family(), Family::E2 { lambda: l } if (l - lambda).abs() <= 1e-6 * (1.0 + lambda.abs())));
        prop_assert!(hit, "lambda {} not among {:?}", lambda, eqs.iter().map(|e| e.family()).collect::<Vec<_>>());
    }

    #[test]
    fn lyapunov_k_is_positive_definite(cfg in body(), lambda in -10.0..-0.01f64, z in vec_in(3.0)) {
        let k = lyapunov_k(&cfg, lambda, z).unwrap();
        let a1 = cfg.inverse_moments()[0];
        prop_assert!(k.value >= 0.5 * (a1 - lambda) * vec3::dot(z, z) * (1.0 - 1e-12));
    }

    #[test]
    fn lyapunov_rate_is_chain_rule(cfg in controlled_body(), lambda in -10.0..-0.01f64, z in vec_in(1.0)) {
        let cfg = cfg.with_epsilon(cfg.epsilon().abs() + 0.01).unwrap();
        let k = lyapunov_k(&cfg, lambda, z).unwrap();
        let x = State(vec3::add(z, e2_point(&cfg, lambda).unwrap().point().0));
        let chain = vec3::dot(lyapunov_k_gradient(&cfg, lambda, z), rhs_revised(&cfg, &x));
        let xm = vec3::cross(x.0, m_vector(&cfg, &x));
        let scale = cfg.epsilon() * lambda.abs() * vec3::dot(xm, xm);
        prop_assert!((chain - k.rate).abs() <= 1e-10 * scale + 1e-12 * vec3::norm(z) * (1.0 + vec3::dot(xm, xm)));
        prop_assert!(k.rate <= 0.0);
    }

    #[test]
    fn config_round_trip(cfg in body(), x0 in prop::option::of(vec_in(10.0)), seed in any::<u64>(), rtol in 1e-12..1e-4f64) {
        let mut run = RunConfig::new(cfg);
        run.x0 = x0.map(State);
        run.seed = seed;
        run.integrator.rtol = rtol;
        prop_assert_eq!(parse_config(&serialize_config(&run)).unwrap(), run);
    }

    #[test]
    fn g17_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(format_g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
