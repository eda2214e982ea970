//! Independent re-derivations checked against the library solvers.

use magnon_blockade::{lindblad, optimal, weakdrive, SystemSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

const I: C = C::new(0.0, 1.0);

/// The one-sphere amplitude equations written out by hand, C00 = 1.
/// Unknowns: C10, C01, C20, C11, C02.
fn hand_amplitudes(delta: f64, g: f64, k: f64, om: f64) -> [C; 5] {
    let dp = C::new(delta, -0.5);
    let s2 = 2f64.sqrt();
    let z = C::new(0.0, 0.0);
    let c = |x: f64| C::new(x, 0.0);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(5, 5, &[
        dp,       c(g),          c(s2 * om),   z,             z,
        c(g),     dp + k,        z,            c(om),         z,
        c(s2*om), z,             dp * 2.0,     c(s2 * g),     z,
        z,        c(om),         c(s2 * g),    dp * 2.0 + k,  c(s2 * g),
        z,        z,             z,            c(s2 * g),     dp * 2.0 + 4.0 * k,
    ]);
    let b = DVector::from_vec(vec![c(-om), z, z, z, z]);
    let x = a.lu().solve(&b).unwrap();
    [x[0], x[1], x[2], x[3], x[4]]
}

fn hand_g2(delta: f64, g: f64, k: f64, om: f64) -> f64 {
    let [c10, _, c20, c11, _] = hand_amplitudes(delta, g, k, om);
    let n = c10.norm_sqr() + c11.norm_sqr() + 2.0 * c20.norm_sqr();
    2.0 * c20.norm_sqr() / (n * n)
}

#[test]
fn weak_drive_matches_hand_equations() {
    for &(d, g, k, om) in &[
        (0.3, 9.88, 4e-3, 0.1),
        (-0.7, 2.0, -0.03, 0.2),
        (0.0, 0.5, 0.05, 0.05),
        (1.2, 15.0, 0.01, 0.3),
    ] {
        let spec = SystemSpec::single(d, g, k, om);
        let amps = weakdrive::steady_amplitudes(&spec).unwrap();
        let hand = hand_amplitudes(d, g, k, om);
        assert!((amps.get(&[2, 0]) - hand[2]).norm() <= 1e-10 * hand[2].norm());
        assert!((amps.get(&[1, 1]) - hand[3]).norm() <= 1e-10 * hand[3].norm());
        let lib = weakdrive::g2(&spec).unwrap();
        let want = hand_g2(d, g, k, om);
        assert!(((lib - want) / want).abs() < 1e-9, "{lib} vs {want}");
    }
}

#[test]
fn hand_equations_vanish_at_closed_form_optimum() {
    let d = optimal::delta_opt(4e-3, 0.1, 1.0, optimal::Branch::Plus);
    let g = optimal::g_opt(d, 4e-3, 1.0).unwrap();
    let [c10, _, c20, _, _] = hand_amplitudes(d, g, 4e-3, 0.1);
    assert!(c20.norm() < 1e-12 * c10.norm_sqr());
}

fn destroy(n: usize) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            C::new((j as f64).sqrt(), 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Dense steady state from Kronecker products, trace row replacing the
/// first equation.
fn dense_g2(delta: f64, g: f64, k: f64, om: f64, n: usize) -> f64 {
    let id = DMatrix::<C>::identity(n, n);
    let a = destroy(n);
    let c = a.kronecker(&id);
    let m = id.kronecker(&a);
    let cd = c.adjoint();
    let md = m.adjoint();
    let nm = &md * &m;
    let h = (&cd * &c + &nm) * C::new(delta, 0.0)
        + (&md * &c + &cd * &m) * C::new(g, 0.0)
        + &nm * &nm * C::new(k, 0.0)
        + (&c + &cd) * C::new(om, 0.0);
    let d = n * n;
    let one = DMatrix::<C>::identity(d, d);
    let mut l = (one.kronecker(&h) - h.transpose().kronecker(&one)) * (-I);
    for j in [&c, &m] {
        let jd = j.adjoint() * j;
        l += j.conjugate().kronecker(j)
            - one.kronecker(&jd) * C::new(0.5, 0.0)
            - jd.transpose().kronecker(&one) * C::new(0.5, 0.0);
    }
    for col in 0..d * d {
        l[(0, col)] = if col % (d + 1) == 0 {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        };
    }
    let mut b = DVector::zeros(d * d);
    b[0] = C::new(1.0, 0.0);
    let x = l.lu().solve(&b).unwrap();
    let nc = |i: usize| (i / n) as f64;
    let (mut n1, mut n2) = (0.0, 0.0);
    for i in 0..d {
        let p = x[i + i * d].re;
        n1 += nc(i) * p;
        n2 += nc(i) * (nc(i) - 1.0) * p;
    }
    n2 / (n1 * n1)
}

#[test]
fn master_equation_matches_kronecker_build() {
    // moderate drives keep the unscaled dense oracle well resolved
    for &(d, g, k, om) in &[
        (0.0, 3.0, 0.05, 0.5),
        (0.4, 1.0, -0.1, 0.8),
        (-0.2, 5.0, 0.02, 1.0),
    ] {
        let spec = SystemSpec::single(d, g, k, om);
        let lib = lindblad::g2(&spec, 4).unwrap();
        let want = dense_g2(d, g, k, om, 5);
        assert!(((lib - want) / want).abs() < 1e-8, "{lib} vs {want}");
    }
}

#[test]
fn master_equation_approaches_weak_drive_as_drive_vanishes() {
    let spec = SystemSpec::single(0.0, 3.0, 0.05, 0.01);
    let l = lindblad::g2(&spec, 4).unwrap();
    let w = weakdrive::g2(&spec).unwrap();
    assert!(((l - w) / l).abs() < 1e-3, "{l} vs {w}");
}
