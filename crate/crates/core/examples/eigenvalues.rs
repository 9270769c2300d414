//! Closed-form spectra at synchronous equilibria against finite-difference
//! Jacobians of a linear coupling.

use hetnet::ccn::{build_pn, build_q, FnCoupling};
use hetnet::dynamics::{eig_3d_pair, eig_full_sync_pn, eig_full_sync_q, eigenvalues, jacobian, spectrum_distance};
use nalgebra::Complex;

fn linear(alphas: Vec<f64>) -> FnCoupling<impl Fn(&[f64]) -> f64 + Sync> {
    let arity = alphas.len();
    FnCoupling { arity, f: move |y: &[f64]| y.iter().zip(&alphas).map(|(a, b)| a * b).sum() }
}

fn main() -> hetnet::Result<()> {
    let alphas = vec![-1.0, 0.5, -2.0, 1.5];
    let ccn = build_pn(3)?;
    let numeric = eigenvalues(&jacobian(&ccn, &linear(alphas.clone()), &[0.0; 4])?);
    let closed: Vec<Complex<f64>> = eig_full_sync_pn(&alphas, 3).into_iter().map(|v| Complex::new(v, 0.0)).collect();
    println!("P_3 closed={closed:?}");
    println!("P_3 distance={:.2e}", spectrum_distance(&closed, &numeric));

    let alphas = vec![-1.0, 0.3, -2.0, 0.5];
    let ccn = build_q(1, 1)?;
    let numeric = eigenvalues(&jacobian(&ccn, &linear(alphas.clone()), &[0.0; 4])?);
    let closed = eig_full_sync_q(&alphas, 1, 1);
    println!("Q(1,1) distance={:.2e}", spectrum_distance(&closed, &numeric));

    for (f0, fa, fb) in [(-1.0, -2.0, -2.0), (-1.0, 0.0, 0.0), (-1.0, -3.0, 0.0)] {
        let (radial, lateral) = eig_3d_pair(f0, 0.0, (fa, fb));
        println!("pair ({f0}, {fa}, {fb}): radial={radial} lateral={lateral:?}");
    }
    Ok(())
}
