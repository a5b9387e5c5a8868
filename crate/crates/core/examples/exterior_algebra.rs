//! Wedge products, contractions, pairings, Pfaffians and nilpotent
//! exponentials on graded coefficient arrays.

use bvloc::exterior::{self, pfaffian, GradedCoefficients, InhomogeneousElement, Variance};
use nalgebra::DMatrix;

fn main() -> bvloc::Result<()> {
    let n = 3;
    let dx1 = GradedCoefficients::basis(n, Variance::Form, &[0], 1.0)?;
    let dx2 = GradedCoefficients::basis(n, Variance::Form, &[1], 1.0)?;
    let dx12 = exterior::wedge(&dx1, &dx2)?;
    let dx21 = exterior::wedge(&dx2, &dx1)?;
    println!("dx1∧dx2 coefficient  {}", dx12.coefficient(&[0, 1])?);
    println!("dx2∧dx1 coefficient  {}", dx21.coefficient(&[0, 1])?);

    // ∂₁ ⌞ (dx¹∧dx²) = dx²
    let d1 = GradedCoefficients::basis(n, Variance::Vector, &[0], 1.0)?;
    let c = exterior::contract_left(&d1, &dx12)?;
    println!("∂1 ⌞ dx1∧dx2 = {:?} (components in lexicographic order)", c.coeffs);

    let d12 = GradedCoefficients::basis(n, Variance::Vector, &[0, 1], 2.5)?;
    println!("⟨dx1∧dx2, 2.5 ∂1∧∂2⟩ = {}", exterior::pair(&dx12, &d12)?);

    // pf(A)² = det(A) for a skew matrix
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 2.0, 3.0, //
        -1.0, 0.0, 4.0, 5.0, //
        -2.0, -4.0, 0.0, 6.0, //
        -3.0, -5.0, -6.0, 0.0,
    ]);
    let pf = pfaffian(&a)?;
    println!("pf(A) = {pf}, pf² = {}, det = {}", pf * pf, a.determinant());

    // e^{ω} of a symplectic 2-vector in four dimensions: 1 + ω + ω∧ω/2
    let omega = GradedCoefficients::new(4, 2, Variance::Vector, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0])?;
    let x = InhomogeneousElement::new(4, Variance::Vector).with_part(omega)?;
    let e = exterior::exp_nilpotent(&x, 0.0)?;
    println!("top part of e^ω: {:?}", e.part(4).coeffs);
    Ok(())
}
