use num_complex::Complex64;

use crate::error::{QfError, Result};
use crate::linalg::{max_abs, CMat};

/// Size up to which [`pfaffian`] uses first-row expansion.
pub const EXPANSION_LIMIT: usize = 8;

/// Pfaffian of an antisymmetric matrix.
pub fn pfaffian(m: &CMat) -> Result<Complex64> {
    check_antisymmetric(m)?;
    if m.nrows() <= EXPANSION_LIMIT {
        Ok(expand(m))
    } else {
        Ok(eliminate(m.clone()))
    }
}

fn check_antisymmetric(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QfError::Shape("Pfaffian needs a square matrix".into()));
    }
    let residual = max_abs(&(m + m.transpose()));
    if residual > 1e-10 * max_abs(m).max(1.0) {
        return Err(QfError::NotAntisymmetric { residual });
    }
    Ok(())
}

/// First-row expansion, `Pf(M) = Σ_j (−1)^{j+1} m_{0j} Pf(M without rows/cols 0, j)`.
pub fn pfaffian_expansion(m: &CMat) -> Result<Complex64> {
    check_antisymmetric(m)?;
    Ok(expand(m))
}

/// Parlett–Reid style elimination with pivoting, `O(n³)`.
pub fn pfaffian_elimination(m: &CMat) -> Result<Complex64> {
    check_antisymmetric(m)?;
    Ok(eliminate(m.clone()))
}

fn expand(m: &CMat) -> Complex64 {
    let n = m.nrows();
    let idx: Vec<usize> = (0..n).collect();
    expand_on(m, &idx)
}

fn expand_on(m: &CMat, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::new(1.0, 0.0),
        k if k % 2 == 1 => Complex64::new(0.0, 0.0),
        2 => m[(idx[0], idx[1])],
        _ => {
            let first = idx[0];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..idx.len() {
                let x = m[(first, idx[j])];
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rest: Vec<usize> = idx[1..].iter().copied().filter(|&t| t != idx[j]).collect();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                acc += x * sign * expand_on(m, &rest);
            }
            acc
        }
    }
}

fn eliminate(mut a: CMat) -> Complex64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let (p, best) = (k + 1..n).map(|i| (i, a[(k, i)].norm())).fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k + 1 {
            a.swap_rows(k + 1, p);
            a.swap_columns(k + 1, p);
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        pf *= piv;
        for i in k + 2..n {
            let tau = a[(k, i)] / piv;
            if tau == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = a.row(k + 1).into_owned();
            let mut ri = a.row_mut(i);
            ri -= row * tau;
            let col = a.column(k + 1).into_owned();
            let mut ci = a.column_mut(i);
            ci -= col * tau;
        }
        k += 2;
    }
    pf
}
