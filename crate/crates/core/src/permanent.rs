//! Matrix permanents.
//!
//! [`permanent`] is Ryser's inclusion–exclusion formula walked in Gray-code
//! order, so each subset differs from the previous one by a single column and
//! the row sums update in O(n). [`permanent_and_gradient`] runs the same walk
//! and also accumulates every first-order minor `d per / d m[r][c]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest square size accepted by the exact permanent routines.
pub const MAX_PERMANENT_SIZE: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_square(m: &CMatrix, max: usize) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "permanent needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n > max {
        return Err(Error::TooLarge { size: n, max });
    }
    Ok(n)
}

fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn permanent(m: &CMatrix) -> Result<Complex64> {
    let n = check_square(m, MAX_PERMANENT_SIZE)?;
    Ok(ryser(n, &row_major(m)))
}

/// Direct sum over all `n!` permutations. Test oracle only.
pub fn permanent_bruteforce(m: &CMatrix) -> Result<Complex64> {
    let n = check_square(m, 8)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = ZERO;
    permute(m, &mut perm, 0, &mut total);
    Ok(total)
}

fn permute(m: &CMatrix, perm: &mut [usize], k: usize, total: &mut Complex64) {
    if k == perm.len() {
        *total += perm
            .iter()
            .enumerate()
            .fold(ONE, |acc, (i, &j)| acc * m[(i, j)]);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(m, perm, k + 1, total);
        perm.swap(k, i);
    }
}

/// Permanent plus the matrix of partial derivatives, `grad[r][c] = per` of
/// `m` with row `r` and column `c` deleted.
pub fn permanent_and_gradient(m: &CMatrix) -> Result<(Complex64, CMatrix)> {
    let n = check_square(m, MAX_PERMANENT_SIZE)?;
    let mut g = vec![ZERO; n * n];
    let p = ryser_with_gradient(n, &row_major(m), &mut g);
    Ok((p, CMatrix::from_row_slice(n, n, &g)))
}

/// Ryser/Gray permanent of a row-major `n x n` slice.
pub(crate) fn ryser(n: usize, a: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return ONE;
    }
    let mut rowsum = [ZERO; MAX_PERMANENT_SIZE];
    let mut in_set: u32 = 0;
    let mut total = ZERO;
    for k in 1u32..(1u32 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u32 << j;
        in_set ^= bit;
        if in_set & bit != 0 {
            for i in 0..n {
                rowsum[i] += a[i * n + j];
            }
        } else {
            for i in 0..n {
                rowsum[i] -= a[i * n + j];
            }
        }
        let prod = rowsum[..n].iter().fold(ONE, |acc, &s| acc * s);
        if in_set.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Same walk as [`ryser`]; `grad` (row-major, length n*n) is overwritten with
/// the first-order minors.
pub(crate) fn ryser_with_gradient(n: usize, a: &[Complex64], grad: &mut [Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(grad.len(), n * n);
    grad.iter_mut().for_each(|g| *g = ZERO);
    if n == 0 {
        return ONE;
    }
    let mut rowsum = [ZERO; MAX_PERMANENT_SIZE];
    let mut prefix = [ZERO; MAX_PERMANENT_SIZE + 1];
    let mut excl = [ZERO; MAX_PERMANENT_SIZE];
    let mut in_set: u32 = 0;
    let mut total = ZERO;
    for k in 1u32..(1u32 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u32 << j;
        in_set ^= bit;
        if in_set & bit != 0 {
            for i in 0..n {
                rowsum[i] += a[i * n + j];
            }
        } else {
            for i in 0..n {
                rowsum[i] -= a[i * n + j];
            }
        }
        prefix[0] = ONE;
        for i in 0..n {
            prefix[i + 1] = prefix[i] * rowsum[i];
        }
        let mut suffix = ONE;
        for i in (0..n).rev() {
            excl[i] = prefix[i] * suffix;
            suffix *= rowsum[i];
        }
        let odd = in_set.count_ones() % 2 == 1;
        if odd {
            total -= prefix[n];
        } else {
            total += prefix[n];
        }
        let mut cols = in_set;
        while cols != 0 {
            let c = cols.trailing_zeros() as usize;
            cols &= cols - 1;
            for r in 0..n {
                if odd {
                    grad[r * n + c] -= excl[r];
                } else {
                    grad[r * n + c] += excl[r];
                }
            }
        }
    }
    if n % 2 == 1 {
        grad.iter_mut().for_each(|g| *g = -*g);
        -total
    } else {
        total
    }
}

/// Square matrix with row `i` of `u` repeated `row_mult[i]` times and column
/// `j` repeated `col_mult[j]` times, indices kept in ascending order.
pub fn expand_submatrix(u: &CMatrix, row_mult: &[u8], col_mult: &[u8]) -> Result<CMatrix> {
    if row_mult.len() > u.nrows() || col_mult.len() > u.ncols() {
        return Err(Error::Dimension(format!(
            "multiplicity vectors ({}, {}) exceed matrix shape {}x{}",
            row_mult.len(),
            col_mult.len(),
            u.nrows(),
            u.ncols()
        )));
    }
    let rows = expand_indices(row_mult);
    let cols = expand_indices(col_mult);
    if rows.len() != cols.len() {
        return Err(Error::Conservation(format!(
            "{} input photons vs {} output photons",
            rows.len(),
            cols.len()
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]))
}

/// Index list with each position repeated by its multiplicity.
pub(crate) fn expand_indices(mult: &[u8]) -> Vec<usize> {
    mult.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn small_cases() {
        assert_eq!(permanent(&CMatrix::identity(3, 3)).unwrap(), ONE);
        let ones2 = CMatrix::from_element(2, 2, ONE);
        assert_eq!(permanent(&ones2).unwrap(), c(2.0, 0.0));
        let ones4 = CMatrix::from_element(4, 4, ONE);
        assert_eq!(permanent_bruteforce(&ones4).unwrap(), c(24.0, 0.0));
        assert!((permanent(&ones4).unwrap() - c(24.0, 0.0)).norm() < 1e-12);
        assert_eq!(permanent(&CMatrix::zeros(0, 0)).unwrap(), ONE);
    }

    #[test]
    fn bruteforce_closed_forms() {
        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -1.0), c(3.0, 0.1));
        let m = CMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        assert!((permanent_bruteforce(&m).unwrap() - (a * d + b * cc)).norm() < 1e-15);
        let z = CMatrix::from_element(1, 1, c(0.7, -0.2));
        assert_eq!(permanent_bruteforce(&z).unwrap(), c(0.7, -0.2));
    }

    #[test]
    fn errors() {
        assert!(matches!(permanent(&CMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        assert!(matches!(
            permanent(&CMatrix::zeros(17, 17)),
            Err(Error::TooLarge { size: 17, .. })
        ));
        let u = CMatrix::identity(2, 2);
        assert!(matches!(expand_submatrix(&u, &[2, 0], &[1, 0]), Err(Error::Conservation(_))));
    }

    #[test]
    fn random_5x5_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 5);
        let fast = permanent(&m).unwrap();
        let slow = permanent_bruteforce(&m).unwrap();
        assert!((fast - slow).norm() <= 1e-12 * slow.norm());
    }

    #[test]
    fn gradient_matches_minor_permanents() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            let m = random_matrix(&mut rng, n);
            let (p, g) = permanent_and_gradient(&m).unwrap();
            assert!((p - permanent_bruteforce(&m).unwrap()).norm() < 1e-12);
            for r in 0..n {
                for cc in 0..n {
                    let minor = m.clone().remove_row(r).remove_column(cc);
                    let want = permanent_bruteforce(&minor).unwrap();
                    assert!((g[(r, cc)] - want).norm() < 1e-12, "n={n} r={r} c={cc}");
                }
            }
        }
    }

    #[test]
    fn expand_examples() {
        let u = CMatrix::from_fn(6, 6, |i, j| c(i as f64, j as f64));
        let e = expand_submatrix(&u, &[1, 0, 1, 0, 1, 1], &[1, 0, 0, 1, 1, 1]).unwrap();
        let rows = [0, 2, 4, 5];
        let cols = [0, 3, 4, 5];
        for (r, &i) in rows.iter().enumerate() {
            for (cc, &j) in cols.iter().enumerate() {
                assert_eq!(e[(r, cc)], u[(i, j)]);
            }
        }
        assert_eq!(expand_submatrix(&u, &[1; 6], &[1; 6]).unwrap(), u);

        let u2 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let e2 = expand_submatrix(&u2, &[2, 0], &[1, 1]).unwrap();
        assert_eq!(e2, CMatrix::from_row_slice(2, 2, &[u2[(0, 0)], u2[(0, 1)], u2[(0, 0)], u2[(0, 1)]]));
    }
}
