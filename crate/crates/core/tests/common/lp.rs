//! Brute-force optimal-transport oracle: the transportation LP solved with
//! a dense two-phase simplex (Bland's rule). Test-support code only —
//! deliberately independent of the library's distance implementations.

/// Minimal transport cost between discrete distributions `a` and `b` under
/// the cost matrix `cost[i][j]`.
pub fn transport_lp(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    let m = a.len();
    let n = b.len();
    // variables x_ij flattened row-major; constraints: row sums then col sums
    let n_vars = m * n;
    let n_cons = m + n;
    let mut matrix = vec![vec![0.0; n_vars]; n_cons];
    let mut rhs = vec![0.0; n_cons];
    for i in 0..m {
        for j in 0..n {
            matrix[i][i * n + j] = 1.0;
        }
        rhs[i] = a[i];
    }
    for j in 0..n {
        for i in 0..m {
            matrix[m + j][i * n + j] = 1.0;
        }
        rhs[m + j] = b[j];
    }
    let objective: Vec<f64> = cost.iter().flatten().copied().collect();
    simplex_two_phase(&matrix, &rhs, &objective)
}

/// min c'x subject to Ax = b, x >= 0 (b must be non-negative, the
/// transportation system always is). Returns the optimal objective.
fn simplex_two_phase(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let m = a.len();
    let n = c.len();
    let total = n + m; // original variables plus one artificial per row

    // tableau[r] = [coefficients..., rhs]
    let mut tab = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    for r in 0..m {
        for v in 0..n {
            tab[r][v] = a[r][v];
        }
        tab[r][n + r] = 1.0;
        tab[r][total] = b[r];
        basis[r] = n + r;
    }

    // phase 1: minimize the artificial sum
    let mut phase_cost = vec![0.0; total];
    for v in n..total {
        phase_cost[v] = 1.0;
    }
    run_simplex(&mut tab, &mut basis, &phase_cost, total, total);
    let infeasibility: f64 = basis
        .iter()
        .zip(&tab)
        .filter(|(&v, _)| v >= n)
        .map(|(_, row)| row[total])
        .sum();
    assert!(
        infeasibility.abs() < 1e-9,
        "transportation system infeasible: residual {infeasibility}"
    );

    // phase 2: original costs, artificials barred from entering
    let mut full_cost = vec![0.0; total];
    full_cost[..n].copy_from_slice(c);
    run_simplex(&mut tab, &mut basis, &full_cost, n, total);

    basis
        .iter()
        .zip(&tab)
        .filter(|(&v, _)| v < n)
        .map(|(&v, row)| c[v] * row[total])
        .sum()
}

/// Primal simplex with Bland's rule. Only variables with index below
/// `enter_limit` may enter the basis.
fn run_simplex(tab: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], enter_limit: usize, total: usize) {
    let m = tab.len();
    loop {
        // reduced costs under the current basis
        let mut y = vec![0.0; m]; // basis costs
        for r in 0..m {
            y[r] = cost[basis[r]];
        }
        let mut entering = None;
        for v in 0..enter_limit {
            if basis.contains(&v) {
                continue;
            }
            let mut reduced = cost[v];
            for r in 0..m {
                reduced -= y[r] * tab[r][v];
            }
            if reduced < -1e-11 {
                entering = Some(v); // Bland: lowest index
                break;
            }
        }
        let Some(v) = entering else { break };

        // ratio test, ties to the lowest basis index (Bland)
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..m {
            if tab[r][v] > 1e-11 {
                let ratio = tab[r][total] / tab[r][v];
                let better = match leaving {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-12
                            || (ratio - lratio).abs() <= 1e-12 && basis[r] < basis[lr]
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
        }
        let (pivot_row, _) = leaving.expect("transportation LP is bounded");

        // pivot
        let pivot = tab[pivot_row][v];
        for x in tab[pivot_row].iter_mut() {
            *x /= pivot;
        }
        for r in 0..m {
            if r != pivot_row && tab[r][v].abs() > 0.0 {
                let factor = tab[r][v];
                let pivot_row_copy = tab[pivot_row].clone();
                for (x, p) in tab[r].iter_mut().zip(&pivot_row_copy) {
                    *x -= factor * p;
                }
            }
        }
        basis[pivot_row] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transport_costs_nothing() {
        let a = [0.5, 0.5];
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(transport_lp(&a, &a, &cost).abs() < 1e-12);
    }

    #[test]
    fn two_point_shift() {
        // all mass moves distance 3
        let a = [1.0];
        let b = [1.0];
        let cost = vec![vec![3.0]];
        assert!((transport_lp(&a, &b, &cost) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn known_small_instance() {
        // a at {0, 1} uniform, b at {0, 0, 1} uniform: W1 = 1/6
        let a = [0.5, 0.5];
        let b = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let points_a = [0.0, 1.0];
        let points_b = [0.0, 0.0, 1.0];
        let cost: Vec<Vec<f64>> = points_a
            .iter()
            .map(|x| points_b.iter().map(|y| (x - y).abs()).collect())
            .collect();
        assert!((transport_lp(&a, &b, &cost) - 1.0 / 6.0).abs() < 1e-12);
    }
}
