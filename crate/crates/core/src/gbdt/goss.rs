use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::check_fractions;
use super::GbdtError;

/// Gradient-based one-side sampling.
///
/// Keeps the `⌈a·n⌉` rows with the largest `|g|` at weight 1 and draws
/// `⌈b·n⌉` of the remaining rows uniformly at weight `(1 − a) / b`. Rows are
/// returned in ascending order with their weights alongside.
pub fn goss_sample(g: &[f64], a: f64, b: f64, seed: u64) -> Result<(Vec<usize>, Vec<f64>), GbdtError> {
    check_fractions(a, b)?;
    let n = g.len();
    // the epsilon keeps 0.2 × 100 from rounding up to 21
    let top_k = ((a * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| g[j].abs().total_cmp(&g[i].abs()).then(i.cmp(&j)));
    let mut picked: Vec<(usize, f64)> = order[..top_k].iter().map(|&i| (i, 1.0)).collect();
    let rest = &order[top_k..];
    if b > 0.0 && !rest.is_empty() {
        let other_k = ((b * n as f64 - 1e-9).ceil().max(0.0) as usize).min(rest.len());
        let mut rest_sorted = rest.to_vec();
        rest_sorted.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight = (1.0 - a) / b;
        picked.extend(
            rand::seq::index::sample(&mut rng, rest_sorted.len(), other_k)
                .into_iter()
                .map(|k| (rest_sorted[k], weight)),
        );
    }
    picked.sort_unstable_by_key(|p| p.0);
    Ok(picked.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_fractions() {
        let g = [0.3, -0.1, 0.9, 0.0];
        let (rows, w) = goss_sample(&g, 1.0, 0.0, 5).unwrap();
        assert_eq!(rows, vec![0, 1, 2, 3]);
        assert_eq!(w, vec![1.0; 4]);
    }

    #[test]
    fn counts_and_weights() {
        let g: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 - 50.0).collect();
        let (rows, w) = goss_sample(&g, 0.2, 0.1, 9).unwrap();
        assert_eq!(rows.len(), 30);
        let mut by_mag: Vec<usize> = (0..100).collect();
        by_mag.sort_by(|&i, &j| g[j].abs().total_cmp(&g[i].abs()).then(i.cmp(&j)));
        for top in &by_mag[..20] {
            let k = rows.iter().position(|r| r == top).expect("top row kept");
            assert_eq!(w[k], 1.0);
        }
        assert_eq!(w.iter().filter(|&&x| x == 8.0).count(), 10);
        assert!(rows.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(goss_sample(&g, 0.2, 0.1, 9).unwrap(), (rows, w));
    }

    #[test]
    fn rejects_bad_fractions() {
        let g = [1.0; 4];
        for (a, b) in [(0.0, 0.5), (0.8, 0.3), (1.2, 0.0), (0.5, -0.1)] {
            assert!(matches!(goss_sample(&g, a, b, 0), Err(GbdtError::InvalidFractions { .. })));
        }
    }
}
