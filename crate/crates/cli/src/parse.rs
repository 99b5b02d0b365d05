//! Value parsers for list and range flags.

use qbound::scanner::OrderPolicy;

/// `"1..8"` (inclusive), `"3"`, or `"1,2,5"`.
pub fn n_list(s: &str) -> Result<Vec<u32>, String> {
    let s = s.trim();
    let out: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in '{s}'"))?;
        let b = b.trim().trim_start_matches('=');
        let b: u32 = b.parse().map_err(|_| format!("bad range end in '{s}'"))?;
        if a > b {
            return Err(format!("empty range '{s}'"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| format!("'{t}' is not a positive integer")))
            .collect::<Result<_, _>>()?
    };
    if out.contains(&0) {
        return Err("n must be at least 1".into());
    }
    Ok(out)
}

/// A real modulus in decimal or scientific notation, at least 2.
pub fn modulus(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() || v < 2.0 {
        return Err(format!("modulus must be a finite number >= 2, got '{s}'"));
    }
    Ok(v)
}

/// Comma-separated moduli, e.g. `"1e7,1e8,1e35"`.
pub fn modulus_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(modulus).collect()
}

/// An integer that may be written as `1e7` or `10000000`.
pub fn integer(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if v.fract() != 0.0 || !(0.0..=9.007_199_254_740_992e15).contains(&v) {
        return Err(format!("'{s}' is not an exactly representable integer"));
    }
    Ok(v as u64)
}

/// `quadratic`, `up-to:D`, or a comma-separated list of orders.
pub fn order_policy(s: &str) -> Result<OrderPolicy, String> {
    let s = s.trim();
    if s == "quadratic" {
        return Ok(OrderPolicy::Quadratic);
    }
    if let Some(d) = s.strip_prefix("up-to:") {
        let d: u64 = d.parse().map_err(|_| format!("bad order bound in '{s}'"))?;
        return Ok(OrderPolicy::AllDivisorsUpTo(d));
    }
    let list = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("'{t}' is not an order")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OrderPolicy::FixedSet(list))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(n_list("1..8").unwrap(), (1..=8).collect::<Vec<_>>());
        assert_eq!(n_list("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(n_list("4").unwrap(), vec![4]);
        assert_eq!(n_list("1,3,5").unwrap(), vec![1, 3, 5]);
        assert!(n_list("0..2").is_err());
        assert!(n_list("5..2").is_err());
        assert!(n_list("x").is_err());
    }

    #[test]
    fn moduli() {
        assert_eq!(modulus_list("1e7,1e35").unwrap(), vec![1e7, 1e35]);
        assert!(modulus("1").is_err());
        assert!(modulus("inf").is_err());
        assert!(modulus_list("1e7,...,1e35").is_err());
        assert_eq!(integer("1e7").unwrap(), 10_000_000);
        assert_eq!(integer("10_100_000").unwrap(), 10_100_000);
        assert!(integer("1.5").is_err());
    }

    #[test]
    fn policies() {
        assert_eq!(order_policy("quadratic").unwrap(), OrderPolicy::Quadratic);
        assert_eq!(order_policy("up-to:12").unwrap(), OrderPolicy::AllDivisorsUpTo(12));
        assert_eq!(order_policy("3,4").unwrap(), OrderPolicy::FixedSet(vec![3, 4]));
        assert!(order_policy("up-to:x").is_err());
    }
}
