use crate::error::{Error, Result};

/// Parses a budget list: comma-separated items, each a single budget or an
/// inclusive `start:stop:step` range. The result must be strictly increasing.
///
/// `"35:180:5"` gives 35, 40, ..., 180; `"10,20,50"` gives those three.
pub fn parse_budgets(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(Error::invalid(format!("empty item in budget list {text:?}")));
        }
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::invalid(format!("budget {s:?} is not a non-negative integer")))
        };
        match parts.as_slice() {
            [single] => out.push(num(single)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step == 0 || start > stop {
                    return Err(Error::invalid(format!(
                        "range {item:?} needs start <= stop and a positive step"
                    )));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => {
                return Err(Error::invalid(format!(
                    "budget item {item:?} must be N or start:stop:step"
                )))
            }
        }
    }
    if out.first() == Some(&0) || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "budgets must be positive and strictly increasing: {text:?}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_list() {
        let grid = parse_budgets("35:180:5").unwrap();
        assert_eq!(grid.len(), 30);
        assert_eq!((grid[0], grid[29]), (35, 180));
        assert_eq!(parse_budgets("10, 20,50").unwrap(), vec![10, 20, 50]);
        assert_eq!(parse_budgets("5,10:20:5,40").unwrap(), vec![5, 10, 15, 20, 40]);
        assert_eq!(parse_budgets("1:10:4").unwrap(), vec![1, 5, 9]);
    }

    #[test]
    fn rejects() {
        for bad in ["", "0", "20,10", "1:5", "5:1:1", "1:5:0", "x", "3,3"] {
            assert!(parse_budgets(bad).is_err(), "{bad}");
        }
    }
}
