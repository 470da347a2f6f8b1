/// Pairwise tree reduction in index order. The grouping depends only on
/// the length, so results do not depend on how the items were produced.
pub fn pairwise_reduce<T>(mut items: Vec<T>, merge: impl Fn(T, T) -> T) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => merge(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        let s = pairwise_reduce((1..=5).map(|i| i.to_string()).collect(), |a, b| format!("({a}{b})"));
        assert_eq!(s.unwrap(), "(((12)(34))5)");
        assert_eq!(pairwise_reduce(Vec::<u8>::new(), |a, _| a), None);
        assert_eq!(pairwise_reduce(vec![3], |a, b| a + b), Some(3));
    }
}
