//! Levenshtein distance over canonical (ASCII) names.

const STACK_ROW: usize = 64;

/// Full dynamic-programming Levenshtein distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    // keep the row over the shorter string
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    if short.len() < STACK_ROW {
        let mut row = [0usize; STACK_ROW];
        dp(long, short, &mut row[..=short.len()])
    } else {
        let mut row = vec![0usize; short.len() + 1];
        dp(long, short, &mut row)
    }
}

fn dp(long: &[u8], short: &[u8], row: &mut [usize]) -> usize {
    for (j, cell) in row.iter_mut().enumerate() {
        *cell = j;
    }
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(lc != sc);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}
