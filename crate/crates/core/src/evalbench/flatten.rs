use crate::error::{Error, Result};

pub const FLATTEN_WINDOW: usize = 500;
pub const FLATTEN_TOLERANCE: f64 = 0.10;

/// First position `t >= 1000` at which the mean correctness over
/// `t-500..t` differs from that over `t-1000..t-500` by at most 10% of the
/// latter. `None` when accuracy never settles.
pub fn find_flatten_out(history: &[bool]) -> Result<Option<usize>> {
    let w = FLATTEN_WINDOW;
    if history.len() < 2 * w {
        return Err(Error::HistoryTooShort(history.len()));
    }
    let mut prefix = Vec::with_capacity(history.len() + 1);
    prefix.push(0usize);
    for &c in history {
        prefix.push(prefix.last().unwrap() + usize::from(c));
    }
    let mean = |a: usize, b: usize| (prefix[b] - prefix[a]) as f64 / (b - a) as f64;
    Ok((2 * w..=history.len()).find(|&t| {
        let prev = mean(t - 2 * w, t - w);
        (mean(t - w, t) - prev).abs() <= FLATTEN_TOLERANCE * prev
    }))
}

/// [`find_flatten_out`], falling back to 0 with a warning.
pub fn flatten_out_point(history: &[bool]) -> Result<usize> {
    Ok(find_flatten_out(history)?.unwrap_or_else(|| {
        log::warn!("accuracy never flattened out; measuring from the start");
        0
    }))
}
