//! Binary morphology with a square structuring element of side `2·radius + 1`.
//!
//! Dilation treats pixels outside the image as background and erosion
//! treats them as foreground, which keeps the pair adjoint on the bounded
//! domain so that opening and closing stay idempotent at the borders.

use crate::frames::BinaryMask;

#[derive(Clone, Copy)]
enum Op {
    Dilate,
    Erode,
}

/// Sliding-window pass along one axis. For each output position counts the
/// set pixels within `radius` and compares against the in-bounds window size.
fn pass_1d(src: &[bool], dst: &mut [bool], len: usize, stride: usize, radius: usize, op: Op) {
    let mut prefix = vec![0usize; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + usize::from(src[i * stride]);
    }
    for i in 0..len {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let count = prefix[hi] - prefix[lo];
        dst[i * stride] = match op {
            Op::Dilate => count > 0,
            Op::Erode => count == hi - lo,
        };
    }
}

fn apply(mask: &BinaryMask, radius: usize, op: Op) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let src = mask.bits();
    let mut rows = vec![false; src.len()];
    for y in 0..h {
        let r = y * w..(y + 1) * w;
        pass_1d(&src[r.clone()], &mut rows[r], w, 1, radius, op);
    }
    let mut out = vec![false; src.len()];
    for x in 0..w {
        pass_1d(&rows[x..], &mut out[x..], h, w, radius, op);
    }
    BinaryMask::from_bits(w, h, out).expect("same dimensions")
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, Op::Dilate)
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, Op::Erode)
}

/// Erode then dilate; removes specks smaller than the element.
pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

/// Dilate then erode; fills gaps narrower than the element.
pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}

/// The cleaning sequence applied after thresholding: dilate, open, close.
pub fn clean(mask: &BinaryMask, radius: usize) -> BinaryMask {
    close(&open(&dilate(mask, radius), radius), radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        BinaryMask::from_bits(w, h, bits).unwrap()
    }

    /// Direct definition over the square window, used as an oracle.
    fn naive(mask: &BinaryMask, radius: usize, dilate: bool) -> BinaryMask {
        let (w, h) = (mask.width() as isize, mask.height() as isize);
        let r = radius as isize;
        let mut out = BinaryMask::new(mask.width(), mask.height());
        for y in 0..h {
            for x in 0..w {
                let mut any = false;
                let mut all = true;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let v = mask.get(nx as usize, ny as usize);
                        any |= v;
                        all &= v;
                    }
                }
                out.set(x as usize, y as usize, if dilate { any } else { all });
            }
        }
        out
    }

    #[test]
    fn radius_zero_is_identity() {
        let m = mask_from(&["#..#", ".##.", "#..."]);
        for f in [dilate, erode, open, close] {
            assert_eq!(f(&m, 0), m);
        }
    }

    #[test]
    fn single_pixel_dilates_to_block() {
        let m = mask_from(&[".....", ".....", "..#..", ".....", "....."]);
        let d = dilate(&m, 1);
        assert_eq!(d, mask_from(&[".....", ".###.", ".###.", ".###.", "....."]));
        let corner = mask_from(&["#..", "...", "..."]);
        assert_eq!(dilate(&corner, 1), mask_from(&["##.", "##.", "..."]));
    }

    #[test]
    fn opening_removes_speck() {
        let m = mask_from(&[".....", ".....", "..#..", ".....", "....."]);
        assert_eq!(open(&m, 1).count_ones(), 0);
    }

    #[test]
    fn closing_fills_gap() {
        let m = mask_from(&["......", ".##.#.", ".##.#.", "......"]);
        let c = close(&m, 1);
        assert!(c.get(3, 1) && c.get(3, 2));
    }

    #[test]
    fn matches_naive_window() {
        let m = mask_from(&[
            "#..##...#",
            ".###..#..",
            "....##..#",
            "#.#...###",
            "..##.#...",
        ]);
        for r in 0..4 {
            assert_eq!(dilate(&m, r), naive(&m, r, true), "dilate r={r}");
            assert_eq!(erode(&m, r), naive(&m, r, false), "erode r={r}");
        }
    }
}
