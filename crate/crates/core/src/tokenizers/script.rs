//! Character and disjoint-letter segmentation.

use crate::corpus::is_diacritic;
use crate::splitter::{mark, Segmentation};

/// Letters that never connect to the following letter: the six classic
/// non-connectors with their hamza and orthographic variants.
pub const NON_JOINING_LETTERS: [char; 13] = [
    'ا', 'أ', 'إ', 'آ', 'ى', 'د', 'ذ', 'ر', 'ز', 'و', 'ؤ', 'ء', 'ة',
];

fn is_arabic_letter(c: char) -> bool {
    matches!(
        c,
        '\u{0620}'..='\u{063F}'
            | '\u{0640}'..='\u{064A}'
            | '\u{066E}'..='\u{066F}'
            | '\u{0671}'..='\u{06D3}'
            | '\u{06D5}'
            | '\u{06EE}'..='\u{06EF}'
            | '\u{06FA}'..='\u{06FC}'
            | '\u{06FF}'
    )
}

/// Whether a word may be cut right after `c`. Non-Arabic characters count as
/// non-joining.
pub fn breaks_after(c: char) -> bool {
    !is_arabic_letter(c) || NON_JOINING_LETTERS.contains(&c)
}

/// One token per character.
pub fn segment_character(word: &str) -> Segmentation {
    let mut buf = [0u8; 4];
    Segmentation::from_marked(
        word.chars()
            .enumerate()
            .map(|(i, c)| mark(c.encode_utf8(&mut buf), i == 0))
            .collect(),
    )
}

/// Cuts after every non-joining letter except the last one. Combining marks
/// stay attached to the letter they follow.
pub fn segment_disjoint(word: &str) -> Segmentation {
    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0;
    let mut pending_cut = false;
    for (i, c) in word.char_indices() {
        if is_diacritic(c) {
            continue;
        }
        if pending_cut {
            pieces.push(&word[start..i]);
            start = i;
        }
        pending_cut = breaks_after(c);
    }
    if start < word.len() {
        pieces.push(&word[start..]);
    }
    Segmentation::from_pieces(&pieces)
}
