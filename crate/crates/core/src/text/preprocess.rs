//! Review text normalization.
//!
//! Applied in order:
//!
//! | step | pattern                                   | replacement  |
//! |------|-------------------------------------------|--------------|
//! | 1    | HTML tags `<...>`, entities `&amp;` etc.  | space / char |
//! | 2    | lowercase                                  |              |
//! | 3    | `http://…`, `https://…`, `www.…`           | `__URL__`    |
//! | 4    | e-mail addresses                           | `__EMAIL__`  |
//! | 5    | `:)` `:-)` `:d` `;)` `=)` `<3`             | `__SMILE__`  |
//! | 6    | `:(` `:-(` `:'(` `=(`                      | `__FROWN__`  |
//! | 7    | `...`, `…` and longer runs of dots         | `__DOTS__`   |
//! | 8    | runs of `!` or `?` of length ≥ 2           | `__EXCL__` / `__QUES__` |
//! | 9    | digits, optionally with `.`/`,` groups     | `__NUM__`    |
//! | 10   | abbreviations (see [`ABBREVIATIONS`])      | expansion    |
//! | 11   | whitespace runs                            | single space, trimmed |

use std::sync::LazyLock;

use regex::Regex;

/// Contractions and shorthand expanded after lowercasing. Applied to whole
/// tokens first, then the suffix rules (`n't`, `'re`, ...) to what is left.
pub const ABBREVIATIONS: &[(&str, &str)] = &[
    ("won't", "will not"),
    ("can't", "cannot"),
    ("shan't", "shall not"),
    ("i'm", "i am"),
    ("it's", "it is"),
    ("let's", "let us"),
    ("w/", "with"),
    ("w/o", "without"),
    ("b/c", "because"),
    ("thx", "thanks"),
    ("pls", "please"),
    ("imo", "in my opinion"),
    ("imho", "in my humble opinion"),
    ("btw", "by the way"),
    ("u", "you"),
    ("ur", "your"),
];

const SUFFIXES: &[(&str, &str)] = &[
    ("n't", " not"),
    ("'re", " are"),
    ("'ve", " have"),
    ("'ll", " will"),
    ("'d", " would"),
];

struct Rules {
    tag: Regex,
    url: Regex,
    email: Regex,
    smile: Regex,
    frown: Regex,
    dots: Regex,
    excl: Regex,
    ques: Regex,
    num: Regex,
    space: Regex,
}

static RULES: LazyLock<Rules> = LazyLock::new(|| Rules {
    tag: Regex::new(r"<[^<>]*>").unwrap(),
    url: Regex::new(r"(?:https?://|www\.)\S+").unwrap(),
    email: Regex::new(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+").unwrap(),
    smile: Regex::new(r"(?:^|\s)(?:[:;=]-?[)\]d]|<3)(?:\s|$)").unwrap(),
    frown: Regex::new(r"(?:^|\s)(?:[:=]'?-?[(\[])(?:\s|$)").unwrap(),
    dots: Regex::new(r"\.{3,}|…").unwrap(),
    excl: Regex::new(r"!{2,}").unwrap(),
    ques: Regex::new(r"\?{2,}").unwrap(),
    num: Regex::new(r"\d+(?:[.,]\d+)*").unwrap(),
    space: Regex::new(r"\s+").unwrap(),
});

fn decode_entities(s: &str) -> String {
    s.replace("&nbsp;", " ")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&lt;", " ")
        .replace("&gt;", " ")
        .replace("&amp;", "&")
}

fn expand(token: &str) -> String {
    if let Some((_, full)) = ABBREVIATIONS.iter().find(|(a, _)| *a == token) {
        return (*full).to_string();
    }
    for (suffix, full) in SUFFIXES {
        if let Some(stem) = token.strip_suffix(suffix) {
            if !stem.is_empty() {
                return format!("{stem}{full}");
            }
        }
    }
    token.to_string()
}

/// Normalizes raw review text; may return an empty string.
pub fn preprocess_text(raw: &str) -> String {
    let r = &*RULES;
    let s = r.tag.replace_all(raw, " ");
    let s = decode_entities(&s).to_lowercase();
    let s = r.url.replace_all(&s, " __URL__ ");
    let s = r.email.replace_all(&s, " __EMAIL__ ");
    // Emoticons are matched with their surrounding whitespace, so adjacent
    // ones need two passes.
    let mut s = s.into_owned();
    for _ in 0..2 {
        s = r.smile.replace_all(&s, " __SMILE__ ").into_owned();
        s = r.frown.replace_all(&s, " __FROWN__ ").into_owned();
    }
    let s = r.dots.replace_all(&s, " __DOTS__ ");
    let s = r.excl.replace_all(&s, " __EXCL__ ");
    let s = r.ques.replace_all(&s, " __QUES__ ");
    let s = r.num.replace_all(&s, " __NUM__ ");
    let expanded: Vec<String> = r.space.split(s.trim()).filter(|t| !t.is_empty()).map(expand).collect();
    expanded.join(" ")
}

static TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"__[A-Z]+__|[\p{L}\p{N}']+|[^\s\p{L}\p{N}']").unwrap());

/// Splits preprocessed text into words, markers and single punctuation marks.
pub fn tokenize(text: &str) -> Vec<&str> {
    TOKEN.find_iter(text).map(|m| m.as_str()).collect()
}
