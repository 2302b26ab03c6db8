//! Exception table plus suffix rules. Fidelity is that of a desk-scale
//! stand-in for a trained lemmatizer: regular inflection and the common
//! irregular verbs and plurals are handled, derivational morphology is not.

use std::collections::HashMap;
use std::sync::OnceLock;

const EXCEPTIONS: &[(&str, &str)] = &[
    // irregular verbs
    ("made", "make"), ("took", "take"), ("taken", "take"), ("went", "go"), ("gone", "go"),
    ("goes", "go"), ("came", "come"), ("saw", "see"), ("seen", "see"), ("got", "get"),
    ("gotten", "get"), ("gave", "give"), ("given", "give"), ("knew", "know"), ("known", "know"),
    ("thought", "think"), ("told", "tell"), ("said", "say"), ("says", "say"), ("found", "find"),
    ("felt", "feel"), ("left", "leave"), ("kept", "keep"), ("bought", "buy"), ("brought", "bring"),
    ("caught", "catch"), ("taught", "teach"), ("sent", "send"), ("spent", "spend"),
    ("built", "build"), ("paid", "pay"), ("met", "meet"), ("ran", "run"), ("sat", "sit"),
    ("stood", "stand"), ("understood", "understand"), ("began", "begin"), ("begun", "begin"),
    ("wrote", "write"), ("written", "write"), ("drove", "drive"), ("driven", "drive"),
    ("ate", "eat"), ("eaten", "eat"), ("drank", "drink"), ("drunk", "drink"), ("spoke", "speak"),
    ("spoken", "speak"), ("broke", "break"), ("broken", "break"), ("chose", "choose"),
    ("chosen", "choose"), ("forgot", "forget"), ("forgotten", "forget"), ("fell", "fall"),
    ("fallen", "fall"), ("flew", "fly"), ("flown", "fly"), ("grew", "grow"), ("grown", "grow"),
    ("threw", "throw"), ("thrown", "throw"), ("wore", "wear"), ("worn", "wear"), ("won", "win"),
    ("lost", "lose"), ("held", "hold"), ("heard", "hear"), ("meant", "mean"), ("slept", "sleep"),
    ("lent", "lend"), ("led", "lead"), ("fed", "feed"), ("hung", "hang"), ("sold", "sell"),
    ("shot", "shoot"), ("rode", "ride"), ("sang", "sing"), ("sung", "sing"), ("swam", "swim"),
    ("woke", "wake"), ("hid", "hide"), ("hidden", "hide"), ("forgave", "forgive"),
    ("forgiven", "forgive"), ("stole", "steal"), ("stolen", "steal"), ("dealt", "deal"),
    ("lying", "lie"), ("dying", "die"), ("tying", "tie"), ("using", "use"),
    ("used", "use"), ("created", "create"), ("creating", "create"), ("added", "add"),
    ("adding", "add"), ("agreed", "agree"), ("seeing", "see"),
    // irregular plurals
    ("children", "child"), ("men", "man"), ("women", "woman"), ("feet", "foot"),
    ("teeth", "tooth"), ("mice", "mouse"), ("geese", "goose"), ("wives", "wife"),
    ("knives", "knife"), ("lives", "life"), ("wolves", "wolf"), ("shelves", "shelf"),
    ("halves", "half"), ("thieves", "thief"), ("movies", "movie"), ("cookies", "cookie"),
    ("calories", "calorie"), ("brownies", "brownie"), ("zombies", "zombie"),
    ("aches", "ache"), ("headaches", "headache"), ("toothaches", "toothache"),
    // words the suffix rules would damage
    ("news", "news"), ("always", "always"), ("perhaps", "perhaps"), ("series", "series"),
    ("species", "species"), ("clothes", "clothes"), ("sometimes", "sometimes"),
    ("morning", "morning"), ("evening", "evening"), ("everything", "everything"),
    ("wedding", "wedding"), ("ceiling", "ceiling"), ("interesting", "interesting"),
    ("boring", "boring"), ("amazing", "amazing"), ("hundred", "hundred"), ("indeed", "indeed"),
    ("proceed", "proceed"), ("succeed", "succeed"), ("exceed", "exceed"), ("thanks", "thank"),
];

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| EXCEPTIONS.iter().copied().collect())
}

fn is_vowel_at(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => true,
        b'y' => i > 0 && !is_vowel_at(w, i - 1),
        _ => false,
    }
}

fn has_vowel(w: &str) -> bool {
    let b = w.as_bytes();
    (0..b.len()).any(|i| is_vowel_at(b, i))
}

/// Number of vowel→consonant transitions.
fn measure(w: &str) -> usize {
    let b = w.as_bytes();
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..b.len() {
        let v = is_vowel_at(b, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

/// Ends consonant-vowel-consonant, the last not w, x or y.
fn ends_cvc(w: &str) -> bool {
    let b = w.as_bytes();
    let n = b.len();
    n >= 3
        && !is_vowel_at(b, n - 3)
        && is_vowel_at(b, n - 2)
        && !is_vowel_at(b, n - 1)
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
}

fn ends_double_consonant(w: &str) -> bool {
    let b = w.as_bytes();
    let n = b.len();
    n >= 2 && b[n - 1] == b[n - 2] && !is_vowel_at(b, n - 1)
}

/// Repairs a stem left by removing `-ing` or `-ed`.
fn restore_stem(stem: &str) -> String {
    if ends_double_consonant(stem) && !stem.ends_with(['l', 's', 'z']) {
        return stem[..stem.len() - 1].to_string();
    }
    let b = stem.as_bytes();
    let n = b.len();
    let two_vowels_then_s = n >= 3 && b[n - 1] == b's' && is_vowel_at(b, n - 2) && is_vowel_at(b, n - 3);
    let needs_e = stem.ends_with(['v', 'u', 'c'])
        || stem.ends_with("bl")
        || stem.ends_with("iz")
        || stem.ends_with("ir")
        || stem.ends_with("ur")
        || stem.ends_with("rg")
        || stem.ends_with("dg")
        || (stem.ends_with("ang") && n >= 5)
        || (stem.ends_with("at") && !stem.ends_with("eat") && !stem.ends_with("oat"))
        || two_vowels_then_s
        || (measure(stem) == 1 && ends_cvc(stem));
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

/// One suffix rule, or `None` when none applies.
fn step(w: &str) -> Option<String> {
    let n = w.len();
    if let Some(stem) = w.strip_suffix("ies") {
        return Some(if n >= 5 { format!("{stem}y") } else { format!("{stem}ie") });
    }
    if let Some(stem) = w.strip_suffix("es") {
        if stem.ends_with("ss") || stem.ends_with("sh") || stem.ends_with("ch") || stem.ends_with('x') {
            return Some(stem.to_string());
        }
        if stem.ends_with('o') && stem.len() >= 4 {
            return Some(stem.to_string());
        }
    }
    if let Some(stem) = w.strip_suffix('s') {
        let guarded = stem.ends_with('s') || stem.ends_with('u') || stem.ends_with('i');
        return (!guarded).then(|| stem.to_string());
    }
    if let Some(stem) = w.strip_suffix("ied") {
        return Some(if n >= 5 { format!("{stem}y") } else { format!("{stem}ie") });
    }
    if let Some(stem) = w.strip_suffix("eed") {
        return has_vowel(stem).then(|| format!("{stem}ee"));
    }
    if let Some(stem) = w.strip_suffix("ed") {
        return has_vowel(stem).then(|| restore_stem(stem));
    }
    if let Some(stem) = w.strip_suffix("ing") {
        return (has_vowel(stem) && stem.len() >= 2).then(|| restore_stem(stem));
    }
    None
}

/// Lemma of a lowercase token. Tokens that are not purely alphabetic are
/// returned unchanged. Rules are applied until none fires, so the result is
/// always a fixed point.
pub fn lemmatize(w: &str) -> String {
    if w.is_empty() || !w.bytes().all(|b| b.is_ascii_lowercase()) {
        return w.to_string();
    }
    let table = exceptions();
    let mut cur = w.to_string();
    loop {
        if let Some(e) = table.get(cur.as_str()) {
            return e.to_string();
        }
        if cur.len() < 4 {
            return cur;
        }
        match step(&cur) {
            Some(next) if next != cur => cur = next,
            _ => return cur,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goldens() {
        for (w, l) in [
            ("made", "make"),
            ("skirts", "skirt"),
            ("dog", "dog"),
            ("sweaters", "sweater"),
            ("ideas", "idea"),
            ("took", "take"),
            ("went", "go"),
            ("making", "make"),
            ("running", "run"),
            ("calling", "call"),
            ("stopped", "stop"),
            ("played", "play"),
            ("tried", "try"),
            ("studies", "study"),
            ("boxes", "box"),
            ("watches", "watch"),
            ("classes", "class"),
            ("houses", "house"),
            ("potatoes", "potato"),
            ("shoes", "shoe"),
            ("loved", "love"),
            ("hoping", "hope"),
            ("visiting", "visit"),
            ("opened", "open"),
            ("realized", "realize"),
            ("changed", "change"),
            ("raised", "raise"),
            ("danced", "dance"),
            ("occurred", "occur"),
            ("measured", "measure"),
            ("bring", "bring"),
            ("thing", "thing"),
            ("bus", "bus"),
            ("plus", "plus"),
            ("tennis", "tennis"),
            ("days", "day"),
            ("feelings", "feel"),
            ("agreed", "agree"),
            ("speed", "speed"),
            ("3.5", "3.5"),
            ("bye-bye", "bye-bye"),
        ] {
            assert_eq!(lemmatize(w), l, "{w}");
        }
    }

    #[test]
    fn exception_targets_are_fixed_points() {
        for (_, target) in EXCEPTIONS {
            assert_eq!(lemmatize(target), *target, "{target}");
        }
    }

    #[test]
    fn short_words_pass_through() {
        for w in ["was", "has", "red", "bed", "gas"] {
            assert_eq!(lemmatize(w), w);
        }
        assert_eq!(lemmatize("ran"), "run");
    }
}
