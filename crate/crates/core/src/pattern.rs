//! Signature patterns shared by the crypto, source and sink lists.

/// Checks `<type>.<method>(<params>):<ret>` shape; errors carry a 1-based column.
pub fn validate_pattern(p: &str) -> Result<(), (usize, String)> {
    if p.is_empty() {
        return Err((1, "empty pattern".into()));
    }
    for (i, c) in p.char_indices() {
        if !(c.is_alphanumeric() || "_.*,():".contains(c)) {
            return Err((i + 1, format!("unexpected character `{c}`")));
        }
    }
    let open = p.find('(').ok_or((p.len() + 1, "expected `(`".to_string()))?;
    let head = &p[..open];
    if head.is_empty() || !head.contains('.') || head.starts_with('.') || head.ends_with('.') {
        return Err((1, "expected `<type>.<method>` before `(`".into()));
    }
    let close = p[open..]
        .find("):")
        .map(|i| open + i)
        .ok_or((open + 1, "expected `):<return type>` after parameters".to_string()))?;
    if p[open + 1..close].contains(['(', ')', ':']) {
        return Err((open + 2, "malformed parameter list".into()));
    }
    let ret = &p[close + 2..];
    if ret.is_empty() {
        return Err((close + 3, "missing return type".into()));
    }
    if let Some(i) = ret.find(['(', ')', ':', ',']) {
        return Err((close + 3 + i, "malformed return type".into()));
    }
    Ok(())
}

/// `*` matches any run of characters.
pub fn glob(p: &[u8], s: &[u8]) -> bool {
    let (mut pi, mut si) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while si < s.len() {
        if pi < p.len() && p[pi] == b'*' {
            star = Some((pi, si));
            pi += 1;
        } else if pi < p.len() && p[pi] == s[si] {
            pi += 1;
            si += 1;
        } else if let Some((sp, ss)) = star {
            pi = sp + 1;
            si = ss + 1;
            star = Some((sp, ss + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == b'*')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glob_semantics() {
        assert!(glob(b"*", b""));
        assert!(glob(b"a*c", b"abbbc"));
        assert!(!glob(b"a*c", b"abbb"));
        assert!(glob(b"*.get(*):*", b"x.Y.get(String,String):String"));
    }

}
