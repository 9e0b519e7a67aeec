//! Event-trace format: one line per processed event,
//! `time<TAB>seq<TAB>kind<TAB>node<TAB>detail`.
//!
//! `detail` is `-` or space-separated outcome tokens:
//! `state=<From>><To>`, `power=<Mode>`, `tx=<bytes>`, `rx=<bytes>`,
//! `drop`, `from=<id>`, `msg=<Kind>`. Times use the shortest decimal form
//! that round-trips the stored value.

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine<'a> {
    pub time: f64,
    pub seq: u64,
    pub kind: &'a str,
    pub node: Option<u32>,
    pub tokens: Vec<&'a str>,
}

pub fn parse_line(line: &str) -> Option<TraceLine<'_>> {
    let mut cols = line.split('\t');
    let time = cols.next()?.parse().ok()?;
    let seq = cols.next()?.parse().ok()?;
    let kind = cols.next()?;
    let node = match cols.next()? {
        "-" => None,
        n => Some(n.parse().ok()?),
    };
    let tokens = match cols.next()? {
        "-" => Vec::new(),
        d => d.split(' ').collect(),
    };
    if cols.next().is_some() {
        return None;
    }
    Some(TraceLine { time, seq, kind, node, tokens })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let l = parse_line("0.5\t3\tNodeWake\t2\tpower=Awake tx=13").unwrap();
        assert_eq!(l.time, 0.5);
        assert_eq!(l.seq, 3);
        assert_eq!(l.kind, "NodeWake");
        assert_eq!(l.node, Some(2));
        assert_eq!(l.tokens, vec!["power=Awake", "tx=13"]);
        let h = parse_line("120\t0\tHorizon\t-\t-").unwrap();
        assert_eq!(h.node, None);
        assert!(h.tokens.is_empty());
        assert!(parse_line("garbage").is_none());
    }
}
