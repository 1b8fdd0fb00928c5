//! TREC SGML containers for documents and topics, with a JSONL fallback
//! picked by the first non-space byte of the stream.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Deserialize;

use super::{Analyzer, RawDocument, Topic};
use crate::{Error, Result};

fn read_all<R: Read>(mut reader: R) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    Ok(buf)
}

fn is_jsonl(buf: &[u8]) -> bool {
    buf.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{')
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from >= hay.len() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

fn find_ci(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from >= hay.len() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle))
        .map(|p| p + from)
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

/// Reads a corpus: concatenated `<DOC>` blocks, or one JSON object
/// `{"doc_id": .., "text": ..}` per line.
///
/// Documents come back in file order. The text of an SGML document is the
/// concatenation of all of its `<TEXT>` elements.
pub fn parse_trec_docs<R: Read>(reader: R) -> Result<Vec<RawDocument>> {
    let buf = read_all(reader)?;
    let docs = if is_jsonl(&buf) {
        parse_jsonl_docs(&buf)?
    } else {
        parse_sgml_docs(&buf)?
    };
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in &docs {
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(Error::DuplicateDocId(doc.doc_id.clone()));
        }
    }
    Ok(docs)
}

fn parse_jsonl_docs(buf: &[u8]) -> Result<Vec<RawDocument>> {
    let text =
        std::str::from_utf8(buf).map_err(|e| parse_error(e.valid_up_to(), "invalid UTF-8"))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(line).map_err(|e| Error::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        if doc.doc_id.is_empty() {
            return Err(Error::Line {
                line: i + 1,
                message: "empty doc_id".into(),
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

fn parse_sgml_docs(buf: &[u8]) -> Result<Vec<RawDocument>> {
    const OPEN: &[u8] = b"<DOC>";
    const CLOSE: &[u8] = b"</DOC>";
    let mut docs = Vec::new();
    let mut pos = 0;
    while let Some(start) = find(buf, OPEN, pos) {
        let body_start = start + OPEN.len();
        let end = find(buf, CLOSE, body_start)
            .ok_or_else(|| parse_error(start, "unterminated <DOC> block (missing </DOC>)"))?;
        if let Some(next) = find(buf, OPEN, body_start) {
            if next < end {
                return Err(parse_error(
                    start,
                    "unterminated <DOC> block (missing </DOC>)",
                ));
            }
        }
        let body = &buf[body_start..end];
        let doc_id = element(body, b"DOCNO")
            .map_err(|rel| parse_error(body_start + rel, "unterminated <DOCNO>"))?
            .map(|raw| String::from_utf8_lossy(raw).trim().to_owned())
            .filter(|id| !id.is_empty())
            .ok_or_else(|| parse_error(start, "<DOC> block without DOCNO"))?;

        let mut text = String::new();
        let mut cursor = 0;
        while let Some(open) = find(body, b"<TEXT>", cursor) {
            let content = open + b"<TEXT>".len();
            let close = find(body, b"</TEXT>", content)
                .ok_or_else(|| parse_error(body_start + open, "unterminated <TEXT>"))?;
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&String::from_utf8_lossy(&body[content..close]));
            cursor = close + b"</TEXT>".len();
        }
        docs.push(RawDocument { doc_id, text });
        pos = end + CLOSE.len();
    }
    Ok(docs)
}

/// Content of the first `<TAG>...</TAG>` element; `Err` carries the
/// relative offset of an unterminated element.
fn element<'a>(body: &'a [u8], tag: &[u8]) -> std::result::Result<Option<&'a [u8]>, usize> {
    let open = [b"<", tag, b">"].concat();
    let close = [b"</", tag, b">"].concat();
    let Some(start) = find(body, &open, 0) else {
        return Ok(None);
    };
    let content = start + open.len();
    match find(body, &close, content) {
        Some(end) => Ok(Some(&body[content..end])),
        None => Err(start),
    }
}

/// Writes documents in the JSONL corpus format, one object per line.
pub fn write_jsonl_docs<W: Write>(docs: &[RawDocument], mut writer: W) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct JsonTopic {
    query_id: serde_json::Value,
    title: String,
}

/// Reads topics (TREC `<top>` blocks or JSONL `{"query_id", "title"}`),
/// keeping only the title field, analyzed with `analyzer`.
///
/// Fails if any title analyzes to nothing; the error lists every such id.
pub fn parse_topics<R: Read>(reader: R, analyzer: &Analyzer) -> Result<Vec<Topic>> {
    let buf = read_all(reader)?;
    let raw = if is_jsonl(&buf) {
        parse_jsonl_topics(&buf)?
    } else {
        parse_sgml_topics(&buf)?
    };

    let mut seen = HashSet::new();
    let mut empty = Vec::new();
    let mut topics = Vec::with_capacity(raw.len());
    for (query_id, title) in raw {
        if !seen.insert(query_id.clone()) {
            return Err(Error::DuplicateQueryId(query_id));
        }
        let title_terms = analyzer.analyze(&title);
        if title_terms.is_empty() {
            empty.push(query_id);
        } else {
            topics.push(Topic {
                query_id,
                title_terms,
            });
        }
    }
    if !empty.is_empty() {
        return Err(Error::EmptyTopics(empty));
    }
    Ok(topics)
}

fn parse_jsonl_topics(buf: &[u8]) -> Result<Vec<(String, String)>> {
    let text =
        std::str::from_utf8(buf).map_err(|e| parse_error(e.valid_up_to(), "invalid UTF-8"))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: JsonTopic = serde_json::from_str(line).map_err(|e| Error::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        let id = match t.query_id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(Error::Line {
                    line: i + 1,
                    message: format!("query_id must be a string or number, got {other}"),
                })
            }
        };
        out.push((id.trim().to_owned(), t.title));
    }
    Ok(out)
}

/// "Number: 301" -> "301". Ids without digits are kept trimmed.
fn normalize_query_id(raw: &str) -> String {
    let digits: String = raw
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    if digits.is_empty() {
        raw.trim().to_owned()
    } else {
        match digits.trim_start_matches('0') {
            "" => "0".to_owned(),
            trimmed => trimmed.to_owned(),
        }
    }
}

/// Text after `<tag>` up to the next `<`.
fn field(block: &[u8], tag: &[u8]) -> Option<String> {
    let start = find_ci(block, tag, 0)? + tag.len();
    let end = block[start..]
        .iter()
        .position(|&b| b == b'<')
        .map_or(block.len(), |p| p + start);
    Some(
        String::from_utf8_lossy(&block[start..end])
            .trim()
            .to_owned(),
    )
}

fn parse_sgml_topics(buf: &[u8]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(start) = find_ci(buf, b"<top>", pos) {
        let body = start + b"<top>".len();
        let end = find_ci(buf, b"</top>", body)
            .ok_or_else(|| parse_error(start, "unterminated <top> block"))?;
        let block = &buf[body..end];
        let num = field(block, b"<num>")
            .ok_or_else(|| parse_error(start, "<top> block without <num>"))?;
        let mut title = field(block, b"<title>").unwrap_or_default();
        if let Some(rest) = title.strip_prefix("Topic:") {
            title = rest.trim().to_owned();
        }
        out.push((normalize_query_id(&num), title));
        pos = end + b"</top>".len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sgml_doc() {
        let input =
            b"<DOC>\n<DOCNO> FBIS3-1 </DOCNO>\n<HT>x</HT>\n<TEXT>\nHello world\n</TEXT>\n</DOC>\n";
        let docs = parse_trec_docs(&input[..]).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].doc_id, "FBIS3-1");
        assert_eq!(docs[0].text.trim(), "Hello world");
    }

    #[test]
    fn multiple_text_elements_concatenate() {
        let input = b"<DOC><DOCNO>a</DOCNO><TEXT>one</TEXT><H>skip</H><TEXT>two</TEXT></DOC>";
        let docs = parse_trec_docs(&input[..]).unwrap();
        assert_eq!(docs[0].text, "one\ntwo");
    }

    #[test]
    fn empty_stream() {
        assert!(parse_trec_docs(&b""[..]).unwrap().is_empty());
        assert!(parse_trec_docs(&b"  \n"[..]).unwrap().is_empty());
    }

    #[test]
    fn missing_close_reports_offset() {
        let input = b"<DOC><DOCNO>a</DOCNO></DOC>\n<DOC><DOCNO>b</DOCNO><TEXT>x</TEXT>";
        match parse_trec_docs(&input[..]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 28),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_docno_is_an_error() {
        let input = b"<DOC><TEXT>x</TEXT></DOC>";
        assert!(matches!(
            parse_trec_docs(&input[..]),
            Err(Error::Parse { offset: 0, .. })
        ));
    }

    #[test]
    fn duplicate_doc_id() {
        let input = b"<DOC><DOCNO>a</DOCNO></DOC><DOC><DOCNO>a</DOCNO></DOC>";
        assert!(matches!(
            parse_trec_docs(&input[..]),
            Err(Error::DuplicateDocId(id)) if id == "a"
        ));
    }

    #[test]
    fn jsonl_docs() {
        let input =
            "{\"doc_id\":\"d1\",\"text\":\"alpha beta\"}\n\n{\"doc_id\":\"d2\",\"text\":\"\"}\n";
        let docs = parse_trec_docs(input.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].doc_id, "d2");
        let bad = "{\"doc_id\":\"d1\",\"text\":\"x\"}\n{\"doc_id\":\"d2\"}\n";
        assert!(matches!(
            parse_trec_docs(bad.as_bytes()),
            Err(Error::Line { line: 2, .. })
        ));
    }

    #[test]
    fn sgml_topic() {
        let input = b"<top>\n<num> Number: 301\n<title> International Organized Crime\n\n<desc> Description:\nIdentify organizations.\n</top>\n";
        let topics = parse_topics(&input[..], &Analyzer::default()).unwrap();
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].query_id, "301");
        assert_eq!(topics[0].title_terms, vec!["intern", "organ", "crime"]);
    }

    #[test]
    fn jsonl_topic() {
        let input = "{\"query_id\":\"1\",\"title\":\"crime\"}\n";
        let topics = parse_topics(input.as_bytes(), &Analyzer::default()).unwrap();
        assert_eq!(
            topics,
            vec![Topic {
                query_id: "1".into(),
                title_terms: vec!["crime".into()]
            }]
        );
    }

    #[test]
    fn stopword_title_is_rejected_with_id() {
        let input =
            "{\"query_id\":\"7\",\"title\":\"the\"}\n{\"query_id\":\"8\",\"title\":\"crime\"}\n";
        match parse_topics(input.as_bytes(), &Analyzer::default()) {
            Err(Error::EmptyTopics(ids)) => assert_eq!(ids, vec!["7"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn query_id_normalization() {
        assert_eq!(normalize_query_id("Number: 301"), "301");
        assert_eq!(normalize_query_id(" 051 "), "51");
        assert_eq!(normalize_query_id("0"), "0");
        assert_eq!(normalize_query_id("q_a"), "q_a");
    }
}
