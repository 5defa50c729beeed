//! Score sheet files: a JSON object of issue id to integer, or CSV rows of
//! `id,score` with an optional header.

use isol_core::ScoreSheet;

pub fn parse_sheet(text: &str) -> Result<ScoreSheet, String> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| format!("invalid JSON score sheet: {e}"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut sheet = ScoreSheet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| format!("invalid CSV score sheet: {e}"))?;
        if row.len() != 2 {
            return Err(format!("line {}: expected `id,score`, got {} field(s)", i + 1, row.len()));
        }
        if i == 0 && row[0].eq_ignore_ascii_case("id") && row[1].eq_ignore_ascii_case("score") {
            continue;
        }
        let score: i64 = row[1]
            .parse()
            .map_err(|_| format!("line {}: score `{}` is not an integer", i + 1, &row[1]))?;
        sheet.insert(row[0].to_string(), score);
    }
    Ok(sheet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_agree() {
        let a = parse_sheet(r#"{"q1": 3, "q2": 0}"#).unwrap();
        let b = parse_sheet("id,score\nq1,3\n q2 , 0\n").unwrap();
        let c = parse_sheet("q1,3\nq2,0").unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_sheet("q1,three").is_err());
        assert!(parse_sheet("q1,3,4").is_err());
        assert!(parse_sheet(r#"{"q1": 2.5}"#).is_err());
    }
}
