//! Built-in calculi and worked proofs, shipped as text in the calculus and
//! proof grammars under the repository's `catalog/` directory and embedded
//! here. Setting `CUTRX_CATALOG` to a directory overrides the embedded
//! copies (files are looked up as `<name>.calc` / `<name>.proof`).

use crate::calculus::{Calculus, CalculusError};
use crate::formula::ParseError;
use crate::kernel::{parse_proof, Proof};

pub const CATALOG_ENV: &str = "CUTRX_CATALOG";

const LK: &str = include_str!("../../../catalog/LK.calc");
const MAEHARA: &str = include_str!("../../../catalog/Maehara.calc");
const BIINT: &str = include_str!("../../../catalog/BiInt.calc");
const S5: &str = include_str!("../../../catalog/S5.calc");
const G4: &str = include_str!("../../../catalog/G4.calc");
const BIINT_S5: &str = include_str!("../../../catalog/BiIntS5.calc");
const G3: &str = include_str!("../../../catalog/G3.calc");

const S5_ANALYTIC: &str = include_str!("../../../catalog/s5-analytic.proof");
const S5_NONANALYTIC: &str = include_str!("../../../catalog/s5-nonanalytic.proof");
const BIINT_FIG2: &str = include_str!("../../../catalog/biint-fig2.proof");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Proof(#[from] ParseError),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn calculus_names() -> &'static [&'static str] {
    &[
        "LK", "Maehara", "BiInt", "S5", "S5multi3", "G4", "BiIntS5", "G3",
    ]
}

pub fn proof_names() -> &'static [&'static str] {
    &["s5-analytic", "s5-nonanalytic", "biint-fig2"]
}

/// The calculus a catalog proof is stated in.
pub fn proof_calculus(name: &str) -> Result<&'static str, CatalogError> {
    match name {
        "s5-analytic" | "s5-nonanalytic" => Ok("S5"),
        "biint-fig2" => Ok("BiInt"),
        other => Err(CatalogError::Unknown(other.to_string())),
    }
}

fn override_text(name: &str, ext: &str) -> Option<Result<String, CatalogError>> {
    let dir = std::env::var_os(CATALOG_ENV)?;
    let path = std::path::Path::new(&dir).join(format!("{name}.{ext}"));
    if !path.exists() {
        return None;
    }
    Some(
        std::fs::read_to_string(&path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        }),
    )
}

/// Look up a built-in calculus. `S5multi<n>` generates the multi-modal S5
/// with boxes `box1..boxn`.
pub fn builtin(name: &str) -> Result<Calculus, CatalogError> {
    if let Some(text) = override_text(name, "calc") {
        return Ok(Calculus::parse(&text?)?);
    }
    let text = match name {
        "LK" => LK,
        "Maehara" => MAEHARA,
        "BiInt" => BIINT,
        "S5" => S5,
        "G4" => G4,
        "BiIntS5" => BIINT_S5,
        "G3" => G3,
        other => {
            if let Some(n) = other
                .strip_prefix("S5multi")
                .and_then(|n| n.parse::<usize>().ok())
            {
                if n >= 1 {
                    return Ok(Calculus::parse(&s5_multi_text(n))?);
                }
            }
            return Err(CatalogError::Unknown(other.to_string()));
        }
    };
    Ok(Calculus::parse(text)?)
}

fn s5_multi_text(n: usize) -> String {
    let mut text = String::from("(calculus S5multi");
    text.push_str(&n.to_string());
    text.push_str("\n  (connectives (and 2) (or 2) (imp 2) (bot 0) (neg 1)");
    for i in 1..=n {
        text.push_str(&format!(" (box{i} 1)"));
    }
    text.push_str(")\n  (consistency assumed)\n");
    text.push_str(
        "  (rule bot_l left bot (context any) (templates (premises)))\n\
         \x20 (rule bot_r right bot (context any) (templates (premises (premise))))\n\
         \x20 (rule and_l left and (context any) (templates (premises (premise (l arg 1) (l arg 2)))))\n\
         \x20 (rule and_r right and (context any) (templates (premises (premise (r arg 1)) (premise (r arg 2)))))\n\
         \x20 (rule or_l left or (context any) (templates (premises (premise (l arg 1)) (premise (l arg 2)))))\n\
         \x20 (rule or_r right or (context any) (templates (premises (premise (r arg 1) (r arg 2)))))\n\
         \x20 (rule imp_l left imp (context any) (templates (premises (premise (r arg 1)) (premise (l arg 2)))))\n\
         \x20 (rule imp_r right imp (context any) (templates (premises (premise (l arg 1) (r arg 2)))))\n\
         \x20 (rule neg_l left neg (context any) (templates (premises (premise (r arg 1)))))\n\
         \x20 (rule neg_r right neg (context any) (templates (premises (premise (l arg 1)))))\n",
    );
    for i in 1..=n {
        text.push_str(&format!(
            "  (rule box{i}_t left box{i} (context any) (templates (premises (premise (l arg 1)))))\n"
        ));
        text.push_str(&format!(
            "  (rule box{i}_5 right box{i} (context (l conn box{i}) (r conn box{i})) \
             (templates (premises (premise (r arg 1)))))\n"
        ));
    }
    text.push(')');
    text
}

/// Look up a worked example proof by name.
pub fn example_proof(name: &str) -> Result<Proof, CatalogError> {
    let calc = builtin(proof_calculus(name)?)?;
    if let Some(text) = override_text(name, "proof") {
        return Ok(parse_proof(&text?, &calc)?);
    }
    let text = match name {
        "s5-analytic" => S5_ANALYTIC,
        "s5-nonanalytic" => S5_NONANALYTIC,
        "biint-fig2" => BIINT_FIG2,
        other => return Err(CatalogError::Unknown(other.to_string())),
    };
    Ok(parse_proof(text, &calc)?)
}
