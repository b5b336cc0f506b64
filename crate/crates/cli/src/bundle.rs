//! Transaction bundle artifact: the funding/spending pair produced by the
//! `script` stage, plus the group order and worker pubkey needed to replay
//! it, so `run-chain` depends on nothing but this one file.

use vcontract_core::chain::Transaction;

const MAGIC: &str = "vcontract-txbundle v1";

#[derive(Debug, Clone)]
pub struct TxBundle {
    pub field_modulus: u64,
    pub worker_pubkey: Vec<u8>,
    pub funding: Transaction,
    pub spending: Transaction,
}

impl TxBundle {
    /// Renders the versioned text form: one labeled hex value per line.
    pub fn render(&self) -> String {
        format!(
            "{MAGIC}\nfield {}\npubkey {}\nfunding {}\nspending {}\n",
            self.field_modulus,
            hex::encode(&self.worker_pubkey),
            hex::encode(self.funding.serialize()),
            hex::encode(self.spending.serialize()),
        )
    }

    /// Parses the text produced by [`TxBundle::render`].
    pub fn parse(text: &str) -> Result<TxBundle, String> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(format!("expected header {MAGIC:?}"));
        }
        let mut field = None;
        let mut pubkey = None;
        let mut funding = None;
        let mut spending = None;
        for (idx, raw) in lines.enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| format!("line {}: {msg}", idx + 2);
            let (label, value) = line
                .split_once(' ')
                .ok_or_else(|| bad("expected \"label value\"".into()))?;
            let tx = |v: &str| -> Result<Transaction, String> {
                let bytes =
                    hex::decode(v).map_err(|_| bad("invalid hex".into()))?;
                Transaction::parse(&bytes).map_err(|e| bad(e.to_string()))
            };
            match label {
                "field" => {
                    field = Some(
                        value.parse::<u64>().map_err(|_| bad("invalid modulus".into()))?,
                    )
                }
                "pubkey" => {
                    pubkey =
                        Some(hex::decode(value).map_err(|_| bad("invalid hex".into()))?)
                }
                "funding" => funding = Some(tx(value)?),
                "spending" => spending = Some(tx(value)?),
                other => return Err(bad(format!("unknown label {other:?}"))),
            }
        }
        Ok(TxBundle {
            field_modulus: field.ok_or("missing \"field\" line")?,
            worker_pubkey: pubkey.ok_or("missing \"pubkey\" line")?,
            funding: funding.ok_or("missing \"funding\" line")?,
            spending: spending.ok_or("missing \"spending\" line")?,
        })
    }
}
