//! Simplified transactions and an in-memory UTXO ledger.
//!
//! Binary layout (all integers little-endian): u16 input count, then per
//! input a 20-byte previous txid, u32 output index, u32 script length +
//! script bytes, and one sighash flag byte; u16 output count, then per
//! output a u64 satoshi amount and u32 script length + script bytes.
//! Txids are the HASH160 of the serialized body, rendered as hex.

use super::{hash160, ChainError, Script};
use std::collections::BTreeMap;

pub const SIGHASH_ALL: u8 = 0x01;
/// The SIGHASH_SINGLE | ANYONECANPAY combination; carried as metadata
/// only, since signatures are mocked.
pub const SIGHASH_SINGLE_ANYONECANPAY: u8 = 0x83;
pub const ONE_BTC: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxInput {
    pub prev_txid: [u8; 20],
    pub prev_index: u32,
    pub unlocking_script: Script,
    pub sighash_flags: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxOutput {
    pub amount: u64,
    pub locking_script: Script,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
}

impl Transaction {
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend((self.inputs.len() as u16).to_le_bytes());
        for input in &self.inputs {
            out.extend_from_slice(&input.prev_txid);
            out.extend(input.prev_index.to_le_bytes());
            let script = input.unlocking_script.serialize();
            out.extend((script.len() as u32).to_le_bytes());
            out.extend_from_slice(&script);
            out.push(input.sighash_flags);
        }
        out.extend((self.outputs.len() as u16).to_le_bytes());
        for output in &self.outputs {
            out.extend(output.amount.to_le_bytes());
            let script = output.locking_script.serialize();
            out.extend((script.len() as u32).to_le_bytes());
            out.extend_from_slice(&script);
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Transaction, ChainError> {
        let mut r = Reader { bytes, at: 0 };
        let n_inputs = r.u16()?;
        let mut inputs = Vec::with_capacity(n_inputs as usize);
        for _ in 0..n_inputs {
            let prev_txid: [u8; 20] =
                r.take(20)?.try_into().expect("reader returned 20 bytes");
            let prev_index = r.u32()?;
            let len = r.u32()? as usize;
            let unlocking_script = Script::parse(r.take(len)?)?;
            let sighash_flags = r.take(1)?[0];
            inputs.push(TxInput { prev_txid, prev_index, unlocking_script, sighash_flags });
        }
        let n_outputs = r.u16()?;
        let mut outputs = Vec::with_capacity(n_outputs as usize);
        for _ in 0..n_outputs {
            let amount = r.u64()?;
            let len = r.u32()? as usize;
            let locking_script = Script::parse(r.take(len)?)?;
            outputs.push(TxOutput { amount, locking_script });
        }
        if r.at != bytes.len() {
            return Err(ChainError::Deserialize("trailing transaction bytes".into()));
        }
        Ok(Transaction { inputs, outputs })
    }

    pub fn txid(&self) -> [u8; 20] {
        hash160(&self.serialize())
    }

    pub fn txid_hex(&self) -> String {
        hex::encode(self.txid())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ChainError> {
        let end = self.at + n;
        if end > self.bytes.len() {
            return Err(ChainError::Deserialize("truncated transaction".into()));
        }
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16, ChainError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, ChainError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ChainError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// The funding transaction: two (mock) inputs, output 0 locking `payment`
/// satoshi under the contract's P2SH script, output 1 paying one BTC to a
/// pubkey hash.
pub fn build_funding_tx(
    contract_lock: Script,
    payment: u64,
    payee_pubkey_hash: &[u8; 20],
) -> Transaction {
    assert!(payment > 0, "funding amount must be positive");
    let funding_input = |index: u32| TxInput {
        prev_txid: [0; 20],
        prev_index: index,
        unlocking_script: Script { items: vec![] },
        sighash_flags: SIGHASH_ALL,
    };
    let pay_to_hash = Script {
        items: vec![
            super::Item::Op(super::Opcode::Hash160),
            super::Item::Push(payee_pubkey_hash.to_vec()),
            super::Item::Op(super::Opcode::Equal),
        ],
    };
    Transaction {
        inputs: vec![funding_input(0), funding_input(1)],
        outputs: vec![
            TxOutput { amount: payment, locking_script: contract_lock },
            TxOutput { amount: ONE_BTC, locking_script: pay_to_hash },
        ],
    }
}

/// The spending transaction: consumes the funding transaction's contract
/// output (index 0) with the given unlocking script.
pub fn build_spending_tx(funding: &Transaction, unlocking: Script) -> Transaction {
    Transaction {
        inputs: vec![TxInput {
            prev_txid: funding.txid(),
            prev_index: 0,
            unlocking_script: unlocking,
            sighash_flags: SIGHASH_SINGLE_ANYONECANPAY,
        }],
        outputs: vec![TxOutput {
            amount: funding.outputs[0].amount,
            locking_script: Script { items: vec![] },
        }],
    }
}

/// In-memory UTXO set keyed by (txid, output index). No blocks, no
/// consensus — just spend-reference validation. For concurrent use wrap
/// it in an `RwLock`: updates are single-writer, lookups multi-reader.
#[derive(Debug, Default)]
pub struct Ledger {
    utxos: BTreeMap<([u8; 20], u32), TxOutput>,
}

impl Ledger {
    pub fn new() -> Ledger {
        Ledger::default()
    }

    /// Adds a transaction's outputs without validating its inputs — the
    /// entry point for funding transactions whose inputs are out of scope.
    pub fn register(&mut self, tx: &Transaction) {
        let txid = tx.txid();
        for (index, output) in tx.outputs.iter().enumerate() {
            self.utxos.insert((txid, index as u32), output.clone());
        }
    }

    pub fn utxo(&self, txid: &[u8; 20], index: u32) -> Option<&TxOutput> {
        self.utxos.get(&(*txid, index))
    }

    /// Checks that every input references an unspent output.
    pub fn validate_spend(&self, tx: &Transaction) -> Result<(), ChainError> {
        for input in &tx.inputs {
            if !self.utxos.contains_key(&(input.prev_txid, input.prev_index)) {
                return Err(ChainError::UnknownUtxo {
                    txid: hex::encode(input.prev_txid),
                    index: input.prev_index,
                });
            }
        }
        Ok(())
    }

    /// Validates, consumes the referenced outputs, and adds the new ones.
    pub fn apply(&mut self, tx: &Transaction) -> Result<(), ChainError> {
        self.validate_spend(tx)?;
        for input in &tx.inputs {
            self.utxos.remove(&(input.prev_txid, input.prev_index));
        }
        self.register(tx);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_locking_script, build_redeem_script, chunk_vk, ScriptLimits};
    use super::*;

    fn contract_lock() -> Script {
        let chunks = chunk_vk(b"some verification key", 520);
        let redeem =
            build_redeem_script(&chunks, b"worker", &ScriptLimits::default()).unwrap();
        build_locking_script(&redeem)
    }

    fn sample_funding() -> Transaction {
        build_funding_tx(contract_lock(), 50_000, &hash160(b"payee"))
    }

    #[test]
    fn funding_tx_has_two_inputs_and_two_outputs() {
        let tx = sample_funding();
        assert_eq!(tx.inputs.len(), 2);
        assert_eq!(tx.outputs.len(), 2);
        assert_eq!(tx.outputs[0].amount, 50_000);
        assert_eq!(tx.outputs[0].locking_script, contract_lock());
        assert_eq!(tx.outputs[1].amount, ONE_BTC);
    }

    #[test]
    fn spending_tx_references_the_contract_output() {
        let funding = sample_funding();
        let unlocking = Script { items: vec![super::super::Item::Push(vec![1])] };
        let tx = build_spending_tx(&funding, unlocking);
        assert_eq!(tx.inputs.len(), 1);
        assert_eq!(tx.inputs[0].prev_txid, funding.txid());
        assert_eq!(tx.inputs[0].prev_index, 0);
        assert_eq!(tx.inputs[0].sighash_flags, SIGHASH_SINGLE_ANYONECANPAY);
        assert_eq!(tx.outputs[0].amount, funding.outputs[0].amount);
    }

    #[test]
    fn serialization_round_trips() {
        let funding = sample_funding();
        let spending =
            build_spending_tx(&funding, Script { items: vec![super::super::Item::Push(vec![7; 30])] });
        for tx in [&funding, &spending] {
            let bytes = tx.serialize();
            assert_eq!(&Transaction::parse(&bytes).unwrap(), tx);
        }
        assert!(Transaction::parse(&funding.serialize()[..10]).is_err());
    }

    #[test]
    fn txid_is_stable_hex_of_the_body() {
        let tx = sample_funding();
        assert_eq!(tx.txid(), hash160(&tx.serialize()));
        assert_eq!(tx.txid_hex(), hex::encode(tx.txid()));
        assert_eq!(tx.txid_hex().len(), 40);
    }

    #[test]
    fn ledger_tracks_spends() {
        let mut ledger = Ledger::new();
        let funding = sample_funding();
        ledger.register(&funding);
        assert!(ledger.utxo(&funding.txid(), 0).is_some());
        assert!(ledger.utxo(&funding.txid(), 1).is_some());

        let spending = build_spending_tx(&funding, Script { items: vec![] });
        ledger.validate_spend(&spending).unwrap();
        ledger.apply(&spending).unwrap();
        assert!(ledger.utxo(&funding.txid(), 0).is_none(), "contract output consumed");
        assert!(ledger.utxo(&spending.txid(), 0).is_some(), "new output tracked");

        // Double spend and bad index are both unknown-utxo failures.
        assert!(matches!(
            ledger.apply(&spending),
            Err(ChainError::UnknownUtxo { .. })
        ));
        let mut bad_index = build_spending_tx(&funding, Script { items: vec![] });
        bad_index.inputs[0].prev_index = 9;
        assert_eq!(
            ledger.validate_spend(&bad_index),
            Err(ChainError::UnknownUtxo { txid: funding.txid_hex(), index: 9 })
        );
    }
}
