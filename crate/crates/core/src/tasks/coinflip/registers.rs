//! Qubit placement for the coin-flipping protocol.
//!
//! Twelve qubits split as `R_A = 0..4`, `R_M = 4..8`, `R_B = 8..12`.
//! A qutrit occupies two qubits `(x, y)` with `|0⟩ → |10⟩`, `|1⟩ → |01⟩`,
//! `|2⟩ → |00⟩`.
//!
//! | qubit | register | honest use |
//! |-------|----------|------------|
//! | 0     | R_A | Alice's coin `a` |
//! | 1, 2  | R_A | Alice's kept qutrit until the reveal |
//! | 3     | R_A | Alice's record of Bob's coin |
//! | 4     | R_M | Bob's coin in transit |
//! | 5, 6  | R_M | round 1: qutrit sent to Bob; round 2: Alice's revealed qutrit |
//! | 7     | R_M | Alice's declared coin |
//! | 8     | R_B | Bob's coin `b` |
//! | 9     | R_B | Bob's scratch |
//! | 10, 11| R_B | Bob's stored qutrit |
//!
//! Outcomes: Alice reads `q0 ⊕ q3`, Bob reads `q7 ⊕ q8`. Bob aborts unless
//! qubits 5, 6, 10, 11 are all zero after his verification.

pub const N_A: usize = 4;
pub const N_M: usize = 4;
pub const N_B: usize = 4;
pub const N_QUBITS: usize = N_A + N_M + N_B;

pub const ALICE_COIN: usize = 0;
pub const ALICE_KEPT: [usize; 2] = [1, 2];
pub const ALICE_B_RECORD: usize = 3;
pub const MSG_B: usize = 4;
pub const MSG_QUTRIT: [usize; 2] = [5, 6];
pub const MSG_A_DECLARED: usize = 7;
pub const BOB_COIN: usize = 8;
pub const BOB_SCRATCH: usize = 9;
pub const BOB_STORED: [usize; 2] = [10, 11];

/// Qubits that must read zero after Bob's verification.
pub const VERIFY_ZERO: [usize; 4] = [MSG_QUTRIT[0], MSG_QUTRIT[1], BOB_STORED[0], BOB_STORED[1]];

/// Two-qubit code `(x, y)` of a qutrit value.
pub fn encode(qutrit: usize) -> (usize, usize) {
    match qutrit {
        0 => (1, 0),
        1 => (0, 1),
        2 => (0, 0),
        _ => panic!("qutrit value {qutrit} out of range"),
    }
}

/// Inverse of [`encode`]; `(1, 1)` is not a codeword.
pub fn decode(x: usize, y: usize) -> Option<usize> {
    match (x, y) {
        (1, 0) => Some(0),
        (0, 1) => Some(1),
        (0, 0) => Some(2),
        _ => None,
    }
}

/// Bit of `qubit` in a 12-qubit basis index.
pub fn bit(index: usize, qubit: usize) -> usize {
    (index >> (N_QUBITS - 1 - qubit)) & 1
}

/// Basis index with the listed qubits set.
pub fn basis_with(ones: &[usize]) -> usize {
    ones.iter().fold(0, |acc, &q| acc | 1 << (N_QUBITS - 1 - q))
}
