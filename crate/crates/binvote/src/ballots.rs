//! Ballots as candidate-by-bin grids, plain and additively shared.
//!
//! A grid has one row per candidate and one column per bin; a well-formed
//! ballot contains a single 1 at (chosen candidate, chosen bin) and zeros
//! elsewhere. Cell-wise sums of everyone's ballots produce, per candidate
//! row, a scatter of 1s whose count is that candidate's tally.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{PartyId, Value};
use crate::sharing::{
    is_negative, reconstruct, share_secret, sum_shared, Modulus, Share, SharedSecret, SharingError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BallotError {
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error("candidate {candidate} out of range (grid has {rows} rows)")]
    CandidateOutOfRange { candidate: u32, rows: u32 },
    #[error("bin {bin} out of range (grid has {cols} columns)")]
    BinOutOfRange { bin: u32, cols: u32 },
    #[error("grid shapes differ")]
    ShapeMismatch,
}

/// A plain candidate-by-bin grid of residues, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinGrid {
    rows: u32,
    cols: u32,
    modulus: Modulus,
    cells: Vec<u64>,
}

impl BinGrid {
    pub fn zero(rows: u32, cols: u32, modulus: Modulus) -> Self {
        BinGrid {
            rows,
            cols,
            modulus,
            cells: vec![0; rows as usize * cols as usize],
        }
    }

    pub fn from_cells(rows: u32, cols: u32, modulus: Modulus, cells: Vec<u64>) -> Self {
        assert_eq!(cells.len(), rows as usize * cols as usize);
        let cells = cells.into_iter().map(|c| modulus.reduce(c)).collect();
        BinGrid {
            rows,
            cols,
            modulus,
            cells,
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    fn idx(&self, row: u32, col: u32) -> usize {
        assert!(row < self.rows && col < self.cols);
        row as usize * self.cols as usize + col as usize
    }

    pub fn get(&self, row: u32, col: u32) -> u64 {
        self.cells[self.idx(row, col)]
    }

    pub fn set(&mut self, row: u32, col: u32, value: u64) {
        let i = self.idx(row, col);
        self.cells[i] = self.modulus.reduce(value);
    }

    /// Cell-wise sum modulo the shared modulus.
    pub fn add(&self, other: &BinGrid) -> Result<BinGrid, BallotError> {
        if self.rows != other.rows
            || self.cols != other.cols
            || self.modulus.get() != other.modulus.get()
        {
            return Err(BallotError::ShapeMismatch);
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| self.modulus.add(a, b))
            .collect();
        Ok(BinGrid {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus,
            cells,
        })
    }

    /// Sum of all cells as a plain integer (no reduction).
    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Sum of one candidate row as a plain integer (no reduction).
    pub fn row_total(&self, row: u32) -> u64 {
        (0..self.cols).map(|c| self.get(row, c)).sum()
    }

    /// A revealed sum grid is consistent when no cell is negative (i.e. in
    /// the upper half of the residue range) and the plain integer total over
    /// all cells equals the number of ballots that went in.
    pub fn is_sum_consistent(&self, expected_total: u64) -> bool {
        let m = self.modulus;
        self.cells.iter().all(|&c| !is_negative(c, m)) && self.total() == expected_total
    }

    /// Per-candidate counts, assuming a consistent sum grid.
    pub fn tally(&self) -> Vec<u64> {
        (0..self.rows).map(|r| self.row_total(r)).collect()
    }

    /// Wire encoding of this grid.
    pub fn to_value(&self) -> Value {
        Value::Grid {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus.get(),
            cells: self.cells.clone(),
        }
    }

    /// Decodes a grid value of the expected shape; anything else is `None`.
    pub fn from_value(value: &Value, rows: u32, cols: u32, modulus: Modulus) -> Option<BinGrid> {
        match value {
            Value::Grid {
                rows: vr,
                cols: vc,
                modulus: vm,
                cells,
            } if *vr == rows
                && *vc == cols
                && *vm == modulus.get()
                && cells.len() == rows as usize * cols as usize
                && cells.iter().all(|&c| c < modulus.get()) =>
            {
                Some(BinGrid {
                    rows,
                    cols,
                    modulus,
                    cells: cells.clone(),
                })
            }
            _ => None,
        }
    }
}

/// A vote: which candidate, and which bin the mark lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteSpec {
    pub candidate: u32,
    pub bin: u32,
}

impl VoteSpec {
    /// The cell this vote occupies after applying a shift pair.
    pub fn shifted(self, shift: ShiftPair, rows: u32, cols: u32) -> VoteSpec {
        VoteSpec {
            candidate: (self.candidate + shift.candidate_shift) % rows,
            bin: (self.bin + shift.bin_shift) % cols,
        }
    }
}

/// A ballot-wide displacement: every mark moves by the same row and column
/// offset, wrapping around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPair {
    pub candidate_shift: u32,
    pub bin_shift: u32,
}

impl ShiftPair {
    pub fn random<R: Rng + ?Sized>(rows: u32, cols: u32, rng: &mut R) -> Self {
        ShiftPair {
            candidate_shift: rng.gen_range(0..rows),
            bin_shift: rng.gen_range(0..cols),
        }
    }

    /// Packs the pair into one integer in `[0, rows * cols)`.
    pub fn encode(self, cols: u32) -> u64 {
        u64::from(self.candidate_shift) * u64::from(cols) + u64::from(self.bin_shift)
    }

    pub fn decode(code: u64, rows: u32, cols: u32) -> Option<ShiftPair> {
        if code >= u64::from(rows) * u64::from(cols) {
            return None;
        }
        Some(ShiftPair {
            candidate_shift: (code / u64::from(cols)) as u32,
            bin_shift: (code % u64::from(cols)) as u32,
        })
    }
}

/// A well-formed ballot grid for one vote: a single 1 in the chosen cell.
pub fn make_ballot(
    rows: u32,
    cols: u32,
    modulus: Modulus,
    vote: VoteSpec,
) -> Result<BinGrid, BallotError> {
    if vote.candidate >= rows {
        return Err(BallotError::CandidateOutOfRange {
            candidate: vote.candidate,
            rows,
        });
    }
    if vote.bin >= cols {
        return Err(BallotError::BinOutOfRange {
            bin: vote.bin,
            cols,
        });
    }
    let mut grid = BinGrid::zero(rows, cols, modulus);
    grid.set(vote.candidate, vote.bin, 1);
    Ok(grid)
}

/// True when an opened ballot grid is exactly one mark: a single cell equal
/// to 1, all others 0.
pub fn is_valid_opened_ballot(grid: &BinGrid) -> bool {
    let mut ones = 0usize;
    for &c in grid.cells() {
        match c {
            0 => {}
            1 => ones += 1,
            _ => return false,
        }
    }
    ones == 1
}

/// A grid whose every cell is an additively shared secret over the same
/// participant set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedGrid {
    rows: u32,
    cols: u32,
    modulus: Modulus,
    parties: Vec<PartyId>,
    cells: Vec<SharedSecret>,
}

impl SharedGrid {
    /// Shares each cell of `plain` among `parties`.
    pub fn from_plain<R: Rng + ?Sized>(
        plain: &BinGrid,
        parties: &[PartyId],
        rng: &mut R,
    ) -> Result<SharedGrid, BallotError> {
        let cells = plain
            .cells
            .iter()
            .map(|&v| share_secret(parties, v, plain.modulus, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SharedGrid {
            rows: plain.rows,
            cols: plain.cols,
            modulus: plain.modulus,
            parties: parties.to_vec(),
            cells,
        })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn parties(&self) -> &[PartyId] {
        &self.parties
    }

    pub fn cell(&self, row: u32, col: u32) -> &SharedSecret {
        assert!(row < self.rows && col < self.cols);
        &self.cells[row as usize * self.cols as usize + col as usize]
    }

    /// The grid of one participant's shares — what that participant stores.
    pub fn share_grid(&self, party: PartyId) -> BinGrid {
        let cells = self.cells.iter().map(|s| s.share_value(party)).collect();
        BinGrid {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus,
            cells,
        }
    }

    /// Cell-wise reconstruction (testing convenience; real runs only open
    /// sums or audited ballots).
    pub fn reveal(&self) -> BinGrid {
        let cells = self.cells.iter().map(|s| s.reveal()).collect();
        BinGrid {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus,
            cells,
        }
    }

    /// Cell-wise sum of several shared grids over the same participants —
    /// a local operation on shares, no communication.
    pub fn sum<'a, I>(grids: I) -> Result<SharedGrid, BallotError>
    where
        I: IntoIterator<Item = &'a SharedGrid>,
    {
        let grids: Vec<&SharedGrid> = grids.into_iter().collect();
        let first = *grids.first().ok_or(BallotError::ShapeMismatch)?;
        for g in &grids {
            if g.rows != first.rows
                || g.cols != first.cols
                || g.modulus.get() != first.modulus.get()
                || g.parties != first.parties
            {
                return Err(BallotError::ShapeMismatch);
            }
        }
        let mut cells = Vec::with_capacity(first.cells.len());
        for i in 0..first.cells.len() {
            cells.push(sum_shared(grids.iter().map(|g| &g.cells[i]))?);
        }
        Ok(SharedGrid {
            rows: first.rows,
            cols: first.cols,
            modulus: first.modulus,
            parties: first.parties.clone(),
            cells,
        })
    }

    /// Undoes a shift without opening anything: output cell (c, o) takes the
    /// shared value at the shifted position ((c + dc) mod rows,
    /// (o + do) mod cols).
    pub fn unshifted(&self, shift: ShiftPair) -> SharedGrid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.rows {
            for o in 0..self.cols {
                let src_row = (c + shift.candidate_shift) % self.rows;
                let src_col = (o + shift.bin_shift) % self.cols;
                cells.push(self.cell(src_row, src_col).clone());
            }
        }
        SharedGrid {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus,
            parties: self.parties.clone(),
            cells,
        }
    }

    /// Shared sum of one candidate row — input to the equality check.
    pub fn row_sum_shared(&self, row: u32) -> SharedSecret {
        sum_shared((0..self.cols).map(|c| self.cell(row, c)))
            .expect("row of one grid is never empty")
    }

    /// Adds `delta` to one participant's share of one cell (tampering /
    /// corruption modeling).
    pub fn add_to_share(&mut self, row: u32, col: u32, party: PartyId, delta: u64) {
        assert!(row < self.rows && col < self.cols);
        let i = row as usize * self.cols as usize + col as usize;
        self.cells[i].add_to_share(party, delta);
    }
}

/// Applies [`SharedGrid::unshifted`] at the level of one participant's share
/// grid: each participant can do this locally once the shift is public.
pub fn unshift_share_grid(shares: &BinGrid, shift: ShiftPair) -> BinGrid {
    let mut out = BinGrid::zero(shares.rows, shares.cols, shares.modulus);
    for c in 0..shares.rows {
        for o in 0..shares.cols {
            let src_row = (c + shift.candidate_shift) % shares.rows;
            let src_col = (o + shift.bin_shift) % shares.cols;
            out.set(c, o, shares.get(src_row, src_col));
        }
    }
    out
}

/// Reconstructs one cell of a grid from per-participant share grids received
/// over broadcast.
pub fn reconstruct_grid(
    parties: &[PartyId],
    modulus: Modulus,
    rows: u32,
    cols: u32,
    share_grids: &[(PartyId, BinGrid)],
) -> Result<BinGrid, BallotError> {
    let mut out = BinGrid::zero(rows, cols, modulus);
    for r in 0..rows {
        for c in 0..cols {
            let shares: Vec<Share> = share_grids
                .iter()
                .map(|(p, g)| Share {
                    owner: *p,
                    value: g.get(r, c),
                })
                .collect();
            out.set(r, c, reconstruct(parties, modulus, &shares)?);
        }
    }
    Ok(out)
}
