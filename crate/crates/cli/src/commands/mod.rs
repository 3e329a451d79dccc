pub mod attack;
pub mod reward;
pub mod rerun;
pub mod solve;
pub mod sweep;
pub mod verify;

use attrgame::game::Partition;

use crate::CliError;

/// Parse a partition given inline as bare blocks (`[[1,2],[3,4]]`) or in the
/// full schema (`{"blocks": [[1,2],[3,4]]}`).
pub fn parse_partition_arg(text: &str) -> Result<Partition, CliError> {
    if let Ok(blocks) = serde_json::from_str::<Vec<Vec<u32>>>(text) {
        return Partition::new(blocks).map_err(CliError::input);
    }
    Partition::from_json(text).map_err(CliError::input)
}
