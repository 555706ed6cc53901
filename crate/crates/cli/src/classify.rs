use swanson::geometry::region_grid_with_band;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::write_json;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.model.swanson()?;
    let grid = region_grid_with_band(
        &params,
        cfg.re_range,
        cfg.im_range,
        cfg.resolution,
        cfg.band,
    )?;
    write_json(cfg.out.as_deref(), &grid)?;
    Ok(())
}
