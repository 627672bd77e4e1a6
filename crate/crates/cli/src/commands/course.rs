//! `fars course`: writes one generated course as JSON, optionally with a
//! top-down SVG.

use std::path::PathBuf;

use fars_core::course::{generate_course, CourseSpec, Level};

use crate::{prepare_output_dir, svg, write_file, CliError};

#[derive(Debug, Clone)]
pub struct CourseArgs {
    pub level: Level,
    pub seed: u64,
    pub svg: bool,
    pub output_dir: PathBuf,
}

pub fn cmd_course(args: &CourseArgs) -> Result<CourseSpec, CliError> {
    prepare_output_dir(&args.output_dir, "--output-dir")?;
    let course = generate_course(args.level, args.seed);
    let stem = format!("course_{}_{}", args.level, args.seed);
    write_file(&args.output_dir.join(format!("{stem}.json")), course.to_json())?;
    if args.svg {
        let title = format!("{} course, seed {}", args.level, args.seed);
        write_file(&args.output_dir.join(format!("{stem}.svg")), svg::course_map(&course, &title))?;
    }
    Ok(course)
}
