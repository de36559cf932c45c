//! Twelve-report fixture with hand-counted answers.
//!
//! | id | country | year | serotypes | source     |
//! |----|---------|------|-----------|------------|
//! | 0  | JPN     | 1943 | 1         | core       |
//! | 1  | USA     | 1944 | 1         | core       |
//! | 2  | PHL     | 1956 | 2,3       | core       |
//! | 3  | THA     | 1958 | 1,2,3,4   | core       |
//! | 4  | NGA     | 1983 | 4         | core       |
//! | 5  | SEN     | 1995 | 2,4       | core       |
//! | 6  | BRA     | 1990 | 1         | core       |
//! | 7  | BRA     | 1990 | 1,2       | core       |
//! | 8  | VNM     | 1975 | 2         | core       |
//! | 9  | IND     | 1985 | 1,3       | core       |
//! | 10 | KEN     | 1990 | 1,2       | supplement |
//! | 11 | PER     | 2010 | 3         | supplement |

use std::io;
use std::path::Path;

use geoden_core::snapshot::{CORE_FILE, GRID_FILE, SUPPLEMENT_FILE};

pub const CORE_CSV: &str = "\
latitude,longitude,country,year,denv1,denv2,denv3,denv4
35.68,139.69,Japan,1943,1,0,0,0
21.31,-157.86,United States,1944,1,0,0,0
14.6,120.98,Philippines,1956,0,1,1,0
13.75,100.5,Thailand,1958,1,1,1,1
6.45,3.4,Nigeria,1983,0,0,0,1
14.69,-17.44,Senegal,1995,0,1,0,1
-22.91,-43.17,Brazil,1990,1,0,0,0
-23.55,-46.63,Brazil,1990,1,1,0,0
21.03,105.85,Viet Nam,1975,0,1,0,0
19.08,72.88,India,1985,1,0,1,0
";

pub const SUPPLEMENT_CSV: &str = "\
latitude,longitude,country,year,denv1,denv2,denv3,denv4
-1.29,36.82,Kenya,1990,1,1,0,0
-12.05,-77.04,Peru,2010,0,0,1,0
";

/// 4x2 global grid of 90-degree cells, one value per class boundary.
pub const GRID_ASC: &str = "\
ncols 4
nrows 2
xllcorner -180
yllcorner -90
cellsize 90
NODATA_value -9999
0 12.5 25 -9999
50 60 75 100
";

pub const REPORT_COUNT: usize = 12;
pub const CORE_COUNT: usize = 10;
pub const SUPPLEMENT_COUNT: usize = 2;

/// Writes the fixture into `dir` using the data directory layout.
pub fn write_data_dir(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CORE_FILE), CORE_CSV)?;
    std::fs::write(dir.join(SUPPLEMENT_FILE), SUPPLEMENT_CSV)?;
    std::fs::write(dir.join(GRID_FILE), GRID_ASC)?;
    Ok(())
}
