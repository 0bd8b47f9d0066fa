//! Grid model: cell contents, coordinates, the nine position classes,
//! radius-1 sensing, constraint checks, target predicates and the plain
//! text grid format.
//!
//! Orientation is fixed everywhere: row 1 is the front (North) row and
//! column `m` is the exit lane (East). Coordinates are 1-based.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Contents of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Empty,
    /// An agent that leaves at the next exit and must end up in column `m`.
    Exiting,
    /// An agent that continues down the road.
    Continue,
}

impl Cell {
    pub fn to_char(self) -> char {
        match self {
            Cell::Empty => '.',
            Cell::Exiting => 'E',
            Cell::Continue => 'C',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        match c {
            '.' => Some(Cell::Empty),
            'E' => Some(Cell::Exiting),
            'C' => Some(Cell::Continue),
            _ => None,
        }
    }

    /// Numeric value used in the literature: exiting `+1`, continue `-1`, empty `0`.
    pub fn value(self) -> i8 {
        match self {
            Cell::Empty => 0,
            Cell::Exiting => 1,
            Cell::Continue => -1,
        }
    }

    pub fn is_empty(self) -> bool {
        self == Cell::Empty
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }

    /// `(drow, dcol)` offset of one step in this direction.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::North => "North",
            Direction::East => "East",
            Direction::South => "South",
            Direction::West => "West",
        };
        f.write_str(s)
    }
}

/// The nine sensor-border patterns an agent can observe.
///
/// Discriminants are the conventional position indices (1..=9).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PositionClass {
    NwCorner = 1,
    SwCorner = 2,
    SeCorner = 3,
    NeCorner = 4,
    SouthEdge = 5,
    WestEdge = 6,
    NorthEdge = 7,
    EastEdge = 8,
    Interior = 9,
}

impl PositionClass {
    pub const ALL: [PositionClass; 9] = [
        PositionClass::NwCorner,
        PositionClass::SwCorner,
        PositionClass::SeCorner,
        PositionClass::NeCorner,
        PositionClass::SouthEdge,
        PositionClass::WestEdge,
        PositionClass::NorthEdge,
        PositionClass::EastEdge,
        PositionClass::Interior,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<PositionClass> {
        PositionClass::ALL.get((i as usize).wrapping_sub(1)).copied()
    }

    /// Which of the four sensors (N, E, S, W) read a border.
    pub fn borders(self) -> [bool; 4] {
        use PositionClass::*;
        match self {
            NwCorner => [true, false, false, true],
            SwCorner => [false, false, true, true],
            SeCorner => [false, true, true, false],
            NeCorner => [true, true, false, false],
            SouthEdge => [false, false, true, false],
            WestEdge => [false, false, false, true],
            NorthEdge => [true, false, false, false],
            EastEdge => [false, true, false, false],
            Interior => [false, false, false, false],
        }
    }

    pub fn has_border(self, d: Direction) -> bool {
        self.borders()[d.index()]
    }

    /// Inverse of [`PositionClass::borders`]; `None` for patterns that
    /// cannot occur on a grid with at least two rows and two columns.
    pub fn from_borders(b: [bool; 4]) -> Option<PositionClass> {
        PositionClass::ALL.iter().copied().find(|p| p.borders() == b)
    }

    pub fn is_first_row(self) -> bool {
        matches!(
            self,
            PositionClass::NwCorner | PositionClass::NorthEdge | PositionClass::NeCorner
        )
    }

    pub fn is_last_row(self) -> bool {
        matches!(
            self,
            PositionClass::SwCorner | PositionClass::SouthEdge | PositionClass::SeCorner
        )
    }

    pub fn is_first_col(self) -> bool {
        matches!(
            self,
            PositionClass::NwCorner | PositionClass::WestEdge | PositionClass::SwCorner
        )
    }

    pub fn is_last_col(self) -> bool {
        matches!(
            self,
            PositionClass::NeCorner | PositionClass::EastEdge | PositionClass::SeCorner
        )
    }

    pub fn name(self) -> &'static str {
        use PositionClass::*;
        match self {
            NwCorner => "NW",
            SwCorner => "SW",
            SeCorner => "SE",
            NeCorner => "NE",
            SouthEdge => "S",
            WestEdge => "W",
            NorthEdge => "N",
            EastEdge => "E",
            Interior => "I",
        }
    }
}

/// What a single sensor reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reading {
    Empty = 0,
    Agent = 1,
    Border = 2,
}

impl Reading {
    pub fn from_bits(b: u8) -> Option<Reading> {
        match b {
            0 => Some(Reading::Empty),
            1 => Some(Reading::Agent),
            2 => Some(Reading::Border),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Reading::Empty => '0',
            Reading::Agent => 'A',
            Reading::Border => '#',
        }
    }
}

/// The four radius-1 readings around a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    pub north: Reading,
    pub east: Reading,
    pub south: Reading,
    pub west: Reading,
}

impl Neighborhood {
    pub fn new(north: Reading, east: Reading, south: Reading, west: Reading) -> Self {
        Neighborhood {
            north,
            east,
            south,
            west,
        }
    }

    pub fn get(&self, d: Direction) -> Reading {
        match d {
            Direction::North => self.north,
            Direction::East => self.east,
            Direction::South => self.south,
            Direction::West => self.west,
        }
    }

    pub fn is_empty(&self, d: Direction) -> bool {
        self.get(d) == Reading::Empty
    }

    pub fn borders(&self) -> [bool; 4] {
        Direction::ALL.map(|d| self.get(d) == Reading::Border)
    }

    /// Packs the readings into one byte, two bits each (N lowest).
    pub fn code(&self) -> u8 {
        (self.north as u8) | (self.east as u8) << 2 | (self.south as u8) << 4 | (self.west as u8) << 6
    }

    pub fn from_code(code: u8) -> Option<Neighborhood> {
        Some(Neighborhood {
            north: Reading::from_bits(code & 3)?,
            east: Reading::from_bits((code >> 2) & 3)?,
            south: Reading::from_bits((code >> 4) & 3)?,
            west: Reading::from_bits((code >> 6) & 3)?,
        })
    }

    /// Every neighborhood consistent with the border pattern of `p`.
    pub fn all_for(p: PositionClass) -> Vec<Neighborhood> {
        let b = p.borders();
        let choices = |border: bool| -> &'static [Reading] {
            if border {
                &[Reading::Border]
            } else {
                &[Reading::Empty, Reading::Agent]
            }
        };
        let mut out = Vec::with_capacity(16);
        for &north in choices(b[0]) {
            for &east in choices(b[1]) {
                for &south in choices(b[2]) {
                    for &west in choices(b[3]) {
                        out.push(Neighborhood::new(north, east, south, west));
                    }
                }
            }
        }
        out
    }
}

/// Bound on the number of exiting agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `N1 <= n`.
    C0,
    /// `N1 < n`, required by the multi-column algorithm.
    C1,
    /// Two-column road: no bound on `N1` besides `N0 + N1 <= 2n`.
    TwoLane,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoEmptyCell,
    TooManyExiting { exiting: usize, limit: usize },
    NotTwoColumns { m: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoEmptyCell => write!(f, "no empty cell"),
            Violation::TooManyExiting { exiting, limit } => {
                write!(f, "{exiting} exiting agents exceed the limit of {limit}")
            }
            Violation::NotTwoColumns { m } => write!(f, "two-lane grid must have 2 columns, got {m}"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("malformed header: {0:?}")]
    BadHeader(String),
    #[error("grid must be at least 2x2, got {n}x{m}")]
    TooSmall { n: usize, m: usize },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown cell character {ch:?} at row {row}")]
    UnknownCell { ch: char, row: usize },
    #[error("coordinate {coord} outside {n}x{m} grid")]
    OutOfRange { coord: Coord, n: usize, m: usize },
    #[error("cell count {len} does not match {n}x{m}")]
    CellCount { len: usize, n: usize, m: usize },
}

/// Population counts `(N0, N1, N-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Counts {
    pub empty: usize,
    pub exiting: usize,
    pub continuing: usize,
}

/// An `n x m` configuration stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
    m: usize,
    cells: Vec<Cell>,
}

impl Grid {
    pub fn new(n: usize, m: usize, cells: Vec<Cell>) -> Result<Grid, GridError> {
        if n < 2 || m < 2 {
            return Err(GridError::TooSmall { n, m });
        }
        if cells.len() != n * m {
            return Err(GridError::CellCount {
                len: cells.len(),
                n,
                m,
            });
        }
        Ok(Grid { n, m, cells })
    }

    pub fn filled(n: usize, m: usize, cell: Cell) -> Result<Grid, GridError> {
        Grid::new(n, m, vec![cell; n * m])
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn index_of(&self, c: Coord) -> Result<usize, GridError> {
        if c.row == 0 || c.row > self.n || c.col == 0 || c.col > self.m {
            return Err(GridError::OutOfRange {
                coord: c,
                n: self.n,
                m: self.m,
            });
        }
        Ok((c.row - 1) * self.m + (c.col - 1))
    }

    pub fn coord_of(&self, index: usize) -> Coord {
        Coord::new(index / self.m + 1, index % self.m + 1)
    }

    pub fn get(&self, c: Coord) -> Result<Cell, GridError> {
        Ok(self.cells[self.index_of(c)?])
    }

    pub fn set(&mut self, c: Coord, cell: Cell) -> Result<(), GridError> {
        let i = self.index_of(c)?;
        self.cells[i] = cell;
        Ok(())
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.cells
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for cell in &self.cells {
            match cell {
                Cell::Empty => c.empty += 1,
                Cell::Exiting => c.exiting += 1,
                Cell::Continue => c.continuing += 1,
            }
        }
        c
    }

    /// Neighbor coordinate in direction `d`, or `None` when off-grid.
    pub fn neighbor(&self, c: Coord, d: Direction) -> Option<Coord> {
        let (dr, dc) = d.offset();
        let row = c.row as isize + dr;
        let col = c.col as isize + dc;
        if row < 1 || col < 1 || row as usize > self.n || col as usize > self.m {
            None
        } else {
            Some(Coord::new(row as usize, col as usize))
        }
    }

    pub fn sense(&self, c: Coord) -> Result<Neighborhood, GridError> {
        self.index_of(c)?;
        let read = |d: Direction| match self.neighbor(c, d) {
            None => Reading::Border,
            Some(nc) => {
                if self.cells[(nc.row - 1) * self.m + nc.col - 1].is_empty() {
                    Reading::Empty
                } else {
                    Reading::Agent
                }
            }
        };
        Ok(Neighborhood::new(
            read(Direction::North),
            read(Direction::East),
            read(Direction::South),
            read(Direction::West),
        ))
    }

    pub fn position_class(&self, c: Coord) -> Result<PositionClass, GridError> {
        position_class(self.n, self.m, c)
    }

    /// Validates the population against `constraint`. Violations are data.
    pub fn validate(&self, constraint: Constraint) -> Vec<Violation> {
        let counts = self.counts();
        let mut out = Vec::new();
        if counts.empty == 0 {
            out.push(Violation::NoEmptyCell);
        }
        match constraint {
            Constraint::C0 if counts.exiting > self.n => out.push(Violation::TooManyExiting {
                exiting: counts.exiting,
                limit: self.n,
            }),
            Constraint::C1 if counts.exiting >= self.n => out.push(Violation::TooManyExiting {
                exiting: counts.exiting,
                limit: self.n - 1,
            }),
            Constraint::TwoLane if self.m != 2 => {
                out.push(Violation::NotTwoColumns { m: self.m })
            }
            _ => {}
        }
        out
    }

    pub fn is_valid(&self, constraint: Constraint) -> bool {
        self.validate(constraint).is_empty()
    }

    /// Whether the configuration is sorted.
    ///
    /// Multi-column: every exiting agent sits in column `m`. Two-lane: when
    /// `N1 <= n` no exiting agent remains in column 1, otherwise no continue
    /// agent remains in column 2.
    pub fn is_target(&self, constraint: Constraint) -> bool {
        let m = self.m;
        match constraint {
            Constraint::C0 | Constraint::C1 => self
                .cells
                .chunks(m)
                .all(|row| row[..m - 1].iter().all(|&c| c != Cell::Exiting)),
            Constraint::TwoLane => {
                if self.counts().exiting <= self.n {
                    self.cells.chunks(m).all(|row| row[0] != Cell::Exiting)
                } else {
                    self.cells.chunks(m).all(|row| row[m - 1] != Cell::Continue)
                }
            }
        }
    }

    /// Row lines without the header, each terminated by `\n`.
    pub fn body(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.m + 1));
        for row in self.cells.chunks(self.m) {
            s.extend(row.iter().map(|c| c.to_char()));
            s.push('\n');
        }
        s
    }

    /// Canonical grid text: `"n m\n"` followed by the rows.
    pub fn to_text(&self) -> String {
        format!("{} {}\n{}", self.n, self.m, self.body())
    }

    /// Parses rows only (no header), inferring the dimensions.
    pub fn from_body<S: AsRef<str>>(lines: &[S]) -> Result<Grid, GridError> {
        let n = lines.len();
        let m = lines.first().map(|l| l.as_ref().chars().count()).unwrap_or(0);
        parse_rows(n, m, lines)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_grid(s)
    }
}

/// Parses the grid-text format: a header `"n m"` then `n` rows of `m`
/// characters from `{E, C, .}`.
pub fn parse_grid(text: &str) -> Result<Grid, GridError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    let mut parts = header.split(' ');
    let parse_dim = |p: Option<&str>| -> Result<usize, GridError> {
        p.filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GridError::BadHeader(header.to_string()))
    };
    let n = parse_dim(parts.next())?;
    let m = parse_dim(parts.next())?;
    if parts.next().is_some() {
        return Err(GridError::BadHeader(header.to_string()));
    }
    let rows: Vec<&str> = lines.collect();
    parse_rows(n, m, &rows)
}

fn parse_rows<S: AsRef<str>>(n: usize, m: usize, rows: &[S]) -> Result<Grid, GridError> {
    if n < 2 || m < 2 {
        return Err(GridError::TooSmall { n, m });
    }
    if rows.len() != n {
        return Err(GridError::RowCount {
            expected: n,
            found: rows.len(),
        });
    }
    let mut cells = Vec::with_capacity(n * m);
    for (i, line) in rows.iter().enumerate() {
        let line = line.as_ref();
        let found = line.chars().count();
        if found != m {
            return Err(GridError::RaggedRow {
                row: i + 1,
                expected: m,
                found,
            });
        }
        for ch in line.chars() {
            cells.push(Cell::from_char(ch).ok_or(GridError::UnknownCell { ch, row: i + 1 })?);
        }
    }
    Grid::new(n, m, cells)
}

/// Classifies `c` on an `n x m` grid by which of its sensors face a border.
pub fn position_class(n: usize, m: usize, c: Coord) -> Result<PositionClass, GridError> {
    if n < 2 || m < 2 {
        return Err(GridError::TooSmall { n, m });
    }
    if c.row == 0 || c.row > n || c.col == 0 || c.col > m {
        return Err(GridError::OutOfRange { coord: c, n, m });
    }
    let borders = [c.row == 1, c.col == m, c.row == n, c.col == 1];
    Ok(PositionClass::from_borders(borders).expect("n, m >= 2 admits only the nine patterns"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_direct_encoding() {
        let g = parse_grid("2 3\nE.C\nCCC").unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 3));
        assert_eq!(g.get(Coord::new(1, 1)).unwrap(), Cell::Exiting);
        assert_eq!(g.get(Coord::new(1, 2)).unwrap(), Cell::Empty);
        assert_eq!(g.get(Coord::new(2, 3)).unwrap(), Cell::Continue);
        assert_eq!(g.to_text(), "2 3\nE.C\nCCC\n");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_grid("2 3\nE.C\nCC"),
            Err(GridError::RaggedRow { row: 2, .. })
        ));
        assert!(matches!(parse_grid("2x3\nE.C\nCCC"), Err(GridError::BadHeader(_))));
        assert!(matches!(parse_grid("2 3 4\nE.C\nCCC"), Err(GridError::BadHeader(_))));
        assert!(matches!(
            parse_grid("2 3\nE.X\nCCC"),
            Err(GridError::UnknownCell { ch: 'X', row: 1 })
        ));
        assert!(matches!(parse_grid("2 3\nE.C"), Err(GridError::RowCount { .. })));
        assert!(matches!(parse_grid("2 1\nE\nC"), Err(GridError::TooSmall { .. })));
        assert!(matches!(
            parse_grid("2 3\nE.C \nCCC"),
            Err(GridError::RaggedRow { .. })
        ));
    }

    #[test]
    fn position_examples() {
        assert_eq!(position_class(5, 4, Coord::new(3, 2)).unwrap(), PositionClass::Interior);
        assert_eq!(PositionClass::Interior.index(), 9);
        assert_eq!(position_class(5, 4, Coord::new(1, 4)).unwrap(), PositionClass::NeCorner);
        assert_eq!(PositionClass::NeCorner.index(), 4);
        assert_eq!(position_class(5, 4, Coord::new(3, 1)).unwrap(), PositionClass::WestEdge);
        assert_eq!(PositionClass::WestEdge.index(), 6);
        assert!(position_class(5, 4, Coord::new(6, 1)).is_err());
        assert!(position_class(5, 4, Coord::new(0, 1)).is_err());
    }

    #[test]
    fn classes_partition_every_grid() {
        for n in 2..=10 {
            for m in 2..=10 {
                let mut counts = [0usize; 10];
                for row in 1..=n {
                    for col in 1..=m {
                        let p = position_class(n, m, Coord::new(row, col)).unwrap();
                        counts[p.index() as usize] += 1;
                    }
                }
                assert_eq!(counts[9], (n - 2) * (m - 2));
                for corner in 1..=4 {
                    assert_eq!(counts[corner], 1);
                }
                assert_eq!(counts[5], m - 2);
                assert_eq!(counts[7], m - 2);
                assert_eq!(counts[6], n - 2);
                assert_eq!(counts[8], n - 2);
                assert_eq!(counts.iter().sum::<usize>(), n * m);
            }
        }
    }

    #[test]
    fn sense_examples() {
        let g = parse_grid("2 3\nE.C\nCCC").unwrap();
        let nb = g.sense(Coord::new(1, 2)).unwrap();
        assert_eq!(nb, Neighborhood::new(Reading::Border, Reading::Agent, Reading::Agent, Reading::Agent));
        let corner = g.sense(Coord::new(1, 1)).unwrap();
        assert_eq!(corner.north, Reading::Border);
        assert_eq!(corner.west, Reading::Border);
        assert_eq!(corner.east, Reading::Empty);

        let full = Grid::filled(3, 3, Cell::Continue).unwrap();
        let nb = full.sense(Coord::new(2, 2)).unwrap();
        assert!(Direction::ALL.iter().all(|&d| nb.get(d) == Reading::Agent));
        assert!(g.sense(Coord::new(3, 1)).is_err());
    }

    #[test]
    fn counts_and_validation() {
        assert_eq!(
            Grid::filled(2, 3, Cell::Empty).unwrap().counts(),
            Counts { empty: 6, exiting: 0, continuing: 0 }
        );
        let g = parse_grid("2 3\nE.C\nCCC").unwrap();
        assert_eq!(g.counts(), Counts { empty: 1, exiting: 1, continuing: 4 });

        let ok = parse_grid("3 4\nE..C\nCCCC\nCCCE").unwrap();
        assert!(ok.is_valid(Constraint::C1));
        let full = parse_grid("3 4\nECCC\nCCCC\nCCCE").unwrap();
        assert_eq!(full.validate(Constraint::C1), vec![Violation::NoEmptyCell]);
        let three = parse_grid("3 4\nE..C\nECCC\nCCCE").unwrap();
        assert!(!three.is_valid(Constraint::C1));
        assert!(three.is_valid(Constraint::C0));
        assert_eq!(
            three.validate(Constraint::TwoLane),
            vec![Violation::NotTwoColumns { m: 4 }]
        );
    }

    #[test]
    fn target_predicates() {
        let sorted = parse_grid("3 3\nC.E\nCCE\n.CC").unwrap();
        assert!(sorted.is_target(Constraint::C1));
        let unsorted = parse_grid("3 3\nE.C\nCCC\nCCC").unwrap();
        assert!(!unsorted.is_target(Constraint::C1));

        // N1 = 3 > n = 2: column 2 all exiting, column 1 = {exiting, empty}.
        let over = parse_grid("2 2\nEE\n.E").unwrap();
        assert!(over.is_target(Constraint::TwoLane));
        let under = parse_grid("2 2\nE.\nCE").unwrap();
        assert!(!under.is_target(Constraint::TwoLane));
        let under_done = parse_grid("2 2\nCE\n.E").unwrap();
        assert!(under_done.is_target(Constraint::TwoLane));
    }

    #[test]
    fn neighborhood_code_roundtrip() {
        for p in PositionClass::ALL {
            for nb in Neighborhood::all_for(p) {
                assert_eq!(Neighborhood::from_code(nb.code()), Some(nb));
                assert_eq!(PositionClass::from_borders(nb.borders()), Some(p));
            }
        }
    }

    fn arb_grid() -> impl Strategy<Value = Grid> {
        (2usize..=10, 2usize..=10).prop_flat_map(|(n, m)| {
            proptest::collection::vec(
                prop_oneof![Just(Cell::Empty), Just(Cell::Exiting), Just(Cell::Continue)],
                n * m,
            )
            .prop_map(move |cells| Grid::new(n, m, cells).unwrap())
        })
    }

    proptest! {
        #[test]
        fn text_roundtrip(g in arb_grid()) {
            let text = g.to_text();
            let back = parse_grid(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.to_text(), text);
        }

        #[test]
        fn counts_conserve(g in arb_grid()) {
            let c = g.counts();
            prop_assert_eq!(c.empty + c.exiting + c.continuing, g.rows() * g.cols());
        }

        #[test]
        fn sense_agrees_with_position(g in arb_grid(), r in 0usize..10, c in 0usize..10) {
            let coord = Coord::new(r % g.rows() + 1, c % g.cols() + 1);
            let nb = g.sense(coord).unwrap();
            let p = g.position_class(coord).unwrap();
            prop_assert_eq!(nb.borders(), p.borders());
        }
    }
}
