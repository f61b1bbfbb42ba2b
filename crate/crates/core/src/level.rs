//! Tile, scene, and level representations plus the `.lvl` text format.
//!
//! A level is a rectangular grid of [`TileKind`] cells, row-major with the
//! top row first. Scenes are fixed-width grids labeled with the mechanics
//! they showcase; a [`Chromosome`] is an ordered list of scene ids that
//! [`assemble_level`] stitches into one playable grid.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

/// Width in tiles of the flat pads added at both ends of an assembled level.
pub const PAD_WIDTH: usize = 3;

/// Everything a level cell can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TileKind {
    Empty,
    Ground,
    Brick,
    QuestionCoin,
    QuestionPowerup,
    Coin,
    PipeBody,
    PipeTop,
    SolidBlock,
    Platform,
    EnemyGoomba,
    EnemyKoopa,
    EnemySpiky,
    Flag,
    MarioStart,
}

impl TileKind {
    pub const ALL: [TileKind; 15] = [
        TileKind::Empty,
        TileKind::Ground,
        TileKind::Brick,
        TileKind::QuestionCoin,
        TileKind::QuestionPowerup,
        TileKind::Coin,
        TileKind::PipeBody,
        TileKind::PipeTop,
        TileKind::SolidBlock,
        TileKind::Platform,
        TileKind::EnemyGoomba,
        TileKind::EnemyKoopa,
        TileKind::EnemySpiky,
        TileKind::Flag,
        TileKind::MarioStart,
    ];

    /// The frozen character mapping of the `.lvl` format.
    pub fn to_char(self) -> char {
        match self {
            TileKind::Empty => '-',
            TileKind::Ground => 'X',
            TileKind::Brick => 'S',
            TileKind::QuestionCoin => 'Q',
            TileKind::QuestionPowerup => '!',
            TileKind::Coin => 'o',
            TileKind::PipeBody => 't',
            TileKind::PipeTop => 'T',
            TileKind::SolidBlock => '#',
            TileKind::Platform => '=',
            TileKind::EnemyGoomba => 'g',
            TileKind::EnemyKoopa => 'k',
            TileKind::EnemySpiky => 'y',
            TileKind::Flag => 'F',
            TileKind::MarioStart => 'M',
        }
    }

    pub fn from_char(c: char) -> Option<TileKind> {
        Some(match c {
            '-' => TileKind::Empty,
            'X' => TileKind::Ground,
            'S' => TileKind::Brick,
            'Q' => TileKind::QuestionCoin,
            '!' => TileKind::QuestionPowerup,
            'o' => TileKind::Coin,
            't' => TileKind::PipeBody,
            'T' => TileKind::PipeTop,
            '#' => TileKind::SolidBlock,
            '=' => TileKind::Platform,
            'g' => TileKind::EnemyGoomba,
            'k' => TileKind::EnemyKoopa,
            'y' => TileKind::EnemySpiky,
            'F' => TileKind::Flag,
            'M' => TileKind::MarioStart,
            _ => return None,
        })
    }

    /// Solid tiles block movement on every side. Platforms are one-way and
    /// enemies/pickups/markers are entities or overlays, never solid.
    pub fn is_solid(self) -> bool {
        matches!(
            self,
            TileKind::Ground
                | TileKind::Brick
                | TileKind::QuestionCoin
                | TileKind::QuestionPowerup
                | TileKind::PipeBody
                | TileKind::PipeTop
                | TileKind::SolidBlock
        )
    }

    pub fn is_enemy(self) -> bool {
        matches!(
            self,
            TileKind::EnemyGoomba | TileKind::EnemyKoopa | TileKind::EnemySpiky
        )
    }
}

/// The 12 tracked game mechanics. The discriminant is the stable integer
/// code used for serialization and for ordering simultaneous events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MechanicKind {
    Jump = 0,
    LowJump = 1,
    HighJump = 2,
    ShortJump = 3,
    LongJump = 4,
    StompKill = 5,
    ShellKill = 6,
    FallKill = 7,
    ModeChange = 8,
    CoinCollect = 9,
    BrickBlock = 10,
    QuestionBlock = 11,
}

impl MechanicKind {
    pub const ALL: [MechanicKind; 12] = [
        MechanicKind::Jump,
        MechanicKind::LowJump,
        MechanicKind::HighJump,
        MechanicKind::ShortJump,
        MechanicKind::LongJump,
        MechanicKind::StompKill,
        MechanicKind::ShellKill,
        MechanicKind::FallKill,
        MechanicKind::ModeChange,
        MechanicKind::CoinCollect,
        MechanicKind::BrickBlock,
        MechanicKind::QuestionBlock,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<MechanicKind> {
        MechanicKind::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            MechanicKind::Jump => "Jump",
            MechanicKind::LowJump => "LowJump",
            MechanicKind::HighJump => "HighJump",
            MechanicKind::ShortJump => "ShortJump",
            MechanicKind::LongJump => "LongJump",
            MechanicKind::StompKill => "StompKill",
            MechanicKind::ShellKill => "ShellKill",
            MechanicKind::FallKill => "FallKill",
            MechanicKind::ModeChange => "ModeChange",
            MechanicKind::CoinCollect => "CoinCollect",
            MechanicKind::BrickBlock => "BrickBlock",
            MechanicKind::QuestionBlock => "QuestionBlock",
        }
    }

    pub fn from_name(name: &str) -> Option<MechanicKind> {
        MechanicKind::ALL.iter().copied().find(|m| m.name() == name)
    }
}

impl fmt::Display for MechanicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of mechanics, packed into a bitmask. Iteration order is code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MechanicSet(u16);

impl MechanicSet {
    pub const EMPTY: MechanicSet = MechanicSet(0);

    pub fn insert(&mut self, m: MechanicKind) {
        self.0 |= 1 << m.code();
    }

    pub fn contains(self, m: MechanicKind) -> bool {
        self.0 & (1 << m.code()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: MechanicSet) -> MechanicSet {
        MechanicSet(self.0 | other.0)
    }

    pub fn intersection(self, other: MechanicSet) -> MechanicSet {
        MechanicSet(self.0 & other.0)
    }

    pub fn difference(self, other: MechanicSet) -> MechanicSet {
        MechanicSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: MechanicSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = MechanicKind> {
        MechanicKind::ALL
            .iter()
            .copied()
            .filter(move |m| self.contains(*m))
    }
}

impl FromIterator<MechanicKind> for MechanicSet {
    fn from_iter<I: IntoIterator<Item = MechanicKind>>(iter: I) -> Self {
        let mut set = MechanicSet::EMPTY;
        for m in iter {
            set.insert(m);
        }
        set
    }
}

impl fmt::Display for MechanicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(|m| m.name()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Index of a scene within its corpus.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct SceneId(pub u32);

impl fmt::Display for SceneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Rectangular tile grid, row-major, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGrid {
    width: usize,
    height: usize,
    cells: Vec<TileKind>,
}

impl TileGrid {
    pub fn new(width: usize, height: usize) -> TileGrid {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        TileGrid {
            width,
            height,
            cells: vec![TileKind::Empty; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> TileKind {
        debug_assert!(x < self.width && y < self.height);
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, kind: TileKind) {
        debug_assert!(x < self.width && y < self.height);
        self.cells[y * self.width + x] = kind;
    }

    /// Tile lookup that treats everything outside the grid as Empty.
    pub fn get_or_empty(&self, x: isize, y: isize) -> TileKind {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            TileKind::Empty
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn cells(&self) -> &[TileKind] {
        &self.cells
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, TileKind)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &k)| (i % self.width, i / self.width, k))
    }

    /// Column of the first Flag tile, scanning left to right.
    pub fn flag_column(&self) -> Option<usize> {
        self.iter_cells()
            .find(|&(_, _, k)| k == TileKind::Flag)
            .map(|(x, _, _)| x)
    }

    /// Position of the first MarioStart tile.
    pub fn start_tile(&self) -> Option<(usize, usize)> {
        self.iter_cells()
            .find(|&(_, _, k)| k == TileKind::MarioStart)
            .map(|(x, y, _)| (x, y))
    }

    /// Copies `src` verbatim into this grid with its left edge at `x_offset`.
    pub fn blit(&mut self, src: &TileGrid, x_offset: usize) {
        assert_eq!(src.height, self.height, "blit requires equal heights");
        assert!(x_offset + src.width <= self.width);
        for y in 0..src.height {
            for x in 0..src.width {
                self.set(x_offset + x, y, src.get(x, y));
            }
        }
    }
}

/// A mechanic-labeled mini-level; the atomic unit of stitching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub id: SceneId,
    pub name: String,
    pub grid: TileGrid,
    pub mechanics: MechanicSet,
}

/// An ordered list of scene references; assembles into one level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub scenes: Vec<SceneId>,
}

impl Chromosome {
    pub fn new(scenes: Vec<SceneId>) -> Chromosome {
        Chromosome { scenes }
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LevelError {
    #[error("level text is empty")]
    EmptyText,
    #[error("line {line} has length {got}, expected {expected}")]
    RaggedLine {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("unknown tile character {ch:?} at line {line}, column {column}")]
    UnknownTile { ch: char, line: usize, column: usize },
    #[error("chromosome is empty")]
    EmptyChromosome,
    #[error("scene {0} does not resolve in the corpus")]
    UnresolvedScene(SceneId),
    #[error("scene {id} has height {got}, expected {expected}")]
    SceneHeightMismatch {
        id: SceneId,
        got: usize,
        expected: usize,
    },
}

/// Parses `.lvl` text into a grid. Rows are newline-separated, top row
/// first; a single trailing newline is tolerated.
pub fn parse_level_text(text: &str) -> Result<TileGrid, LevelError> {
    let trimmed = text.strip_suffix('\n').unwrap_or(text);
    if trimmed.is_empty() {
        return Err(LevelError::EmptyText);
    }
    let lines: Vec<&str> = trimmed.split('\n').collect();
    let width = lines[0].chars().count();
    if width == 0 {
        return Err(LevelError::EmptyText);
    }
    let height = lines.len();
    let mut grid = TileGrid::new(width, height);
    for (y, line) in lines.iter().enumerate() {
        let mut count = 0;
        for (x, ch) in line.chars().enumerate() {
            count += 1;
            if count > width {
                break;
            }
            let kind = TileKind::from_char(ch).ok_or(LevelError::UnknownTile {
                ch,
                line: y + 1,
                column: x + 1,
            })?;
            grid.set(x, y, kind);
        }
        if count != width {
            return Err(LevelError::RaggedLine {
                line: y + 1,
                expected: width,
                got: count,
            });
        }
    }
    Ok(grid)
}

/// Inverse of [`parse_level_text`]; emits no trailing newline.
pub fn serialize_level_text(grid: &TileGrid) -> String {
    let mut out = String::with_capacity((grid.width() + 1) * grid.height());
    for y in 0..grid.height() {
        if y > 0 {
            out.push('\n');
        }
        for x in 0..grid.width() {
            out.push(grid.get(x, y).to_char());
        }
    }
    out
}

/// Stitches the chromosome's scenes left to right between a flat start pad
/// (with the avatar spawn) and a flat exit pad (with the flag). Scene
/// columns are copied verbatim; seams are not smoothed.
pub fn assemble_level(chromosome: &Chromosome, corpus: &Corpus) -> Result<TileGrid, LevelError> {
    if chromosome.is_empty() {
        return Err(LevelError::EmptyChromosome);
    }
    let mut scenes = Vec::with_capacity(chromosome.len());
    for &id in &chromosome.scenes {
        scenes.push(corpus.scene(id).ok_or(LevelError::UnresolvedScene(id))?);
    }
    let height = scenes[0].grid.height();
    for scene in &scenes {
        if scene.grid.height() != height {
            return Err(LevelError::SceneHeightMismatch {
                id: scene.id,
                got: scene.grid.height(),
                expected: height,
            });
        }
    }
    let total_width: usize = PAD_WIDTH * 2 + scenes.iter().map(|s| s.grid.width()).sum::<usize>();
    let mut grid = TileGrid::new(total_width, height);
    for x in 0..PAD_WIDTH {
        grid.set(x, height - 1, TileKind::Ground);
        grid.set(total_width - 1 - x, height - 1, TileKind::Ground);
    }
    grid.set(1, height - 2, TileKind::MarioStart);
    grid.set(total_width - 2, height - 2, TileKind::Flag);
    let mut offset = PAD_WIDTH;
    for scene in &scenes {
        grid.blit(&scene.grid, offset);
        offset += scene.grid.width();
    }
    Ok(grid)
}
