#pragma once

// Assembly DSL: three coloured blocks, a 3x3 grid of positions, and five
// chunk symbols standing for whole towers or sub-towers.

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convsim {

enum class SymbolKind : std::uint8_t { Block, Position, Chunk };

enum class Block : std::uint8_t { R, G, B };

// Towers first, then sub-towers.
enum class Chunk : std::uint8_t { C, L, TR, T, PL };

inline constexpr int kGridSize = 3;
inline constexpr int kNumBlocks = 3;
inline constexpr int kNumPositions = kGridSize * kGridSize;
inline constexpr int kNumChunks = 5;

struct Symbol {
    SymbolKind kind = SymbolKind::Block;
    std::uint8_t id = 0;

    static constexpr Symbol block(Block b) { return {SymbolKind::Block, static_cast<std::uint8_t>(b)}; }
    static constexpr Symbol chunk(Chunk c) { return {SymbolKind::Chunk, static_cast<std::uint8_t>(c)}; }
    // 1-based row and column, as written P_{row,col}.
    static Symbol position(int row, int col);

    constexpr bool is_block() const { return kind == SymbolKind::Block; }
    constexpr bool is_position() const { return kind == SymbolKind::Position; }
    constexpr bool is_chunk() const { return kind == SymbolKind::Chunk; }

    int row() const;  // positions only
    int col() const;  // positions only
    Chunk as_chunk() const { return static_cast<Chunk>(id); }
    Block as_block() const { return static_cast<Block>(id); }

    std::string name() const;

    // Canonical order: blocks, positions (row-major), chunks.
    friend constexpr auto operator<=>(const Symbol&, const Symbol&) = default;
};

constexpr bool is_tower_chunk(Chunk c) { return c == Chunk::C || c == Chunk::L || c == Chunk::TR; }

std::span<const Symbol> all_blocks();
std::span<const Symbol> all_positions();
std::span<const Symbol> all_chunks();
// Blocks then chunks: everything that can occupy the first slot of a step.
std::span<const Symbol> thing_space();

// The symbols a sub-message about `s` is decoded over: the nine positions
// for a position, the things otherwise.
std::span<const Symbol> decode_space_for(const Symbol& s);

bool same_category(const Symbol& a, const Symbol& b);

struct Step {
    Symbol thing;   // block or chunk
    Symbol anchor;  // position

    Step(Symbol thing, Symbol anchor);

    friend bool operator==(const Step&, const Step&) = default;
};

enum class TowerId : std::uint8_t { C, L, TREE };

inline constexpr std::array<TowerId, 3> kAllTowers{TowerId::C, TowerId::L, TowerId::TREE};

std::string_view tower_name(TowerId t);
TowerId parse_tower(std::string_view name);  // throws UnknownTower

struct TowerProgram {
    TowerId tower = TowerId::C;
    std::vector<Step> steps;

    // Symbols in order thing, anchor, thing, anchor, ...
    std::vector<Symbol> symbols() const;
    bool is_primitive() const;
    std::string to_string() const;

    friend bool operator==(const TowerProgram&, const TowerProgram&) = default;
};

struct ChunkPart {
    Block block;
    int row_offset;
    int col_offset;
};

struct ChunkTemplate {
    Chunk chunk;
    std::vector<ChunkPart> parts;
};

const ChunkTemplate& chunk_template(Chunk c);

// Number of symbols, two per step.
inline int program_length(const TowerProgram& p) { return static_cast<int>(2 * p.steps.size()); }

// Replaces every chunk step by its template parts placed at anchor + offset.
// Throws OutOfGrid when a part lands off the grid.
TowerProgram expand_program(const TowerProgram& p);

// Programs for a tower from least to most abstract.
const std::vector<TowerProgram>& programs_for_tower(TowerId t);

}  // namespace convsim
