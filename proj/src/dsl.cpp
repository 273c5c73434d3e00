#include "convsim/dsl.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "convsim/errors.hpp"

namespace convsim {

namespace {

constexpr std::array<std::string_view, kNumBlocks> kBlockNames{"R", "G", "B"};
constexpr std::array<std::string_view, kNumChunks> kChunkNames{"C_chunk", "L_chunk", "TR_chunk", "T_chunk",
                                                               "PL_chunk"};

template <std::size_t N>
constexpr std::array<Symbol, N> make_range(SymbolKind kind) {
    std::array<Symbol, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = Symbol{kind, static_cast<std::uint8_t>(i)};
    return out;
}

constexpr auto kBlocks = make_range<kNumBlocks>(SymbolKind::Block);
constexpr auto kPositions = make_range<kNumPositions>(SymbolKind::Position);
constexpr auto kChunks = make_range<kNumChunks>(SymbolKind::Chunk);

constexpr std::array<Symbol, kNumBlocks + kNumChunks> kThings = [] {
    std::array<Symbol, kNumBlocks + kNumChunks> out{};
    for (int i = 0; i < kNumBlocks; ++i) out[i] = kBlocks[i];
    for (int i = 0; i < kNumChunks; ++i) out[kNumBlocks + i] = kChunks[i];
    return out;
}();

Symbol pos(int r, int c) { return Symbol::position(r, c); }
Symbol blk(Block b) { return Symbol::block(b); }
Symbol chk(Chunk c) { return Symbol::chunk(c); }

}  // namespace

Symbol Symbol::position(int row, int col) {
    if (row < 1 || row > kGridSize || col < 1 || col > kGridSize)
        throw OutOfGrid(fmt::format("position P{},{} is outside the {}x{} grid", row, col, kGridSize, kGridSize));
    return {SymbolKind::Position, static_cast<std::uint8_t>((row - 1) * kGridSize + (col - 1))};
}

int Symbol::row() const { return id / kGridSize + 1; }
int Symbol::col() const { return id % kGridSize + 1; }

std::string Symbol::name() const {
    switch (kind) {
        case SymbolKind::Block: return std::string(kBlockNames.at(id));
        case SymbolKind::Position: return fmt::format("P{},{}", row(), col());
        case SymbolKind::Chunk: return std::string(kChunkNames.at(id));
    }
    return "?";
}

std::span<const Symbol> all_blocks() { return kBlocks; }
std::span<const Symbol> all_positions() { return kPositions; }
std::span<const Symbol> all_chunks() { return kChunks; }
std::span<const Symbol> thing_space() { return kThings; }

std::span<const Symbol> decode_space_for(const Symbol& s) {
    return s.is_position() ? all_positions() : thing_space();
}

bool same_category(const Symbol& a, const Symbol& b) { return a.is_position() == b.is_position(); }

Step::Step(Symbol thing_, Symbol anchor_) : thing(thing_), anchor(anchor_) {
    if (thing.is_position()) throw ValidationError("step thing must be a block or chunk");
    if (!anchor.is_position()) throw ValidationError("step anchor must be a position");
}

std::string_view tower_name(TowerId t) {
    switch (t) {
        case TowerId::C: return "C";
        case TowerId::L: return "L";
        case TowerId::TREE: return "TREE";
    }
    return "?";
}

TowerId parse_tower(std::string_view name) {
    for (TowerId t : kAllTowers)
        if (tower_name(t) == name) return t;
    throw UnknownTower(fmt::format("unknown tower '{}'", name));
}

std::vector<Symbol> TowerProgram::symbols() const {
    std::vector<Symbol> out;
    out.reserve(2 * steps.size());
    for (const Step& s : steps) {
        out.push_back(s.thing);
        out.push_back(s.anchor);
    }
    return out;
}

bool TowerProgram::is_primitive() const {
    for (const Step& s : steps)
        if (s.thing.is_chunk()) return false;
    return true;
}

std::string TowerProgram::to_string() const {
    std::string out;
    for (const Step& s : steps) {
        if (!out.empty()) out += ' ';
        out += s.thing.name();
        out += ' ';
        out += s.anchor.name();
    }
    return out;
}

const ChunkTemplate& chunk_template(Chunk c) {
    // Offsets read off the primitive/chunked program pairs of the three towers.
    static const std::array<ChunkTemplate, kNumChunks> templates{{
        {Chunk::C, {{Block::G, 0, 0}, {Block::R, +1, 0}, {Block::G, 0, 0}}},
        {Chunk::L, {{Block::B, 0, 0}, {Block::R, 0, -1}, {Block::R, 0, -1}}},
        {Chunk::TR, {{Block::R, 0, 0}, {Block::G, 0, 0}, {Block::B, 0, 0}}},
        {Chunk::T, {{Block::R, 0, 0}, {Block::G, 0, 0}}},
        {Chunk::PL, {{Block::G, 0, 0}, {Block::B, 0, 0}}},
    }};
    return templates.at(static_cast<std::size_t>(c));
}

TowerProgram expand_program(const TowerProgram& p) {
    TowerProgram out{p.tower, {}};
    for (const Step& s : p.steps) {
        if (!s.thing.is_chunk()) {
            out.steps.push_back(s);
            continue;
        }
        for (const ChunkPart& part : chunk_template(s.thing.as_chunk()).parts) {
            const int r = s.anchor.row() + part.row_offset;
            const int c = s.anchor.col() + part.col_offset;
            if (r < 1 || r > kGridSize || c < 1 || c > kGridSize)
                throw OutOfGrid(fmt::format("{} anchored at {} places a block at P{},{}", s.thing.name(),
                                            s.anchor.name(), r, c));
            out.steps.emplace_back(Symbol::block(part.block), Symbol::position(r, c));
        }
    }
    return out;
}

const std::vector<TowerProgram>& programs_for_tower(TowerId t) {
    using enum Block;
    using enum Chunk;
    static const std::vector<TowerProgram> c_programs{
        {TowerId::C, {{blk(G), pos(2, 1)}, {blk(R), pos(3, 1)}, {blk(G), pos(2, 1)}}},
        {TowerId::C, {{chk(C), pos(2, 1)}}},
    };
    static const std::vector<TowerProgram> l_programs{
        {TowerId::L, {{blk(B), pos(1, 2)}, {blk(R), pos(1, 1)}, {blk(R), pos(1, 1)}}},
        {TowerId::L, {{chk(L), pos(1, 2)}}},
    };
    static const std::vector<TowerProgram> tree_programs{
        {TowerId::TREE, {{blk(R), pos(3, 3)}, {blk(G), pos(3, 3)}, {blk(B), pos(3, 3)}}},
        {TowerId::TREE, {{chk(T), pos(3, 3)}, {blk(B), pos(3, 3)}}},
        {TowerId::TREE, {{blk(R), pos(3, 3)}, {chk(PL), pos(3, 3)}}},
        {TowerId::TREE, {{chk(TR), pos(3, 3)}}},
    };
    switch (t) {
        case TowerId::C: return c_programs;
        case TowerId::L: return l_programs;
        case TowerId::TREE: return tree_programs;
    }
    throw UnknownTower(fmt::format("unknown tower id {}", static_cast<int>(t)));
}

}  // namespace convsim
