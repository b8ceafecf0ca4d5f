#include "ted/tictactoe.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace ted::ttt {

namespace {

constexpr std::array<std::array<int, 3>, 8> kLines = {{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},  // rows
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},  // columns
    {0, 4, 8}, {2, 4, 6},             // diagonals
}};

constexpr Cell mark_of(Player p) { return p == Player::X ? Cell::X : Cell::O; }
constexpr Player opponent(Player p) { return p == Player::X ? Player::O : Player::X; }

// Rule 4 preference: center, then corners, then edge middles.
constexpr std::array<int, 9> kPositionalOrder = {4, 0, 2, 6, 8, 1, 3, 5, 7};

bool completes_line(const Board& b, int cell, Player p) {
  const Cell m = mark_of(p);
  for (const auto& line : kLines) {
    bool on_line = false;
    int own = 0;
    for (int c : line) {
      if (c == cell)
        on_line = true;
      else if (b.cells[static_cast<std::size_t>(c)] == m)
        ++own;
    }
    if (on_line && own == 2) return true;
  }
  return false;
}

// A threat is a line through `cell` holding the new mark, one existing
// own mark, and one empty square.
bool creates_threat(const Board& b, int cell, Player p) {
  const Cell m = mark_of(p);
  for (const auto& line : kLines) {
    bool on_line = false;
    int own = 0, empty = 0;
    for (int c : line) {
      if (c == cell) {
        on_line = true;
      } else {
        const Cell v = b.cells[static_cast<std::size_t>(c)];
        if (v == m)
          ++own;
        else if (v == Cell::Empty)
          ++empty;
      }
    }
    if (on_line && own == 1 && empty == 1) return true;
  }
  return false;
}

}  // namespace

std::string to_string(Reason r) {
  switch (r) {
    case Reason::Win: return "Win";
    case Reason::Block: return "Block";
    case Reason::Threat: return "Threat";
    case Reason::Empty: return "Empty";
  }
  return "?";
}

int Board::count(Cell c) const {
  return static_cast<int>(std::count(cells.begin(), cells.end(), c));
}

bool Board::has_three_in_row(Player p) const {
  const Cell m = mark_of(p);
  for (const auto& line : kLines)
    if (cells[static_cast<std::size_t>(line[0])] == m && cells[static_cast<std::size_t>(line[1])] == m &&
        cells[static_cast<std::size_t>(line[2])] == m)
      return true;
  return false;
}

bool Board::is_full() const { return count(Cell::Empty) == 0; }

Board Board::play(int cell) const {
  if (cell < 0 || cell > 8 || cells[static_cast<std::size_t>(cell)] != Cell::Empty)
    throw std::invalid_argument("play: cell is not an empty square");
  Board next = *this;
  next.cells[static_cast<std::size_t>(cell)] = mark_of(side_to_move);
  next.side_to_move = opponent(side_to_move);
  return next;
}

void Board::validate() const {
  const int nx = count(Cell::X);
  const int no = count(Cell::O);
  if (nx - no != 0 && nx - no != 1) throw std::invalid_argument("board: mark counts unreachable under alternating play");
  const Player expected = (nx == no) ? Player::X : Player::O;
  if (side_to_move != expected) throw std::invalid_argument("board: side to move inconsistent with mark counts");
  if (has_three_in_row(Player::X) || has_three_in_row(Player::O))
    throw std::invalid_argument("board: position is terminal (completed line)");
  if (is_full()) throw std::invalid_argument("board: position is terminal (no empty square)");
}

std::uint32_t Board::key() const {
  std::uint32_t k = 0;
  for (Cell c : cells) k = k * 3 + static_cast<std::uint32_t>(c);
  return k;
}

std::vector<Board> enumerate_legal_nonterminal(bool include_terminal) {
  // Breadth-first traversal of the game tree with dedup on the cell
  // array (side to move is implied by mark counts).
  std::vector<Board> frontier{Board::empty()};
  std::unordered_set<std::uint32_t> seen{frontier.front().key()};
  std::vector<Board> reached{frontier.front()};

  while (!frontier.empty()) {
    std::vector<Board> next;
    for (const Board& b : frontier) {
      if (b.is_terminal()) continue;
      for (int cell = 0; cell < 9; ++cell) {
        if (b.cells[static_cast<std::size_t>(cell)] != Cell::Empty) continue;
        const Board child = b.play(cell);
        if (seen.insert(child.key()).second) {
          reached.push_back(child);
          next.push_back(child);
        }
      }
    }
    frontier = std::move(next);
  }

  std::vector<Board> result;
  result.reserve(reached.size());
  for (const Board& b : reached)
    if (include_terminal || !b.is_terminal()) result.push_back(b);

  std::sort(result.begin(), result.end(), [](const Board& a, const Board& b) {
    if (a.cells != b.cells) return a.cells < b.cells;
    return a.side_to_move < b.side_to_move;
  });
  return result;
}

LabeledPosition label_position(const Board& board) {
  board.validate();
  const Player mover = board.side_to_move;

  // Ties within every rule break by the positional preference order;
  // a spatially consistent tie-break generalizes measurably better
  // than scanning cells in row-major order.
  auto first_empty_matching = [&board](auto&& predicate) {
    for (int cell : kPositionalOrder)
      if (board.cells[static_cast<std::size_t>(cell)] == Cell::Empty && predicate(cell)) return cell;
    return -1;
  };

  if (int c = first_empty_matching([&](int cell) { return completes_line(board, cell, mover); }); c >= 0)
    return {board, c, Reason::Win};
  if (int c = first_empty_matching([&](int cell) { return completes_line(board, cell, opponent(mover)); }); c >= 0)
    return {board, c, Reason::Block};
  if (int c = first_empty_matching([&](int cell) { return creates_threat(board, cell, mover); }); c >= 0)
    return {board, c, Reason::Threat};
  if (int c = first_empty_matching([](int) { return true; }); c >= 0) return {board, c, Reason::Empty};
  throw std::logic_error("label_position: no empty square on a non-terminal board");
}

EncodedPosition encode_position(const Board& board) {
  const LabeledPosition labeled = label_position(board);
  EncodedPosition enc;
  for (int i = 0; i < 9; ++i) {
    enc.features[static_cast<std::size_t>(i)] = board.cells[static_cast<std::size_t>(i)] == Cell::X ? 1.0 : 0.0;
    enc.features[static_cast<std::size_t>(9 + i)] = board.cells[static_cast<std::size_t>(i)] == Cell::O ? 1.0 : 0.0;
  }
  enc.features[18] = board.side_to_move == Player::X ? 1.0 : 0.0;
  enc.label9 = labeled.move;
  enc.label36 = cartesian_encode(labeled.move, static_cast<Index>(labeled.reason), 9, kReasonCount);
  return enc;
}

TripleDataset build_ttt_dataset(DatasetMode) {
  const std::vector<Board> boards = enumerate_legal_nonterminal();
  const auto n = static_cast<Index>(boards.size());

  TripleDataset ds;
  ds.features.resize(n, 19);
  ds.labels.resize(n, 1);
  ds.explanations.resize(n, 1);
  ds.ids.reserve(boards.size());
  for (Index i = 0; i < n; ++i) {
    const EncodedPosition enc = encode_position(boards[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < 19; ++j) ds.features(i, j) = enc.features[static_cast<std::size_t>(j)];
    ds.labels(i, 0) = static_cast<double>(enc.label9);
    ds.explanations(i, 0) = static_cast<double>(enc.label36 % kReasonCount);
    ds.ids.push_back(std::to_string(boards[static_cast<std::size_t>(i)].key()));
  }

  std::vector<std::string> feature_names;
  feature_names.reserve(19);
  for (int j = 0; j < 19; ++j) feature_names.push_back("f" + std::to_string(j));
  ds.feature_space = SpaceDescriptor::continuous_vector(19, std::move(feature_names));
  ds.label_space = SpaceDescriptor::categorical(9, "move");
  ds.explanation_space = SpaceDescriptor::categorical(kReasonCount, "reason");
  ds.validate();
  return ds;
}

}  // namespace ted::ttt
