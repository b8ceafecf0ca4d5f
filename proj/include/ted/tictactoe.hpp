#ifndef TED_TICTACTOE_HPP
#define TED_TICTACTOE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ted/dataset.hpp"

namespace ted::ttt {

enum class Cell : std::uint8_t { Empty = 0, X = 1, O = 2 };
enum class Player : std::uint8_t { X = 1, O = 2 };

// Move-selection rules fire in this priority order; the enum value is
// also the explanation class index.
enum class Reason : std::uint8_t { Win = 0, Block = 1, Threat = 2, Empty = 3 };

constexpr int kReasonCount = 4;
std::string to_string(Reason r);

/// 3x3 position in row-major order. side_to_move is implied by the
/// mark counts (X moves first) and kept explicit for clarity.
struct Board {
  std::array<Cell, 9> cells{};
  Player side_to_move = Player::X;

  bool operator==(const Board&) const = default;

  static Board empty() { return Board{}; }

  int count(Cell c) const;
  bool has_three_in_row(Player p) const;
  bool is_full() const;
  bool is_terminal() const { return is_full() || has_three_in_row(Player::X) || has_three_in_row(Player::O); }

  /// Copy with the given mark placed and the turn flipped.
  Board play(int cell) const;

  /// Mark-count, winner, and reachability checks.
  void validate() const;

  /// Cells array packed base-3, used for dedup and canonical ordering.
  std::uint32_t key() const;
};

struct LabeledPosition {
  Board board;
  int move = 0;
  Reason reason = Reason::Empty;
};

/// 19 binary inputs: X plane, O plane, side-to-move bit (1 = X).
struct EncodedPosition {
  std::array<double, 19> features{};
  Index label9 = 0;
  Index label36 = 0;
};

/// All distinct boards reachable from the empty board under
/// alternating play, in canonical order (lexicographic on cells,
/// X-to-move before O-to-move). `include_terminal` is a diagnostic
/// mode; the default filters finished games.
std::vector<Board> enumerate_legal_nonterminal(bool include_terminal = false);

/// The rule cascade: Win, then Block, then Threat, then any empty
/// square. Ties within every rule break by positional preference:
/// center, then corners, then edge middles, ascending.
LabeledPosition label_position(const Board& board);

EncodedPosition encode_position(const Board& board);

enum class DatasetMode { MoveOnly, MoveAndExplanation };

/// The 4,520-row triple dataset: 19 binary feature columns, move label
/// in categorical(9), reason explanation in categorical(4). Both modes
/// carry the same columns; the mode records which targets downstream
/// training should consume.
TripleDataset build_ttt_dataset(DatasetMode mode = DatasetMode::MoveAndExplanation);

}  // namespace ted::ttt

#endif  // TED_TICTACTOE_HPP
