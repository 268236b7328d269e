#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "strla/data/table.hpp"

namespace strla::data {

// A card in the encoding of the public poker-hand tables: suit 1..4
// (Hearts, Spades, Diamonds, Clubs), rank 1..13 (Ace, 2..10, Jack, Queen,
// King).
struct Card {
  int suit = 1;
  int rank = 1;
};

using Hand = std::array<Card, 5>;

// Poker hand class 0..9: nothing, one pair, two pairs, three of a kind,
// straight, flush, full house, four of a kind, straight flush, royal flush.
// Straights may be ace-low or ace-high; a straight flush from ten to ace is a
// royal flush.
int classify_hand(const Hand& hand);

// Class counts of the public 25010-hand training table.
inline constexpr std::array<std::size_t, 10> kPokerTrainCounts{12493, 10599, 1206, 513, 93, 54, 36, 6, 5, 5};

// Training table: uniformly random hands accepted until every class reaches
// its count in kPokerTrainCounts, then shuffled. Test table: `test_size`
// uniformly random hands. Columns S1,C1,...,S5,C5,CLASS.
Table generate_poker_train(std::uint64_t seed);
Table generate_poker_test(std::size_t test_size, std::uint64_t seed);

std::string table_to_csv(const Table& table);

}  // namespace strla::data
