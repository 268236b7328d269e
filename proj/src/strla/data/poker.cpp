#include "strla/data/poker.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace strla::data {

namespace {

Hand draw_hand(std::mt19937_64& rng) {
  std::array<int, 52> deck{};
  for (int i = 0; i < 52; ++i) deck[static_cast<std::size_t>(i)] = i;
  Hand h;
  for (std::size_t k = 0; k < 5; ++k) {
    std::size_t j = k + static_cast<std::size_t>(rng() % (52 - k));
    std::swap(deck[k], deck[j]);
    h[k] = {deck[k] / 13 + 1, deck[k] % 13 + 1};
  }
  return h;
}

std::vector<std::string> header() {
  return {"S1", "C1", "S2", "C2", "S3", "C3", "S4", "C4", "S5", "C5", "CLASS"};
}

std::vector<std::string> row_of(const Hand& h) {
  std::vector<std::string> row;
  for (const Card& c : h) {
    row.push_back(std::to_string(c.suit));
    row.push_back(std::to_string(c.rank));
  }
  row.push_back(std::to_string(classify_hand(h)));
  return row;
}

}  // namespace

int classify_hand(const Hand& hand) {
  std::array<int, 14> count{};
  bool flush = true;
  for (const Card& c : hand) {
    ++count[static_cast<std::size_t>(c.rank)];
    if (c.suit != hand[0].suit) flush = false;
  }
  std::vector<int> groups;
  for (int r = 1; r <= 13; ++r)
    if (count[static_cast<std::size_t>(r)] > 0) groups.push_back(count[static_cast<std::size_t>(r)]);
  std::sort(groups.rbegin(), groups.rend());

  bool straight = false, ace_high = false;
  if (groups.size() == 5) {
    int lo = 14, hi = 0;
    for (const Card& c : hand) {
      lo = std::min(lo, c.rank);
      hi = std::max(hi, c.rank);
    }
    if (hi - lo == 4) straight = true;
    if (count[1] && count[10] && count[11] && count[12] && count[13]) straight = ace_high = true;
  }
  if (straight && flush) return ace_high ? 9 : 8;
  if (groups[0] == 4) return 7;
  if (groups[0] == 3 && groups[1] == 2) return 6;
  if (flush) return 5;
  if (straight) return 4;
  if (groups[0] == 3) return 3;
  if (groups[0] == 2 && groups[1] == 2) return 2;
  if (groups[0] == 2) return 1;
  return 0;
}

Table generate_poker_train(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<std::size_t, 10> need = kPokerTrainCounts;
  std::size_t remaining = 0;
  for (auto n : need) remaining += n;
  Table t;
  t.header = header();
  while (remaining > 0) {
    Hand h = draw_hand(rng);
    auto cls = static_cast<std::size_t>(classify_hand(h));
    if (need[cls] == 0) continue;
    --need[cls];
    --remaining;
    t.rows.push_back(row_of(h));
  }
  for (std::size_t i = t.rows.size(); i > 1; --i)
    std::swap(t.rows[i - 1], t.rows[static_cast<std::size_t>(rng() % i)]);
  return t;
}

Table generate_poker_test(std::size_t test_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Table t;
  t.header = header();
  t.rows.reserve(test_size);
  for (std::size_t i = 0; i < test_size; ++i) t.rows.push_back(row_of(draw_hand(rng)));
  return t;
}

std::string table_to_csv(const Table& table) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n") != std::string::npos) {
        out += '"';
        for (char ch : c) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        out += c;
      }
    }
    out += '\n';
    return out;
  };
  std::string out = line(table.header);
  for (const auto& r : table.rows) out += line(r);
  return out;
}

}  // namespace strla::data
