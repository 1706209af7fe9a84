#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "semval/errors.hpp"

namespace semval {

// Subset of players {0, ..., n-1}. Width is fixed at construction; all set
// operations stay within that width. Exact enumeration callers use the n <= 64
// mask fast path; Monte Carlo callers go through the general bit-array form.
class Coalition {
 public:
  Coalition() : n_(0) {}

  explicit Coalition(int num_players) : n_(num_players) {
    if (num_players < 0) throw InvalidArgument("coalition: negative player count");
    words_.assign(word_count(num_players), 0);
  }

  static Coalition from_mask(std::uint64_t mask, int num_players) {
    if (num_players > 64) throw InvalidArgument("coalition: mask form limited to 64 players");
    if (num_players < 64 && (mask >> num_players) != 0) {
      throw InvalidArgument("coalition: mask has bits beyond player count");
    }
    Coalition c(num_players);
    if (!c.words_.empty()) c.words_[0] = mask;
    return c;
  }

  int num_players() const { return n_; }

  bool contains(int i) const {
    check_index(i);
    return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
  }

  void add(int i) {
    check_index(i);
    words_[static_cast<std::size_t>(i) >> 6] |= (std::uint64_t{1} << (i & 63));
  }

  void remove(int i) {
    check_index(i);
    words_[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  Coalition with(int i) const {
    Coalition c = *this;
    c.add(i);
    return c;
  }

  Coalition without(int i) const {
    Coalition c = *this;
    c.remove(i);
    return c;
  }

  Coalition complement() const {
    Coalition c(n_);
    for (std::size_t w = 0; w < words_.size(); ++w) c.words_[w] = ~words_[w];
    c.trim();
    return c;
  }

  int size() const {
    int s = 0;
    for (std::uint64_t w : words_) s += std::popcount(w);
    return s;
  }

  bool empty() const {
    for (std::uint64_t w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  bool full() const { return size() == n_; }

  std::uint64_t mask() const {
    if (n_ > 64) throw InvalidArgument("coalition: mask form limited to 64 players");
    return words_.empty() ? 0 : words_[0];
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        out.push_back(static_cast<int>(w * 64) + b);
        bits &= bits - 1;
      }
    }
    return out;
  }

  bool operator==(const Coalition& o) const { return n_ == o.n_ && words_ == o.words_; }
  bool operator!=(const Coalition& o) const { return !(*this == o); }

 private:
  static std::size_t word_count(int n) { return (static_cast<std::size_t>(n) + 63) / 64; }

  void check_index(int i) const {
    if (i < 0 || i >= n_) throw InvalidArgument("coalition: player index out of range");
  }

  // Clears bits above n_ so complement() stays within the player set.
  void trim() {
    if (words_.empty()) return;
    const int rem = n_ & 63;
    if (rem != 0) words_.back() &= (std::uint64_t{1} << rem) - 1;
  }

  int n_;
  std::vector<std::uint64_t> words_;
};

}  // namespace semval
