#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "semval/coalition.hpp"
#include "semval/errors.hpp"

namespace semval {

// Set function v: 2^[n] -> R with an evaluation counter. Immutable once
// constructed apart from the counter; value() must be pure (same coalition,
// same result) whenever deterministic() is true. Copies share the counter.
class CooperativeGame {
 public:
  CooperativeGame() = default;

  CooperativeGame(int num_players, bool deterministic, std::string fingerprint,
                  std::function<double(const Coalition&)> value_fn)
      : n_(num_players),
        deterministic_(deterministic),
        fingerprint_(std::move(fingerprint)),
        value_fn_(std::move(value_fn)),
        evals_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
    if (num_players <= 0) throw InvalidArgument("game: player count must be positive");
    if (!value_fn_) throw InvalidArgument("game: missing value function");
  }

  int num_players() const { return n_; }
  bool deterministic() const { return deterministic_; }

  // Stable identifier of the game's defining data; recorded in label file
  // headers so labels cannot be silently reused against a different game.
  const std::string& fingerprint() const { return fingerprint_; }

  double value(const Coalition& s) const {
    if (s.num_players() != n_) throw InvalidArgument("game: coalition width mismatch");
    evals_->fetch_add(1, std::memory_order_relaxed);
    const double v = value_fn_(s);
    if (!std::isfinite(v)) {
      throw NumericalError("game '" + fingerprint_ + "': non-finite value");
    }
    return v;
  }

  std::uint64_t evals() const { return evals_->load(std::memory_order_relaxed); }
  void reset_evals() const { evals_->store(0, std::memory_order_relaxed); }

 private:
  int n_ = 0;
  bool deterministic_ = true;
  std::string fingerprint_;
  std::function<double(const Coalition&)> value_fn_;
  std::shared_ptr<std::atomic<std::uint64_t>> evals_;
};

}  // namespace semval
