#pragma once

// Joint state encoding, absorbing transition matrices, and the noisy probe
// channel for N binary processes.
//
// Wire convention: a joint state is an integer in [0, 2^N). Process k
// (1-based) lives at bit position N-k, so process 1 is the most significant
// bit and [0 1] encodes 1 when N = 2.

#include <acsense/errors.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace acsense {

using Rng = std::mt19937_64;

inline constexpr unsigned kMaxProcesses = 16;

inline void check_process_count(unsigned n_processes) {
  if (n_processes < 1 || n_processes > kMaxProcesses) {
    throw InvalidArgument("number of processes must be in [1, " +
                          std::to_string(kMaxProcesses) + "], got " +
                          std::to_string(n_processes));
  }
}

inline std::size_t state_count(unsigned n_processes) {
  check_process_count(n_processes);
  return std::size_t{1} << n_processes;
}

class StateIndex {
 public:
  StateIndex(std::uint32_t value, unsigned n_processes)
      : value_(value), n_processes_(n_processes) {
    if (value_ >= state_count(n_processes_)) {
      throw InvalidArgument("state index " + std::to_string(value_) +
                            " out of range for N=" +
                            std::to_string(n_processes_));
    }
  }

  std::uint32_t value() const noexcept { return value_; }
  unsigned n_processes() const noexcept { return n_processes_; }

  friend bool operator==(const StateIndex&, const StateIndex&) = default;

 private:
  std::uint32_t value_;
  unsigned n_processes_;
};

// bits[k-1] is the state of process k.
using StateBits = std::vector<std::uint8_t>;

// State of process k (1-based) inside the raw joint state integer.
constexpr bool process_bit(std::uint32_t state, unsigned n_processes,
                           unsigned k) noexcept {
  return ((state >> (n_processes - k)) & 1u) != 0;
}

inline StateBits decode_state(StateIndex index) {
  const unsigned n = index.n_processes();
  StateBits bits(n);
  for (unsigned k = 1; k <= n; ++k) {
    bits[k - 1] = process_bit(index.value(), n, k) ? 1 : 0;
  }
  return bits;
}

inline StateIndex encode_state(std::span<const std::uint8_t> bits,
                               unsigned n_processes) {
  if (bits.size() != n_processes) {
    throw InvalidArgument("state bit vector has length " +
                          std::to_string(bits.size()) + ", expected " +
                          std::to_string(n_processes));
  }
  std::uint32_t value = 0;
  for (auto b : bits) {
    if (b > 1) throw InvalidArgument("state bits must be 0 or 1");
    value = (value << 1) | b;
  }
  return StateIndex(value, n_processes);
}

inline unsigned anomaly_count(StateIndex index) noexcept {
  return static_cast<unsigned>(std::popcount(index.value()));
}

inline unsigned anomaly_count(std::uint32_t state) noexcept {
  return static_cast<unsigned>(std::popcount(state));
}

// ---------------------------------------------------------------------------
// Probe subsets.
//
// Actions are subset bitmasks in [0, 2^N): bit k-1 set means process k is
// probed, 0 is the empty probe (defer). This is a different bit order from
// the joint state encoding above.

using ProbeMask = std::uint32_t;

inline std::vector<unsigned> probes_from_mask(ProbeMask mask,
                                              unsigned n_processes) {
  std::vector<unsigned> probed;
  for (unsigned k = 1; k <= n_processes; ++k) {
    if (mask & (ProbeMask{1} << (k - 1))) probed.push_back(k);
  }
  return probed;
}

inline ProbeMask mask_from_probes(std::span<const unsigned> probed) {
  ProbeMask mask = 0;
  for (unsigned k : probed) mask |= ProbeMask{1} << (k - 1);
  return mask;
}

// ---------------------------------------------------------------------------

// Row-stochastic matrix over joint states, stored sparsely by row. Every
// transition must keep anomalous processes anomalous.
class TransitionMatrix {
 public:
  struct Entry {
    std::uint32_t column;
    double prob;
  };

  // rows[i] lists the non-zero entries of row i. Throws InvalidArgument if
  // any entry is outside [0,1], a row does not sum to 1 within 1e-12, or a
  // transition clears an anomalous bit.
  TransitionMatrix(unsigned n_processes, std::vector<std::vector<Entry>> rows)
      : n_processes_(n_processes) {
    const std::size_t m = state_count(n_processes);
    if (rows.size() != m) {
      throw InvalidArgument("transition matrix needs " + std::to_string(m) +
                            " rows, got " + std::to_string(rows.size()));
    }
    row_begin_.reserve(m + 1);
    row_begin_.push_back(0);
    for (std::size_t i = 0; i < m; ++i) {
      auto& row = rows[i];
      std::sort(row.begin(), row.end(),
                [](const Entry& a, const Entry& b) { return a.column < b.column; });
      double sum = 0.0;
      for (std::size_t e = 0; e < row.size(); ++e) {
        const auto& [j, prob] = row[e];
        if (j >= m) throw InvalidArgument("transition column out of range");
        if (e > 0 && row[e - 1].column == j) {
          throw InvalidArgument("duplicate transition entry in row " +
                                std::to_string(i));
        }
        if (!(prob >= 0.0 && prob <= 1.0)) {
          throw InvalidArgument("transition probability outside [0,1] at (" +
                                std::to_string(i) + "," + std::to_string(j) +
                                ")");
        }
        if (prob > 0.0 && (i & ~static_cast<std::size_t>(j)) != 0) {
          throw InvalidArgument("transition (" + std::to_string(i) + "," +
                                std::to_string(j) +
                                ") returns an anomalous process to normal");
        }
        sum += prob;
        if (prob > 0.0) entries_.push_back(row[e]);
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidArgument("transition row " + std::to_string(i) +
                              " sums to " + std::to_string(sum));
      }
      row_begin_.push_back(entries_.size());
    }
  }

  static TransitionMatrix from_dense(unsigned n_processes,
                                     const std::vector<std::vector<double>>& dense) {
    const std::size_t m = state_count(n_processes);
    if (dense.size() != m) {
      throw InvalidArgument("dense transition matrix has wrong row count");
    }
    std::vector<std::vector<Entry>> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (dense[i].size() != m) {
        throw InvalidArgument("dense transition matrix has wrong column count");
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (dense[i][j] != 0.0) {
          rows[i].push_back({static_cast<std::uint32_t>(j), dense[i][j]});
        }
      }
    }
    return TransitionMatrix(n_processes, std::move(rows));
  }

  static TransitionMatrix identity(unsigned n_processes) {
    const std::size_t m = state_count(n_processes);
    std::vector<std::vector<Entry>> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
      rows[i].push_back({static_cast<std::uint32_t>(i), 1.0});
    }
    return TransitionMatrix(n_processes, std::move(rows));
  }

  unsigned n_processes() const noexcept { return n_processes_; }
  std::size_t size() const noexcept { return row_begin_.size() - 1; }

  std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + row_begin_[i], row_begin_[i + 1] - row_begin_[i]};
  }

  double at(std::size_t i, std::size_t j) const {
    for (const auto& e : row(i)) {
      if (e.column == j) return e.prob;
    }
    return 0.0;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> dense(size(), std::vector<double>(size(), 0.0));
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& e : row(i)) dense[i][e.column] = e.prob;
    }
    return dense;
  }

 private:
  unsigned n_processes_;
  std::vector<std::size_t> row_begin_;
  std::vector<Entry> entries_;
};

// At most one process turns anomalous per step. A non-absorbing state stays
// put with probability 1-q and otherwise moves uniformly to one of the states
// obtained by setting one of its zero bits.
inline TransitionMatrix build_transition_matrix(unsigned n_processes, double q) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw InvalidArgument("change probability q must be in [0,1), got " +
                          std::to_string(q));
  }
  const std::size_t m = state_count(n_processes);
  std::vector<std::vector<TransitionMatrix::Entry>> rows(m);
  const auto all_ones = static_cast<std::uint32_t>(m - 1);
  for (std::uint32_t i = 0; i < m; ++i) {
    if (i == all_ones) {
      rows[i].push_back({i, 1.0});
      continue;
    }
    rows[i].push_back({i, 1.0 - q});
    const unsigned zeros = n_processes - anomaly_count(i);
    const double move = q / static_cast<double>(zeros);
    for (unsigned bit = 0; bit < n_processes; ++bit) {
      const std::uint32_t flag = std::uint32_t{1} << bit;
      if ((i & flag) == 0 && q > 0.0) rows[i].push_back({i | flag, move});
    }
  }
  return TransitionMatrix(n_processes, std::move(rows));
}

inline StateIndex step_state(StateIndex current, const TransitionMatrix& P,
                             Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  const auto row = P.row(current.value());
  double cumulative = 0.0;
  for (const auto& e : row) {
    cumulative += e.prob;
    if (u < cumulative) return StateIndex(e.column, P.n_processes());
  }
  // Rounding left u above the accumulated mass.
  return StateIndex(row.back().column, P.n_processes());
}

// ---------------------------------------------------------------------------

class ChannelParams {
 public:
  explicit ChannelParams(double flip_prob) : flip_prob_(flip_prob) {
    if (!(flip_prob >= 0.0 && flip_prob < 0.5)) {
      throw InvalidArgument("flip probability p must be in [0, 0.5), got " +
                            std::to_string(flip_prob));
    }
  }
  double flip_prob() const noexcept { return flip_prob_; }

 private:
  double flip_prob_;
};

struct Observation {
  std::vector<unsigned> probed;    // ascending, 1-based process indices
  std::vector<std::uint8_t> bits;  // bits[i] is the reading of probed[i]
  std::size_t time = 0;

  void validate(unsigned n_processes) const {
    if (bits.size() != probed.size()) {
      throw InvalidArgument("observation bit count does not match probe count");
    }
    for (std::size_t i = 0; i < probed.size(); ++i) {
      if (probed[i] < 1 || probed[i] > n_processes) {
        throw InvalidArgument("probed process index out of range");
      }
      if (i > 0 && probed[i] <= probed[i - 1]) {
        throw InvalidArgument("probed indices must be unique and ascending");
      }
      if (bits[i] > 1) throw InvalidArgument("observation bits must be 0 or 1");
    }
  }
};

inline Observation observe(StateIndex state, std::span<const unsigned> probed,
                           const ChannelParams& channel, Rng& rng,
                           std::size_t time = 0) {
  Observation obs;
  obs.time = time;
  obs.probed.assign(probed.begin(), probed.end());
  std::sort(obs.probed.begin(), obs.probed.end());
  obs.bits.reserve(obs.probed.size());
  std::bernoulli_distribution flip(channel.flip_prob());
  for (unsigned k : obs.probed) {
    const bool truth = process_bit(state.value(), state.n_processes(), k);
    obs.bits.push_back((truth != flip(rng)) ? 1 : 0);
  }
  obs.validate(state.n_processes());
  return obs;
}

}  // namespace acsense
