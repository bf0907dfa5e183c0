#pragma once

// Sources of randomness for the samplers and couplings. Every randomized routine
// is a template over a Source with
//   bool bernoulli(double p)
//   int  sign(double p_plus)            // +1 with probability p_plus, else -1
//   int  choose(std::span<const double>) // index drawn from a probability vector
// RandomSource draws from a seeded 64-bit Mersenne twister; ScriptedSource
// replays choice paths so that for_each_outcome can enumerate every outcome of
// a randomized routine together with its exact probability.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace atrc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of the named substream of a master seed.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ fnv1a(name)) + index);
}

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : gen_(seed) {}
  RandomSource(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
      : gen_(substream_seed(master, name, index)) {}

  // Uniform on [0, 1) with 53 random bits; identical across standard libraries.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }
  int sign(double p_plus) { return uniform() < p_plus ? 1 : -1; }

  int choose(std::span<const double> probs) {
    double u = uniform();
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      if (u < probs[i]) return static_cast<int>(i);
      u -= probs[i];
    }
    return static_cast<int>(probs.size()) - 1;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

class ScriptedSource {
 public:
  bool bernoulli(double p) {
    const double ps[2] = {1.0 - p, p};
    return choose(ps) == 1;
  }
  int sign(double p_plus) {
    const double ps[2] = {p_plus, 1.0 - p_plus};
    return choose(ps) == 0 ? 1 : -1;
  }

  int choose(std::span<const double> probs) {
    if (pos_ < path_.size()) {
      auto& step = path_[pos_++];
      if (step.probs.size() != probs.size()) throw std::logic_error("ScriptedSource: replay diverged");
      weight_ *= probs[static_cast<std::size_t>(step.index)];
      return step.index;
    }
    const int first = next_positive(probs, -1);
    if (first < 0) throw std::invalid_argument("ScriptedSource: no option with positive probability");
    path_.push_back({first, std::vector<double>(probs.begin(), probs.end())});
    ++pos_;
    weight_ *= probs[static_cast<std::size_t>(first)];
    return first;
  }

  double weight() const { return weight_; }
  std::size_t depth() const { return path_.size(); }

  void restart() {
    pos_ = 0;
    weight_ = 1.0;
  }

  // Moves to the next choice path in depth-first order; false when exhausted.
  bool advance() {
    while (!path_.empty()) {
      auto& step = path_.back();
      const int j = next_positive(step.probs, step.index);
      if (j >= 0) {
        step.index = j;
        restart();
        return true;
      }
      path_.pop_back();
    }
    return false;
  }

 private:
  struct Step {
    int index;
    std::vector<double> probs;
  };

  static int next_positive(std::span<const double> probs, int after) {
    for (std::size_t i = static_cast<std::size_t>(after + 1); i < probs.size(); ++i)
      if (probs[i] > 0.0) return static_cast<int>(i);
    return -1;
  }

  std::vector<Step> path_;
  std::size_t pos_ = 0;
  double weight_ = 1.0;
};

// Calls sink(result, probability) for every outcome of run(ScriptedSource&).
// Zero-probability branches are skipped. Returns the number of outcomes.
template <class Run, class Sink>
std::size_t for_each_outcome(Run&& run, Sink&& sink, std::size_t max_outcomes = std::size_t{1} << 26) {
  ScriptedSource src;
  std::size_t n = 0;
  do {
    src.restart();
    auto result = run(src);
    sink(result, src.weight());
    if (++n > max_outcomes) throw std::length_error("for_each_outcome: too many outcomes");
  } while (src.advance());
  return n;
}

}  // namespace atrc
