// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace dggen {

// Deterministic xoshiro256++ generator.  The full state is four 64-bit
// words, so it serializes into checkpoints and restores bit-exactly.
// Every consumer owns a named stream derived from one root seed; streams
// never share state, so adding draws to one phase (say, weight init)
// cannot shift the values another phase sees.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream from (seed, name).  Same inputs, same
  // stream, on every platform.
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on {0, 1, ..., n - 1}; n must be positive.  Uses rejection
  // sampling, so the distribution is exact.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller.  Draws two uniforms per call and
  // keeps no cached spare: the state consumed per call is fixed, which
  // keeps replay alignment trivial.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Exponential with the given rate (mean 1 / rate); rate must be positive.
  double exponential(double rate);

  std::array<std::uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

 private:
  std::array<std::uint64_t, 4> state_;
};

// SplitMix64 step; used to fan a seed out into stream states and exposed
// for tests that pin stream derivation.
std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace dggen
