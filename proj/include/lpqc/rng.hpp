// Copyright 2026 The LPQC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace lpqc {

/**
 * Reproducible random stream.
 *
 * Raw bits come from std::mt19937_64, whose output sequence is fixed by the
 * C++ standard. The engine seed is SplitMix64(seed, stream), so independent
 * streams can be derived from one experiment seed. Uniform and normal
 * variates are produced here rather than through <random> distributions,
 * which are implementation-defined; this keeps sample streams identical
 * across standard libraries.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller (consumes two uniforms per call).
    double normal();
    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    template <typename T> void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    /// Derive a child stream; does not advance this generator.
    [[nodiscard]] Rng split(std::uint64_t stream) const {
        return Rng(seed_, mix_stream(stream_, stream));
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream() const { return stream_; }

  private:
    static std::uint64_t mix_stream(std::uint64_t parent, std::uint64_t child);

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace lpqc
