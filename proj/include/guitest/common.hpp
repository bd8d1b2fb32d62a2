#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace guitest {

// Error taxonomy shared across the library. Everything user-facing derives
// from GuitestError so the CLI can map failures to exit codes.
struct GuitestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid models, defect specs, bundles, schema versions.
struct ValidationError : GuitestError {
    using GuitestError::GuitestError;
};

// Bad arguments to an operation (out-of-range point, empty input, misuse).
struct InputError : GuitestError {
    using GuitestError::GuitestError;
};

// Environment used before reset, flag-state corruption.
struct LifecycleError : GuitestError {
    using GuitestError::GuitestError;
};

// Backend failure that aborts a run.
struct OrchestrationError : GuitestError {
    using GuitestError::GuitestError;
};

// Malformed wire payload from a remote agent.
struct ProtocolError : GuitestError {
    using GuitestError::GuitestError;
};

// FNV-1a 64-bit. Used for state digests, seed derivation, and content hashes;
// stable across platforms, which the determinism contract depends on.
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a_mix(std::uint64_t value, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (i * 8)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

// run seed = hash(global seed, task id, run index); all randomness flows from
// the root seed through this derivation.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a_mix(root, kFnvOffset);
    h = fnv1a(tag, h);
    return fnv1a_mix(index, h);
}

// splitmix64: small, seedable, identical everywhere. std::uniform_* is
// implementation-defined, so ranged draws are hand-rolled on top of this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        return bound == 0 ? 0 : next() % bound;
    }

    // uniform in [0, 1)
    double fraction() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

}  // namespace guitest
