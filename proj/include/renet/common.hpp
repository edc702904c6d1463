#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace renet {

// Machine-parsable error codes, surfaced by the CLI as "error[CODE] message".
enum class ErrorCode {
    usage,
    io,
    parse,
    config,
    shape,
    numeric,
    domain,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(ErrorCode::shape, msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(ErrorCode::parse, msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorCode::config, msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(ErrorCode::numeric, msg) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(ErrorCode::domain, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorCode::io, msg) {}
};

// Seeded RNG with platform-independent derived draws. std::mt19937_64 is
// bit-exact everywhere; the distribution helpers below avoid libstdc++/libc++
// differences in <random> distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // xorshift* generator; small state, bit-exact across platforms.
        std::uint64_t x = s_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        s_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // Uniform in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw DomainError("Rng::below: n must be positive");
        std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t s_;
};

std::string format_shape(const std::vector<int>& shape);

}  // namespace renet
