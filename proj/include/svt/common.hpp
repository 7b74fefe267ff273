#pragma once

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <string>
#include <vector>

namespace svt {

// Seedable counter-based PRNG (splitmix64). Every stochastic piece of the
// project draws from this generator so that datasets, demonstrations and
// training schedules are reproducible from a single integer seed, and so
// that reimplementations in other languages can regenerate identical data.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // inclusive bounds
    int uniform_int(int lo, int hi);

    // Box-Muller, one variate per call (the spare is discarded to keep the
    // draw count per call fixed)
    double normal(double mean = 0.0, double stddev = 1.0);

private:
    uint64_t state_;
};

// Mixes a seed with a stream tag so sub-generators are decorrelated.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// FNV-1a 64-bit, used for config digests, dataset digests and checkpoint
// digests. Not cryptographic; collision resistance is irrelevant here.
class Fnv1a {
public:
    void update(const void* data, size_t n);
    void update(const std::string& s) { update(s.data(), s.size()); }
    uint64_t value() const { return h_; }
    std::string hex() const;

private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

uint64_t fnv1a(const std::string& s);
std::string fnv1a_hex(const std::string& s);

// Shortest round-trip decimal formatting (std::to_chars). Guarantees
// parse(format(x)) == x bit-exactly and is locale independent, which the
// text file formats rely on.
std::string format_double(double x);
double parse_double(const std::string& s);  // throws on garbage

// Little-endian binary primitives for the .bin/.ckpt formats.
void write_u16(std::ostream&, uint16_t);
void write_u32(std::ostream&, uint32_t);
void write_u64(std::ostream&, uint64_t);
void write_f64(std::ostream&, double);
uint16_t read_u16(std::istream&);
uint32_t read_u32(std::istream&);
uint64_t read_u64(std::istream&);
double read_f64(std::istream&);

std::vector<std::string> split(const std::string& s, char sep);
std::string read_text_file(const std::string& path);   // throws if missing
void write_text_file(const std::string& path, const std::string& content);

}  // namespace svt
