#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "htess/randkit.hpp"

namespace htess {

/// Bit-packed sign pattern sign(Ax + tau). Bit j lives at byte j/8, position j%8
/// (LSB first); a set bit means +1. Padding bits past m are always zero.
class SketchCode {
public:
    SketchCode() = default;
    explicit SketchCode(std::size_t m);
    SketchCode(std::size_t m, std::vector<std::uint8_t> bytes);

    std::size_t bits() const noexcept { return m_; }
    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

    bool test(std::size_t j) const { return (bytes_[j >> 3] >> (j & 7)) & 1u; }
    void set(std::size_t j, bool value);

    friend bool operator==(const SketchCode&, const SketchCode&) = default;

private:
    std::size_t m_ = 0;
    std::vector<std::uint8_t> bytes_;
};

struct DistanceEstimate {
    std::size_t hamming = 0;
    double estimate = 0.0;
};

/// Scale factor sqrt(2*pi) * lambda / m mapping Hamming counts to Euclidean distance.
double distance_scale(double lambda, std::size_t m);

/// f(x) = sign(Ax + tau) with sign(0) := +1.
SketchCode encode(const GaussianMatrix& a, const DitherVector& tau, std::span<const double> x);
/// Same sign rule applied to precomputed projections y = Ax.
SketchCode encode_projected(std::span<const double> ax, const DitherVector& tau);

std::size_t hamming(const SketchCode& c1, const SketchCode& c2);
DistanceEstimate estimate_distance(const SketchCode& c1, const SketchCode& c2, double lambda, std::size_t m);

/// Polarization: (d(x,-y)^2 - d(x,y)^2) / 4 from the codes of x, y and -y.
double estimate_inner_product(const SketchCode& c_x, const SketchCode& c_y, const SketchCode& c_neg_y, double lambda,
                              std::size_t m);

struct SketchSetHeader {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    double lambda = 0.0;
    std::uint64_t root_seed = 0;

    friend bool operator==(const SketchSetHeader&, const SketchSetHeader&) = default;
};

struct SketchSet {
    SketchSetHeader header;
    std::vector<SketchCode> codes;

    friend bool operator==(const SketchSet&, const SketchSet&) = default;
};

/// Raised by read_sketch_set; offset is the byte position where decoding failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// File layout: "HTSK", version 0x01, then little-endian n:u32, m:u32, lambda:f64,
// root_seed:u64, count:u32, followed by count * ceil(m/8) code bytes.
inline constexpr std::uint8_t kSketchFormatVersion = 0x01;
inline constexpr std::size_t kSketchHeaderSize = 4 + 1 + 4 + 4 + 8 + 8 + 4;

std::vector<std::uint8_t> serialize_sketch_set(const SketchSet& set);
SketchSet deserialize_sketch_set(std::span<const std::uint8_t> data);
void write_sketch_set(const SketchSet& set, std::ostream& sink);
SketchSet read_sketch_set(std::istream& source);

}  // namespace htess
