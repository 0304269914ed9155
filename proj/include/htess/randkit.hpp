#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htess {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
/// Pure function of (counter, key); used as the keyed counter-based core of every stream.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/**
 * A labeled random stream.
 *
 * The (root_seed, label) pair is hashed into a Philox key and nonce; draw
 * number `counter` is lane `counter % 2` of block `counter / 2`. Two handles
 * with equal (root_seed, label) replay identical sequences, and distinct
 * labels give distinct keys. A handle is single-consumer: copy it or derive a
 * new label for each unit of parallel work, never share one across threads.
 */
class StreamHandle {
public:
    StreamHandle(std::uint64_t root_seed, std::string label);

    std::uint64_t root_seed() const noexcept { return root_seed_; }
    const std::string& label() const noexcept { return label_; }
    /// Number of 64-bit words consumed so far.
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_low();
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double gaussian();

    /// Sub-stream with label `label() + "/" + suffix` under the same root seed.
    StreamHandle child(std::string_view suffix) const;

private:
    std::uint64_t root_seed_;
    std::string label_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t nonce_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<std::uint64_t, 2> block_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

StreamHandle derive_stream(std::uint64_t root_seed, std::string_view label);

/// m x n matrix stored row-major; row i is the normal vector of hyperplane i.
struct GaussianMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;

    std::span<const double> row(std::size_t i) const { return {entries.data() + i * cols, cols}; }
    double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

/// Dither offsets, each in [-lambda, lambda].
struct DitherVector {
    double lambda = 0.0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
};

GaussianMatrix sample_gaussian_matrix(StreamHandle& stream, std::size_t m, std::size_t n);
DitherVector sample_dither(StreamHandle& stream, std::size_t m, double lambda);
std::vector<double> sample_sphere(StreamHandle& stream, std::size_t n);
/// Uniform point in the unit ball of R^n (uniform direction, radius U^{1/n}).
std::vector<double> sample_ball(StreamHandle& stream, std::size_t n);

}  // namespace htess
