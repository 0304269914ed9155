#include "htess/randkit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace htess {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// FNV-1a over the label, then finalized together with the seed.
std::pair<std::uint64_t, std::uint64_t> hash_seed_label(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    h ^= label.size();
    const std::uint64_t a = splitmix64(seed ^ splitmix64(h));
    const std::uint64_t b = splitmix64(a ^ splitmix64(h + 0x632BE59BD9B4E019ull));
    return {a, b};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    return c;
}

StreamHandle::StreamHandle(std::uint64_t root_seed, std::string label)
    : root_seed_(root_seed), label_(std::move(label)) {
    const auto [a, b] = hash_seed_label(root_seed_, label_);
    key_ = {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
    nonce_ = b;
}

std::uint64_t StreamHandle::next_u64() {
    const std::uint64_t block = counter_ >> 1;
    if (block != cached_block_) {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(nonce_), static_cast<std::uint32_t>(nonce_ >> 32)};
        const auto out = philox4x32(ctr, key_);
        block_ = {std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32),
                  std::uint64_t{out[2]} | (std::uint64_t{out[3]} << 32)};
        cached_block_ = block;
    }
    return block_[counter_++ & 1];
}

double StreamHandle::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double StreamHandle::uniform_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

double StreamHandle::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

StreamHandle StreamHandle::child(std::string_view suffix) const {
    std::string label = label_;
    label += '/';
    label += suffix;
    return StreamHandle(root_seed_, std::move(label));
}

StreamHandle derive_stream(std::uint64_t root_seed, std::string_view label) {
    return StreamHandle(root_seed, std::string(label));
}

GaussianMatrix sample_gaussian_matrix(StreamHandle& stream, std::size_t m, std::size_t n) {
    if (m == 0 || n == 0) {
        throw std::invalid_argument("sample_gaussian_matrix: dimensions must be positive");
    }
    GaussianMatrix a;
    a.rows = m;
    a.cols = n;
    a.entries.resize(m * n);
    for (double& v : a.entries) {
        v = stream.gaussian();
    }
    return a;
}

DitherVector sample_dither(StreamHandle& stream, std::size_t m, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("sample_dither: lambda must be positive and finite");
    }
    if (m == 0) {
        throw std::invalid_argument("sample_dither: m must be positive");
    }
    DitherVector tau;
    tau.lambda = lambda;
    tau.values.resize(m);
    for (double& v : tau.values) {
        v = lambda * (2.0 * stream.uniform() - 1.0);
    }
    return tau;
}

std::vector<double> sample_sphere(StreamHandle& stream, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("sample_sphere: n must be positive");
    }
    std::vector<double> x(n);
    double norm2 = 0.0;
    while (norm2 == 0.0) {
        norm2 = 0.0;
        for (double& v : x) {
            v = stream.gaussian();
            norm2 += v * v;
        }
    }
    // divide rather than multiply by the reciprocal: n = 1 then lands exactly on +-1
    const double norm = std::sqrt(norm2);
    for (double& v : x) {
        v /= norm;
    }
    return x;
}

std::vector<double> sample_ball(StreamHandle& stream, std::size_t n) {
    auto x = sample_sphere(stream, n);
    const double radius = std::pow(stream.uniform(), 1.0 / static_cast<double>(n));
    for (double& v : x) {
        v *= radius;
    }
    return x;
}

}  // namespace htess
