#include "htess/sketch.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>

namespace htess {

namespace {

std::size_t byte_count(std::size_t m) { return (m + 7) / 8; }

void check_same_width(const SketchCode& c1, const SketchCode& c2) {
    if (c1.bits() != c2.bits()) {
        throw std::invalid_argument("sketch codes have different bit counts (" + std::to_string(c1.bits()) + " vs " +
                                    std::to_string(c2.bits()) + ")");
    }
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    template <typename T>
    T get_le(const char* field) {
        require(sizeof(T), field);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> take(std::size_t count, const char* field) {
        require(count, field);
        auto out = data_.subspan(pos_, count);
        pos_ += count;
        return out;
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void require(std::size_t count, const char* field) const {
        if (data_.size() - pos_ < count) {
            throw FormatError(std::string("truncated sketch data while reading ") + field, pos_);
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace

SketchCode::SketchCode(std::size_t m) : m_(m), bytes_(byte_count(m), 0) {}

SketchCode::SketchCode(std::size_t m, std::vector<std::uint8_t> bytes) : m_(m), bytes_(std::move(bytes)) {
    if (bytes_.size() != byte_count(m_)) {
        throw std::invalid_argument("SketchCode: byte count does not match bit count");
    }
    if (m_ % 8 != 0 && !bytes_.empty()) {
        const auto pad_mask = static_cast<std::uint8_t>(0xFFu << (m_ % 8));
        if (bytes_.back() & pad_mask) {
            throw std::invalid_argument("SketchCode: padding bits must be zero");
        }
    }
}

void SketchCode::set(std::size_t j, bool value) {
    const auto mask = static_cast<std::uint8_t>(1u << (j & 7));
    if (value) {
        bytes_[j >> 3] |= mask;
    } else {
        bytes_[j >> 3] &= static_cast<std::uint8_t>(~mask);
    }
}

double distance_scale(double lambda, std::size_t m) {
    return std::sqrt(2.0 * std::numbers::pi) * lambda / static_cast<double>(m);
}

SketchCode encode_projected(std::span<const double> ax, const DitherVector& tau) {
    if (ax.size() != tau.size()) {
        throw std::invalid_argument("encode: projection has " + std::to_string(ax.size()) + " entries, dither has " +
                                    std::to_string(tau.size()));
    }
    const std::size_t m = ax.size();
    std::vector<std::uint8_t> bytes(byte_count(m), 0);
    for (std::size_t j = 0; j < m; ++j) {
        if (ax[j] + tau.values[j] >= 0.0) {
            bytes[j >> 3] |= static_cast<std::uint8_t>(1u << (j & 7));
        }
    }
    return SketchCode(m, std::move(bytes));
}

SketchCode encode(const GaussianMatrix& a, const DitherVector& tau, std::span<const double> x) {
    if (x.size() != a.cols || tau.size() != a.rows) {
        throw std::invalid_argument("encode: dimension mismatch (A is " + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + ", tau has " + std::to_string(tau.size()) +
                                    ", x has " + std::to_string(x.size()) + ")");
    }
    std::vector<double> ax(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            acc += row[j] * x[j];
        }
        ax[i] = acc;
    }
    return encode_projected(ax, tau);
}

std::size_t hamming(const SketchCode& c1, const SketchCode& c2) {
    check_same_width(c1, c2);
    const auto b1 = c1.bytes();
    const auto b2 = c2.bytes();
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 8 <= b1.size(); i += 8) {
        std::uint64_t w1;
        std::uint64_t w2;
        std::memcpy(&w1, b1.data() + i, 8);
        std::memcpy(&w2, b2.data() + i, 8);
        count += static_cast<std::size_t>(std::popcount(w1 ^ w2));
    }
    for (; i < b1.size(); ++i) {
        count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(b1[i] ^ b2[i])));
    }
    return count;
}

DistanceEstimate estimate_distance(const SketchCode& c1, const SketchCode& c2, double lambda, std::size_t m) {
    check_same_width(c1, c2);
    if (c1.bits() != m) {
        throw std::invalid_argument("estimate_distance: codes carry " + std::to_string(c1.bits()) +
                                    " bits, expected m = " + std::to_string(m));
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("estimate_distance: lambda must be positive");
    }
    DistanceEstimate est;
    est.hamming = hamming(c1, c2);
    est.estimate = distance_scale(lambda, m) * static_cast<double>(est.hamming);
    return est;
}

double estimate_inner_product(const SketchCode& c_x, const SketchCode& c_y, const SketchCode& c_neg_y, double lambda,
                              std::size_t m) {
    const double d_plus = estimate_distance(c_x, c_neg_y, lambda, m).estimate;
    const double d_minus = estimate_distance(c_x, c_y, lambda, m).estimate;
    // factored so equal distances give exactly 0 even under FMA contraction
    return (d_plus - d_minus) * (d_plus + d_minus) / 4.0;
}

FormatError::FormatError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

std::vector<std::uint8_t> serialize_sketch_set(const SketchSet& set) {
    const std::size_t width = byte_count(set.header.m);
    std::vector<std::uint8_t> out;
    out.reserve(kSketchHeaderSize + set.codes.size() * width);
    for (std::uint8_t b : {std::uint8_t{'H'}, std::uint8_t{'T'}, std::uint8_t{'S'}, std::uint8_t{'K'}, kSketchFormatVersion}) {
        out.push_back(b);
    }
    put_le(out, set.header.n);
    put_le(out, set.header.m);
    put_le(out, std::bit_cast<std::uint64_t>(set.header.lambda));
    put_le(out, set.header.root_seed);
    put_le(out, static_cast<std::uint32_t>(set.codes.size()));
    for (const auto& code : set.codes) {
        if (code.bits() != set.header.m) {
            throw std::invalid_argument("serialize_sketch_set: code width differs from header m");
        }
        const auto bytes = code.bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

SketchSet deserialize_sketch_set(std::span<const std::uint8_t> data) {
    ByteReader in(data);
    const auto magic = in.take(4, "magic");
    if (!(magic[0] == 'H' && magic[1] == 'T' && magic[2] == 'S' && magic[3] == 'K')) {
        throw FormatError("bad magic, expected \"HTSK\"", 0);
    }
    const auto version = in.get_le<std::uint8_t>("version");
    if (version != kSketchFormatVersion) {
        throw FormatError("unsupported version " + std::to_string(version), 4);
    }
    SketchSet set;
    set.header.n = in.get_le<std::uint32_t>("n");
    set.header.m = in.get_le<std::uint32_t>("m");
    set.header.lambda = std::bit_cast<double>(in.get_le<std::uint64_t>("lambda"));
    set.header.root_seed = in.get_le<std::uint64_t>("root_seed");
    const std::size_t count_offset = in.position();
    const auto count = in.get_le<std::uint32_t>("count");

    const std::size_t width = byte_count(set.header.m);
    if (width != 0 && in.remaining() / width < count) {
        throw FormatError("truncated sketch data: header declares " + std::to_string(count) + " codes", count_offset);
    }
    set.codes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t offset = in.position();
        const auto bytes = in.take(width, "code");
        try {
            set.codes.emplace_back(set.header.m, std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
        } catch (const std::invalid_argument&) {
            throw FormatError("nonzero padding bits in code " + std::to_string(i), offset + width - 1);
        }
    }
    if (in.remaining() != 0) {
        throw FormatError("trailing bytes after last code", in.position());
    }
    return set;
}

void write_sketch_set(const SketchSet& set, std::ostream& sink) {
    const auto bytes = serialize_sketch_set(set);
    sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!sink) {
        throw std::runtime_error("write_sketch_set: stream write failed");
    }
}

SketchSet read_sketch_set(std::istream& source) {
    std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    return deserialize_sketch_set(data);
}

}  // namespace htess
