// Big-endian byte encoding used by every canonical on-chain and on-wire format.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgetrade {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v) {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
    ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
    ByteWriter& raw(ByteView b) {
        out_.insert(out_.end(), b.begin(), b.end());
        return *this;
    }

    const Bytes& bytes() const& { return out_; }
    Bytes take() && { return std::move(out_); }

private:
    ByteWriter& be(std::uint64_t v, int width) {
        for (int i = width - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }

    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
    std::uint64_t u64() { return be(8); }
    ByteView raw(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

    void expect_done() const {
        if (!done()) throw DecodeError("trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw DecodeError("truncated input");
    }
    std::uint64_t be(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v = (v << 8) | in_[pos_++];
        return v;
    }

    ByteView in_;
    std::size_t pos_ = 0;
};

std::string to_hex(ByteView b);

}  // namespace edgetrade
